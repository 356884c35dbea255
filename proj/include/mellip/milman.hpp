#pragma once

#include <optional>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/common.hpp"
#include "mellip/lewis.hpp"

namespace mellip {

/// Iterated logarithm, base 2, clamped below at 2 so the radii stay finite at
/// small n.
double iter_log(int n, int i);

/// Number of outer iterations T: steps of iter_log until the clamp is
/// reached, plus one.
int iteration_count(int n);

struct MilmanIteration {
  Mat A;              // transform from the determinant-maximization solve
  double ell_in = 0;  // ell_tilde_{K_i}(A_i)
  double ell_out = 0; // ell_tilde_{K_i*}(A_i^{-1})
  double r_in = 0;
  double r_out = 0;
  double bm_ratio = 0;
  BodyPtr body;       // K_i the solve ran on (for certificates)
  LewisSolution lewis;
};

struct MilmanTrace {
  int n = 0;
  int T = 0;
  std::vector<MilmanIteration> iters;
  std::optional<Ellipsoid> final_ellipsoid;  // in the input body's coordinates
  BodyPtr final_body;        // K_T in the renormalized working coordinates
  Mat final_transform;       // S: working coordinates -> input coordinates
  double covering_product_bound = std::numeric_limits<double>::quiet_NaN();
};

/// The core iteration: repeatedly compute an approximate transform from the
/// determinant-maximization program, clamp the body between scaled copies of
/// its ellipsoid, renormalize coordinates, and output the last ellipsoid.
/// Pre: K symmetric and in normalized position (callers use
/// normalize_position, or the pipeline below).
///
/// If `partial` is non-null it is filled progressively, so a solver failure
/// still leaves the completed iterations inspectable.
Ellipsoid m_ellipsoid(const BodyPtr& K, const Config& cfg = Config{},
                      double eps = 0.0, MilmanTrace* partial = nullptr);

/// Per-iteration sandwich ratios r_out/r_in; each bounds the Banach-Mazur
/// distance of K_{i+1} to the ball.
std::vector<double> banach_mazur_diag(const MilmanTrace& trace);

struct MilmanPipelineResult {
  Ellipsoid ellipsoid;        // in the user body's coordinates
  Ellipsoid ellipsoid_norm;   // in normalized coordinates
  MilmanTrace trace;
  NormalizeResult normalization;
  BodyPtr body_symmetric;     // after the difference-body entry reduction
  bool symmetrized = false;
};

/// Full entry pipeline: difference-body reduction for asymmetric input, then
/// position normalization, then the iteration; the output ellipsoid is mapped
/// back to the user's coordinates.
MilmanPipelineResult m_ellipsoid_pipeline(const BodyPtr& body,
                                          const Config& cfg = Config{},
                                          double eps = 0.0);

}  // namespace mellip
