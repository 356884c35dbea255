#pragma once

#include <string>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/common.hpp"

namespace mellip {

/// Approximately optimal transform for the determinant-maximization program
///   max det(A)^{1/n}  s.t.  A PSD,  ell_tilde_K(A) <= 1,
/// rescaled so the norm constraint is active.
struct LewisSolution {
  Mat A;                 // symmetric positive definite
  double objective = 0;  // det(A)^{1/n}
  double ell_value = 0;  // ell_tilde_K(A) after the final rescale
  double eps_target = 0;
  double residual = 0;   // scale-invariant stationarity measure at exit
  int iterations = 0;
  std::vector<double> objective_history;  // one entry per accepted step
  std::vector<std::pair<std::string, double>> dual_cert;  // (handle, tr(A^-1 T))
};

struct LewisCertificate {
  double max_trace = 0.0;   // max over test matrices of tr(A^{-1} T)
  double threshold = 0.0;   // 2n
  bool pass = false;
  std::vector<std::pair<std::string, double>> entries;
};

/// Solve the program by monotone projected gradient ascent on the
/// scale-invariant objective log det(A)/n - log ell_tilde_K(A), eigenvalue
/// clamping for the PSD cone, warm start A0 = I / ell_tilde_K(I).
LewisSolution solve_lewis(const BodyPtr& K, double eps,
                          const Config& cfg = Config{});

/// Variational optimality check: over a deterministic family of `trials`
/// test matrices T scaled to ell_tilde_K(T) = 1 (identity, rank-one vv^T on a
/// fixed direction net, pseudo-random symmetric matrices from a fixed seed),
/// computes tr(A^{-1} T) and reports the maximum. PASS iff max <= 2n.
LewisCertificate certify_lewis(const BodyPtr& K, const LewisSolution& sol,
                               int trials, const Config& cfg = Config{});

}  // namespace mellip
