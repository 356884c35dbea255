#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mellip/common.hpp"

namespace mellip {

class Body;
using BodyPtr = std::shared_ptr<const Body>;

enum class BodyKind {
  Ball,
  Ellipsoid,
  CubeLinf,
  CrossPolytopeL1,
  LpBall,
  HPolytope,
  Intersection,
  Hull,
  LinearImage,
  DifferenceBody,
};

enum class Membership { Inside, Outside, Boundary };

/// Two-sided enclosure of a gauge value. `upper` is always witnessed by a
/// feasible decomposition, `lower` by a dual vector; for closed-form leaves
/// the two coincide.
struct GaugeBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool converged = true;
};

/// Result of an inf-convolution solve, kept so callers can re-check the
/// minimizing split.
struct SplitResult {
  double value = 0.0;   // best feasible objective
  double lower = 0.0;   // dual certificate
  Vec split;            // minimizing split point
  int iterations = 0;
  bool converged = true;
};

/// Positive-definite matrix A representing the ellipsoid A*B_2^n.
class Ellipsoid {
 public:
  explicit Ellipsoid(Mat A);

  int dim() const { return static_cast<int>(A_.rows()); }
  const Mat& matrix() const { return A_; }
  const Mat& inverse() const { return Ainv_; }
  double det() const { return det_; }
  const Vec& eigenvalues() const { return eigval_; }
  const Mat& eigenvectors() const { return eigvec_; }

  /// ||A^{-1} x||_2
  double gauge(const Vec& x) const;
  /// ||A u||_2
  double support(const Vec& u) const;

 private:
  Mat A_;
  Mat Ainv_;
  Vec eigval_;
  Mat eigvec_;
  double det_ = 0.0;
};

/// A convex body as an evaluable algebraic term: analytic leaves plus the
/// combinators the iteration needs. Bodies are immutable after construction
/// and all evaluations are pure, so they are safe to share across workers.
class Body : public std::enable_shared_from_this<Body> {
 public:
  virtual ~Body() = default;

  BodyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double inradius() const { return r_in_; }    // r_in_ball
  double outradius() const { return r_out_; }  // r_out_ball
  bool symmetric() const { return symmetric_; }

  /// Minkowski functional ||x||_K. Throws on non-finite input.
  double gauge(const Vec& x) const;

  /// Gauge with early exit: iteration stops as soon as the enclosure is
  /// entirely below `lo_cut` or entirely above `hi_cut`. Pass infinities to
  /// force full precision.
  virtual GaugeBracket gauge_bracket(const Vec& x, double lo_cut, double hi_cut,
                                     double rel_tol) const;

  /// Support function h_K(u) = sup { <u,y> : y in K }.
  double support(const Vec& u) const;

  Membership membership(const Vec& x, double tol) const;

  /// A subgradient of the gauge at x (0 at the origin). For combinators this
  /// is derived from the minimizing split of the last solve. `active_tol`
  /// widens the tie window over which polyhedral pieces are averaged; wide
  /// windows give the smoothed subgradients used for stationarity residuals.
  Vec gauge_subgrad(const Vec& x) const { return gauge_subgrad(x, 1e-8); }
  virtual Vec gauge_subgrad(const Vec& x, double active_tol) const = 0;

  /// A maximizer of <u, .> over K (a subgradient of the support at u).
  virtual Vec support_point(const Vec& u) const = 0;

  /// Euclidean projection onto the body / onto its polar, where a closed form
  /// exists (balls, ellipsoids, cubes, cross-polytopes). Used by the split
  /// solver to build steepest-descent directions at subdifferential kinks.
  virtual std::optional<Vec> project_body(const Vec& p) const;
  virtual std::optional<Vec> project_polar(const Vec& p) const;

 protected:
  Body(BodyKind kind, int dim, double r_in, double r_out, bool symmetric);

  virtual double gauge_impl(const Vec& x) const = 0;
  virtual double support_impl(const Vec& u) const = 0;

  BodyKind kind_;
  int dim_;
  double r_in_;
  double r_out_;
  bool symmetric_;

  friend class LinearImageBody;
  friend class DifferenceBodyImpl;
};

// ---- constructors -----------------------------------------------------------

BodyPtr make_ball(int dim, double radius);
BodyPtr make_ellipsoid(Mat A);
BodyPtr make_cube(int dim, double scale);
BodyPtr make_cross_polytope(int dim, double scale);
BodyPtr make_lp_ball(int dim, double p, double scale);
/// K = { x : <a_i, x> <= b_i }, all b_i > 0 (origin interior) and bounded.
BodyPtr make_hpolytope(Mat rows, Vec offsets);
BodyPtr make_intersection(BodyPtr left, BodyPtr right);
BodyPtr make_hull(BodyPtr left, BodyPtr right);

/// M*K for invertible M (condition number below cfg cap). Linear images of
/// balls, ellipsoids and polytopes fold to exact leaves.
BodyPtr apply_linear(const BodyPtr& body, const Mat& M,
                     const Config& cfg = Config{});

/// Symmetrization K - K. Support is exact; the gauge is evaluated by a convex
/// split solve.
BodyPtr difference_body(const BodyPtr& body);

// ---- operations -------------------------------------------------------------

/// Accessors on H-polytope leaves (empty otherwise); used by tests and the
/// vertex-based support oracle.
const std::vector<Vec>* hpolytope_vertices(const Body& body);

struct NormalizeResult {
  Mat transform;   // T with K' = T*K
  BodyPtr body;    // K'
  double ratio;    // measured sandwich ratio of K'
  int rounds;
};

/// Put a symmetric body into approximately round position:
/// B_2^n ⊆ K' ⊆ c_pos*n*B_2^n, by iterated determinant-maximization rounding.
NormalizeResult normalize_position(const BodyPtr& body,
                                   const Config& cfg = Config{});

/// Certified radii refinement: measures gauge/support over a deterministic
/// direction net and applies Lipschitz corrections based on the current valid
/// radii. Never loosens.
std::pair<double, double> measure_radii(const Body& body, int net_extra = 64);

/// Deterministic direction net: +-axes, +-normalized coordinate diagonals,
/// then `extra` pseudo-random unit directions from a fixed seed.
std::vector<Vec> direction_net(int dim, int extra, std::uint64_t seed = 0x9e3779b97f4a7c15ull);

/// Inf-convolution solvers (exposed for tests and certificates).
/// min over y of gaugeL(y) + gaugeR(x - y).
SplitResult hull_gauge_split(const Body& left, const Body& right, const Vec& x,
                             double lo_cut, double hi_cut, double rel_tol);
/// min over v of supportL(v) + supportR(u - v).
SplitResult intersection_support_split(const Body& left, const Body& right,
                                       const Vec& u, double rel_tol);
/// min over y of max(gauge(y), gauge(y - x)) — the gauge of K - K.
SplitResult difference_gauge_split(const Body& inner, const Vec& x,
                                   double lo_cut, double hi_cut, double rel_tol);

}  // namespace mellip
