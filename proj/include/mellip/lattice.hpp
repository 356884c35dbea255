#pragma once

#include <cstdint>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/common.hpp"

namespace mellip {

/// Full-rank lattice given by n generator rows, with Gram and orthogonalization
/// caches.
class LatticeBasis {
 public:
  explicit LatticeBasis(Mat basis);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const Mat& gram() const { return gram_; }
  /// Upper-triangular Cholesky factor of the Gram matrix.
  const Mat& orthogonalization() const { return chol_; }

  Vec point(const std::vector<std::int64_t>& coeffs) const;

 private:
  Mat basis_;
  Mat gram_;
  Mat chol_;
};

struct LatticePoint {
  std::vector<std::int64_t> coeffs;
  Vec point;
};

/// Exact set { v in L : ||A^{-1}(v - center)||_2 <= 1 } by branch-and-bound
/// coordinate-interval enumeration on the orthogonalized basis. Output sorted
/// lexicographically by coefficient vector.
std::vector<LatticePoint> enum_ellipsoid(const LatticeBasis& L,
                                         const Ellipsoid& E, const Vec& center,
                                         const Config& cfg = Config{});

/// Exact set (center + K) ∩ L, covering the body by translates of E placed on
/// the parallelepiped tiling of E (one translate per tile meeting the body),
/// enumerating each translate, deduplicating, and filtering by membership.
/// E should be an M-ellipsoid of K for the covering to stay small.
std::vector<LatticePoint> enum_body(const LatticeBasis& L, const BodyPtr& K,
                                    const Ellipsoid& E, const Vec& center,
                                    const Config& cfg = Config{});

struct SvpResult {
  LatticePoint vector;
  double lambda1 = 0.0;
  double scale_searched = 0.0;  // final enumeration scale
};

/// Shortest nonzero lattice vector under the gauge of K (symmetric): doubling
/// then bisection on the scale s, with (s/2)K ∩ L = {0} maintained; ties in
/// the gauge break to the lexicographically smallest coefficient vector.
/// When `E` is null an M-ellipsoid of K is computed internally.
SvpResult svp(const LatticeBasis& L, const BodyPtr& K,
              const Ellipsoid* E = nullptr, const Config& cfg = Config{});

struct CvpResult {
  LatticePoint vector;
  double distance = 0.0;
  double gamma_used = 0.0;
};

/// Closest lattice vector to x under the gauge of K, provided the distance is
/// at most gamma_cap times the shortest-vector length.
CvpResult cvp(const LatticeBasis& L, const BodyPtr& K, const Vec& x,
              double gamma_cap, const Ellipsoid* E = nullptr,
              const Config& cfg = Config{});

}  // namespace mellip
