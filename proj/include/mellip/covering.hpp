#pragma once

#include <cstdint>

#include "mellip/body.hpp"
#include "mellip/common.hpp"

namespace mellip {

/// Certified two-sided enclosure of a body volume from grid counting.
struct VolumeBracket {
  double lower = 0.0;        // fully-inside cells * h^n
  double upper = 0.0;        // touching cells * h^n
  double h = 0.0;
  std::int64_t cells_counted = 0;  // grid cells examined
};

double unit_ball_volume(int n);

/// Jordan-measure grid count over the circumscribed box: a cell counts toward
/// `lower` when all 2^n corners are inside (convexity then gives cell ⊆ K),
/// toward `upper` when any corner or the center is inside. Deterministic
/// traversal; partial counts merged in slab order.
VolumeBracket grid_volume(const Body& K, double h, const Config& cfg = Config{});

/// Straightforward serial version kept as the reference for kernel tests and
/// benchmarks (recomputes every corner, no layering).
VolumeBracket grid_volume_reference(const Body& K, double h,
                                    const Config& cfg = Config{});

/// Conservative certificate for the two-sided covering product
/// N(K,E)*N(E,K): 9^n vol(K) vol(E) / vol(K∩E)^2 with upper brackets in the
/// numerator and the lower bracket in the denominator. vol(E) is closed-form.
double covering_product_bound(const BodyPtr& K, const Ellipsoid& E, double h,
                              const Config& cfg = Config{});

/// Volume growth check for hulls: with D ⊆ alpha*K (verified on a sampled
/// net) and N_upper an upper bound on N(D,K), tests
///   vol(conv{K,D}) <= 4 alpha n N_upper vol(K)
/// on grid brackets. Test oracle only.
bool hull_volume_bound_check(const BodyPtr& K, const BodyPtr& D, double alpha,
                             double N_upper, double h,
                             const Config& cfg = Config{});

}  // namespace mellip
