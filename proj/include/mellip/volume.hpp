#pragma once

#include <cstdint>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/common.hpp"
#include "mellip/milman.hpp"

namespace mellip {

/// Lattice tiling by translates of eps*P, where P is the maximum-volume
/// parallelepiped inscribed in an ellipsoid (principal-component aligned).
/// Tiles are corner-anchored: tile z spans [z_i w_i, (z_i+1) w_i] along axis i
/// in the orthonormal frame, so the root tile z = 0 has the origin as a
/// corner. Ties in the parent rule break by the natural coordinate order.
struct TilingSpec {
  std::vector<Vec> axes;                 // semi-axes of P (mutually orthogonal)
  double eps = 1.0;                      // tile scale
  std::vector<std::int64_t> root_index;  // all zeros
  Mat frame;                             // unit axis directions as columns
  Vec side;                              // tile side lengths: 2*eps*|axes_i|

  int dim() const { return static_cast<int>(axes.size()); }
  /// vol(P) = 2^n prod |axes_i|
  double parallelepiped_volume() const;
  /// vol(eps*P)
  double tile_volume() const;
  Vec tile_center(const std::vector<std::int64_t>& z) const;
};

/// Maximum-volume inscribed parallelepiped of E: semi-axes are the
/// eigenvectors of A scaled by eigenvalue/sqrt(n); all 2^n vertices lie on
/// the boundary of E.
TilingSpec inscribed_parallelepiped(const Ellipsoid& E, double eps = 1.0);

struct TileCountResult {
  std::int64_t count = 0;         // tiles meeting the body
  std::int64_t conservative = 0;  // tiles counted because the test stalled
  std::int64_t visited = 0;       // tiles traversed
};

/// Whether tile z meets K within tau_tile, by box-constrained gauge
/// minimization over the tile (with cheap Lipschitz accept/reject first).
/// Sets *conservative when the solve stalled and the tile was kept.
bool tile_intersects(const Body& K, const TilingSpec& tiling,
                     const std::vector<std::int64_t>& z, const Config& cfg,
                     bool* conservative = nullptr);

/// Same test against the translated region `offset + K`.
bool tile_intersects(const Body& K, const Vec& offset, const TilingSpec& tiling,
                     const std::vector<std::int64_t>& z, const Config& cfg,
                     bool* conservative = nullptr);

/// Count tiles meeting K by reverse-search depth-first traversal of the
/// parent tree over the bounding index box: a tile's parent steps its first
/// nonzero coordinate toward the root, so the traversal needs no visited set
/// and O(n * depth) space. Subtrees hanging off the root are independent and
/// run in parallel; integer counts merge exactly.
TileCountResult tile_count(const Body& K, const TilingSpec& tiling,
                           const Config& cfg = Config{});

struct VolumeReport {
  double estimate = 0.0;  // k * vol(eps P), mapped to the input coordinates
  double eps = 0.0;
  int n = 0;
  int T = 0;
  std::int64_t tiles = 0;
  std::int64_t conservative_tiles = 0;
  double tile_volume = 0.0;     // working coordinates
  double det_transform = 1.0;   // |det S|, working -> input coordinates
  std::vector<MilmanIteration> iters;
  BodyPtr final_body;           // K_T in working coordinates
  TilingSpec tiling;            // working coordinates
};

/// The eps-damped iteration: same loop as m_ellipsoid with radii damped by
/// eps and sqrt(ln(1/eps)) (clamped at 1 so eps = 1 reduces to the plain
/// iteration), then a disjoint-tile count of K_T against eps*P.
/// Pre: K symmetric, normalized; 0 < eps <= 1.
VolumeReport volume_estimate(const BodyPtr& K, double eps,
                             const Config& cfg = Config{});

}  // namespace mellip
