#include "mellip/volume.hpp"

#include <algorithm>
#include <cmath>

#include "mellip/ellnorm.hpp"
#include "mellip/parallel.hpp"

namespace mellip {

double TilingSpec::parallelepiped_volume() const {
  double v = 1.0;
  for (const Vec& a : axes) v *= 2.0 * a.norm();
  return v;
}

double TilingSpec::tile_volume() const {
  return std::pow(eps, dim()) * parallelepiped_volume();
}

Vec TilingSpec::tile_center(const std::vector<std::int64_t>& z) const {
  const int n = dim();
  Vec t(n);
  for (int i = 0; i < n; ++i) t[i] = (double(z[i]) + 0.5) * side[i];
  return frame * t;
}

TilingSpec inscribed_parallelepiped(const Ellipsoid& E, double eps) {
  const int n = E.dim();
  const Vec& lam = E.eigenvalues();
  if (lam.minCoeff() < 1e-12 * lam.maxCoeff()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "inscribed_parallelepiped: near-singular ellipsoid");
  }
  TilingSpec t;
  t.eps = eps;
  t.root_index.assign(n, 0);
  t.frame = E.eigenvectors();
  t.side = Vec(n);
  const double inv_sqn = 1.0 / std::sqrt(double(n));
  for (int i = 0; i < n; ++i) {
    t.axes.push_back(t.frame.col(i) * (lam[i] * inv_sqn));
    t.side[i] = 2.0 * eps * lam[i] * inv_sqn;
  }
  return t;
}

namespace {

struct IndexBox {
  std::vector<std::int64_t> zmax;  // symmetric: z_i in [-zmax-1, zmax]
  std::int64_t total = 1;
};

IndexBox bounding_box(const Body& K, const TilingSpec& t) {
  const int n = t.dim();
  IndexBox box;
  box.zmax.resize(n);
  for (int i = 0; i < n; ++i) {
    box.zmax[i] = std::int64_t(std::floor(K.outradius() / t.side[i] + 1e-9));
    box.total *= 2 * box.zmax[i] + 2;
  }
  return box;
}

bool in_box(const std::vector<std::int64_t>& z, const IndexBox& box) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] > box.zmax[i] || z[i] < -box.zmax[i] - 1) return false;
  }
  return true;
}

int first_nonzero(const std::vector<std::int64_t>& z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 0) return static_cast<int>(i);
  }
  return static_cast<int>(z.size());
}

// Serial DFS over one subtree of the parent tree, restricted to the box.
// Children of z: +-e_j for j below the first nonzero coordinate, and one step
// away from zero at that coordinate.
TileCountResult dfs_subtree(const Body& K, const TilingSpec& t,
                            const IndexBox& box,
                            const std::vector<std::int64_t>& root,
                            const Config& cfg) {
  struct Frame {
    std::vector<std::int64_t> z;
    int next_child = 0;
  };
  TileCountResult res;
  std::vector<Frame> stack;
  stack.push_back({root, 0});
  ++res.visited;
  bool cons = false;
  if (tile_intersects(K, t, root, cfg, &cons)) {
    ++res.count;
    if (cons) ++res.conservative;
  }
  while (!stack.empty()) {
    Frame& f = stack.back();
    const int j0 = first_nonzero(f.z);
    const int nslots = 2 * j0 + (j0 < int(f.z.size()) ? 1 : 0);
    if (f.next_child >= nslots) {
      stack.pop_back();
      continue;
    }
    const int slot = f.next_child++;
    std::vector<std::int64_t> child = f.z;
    if (slot < 2 * j0) {
      child[slot / 2] += (slot % 2 == 0) ? 1 : -1;
    } else {
      child[j0] += f.z[j0] > 0 ? 1 : -1;
    }
    if (!in_box(child, box)) continue;
    ++res.visited;
    if (res.visited > cfg.tile_budget) {
      throw ToolkitError(ErrorKind::BudgetExceeded,
                         "tile_count: tile budget exceeded");
    }
    cons = false;
    if (tile_intersects(K, t, child, cfg, &cons)) {
      ++res.count;
      if (cons) ++res.conservative;
    }
    stack.push_back({std::move(child), 0});
  }
  return res;
}

}  // namespace

bool tile_intersects(const Body& K, const Vec& offset, const TilingSpec& t,
                     const std::vector<std::int64_t>& z, const Config& cfg,
                     bool* conservative) {
  const int n = t.dim();
  if (conservative) *conservative = false;
  Vec center = t.tile_center(z) - offset;  // in body coordinates
  const double rho = 0.5 * t.side.norm();  // tile half-diagonal
  const double lip = 1.0 / K.inradius();
  const double cut = 1.0 + cfg.tau_tile;

  GaugeBracket br = K.gauge_bracket(center, cut, cut + 2.0 * rho * lip, 1e-8);
  if (br.upper <= cut) return true;               // center already inside
  if (br.lower - rho * lip > cut) return false;   // whole tile certified out

  // box-constrained minimization of the gauge over the tile, in frame coords
  Vec tc(n);
  for (int i = 0; i < n; ++i) tc[i] = (double(z[i]) + 0.5) * t.side[i];
  Vec lo = tc - 0.5 * t.side;
  Vec hi = tc + 0.5 * t.side;
  Vec y = tc;
  double best = br.upper;
  double step = 0.5;
  const int cap = 60 + 40 * n;
  int stall = 0;
  for (int k = 0; k < cap; ++k) {
    Vec g_world = K.gauge_subgrad(t.frame * y - offset);
    Vec g = t.frame.transpose() * g_world;
    double gn = g.norm();
    if (gn <= 1e-14) break;
    Vec ytrial = y - (step * rho / gn) * g;
    for (int i = 0; i < n; ++i) ytrial[i] = std::clamp(ytrial[i], lo[i], hi[i]);
    double v = K.gauge_bracket(t.frame * ytrial - offset, cut,
                               std::numeric_limits<double>::infinity(), 1e-8)
                   .upper;
    if (v < best - 1e-15) {
      best = v;
      y = ytrial;
      step = std::min(step * 1.3, 2.0);
      stall = 0;
    } else {
      step *= 0.5;
      ++stall;
    }
    if (best <= cut) return true;
    if (step < 1e-10) break;
    if (stall > 24) break;
  }
  if (best <= cut) return true;
  // certified exclusion when the achieved minimum clears the tolerance by the
  // remaining step resolution; otherwise keep the tile conservatively
  if (best > cut * (1.0 + 1e-6) || step < 1e-9) return false;
  if (conservative) *conservative = true;
  return true;
}

bool tile_intersects(const Body& K, const TilingSpec& t,
                     const std::vector<std::int64_t>& z, const Config& cfg,
                     bool* conservative) {
  return tile_intersects(K, Vec::Zero(t.dim()), t, z, cfg, conservative);
}

TileCountResult tile_count(const Body& K, const TilingSpec& t,
                           const Config& cfg) {
  const int n = t.dim();
  if (K.dim() != n) {
    throw ToolkitError(ErrorKind::InvalidInput, "tile_count: dimension mismatch");
  }
  IndexBox box = bounding_box(K, t);
  if (box.total > cfg.tile_budget) {
    throw ToolkitError(ErrorKind::BudgetExceeded,
                       "tile_count: bounding box exceeds tile budget");
  }

  // root tile must meet the body (it has the origin as a corner)
  std::vector<std::int64_t> root(n, 0);
  bool cons = false;
  if (!tile_intersects(K, t, root, cfg, &cons)) {
    throw ToolkitError(ErrorKind::Internal, "tile_count: root tile misses body");
  }

  // Subtrees of the root partition the remaining indices by their last
  // nonzero coordinate and its sign; each runs an independent serial DFS.
  struct Job {
    std::vector<std::int64_t> root;
  };
  std::vector<Job> jobs;
  for (int j = 0; j < n; ++j) {
    for (int sgn : {1, -1}) {
      std::vector<std::int64_t> r(n, 0);
      r[j] = sgn;
      if (in_box(r, box)) jobs.push_back({std::move(r)});
    }
  }
  std::vector<TileCountResult> sub(jobs.size());
  parallel_for(std::int64_t(jobs.size()), cfg.workers, [&](std::int64_t i) {
    sub[std::size_t(i)] = dfs_subtree(K, t, box, jobs[std::size_t(i)].root, cfg);
  });

  TileCountResult total;
  total.count = 1;  // root
  total.visited = 1;
  total.conservative = cons ? 1 : 0;
  for (const auto& s : sub) {
    total.count += s.count;
    total.conservative += s.conservative;
    total.visited += s.visited;
  }
  return total;
}

VolumeReport volume_estimate(const BodyPtr& K, double eps, const Config& cfg) {
  const int n = K->dim();
  if (!K->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "volume_estimate: body must be symmetric");
  }
  if (!(eps > 0.0) || eps > 1.0) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "volume_estimate: eps must lie in (0, 1]");
  }
  if (!(cfg.fig_C > 0.0)) {
    throw ToolkitError(ErrorKind::InvalidInput, "volume_estimate: C must be > 0");
  }
  const int T = iteration_count(n);
  const double sqn = std::sqrt(double(n));
  // damping clamped at 1: eps = 1 reduces to the plain iteration radii
  const double damp = std::max(1.0, std::sqrt(std::log(1.0 / eps)));
  const double lewis_eps = default_lewis_eps(n);

  VolumeReport rep;
  rep.eps = eps;
  rep.n = n;
  rep.T = T;

  BodyPtr Ki = K;
  Mat S = Mat::Identity(n, n);
  for (int i = 1; i <= T - 1; ++i) {
    LewisSolution sol = solve_lewis(Ki, lewis_eps, cfg);
    Mat Ainv = sol.A.inverse();
    double li = sol.ell_value;
    double lo = ell_tilde_polar(*Ki, Ainv, cfg).value;
    double a = iter_log(n, i);
    double r_in = eps * sqn / (damp * cfg.fig_C * a * li);
    double r_out = cfg.fig_C * damp * a * lo / (eps * sqn);

    MilmanIteration rec;
    rec.A = sol.A;
    rec.ell_in = li;
    rec.ell_out = lo;
    rec.r_in = r_in;
    rec.r_out = r_out;
    rec.bm_ratio = r_out / r_in;
    rec.body = Ki;
    rec.lewis = sol;
    rep.iters.push_back(std::move(rec));

    BodyPtr Ei = make_ellipsoid(sol.A);
    BodyPtr clipped = make_intersection(
        Ki, apply_linear(Ei, r_out * Mat::Identity(n, n), cfg));
    BodyPtr raw =
        make_hull(clipped, apply_linear(Ei, r_in * Mat::Identity(n, n), cfg));
    Ki = apply_linear(raw, Ainv / r_in, cfg);
    S = S * (r_in * sol.A);
  }

  // After renormalization the ellipsoid E = r_in A_{T-1} B is the unit ball
  // in the working coordinates.
  Ellipsoid E(Mat::Identity(n, n));
  rep.tiling = inscribed_parallelepiped(E, eps);
  rep.final_body = Ki;
  TileCountResult tc = tile_count(*Ki, rep.tiling, cfg);
  rep.tiles = tc.count;
  rep.conservative_tiles = tc.conservative;
  rep.tile_volume = rep.tiling.tile_volume();
  rep.det_transform = std::abs(S.determinant());
  rep.estimate = double(tc.count) * rep.tile_volume * rep.det_transform;
  return rep;
}

}  // namespace mellip
