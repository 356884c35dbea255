#include "mellip/covering.hpp"

#include <cmath>
#include <vector>

#include "mellip/parallel.hpp"

namespace mellip {

namespace {

constexpr double kBoundaryTol = 1e-12;  // strict-interior slack at gauge 1

// corner classification: gauge bracket against the unit level set
struct CornerInfo {
  std::uint8_t surely_in = 0;  // upper <= 1 + tol
  float lower = 0.0f;          // certified lower bound on the gauge
};

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

double unit_ball_volume(int n) {
  return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

VolumeBracket grid_volume(const Body& K, double h, const Config& cfg) {
  const int n = K.dim();
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ToolkitError(ErrorKind::InvalidInput, "grid_volume: h must be > 0");
  }
  if (n > 6) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "grid_volume: supported up to dimension 6");
  }
  const std::int64_t M = std::int64_t(std::ceil(K.outradius() / h - 1e-12));
  const std::int64_t cells_per_axis = 2 * M;
  const std::int64_t corners_per_axis = 2 * M + 1;
  const std::int64_t total_cells = ipow(cells_per_axis, n);
  if (total_cells > cfg.cell_budget) {
    throw ToolkitError(ErrorKind::BudgetExceeded,
                       "grid_volume: cell budget exceeded");
  }

  const std::int64_t layer_corners = ipow(corners_per_axis, n - 1);
  const std::int64_t layer_cells = ipow(cells_per_axis, n - 1);
  const double lip = 1.0 / K.inradius();  // gauge Lipschitz constant in l2
  const double center_slack = 0.5 * h * std::sqrt(double(n)) * lip;
  const double r_out = K.outradius();

  // decode a flat corner index of the (n-1)-dim layer into coordinates
  auto corner_coords = [&](std::int64_t flat, double x0, Vec& x) {
    x[0] = x0;
    for (int d = 1; d < n; ++d) {
      x[d] = double(flat % corners_per_axis - M) * h;
      flat /= corners_per_axis;
    }
  };

  auto classify_layer = [&](std::int64_t x0_idx, std::vector<CornerInfo>& out) {
    const double x0 = double(x0_idx - M) * h;
    parallel_for(layer_corners, cfg.workers, [&](std::int64_t flat) {
      Vec x(n);
      corner_coords(flat, x0, x);
      // quick accept/reject from the sandwich radii
      double nx = x.norm();
      CornerInfo info;
      if (nx <= K.inradius() * (1.0 - 1e-9)) {
        info.surely_in = 1;
        info.lower = float(0.0);
      } else if (nx > r_out * (1.0 + 1e-12)) {
        info.surely_in = 0;
        info.lower = float(nx / r_out);
      } else {
        GaugeBracket br = K.gauge_bracket(
            x, 1.0 - kBoundaryTol, 1.0 - kBoundaryTol + 2.0 * center_slack,
            1e-8);
        info.surely_in = br.upper <= 1.0 - kBoundaryTol ? 1 : 0;
        info.lower = float(br.lower);
      }
      out[std::size_t(flat)] = info;
    });
  };

  std::vector<CornerInfo> layer_lo(static_cast<std::size_t>(layer_corners));
  std::vector<CornerInfo> layer_hi(static_cast<std::size_t>(layer_corners));
  classify_layer(0, layer_lo);

  const int corner_count = 1 << (n - 1);
  std::int64_t inside_cells = 0;
  std::int64_t touching_cells = 0;

  std::vector<std::int64_t> slab_inside(static_cast<std::size_t>(layer_cells));
  std::vector<std::int64_t> slab_touch(static_cast<std::size_t>(layer_cells));

  for (std::int64_t z0 = 0; z0 < cells_per_axis; ++z0) {
    classify_layer(z0 + 1, layer_hi);
    const double x0c = (double(z0 - M) + 0.5) * h;
    parallel_for(layer_cells, cfg.workers, [&](std::int64_t cflat) {
      // corner flat indices of this cell within a layer
      bool all_in = true;
      bool any_in = false;
      float min_lower = std::numeric_limits<float>::max();
      for (int mask = 0; mask < corner_count; ++mask) {
        std::int64_t flat = 0;
        std::int64_t stride = 1;
        std::int64_t rem = cflat;
        for (int d = 1; d < n; ++d) {
          std::int64_t zi = rem % cells_per_axis;
          rem /= cells_per_axis;
          std::int64_t ci = zi + ((mask >> (d - 1)) & 1);
          flat += ci * stride;
          stride *= corners_per_axis;
        }
        for (const auto* layer : {&layer_lo, &layer_hi}) {
          const CornerInfo& info = (*layer)[std::size_t(flat)];
          all_in = all_in && info.surely_in;
          any_in = any_in || info.surely_in;
          min_lower = std::min(min_lower, info.lower);
        }
      }
      std::int64_t touch = 0;
      if (any_in) {
        touch = 1;
      } else if (double(min_lower) < 1.0 - kBoundaryTol + 2.0 * center_slack) {
        // corners all classified out but the center may still be inside
        Vec c(n);
        std::int64_t rem = cflat;
        c[0] = x0c;
        for (int d = 1; d < n; ++d) {
          c[d] = (double(rem % cells_per_axis - M) + 0.5) * h;
          rem /= cells_per_axis;
        }
        GaugeBracket br =
            K.gauge_bracket(c, 1.0 - kBoundaryTol, 1.0 - kBoundaryTol, 1e-8);
        if (!(br.lower >= 1.0 - kBoundaryTol)) touch = 1;
      }
      slab_inside[std::size_t(cflat)] = all_in ? 1 : 0;
      slab_touch[std::size_t(cflat)] = touch;
    });
    for (std::int64_t i = 0; i < layer_cells; ++i) {
      inside_cells += slab_inside[std::size_t(i)];
      touching_cells += slab_touch[std::size_t(i)];
    }
    std::swap(layer_lo, layer_hi);
  }

  const double cell_vol = std::pow(h, n);
  VolumeBracket out;
  out.lower = double(inside_cells) * cell_vol;
  out.upper = double(touching_cells) * cell_vol;
  out.h = h;
  out.cells_counted = total_cells;
  return out;
}

VolumeBracket grid_volume_reference(const Body& K, double h, const Config& cfg) {
  const int n = K.dim();
  if (!(h > 0.0)) {
    throw ToolkitError(ErrorKind::InvalidInput, "grid_volume: h must be > 0");
  }
  const std::int64_t M = std::int64_t(std::ceil(K.outradius() / h - 1e-12));
  const std::int64_t cells_per_axis = 2 * M;
  const std::int64_t total_cells = ipow(cells_per_axis, n);
  if (total_cells > cfg.cell_budget) {
    throw ToolkitError(ErrorKind::BudgetExceeded,
                       "grid_volume: cell budget exceeded");
  }
  auto inside = [&](const Vec& x) {
    GaugeBracket br = K.gauge_bracket(x, 1.0 - kBoundaryTol, 1.0 - kBoundaryTol, 1e-8);
    return br.upper <= 1.0 - kBoundaryTol;
  };
  std::int64_t inside_cells = 0, touching_cells = 0;
  Vec x(n), c(n);
  for (std::int64_t cell = 0; cell < total_cells; ++cell) {
    std::int64_t rem = cell;
    for (int d = 0; d < n; ++d) {
      c[d] = (double(rem % cells_per_axis - M) + 0.5) * h;
      rem /= cells_per_axis;
    }
    bool all_in = true, any_in = false;
    for (int mask = 0; mask < (1 << n); ++mask) {
      for (int d = 0; d < n; ++d) {
        x[d] = c[d] + (((mask >> d) & 1) ? 0.5 : -0.5) * h;
      }
      bool in = inside(x);
      all_in = all_in && in;
      any_in = any_in || in;
    }
    if (all_in) ++inside_cells;
    if (any_in || inside(c)) ++touching_cells;
  }
  const double cell_vol = std::pow(h, n);
  return {double(inside_cells) * cell_vol, double(touching_cells) * cell_vol, h,
          total_cells};
}

double covering_product_bound(const BodyPtr& K, const Ellipsoid& E, double h,
                              const Config& cfg) {
  const int n = K->dim();
  if (!K->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "covering_product_bound: body must be symmetric");
  }
  if (E.dim() != n) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "covering_product_bound: dimension mismatch");
  }
  VolumeBracket vk = grid_volume(*K, h, cfg);
  double ve = unit_ball_volume(n) * E.det();
  VolumeBracket vi =
      grid_volume(*make_intersection(K, make_ellipsoid(E.matrix())), h, cfg);
  if (!(vi.lower > 0.0)) {
    throw ToolkitError(ErrorKind::ResolutionFailure,
                       "covering_product_bound: grid too coarse for K∩E");
  }
  return std::pow(9.0, n) * vk.upper * ve / (vi.lower * vi.lower);
}

bool hull_volume_bound_check(const BodyPtr& K, const BodyPtr& D, double alpha,
                             double N_upper, double h, const Config& cfg) {
  const int n = K->dim();
  if (!(alpha >= 1.0)) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "hull_volume_bound_check: need alpha >= 1");
  }
  // verify D ⊆ alpha K on boundary points of D along a sampled net
  for (const Vec& u : direction_net(n, 32)) {
    double gd = D->gauge(u);
    if (!(gd > 0.0)) continue;
    Vec p = u / gd;  // on the boundary of D
    if (K->gauge(p) > alpha * (1.0 + 1e-6)) {
      throw ToolkitError(ErrorKind::InvalidInput,
                         "hull_volume_bound_check: D not contained in alpha*K");
    }
  }
  VolumeBracket hull = grid_volume(*make_hull(K, D), h, cfg);
  VolumeBracket base = grid_volume(*K, h, cfg);
  return hull.lower <= 4.0 * alpha * double(n) * N_upper * base.upper;
}

}  // namespace mellip
