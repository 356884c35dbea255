#include "mellip/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "mellip/milman.hpp"
#include "mellip/parallel.hpp"
#include "mellip/volume.hpp"

namespace mellip {

namespace {

bool coeff_less(const std::vector<std::int64_t>& a,
                const std::vector<std::int64_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

LatticeBasis::LatticeBasis(Mat basis) : basis_(std::move(basis)) {
  const int n = static_cast<int>(basis_.rows());
  if (basis_.cols() != n || n < 1 || !basis_.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "lattice: basis must be square");
  }
  gram_ = basis_ * basis_.transpose();
  Eigen::LLT<Mat> llt(gram_);
  if (llt.info() != Eigen::Success) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "lattice: basis rows are linearly dependent");
  }
  chol_ = llt.matrixU();
}

Vec LatticeBasis::point(const std::vector<std::int64_t>& coeffs) const {
  const int n = dim();
  Vec p = Vec::Zero(n);
  for (int i = 0; i < n; ++i) p += double(coeffs[std::size_t(i)]) * basis_.row(i).transpose();
  return p;
}

std::vector<LatticePoint> enum_ellipsoid(const LatticeBasis& L,
                                         const Ellipsoid& E, const Vec& center,
                                         const Config& cfg) {
  const int n = L.dim();
  if (E.dim() != n || center.size() != n || !center.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "enum_ellipsoid: bad inputs");
  }
  // transformed rows: ||A^{-1}(B^T z - c)|| = ||D^T z - c'|| with D = B A^{-1}
  Mat D = L.basis() * E.inverse();
  Vec cp = E.inverse() * center;

  // Gram-Schmidt on the rows of D
  Mat dstar = Mat::Zero(n, n);
  Mat mu = Mat::Zero(n, n);
  Vec norms2(n);
  for (int i = 0; i < n; ++i) {
    Vec v = D.row(i).transpose();
    for (int j = 0; j < i; ++j) {
      mu(i, j) = D.row(i).dot(dstar.row(j)) / norms2[j];
      v -= mu(i, j) * dstar.row(j).transpose();
    }
    dstar.row(i) = v.transpose();
    norms2[i] = v.squaredNorm();
    if (!(norms2[i] > 0.0)) {
      throw ToolkitError(ErrorKind::InvalidInput,
                         "enum_ellipsoid: degenerate transformed basis");
    }
  }
  Vec gamma(n);
  for (int j = 0; j < n; ++j) gamma[j] = cp.dot(dstar.row(j).transpose()) / norms2[j];

  const double r2 = 1.0 + 1e-9;  // squared radius with boundary margin
  std::vector<LatticePoint> out;
  std::vector<std::int64_t> z(static_cast<std::size_t>(n), 0);
  std::int64_t nodes = 0;

  // depth-first interval enumeration from the last coordinate
  std::function<void(int, double)> rec = [&](int level, double partial) {
    if (level < 0) {
      Vec p = L.point(z);
      if (E.gauge(p - center) <= 1.0 + 1e-9) {
        out.push_back({z, std::move(p)});
        if (std::int64_t(out.size()) > cfg.point_budget) {
          throw ToolkitError(ErrorKind::BudgetExceeded,
                             "enum_ellipsoid: point budget exceeded");
        }
      }
      return;
    }
    double width2 = (r2 - partial) / norms2[level];
    if (width2 < 0.0) return;
    double width = std::sqrt(width2);
    double mid = gamma[level];
    for (int k = level + 1; k < n; ++k) mid -= double(z[std::size_t(k)]) * mu(k, level);
    std::int64_t lo = std::int64_t(std::ceil(mid - width - 1e-12));
    std::int64_t hi = std::int64_t(std::floor(mid + width + 1e-12));
    for (std::int64_t c = lo; c <= hi; ++c) {
      if (++nodes > 64 * cfg.point_budget) {
        throw ToolkitError(ErrorKind::BudgetExceeded,
                           "enum_ellipsoid: node budget exceeded");
      }
      z[std::size_t(level)] = c;
      double u = double(c) - mid;
      rec(level - 1, partial + u * u * norms2[level]);
    }
    z[std::size_t(level)] = 0;
  };
  rec(n - 1, 0.0);

  std::sort(out.begin(), out.end(),
            [](const LatticePoint& a, const LatticePoint& b) {
              return coeff_less(a.coeffs, b.coeffs);
            });
  return out;
}

std::vector<LatticePoint> enum_body(const LatticeBasis& L, const BodyPtr& K,
                                    const Ellipsoid& E, const Vec& center,
                                    const Config& cfg) {
  const int n = L.dim();
  if (K->dim() != n || E.dim() != n || center.size() != n) {
    throw ToolkitError(ErrorKind::InvalidInput, "enum_body: bad inputs");
  }
  TilingSpec tiling = inscribed_parallelepiped(E, 1.0);

  // index ranges of tiles meeting the circumscribed box of center + K
  Vec t0 = tiling.frame.transpose() * center;
  const double r = K->outradius();
  std::vector<std::int64_t> zlo(static_cast<std::size_t>(n));
  std::vector<std::int64_t> zhi(static_cast<std::size_t>(n));
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) {
    zlo[std::size_t(i)] = std::int64_t(std::floor((t0[i] - r) / tiling.side[i]));
    zhi[std::size_t(i)] = std::int64_t(std::floor((t0[i] + r) / tiling.side[i]));
    total *= zhi[std::size_t(i)] - zlo[std::size_t(i)] + 1;
    if (total > cfg.tile_budget) {
      throw ToolkitError(ErrorKind::BudgetExceeded,
                         "enum_body: covering budget exceeded");
    }
  }

  // tiles meeting the body, in deterministic index order
  std::vector<std::vector<std::int64_t>> translates;
  std::vector<std::int64_t> z = zlo;
  while (true) {
    if (tile_intersects(*K, center, tiling, z, cfg)) translates.push_back(z);
    int d = 0;
    while (d < n && ++z[std::size_t(d)] > zhi[std::size_t(d)]) {
      z[std::size_t(d)] = zlo[std::size_t(d)];
      ++d;
    }
    if (d == n) break;
  }

  // one covering ellipsoid per tile: P is inscribed in E, so a translate of
  // c_cov*E centered on the tile covers it (c_cov = 1 by construction)
  Mat cov = E.matrix();
  Ellipsoid Ecov(cov);
  std::vector<std::vector<LatticePoint>> per(translates.size());
  parallel_for(std::int64_t(translates.size()), cfg.workers, [&](std::int64_t i) {
    Vec c = tiling.tile_center(translates[std::size_t(i)]);
    per[std::size_t(i)] = enum_ellipsoid(L, Ecov, c, cfg);
  });

  std::vector<LatticePoint> all;
  for (auto& v : per) {
    for (auto& p : v) all.push_back(std::move(p));
    if (std::int64_t(all.size()) > 16 * cfg.point_budget) {
      throw ToolkitError(ErrorKind::BudgetExceeded,
                         "enum_body: point budget exceeded");
    }
  }
  std::sort(all.begin(), all.end(),
            [](const LatticePoint& a, const LatticePoint& b) {
              return coeff_less(a.coeffs, b.coeffs);
            });
  all.erase(std::unique(all.begin(), all.end(),
                        [](const LatticePoint& a, const LatticePoint& b) {
                          return a.coeffs == b.coeffs;
                        }),
            all.end());

  std::vector<LatticePoint> out;
  for (auto& p : all) {
    GaugeBracket br = K->gauge_bracket(p.point - center, 1.0 + cfg.tau_lattice,
                                       1.0 + cfg.tau_lattice, 1e-9);
    if (br.upper <= 1.0 + cfg.tau_lattice) out.push_back(std::move(p));
  }
  return out;
}

namespace {

bool has_nonzero(const std::vector<LatticePoint>& pts) {
  for (const auto& p : pts) {
    for (auto c : p.coeffs) {
      if (c != 0) return true;
    }
  }
  return false;
}

std::vector<LatticePoint> nonzero_points(std::vector<LatticePoint> pts) {
  std::vector<LatticePoint> out;
  for (auto& p : pts) {
    bool zero = true;
    for (auto c : p.coeffs) zero = zero && c == 0;
    if (!zero) out.push_back(std::move(p));
  }
  return out;
}

Ellipsoid scaled(const Ellipsoid& E, double s) { return Ellipsoid(s * E.matrix()); }

SvpResult svp_impl(const LatticeBasis& L, const BodyPtr& K, const Ellipsoid& E,
                   const Config& cfg) {
  const int n = L.dim();
  // Euclidean shortest vector fixes the scale bracket through the sandwich
  double r0 = L.basis().rowwise().norm().minCoeff();
  auto euc = nonzero_points(
      enum_ellipsoid(L, Ellipsoid(r0 * Mat::Identity(n, n)), Vec::Zero(n), cfg));
  double lambda_euc = std::numeric_limits<double>::infinity();
  for (const auto& p : euc) lambda_euc = std::min(lambda_euc, p.point.norm());

  double s_lo = lambda_euc / K->outradius();  // (s_lo/2) K has no nonzero point
  double s = s_lo;
  bool nonempty = has_nonzero(
      enum_body(L, apply_linear(K, s * Mat::Identity(n, n), cfg), scaled(E, s),
                Vec::Zero(n), cfg));
  int guard = 0;
  while (!nonempty) {
    s *= 2.0;
    if (++guard > 80) {
      throw ToolkitError(ErrorKind::Internal, "svp: scale search diverged");
    }
    nonempty = has_nonzero(
        enum_body(L, apply_linear(K, s * Mat::Identity(n, n), cfg),
                  scaled(E, s), Vec::Zero(n), cfg));
  }
  // bisect the scale to 1% before the final enumeration
  double hi = s;
  double lo = s * 0.5;  // empty by the doubling invariant
  if (s == s_lo) lo = s_lo * 0.5;
  while (hi / lo > 1.01) {
    double mid = std::sqrt(hi * lo);
    bool mid_nonempty = has_nonzero(
        enum_body(L, apply_linear(K, mid * Mat::Identity(n, n), cfg),
                  scaled(E, mid), Vec::Zero(n), cfg));
    if (mid_nonempty) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  double s_final = hi * (1.0 + 1e-9);
  auto pts = nonzero_points(
      enum_body(L, apply_linear(K, s_final * Mat::Identity(n, n), cfg),
                scaled(E, s_final), Vec::Zero(n), cfg));
  if (pts.empty()) {
    throw ToolkitError(ErrorKind::Internal, "svp: final enumeration empty");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, K->gauge(p.point));
  const LatticePoint* pick = nullptr;
  for (const auto& p : pts) {
    if (K->gauge(p.point) <= best * (1.0 + 1e-9)) {
      if (!pick || coeff_less(p.coeffs, pick->coeffs)) pick = &p;
    }
  }
  return {*pick, K->gauge(pick->point), s_final};
}

}  // namespace

SvpResult svp(const LatticeBasis& L, const BodyPtr& K, const Ellipsoid* E,
              const Config& cfg) {
  if (!K->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput, "svp: body must be symmetric");
  }
  if (E) return svp_impl(L, K, *E, cfg);
  MilmanPipelineResult pipe = m_ellipsoid_pipeline(K, cfg);
  return svp_impl(L, K, pipe.ellipsoid, cfg);
}

CvpResult cvp(const LatticeBasis& L, const BodyPtr& K, const Vec& x,
              double gamma_cap, const Ellipsoid* E, const Config& cfg) {
  const int n = L.dim();
  if (x.size() != n || !x.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "cvp: bad query point");
  }
  if (!(gamma_cap > 0.0)) {
    throw ToolkitError(ErrorKind::InvalidInput, "cvp: gamma_cap must be > 0");
  }
  std::optional<Ellipsoid> own;
  if (!E) {
    MilmanPipelineResult pipe = m_ellipsoid_pipeline(K, cfg);
    own.emplace(std::move(pipe.ellipsoid));
    E = &*own;
  }
  SvpResult sv = svp_impl(L, K, *E, cfg);

  double d = sv.lambda1 * 0.25;
  for (;;) {
    if (d / sv.lambda1 > gamma_cap * (1.0 + 1e-9)) {
      throw ToolkitError(ErrorKind::GammaCapExceeded,
                         "cvp: required distance ratio exceeds gamma cap",
                         d / sv.lambda1, gamma_cap);
    }
    auto pts = enum_body(L, apply_linear(K, d * Mat::Identity(n, n), cfg),
                         scaled(*E, d), x, cfg);
    if (!pts.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, K->gauge(p.point - x));
      const LatticePoint* pick = nullptr;
      for (const auto& p : pts) {
        if (K->gauge(p.point - x) <= best * (1.0 + 1e-9) + 1e-300) {
          if (!pick || coeff_less(p.coeffs, pick->coeffs)) pick = &p;
        }
      }
      return {*pick, best, d / sv.lambda1};
    }
    d *= 2.0;
  }
}

}  // namespace mellip
