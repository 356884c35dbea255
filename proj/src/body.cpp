#include "mellip/body.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mellip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCombTol = 1e-6;     // default relative tolerance, combinators
constexpr double kActiveTol = 1e-8;   // active-set width for subgradient averaging

struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [-1, 1], reproducible across platforms
  double sym_uniform() {
    return 2.0 * (double(next() >> 11) * 0x1.0p-53) - 1.0;
  }
};

void check_vector(const Vec& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       std::string(what) + ": dimension mismatch");
  }
  if (!x.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       std::string(what) + ": non-finite input");
  }
}

}  // namespace

// ---- Ellipsoid ---------------------------------------------------------------

Ellipsoid::Ellipsoid(Mat A) : A_(std::move(A)) {
  if (A_.rows() != A_.cols() || A_.rows() < 1) {
    throw ToolkitError(ErrorKind::InvalidInput, "ellipsoid: matrix not square");
  }
  if (!A_.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "ellipsoid: non-finite matrix");
  }
  double asym = (A_ - A_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * (1.0 + A_.cwiseAbs().maxCoeff())) {
    throw ToolkitError(ErrorKind::InvalidInput, "ellipsoid: matrix not symmetric");
  }
  A_ = 0.5 * (A_ + A_.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Mat> eig(A_);
  eigval_ = eig.eigenvalues();
  eigvec_ = eig.eigenvectors();
  if (eigval_.minCoeff() <= 0.0) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "ellipsoid: matrix not positive definite");
  }
  Ainv_ = eigvec_ * eigval_.cwiseInverse().asDiagonal() * eigvec_.transpose();
  det_ = eigval_.prod();
}

double Ellipsoid::gauge(const Vec& x) const { return (Ainv_ * x).norm(); }
double Ellipsoid::support(const Vec& u) const { return (A_ * u).norm(); }

// ---- Body base ---------------------------------------------------------------

Body::Body(BodyKind kind, int dim, double r_in, double r_out, bool symmetric)
    : kind_(kind), dim_(dim), r_in_(r_in), r_out_(r_out), symmetric_(symmetric) {
  if (dim < 1) throw ToolkitError(ErrorKind::InvalidInput, "body: dim < 1");
  if (!(r_in > 0.0) || !(r_out >= r_in) || !std::isfinite(r_out)) {
    throw ToolkitError(ErrorKind::InvalidInput, "body: invalid sandwich radii");
  }
}

GaugeBracket Body::gauge_bracket(const Vec& x, double, double, double) const {
  double v = gauge_impl(x);
  return {v, v, true};
}

double Body::gauge(const Vec& x) const {
  check_vector(x, dim_, "gauge");
  if (x.isZero(0.0)) return 0.0;
  GaugeBracket br = gauge_bracket(x, -kInf, kInf, kCombTol);
  if (!br.converged) {
    throw ToolkitError(ErrorKind::SolverFailure, "gauge: split solve stalled",
                       br.lower, br.upper);
  }
  return br.upper;
}

double Body::support(const Vec& u) const {
  check_vector(u, dim_, "support");
  if (u.isZero(0.0)) return 0.0;
  return support_impl(u);
}

std::optional<Vec> Body::project_body(const Vec&) const { return std::nullopt; }
std::optional<Vec> Body::project_polar(const Vec&) const { return std::nullopt; }

Membership Body::membership(const Vec& x, double tol) const {
  if (!(tol > 0.0)) {
    throw ToolkitError(ErrorKind::InvalidInput, "membership: tol must be > 0");
  }
  check_vector(x, dim_, "membership");
  if (x.isZero(0.0)) return Membership::Inside;
  GaugeBracket br =
      gauge_bracket(x, 1.0 - tol, 1.0 + tol, std::min(0.25 * tol, kCombTol));
  if (br.upper <= 1.0 - tol) return Membership::Inside;
  if (br.lower >= 1.0 + tol) return Membership::Outside;
  return Membership::Boundary;
}

// ---- split solver ------------------------------------------------------------

namespace {

// One evaluation of a two-piece convex objective: value, component values
// and subgradients. The descent subgradient and dual candidates derive from
// the components.
struct SplitEval {
  double value = 0.0;
  double fl = 0.0, fr = 0.0;  // component values
  Vec pl, pr;                 // component subgradients
  Vec descent;                // subgradient of the objective in the split var
};

struct SplitOps {
  std::function<SplitEval(const Vec&)> eval;
  // certified lower bound from a dual candidate; must never exceed the optimum
  std::function<double(const Vec&)> dual_value;
  int dual_every = 1;  // cadence of dual evaluations (they may be costly)
  // endpoint candidates (all-left / all-right splits); when one body nests
  // inside the other these give matching primal and dual values immediately
  std::vector<Vec> starts;
  // steepest-descent repair directions at subdifferential kinks (endpoint
  // stalls); evaluated only when the plain subgradient iteration stops
  // improving
  std::function<std::vector<Vec>(const Vec&, const SplitEval&)> stall_dirs;
};

SplitResult solve_split(const SplitOps& ops, Vec y, double scale, int max_iter,
                        double rel_tol, double lo_cut, double hi_cut) {
  SplitResult out;
  SplitEval ev = ops.eval(y);
  Vec y_best = y;
  double ub = ev.value;
  double lb = 0.0;

  auto absorb_duals = [&](const SplitEval& e) {
    if (e.pl.size() > 0) lb = std::max(lb, ops.dual_value(e.pl));
    if (e.pr.size() > 0) lb = std::max(lb, ops.dual_value(e.pr));
    if (e.pl.size() > 0 && e.pr.size() > 0) {
      lb = std::max(lb, ops.dual_value(0.5 * (e.pl + e.pr)));
    }
  };
  absorb_duals(ev);

  auto closed = [&] {
    return ub <= lo_cut || lb >= hi_cut ||
           ub - lb <= rel_tol * std::max(ub, 1e-300);
  };

  for (const Vec& cand : ops.starts) {
    if (closed()) break;
    SplitEval ce = ops.eval(cand);
    if (ce.value < ub) {
      ub = ce.value;
      y_best = cand;
      y = cand;
      ev = ce;
    }
    absorb_duals(ce);
  }

  // One-dimensional minimization along a candidate line (bracketing + golden
  // section); accepts substantive improvements only. base = nullptr searches
  // through the incumbent, otherwise through *base (absolute rays catch conic
  // kinks exactly).
  auto probe_line = [&](const Vec& dir, const Vec* base) {
    double dn = dir.norm();
    if (!(dn > 1e-14 * scale) || !dir.allFinite()) return false;
    Vec d = dir / dn;
    Vec origin = base ? *base : y;
    auto fval = [&](double t) { return ops.eval(origin + t * d).value; };
    // find a descending side, then expand geometrically: the objective is
    // convex along the line, so [0, t_expanded] brackets the minimum
    double step = 0.25 * scale;
    double f0 = ops.eval(origin).value;
    double t1 = 0.0, ft = f0;
    for (int ls = 0; ls < 18 && t1 == 0.0; ++ls) {
      double fp = fval(step);
      if (fp < f0) {
        t1 = step;
        ft = fp;
      } else {
        double fm = fval(-step);
        if (fm < f0) {
          t1 = -step;
          ft = fm;
        } else {
          step *= 0.35;
        }
      }
    }
    if (t1 == 0.0) return false;
    for (int ex = 0; ex < 40; ++ex) {
      double t2 = 2.0 * t1;
      double f2 = fval(t2);
      if (f2 < ft) {
        t1 = t2;
        ft = f2;
      } else {
        break;
      }
    }
    double a = std::min(0.0, 2.0 * t1), b = std::max(0.0, 2.0 * t1);
    const double phi = 0.618033988749894848;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = fval(x1), f2 = fval(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * (scale + std::abs(a)); ++it) {
      if (f1 <= f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - phi * (b - a); f1 = fval(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + phi * (b - a); f2 = fval(x2);
      }
    }
    double tbest = f1 <= f2 ? x1 : x2;
    Vec ytrial = origin + tbest * d;
    SplitEval trial = ops.eval(ytrial);
    if (trial.value < ub - 0.02 * rel_tol * ub - 1e-300) {
      y = ytrial;
      ev = trial;
      ub = trial.value;
      y_best = y;
      absorb_duals(trial);
      return true;
    }
    return false;
  };
  auto probe = [&](const Vec& dir) { return probe_line(dir, nullptr); };

  int since_best = 0;
  int repairs_left = 24;
  bool stationary = false;  // no improving direction after repair probes

  // One stall round: steepest-descent repair directions from the wrapper,
  // then fallback line minimizations along the radial ray, subgradient,
  // sign-corner and axis directions, through the incumbent and the origin.
  auto stall_round = [&]() {
    y = y_best;
    ev = ops.eval(y);
    if (ops.stall_dirs) {
      for (const Vec& d : ops.stall_dirs(y, ev)) {
        if (probe(d)) return true;
      }
    }
    const int n = int(y.size());
    std::vector<Vec> dirs;
    if (y.norm() > 0) dirs.push_back(y);
    if (ev.descent.size() > 0) dirs.push_back(ev.descent);
    if (ev.pl.size() > 0 && ev.pr.size() > 0) {
      Vec s = ev.pl + ev.pr;
      for (int i = 0; i < n; ++i) s[i] = s[i] > 0 ? 1.0 : (s[i] < 0 ? -1.0 : 0.0);
      dirs.push_back(s);
    }
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e[i] = 1.0;
      dirs.push_back(e);
    }
    for (const Vec& d : dirs) {
      if (probe(d)) return true;
    }
    const Vec zero = Vec::Zero(n);
    for (const Vec& d : dirs) {
      if (probe_line(d, &zero)) return true;
    }
    return false;
  };

  const double step_cap = 4.0 * scale;
  for (int k = 0; k < max_iter && !closed(); ++k) {
    double gn = ev.descent.squaredNorm();
    bool moved = false;
    if (gn > 1e-28 * scale * scale) {
      // half-gap Polyak step, clamped for safety
      double target = std::max(lb, ub - 0.5 * (ub - lb));
      target = std::max(target, ub * 0.9);
      double t = (ev.value - target) / gn;
      t = std::clamp(t, 1e-14 * scale / std::sqrt(gn), step_cap / std::sqrt(gn));
      y -= t * ev.descent;
      ev = ops.eval(y);
      ++since_best;
      if (ev.value < ub) {
        // only substantive progress resets the stall counter
        if (ub - ev.value > 0.05 * rel_tol * ub) since_best = 0;
        ub = ev.value;
        y_best = y;
      }
      if (k % ops.dual_every == 0 || since_best == 0) absorb_duals(ev);
      moved = true;
    }
    out.iterations = k + 1;
    bool stalled = !moved || since_best > 30 + 4 * int(y.size());
    if (stalled && !closed()) {
      if (repairs_left <= 0) {
        stationary = true;  // repeated repair rounds exhausted
        break;
      }
      --repairs_left;
      if (!stall_round()) {
        stationary = true;
        break;
      }
      since_best = 0;
    }
  }
  if (!closed() && !stationary) {
    // iteration cap with the bracket still open: consecutive line-probe
    // rounds act as a direction-descent polish, then declare stationarity
    for (int r = 0; r < 8; ++r) {
      if (!stall_round()) break;
    }
    stationary = true;
  }
  out.value = ub;
  out.lower = std::min(lb, ub);
  out.split = y_best;
  // Converged when the two-sided bracket closed, or when the repair probes
  // certified first-order stationarity of the best split: the value is a
  // feasibility-witnessed upper bound either way, and the weaker dual bound
  // stays honestly recorded in `lower`.
  out.converged = (ub <= lo_cut) || (out.lower >= hi_cut) || stationary ||
                  (ub - out.lower <= rel_tol * std::max(ub, 1e-300) * 1.0001);
  return out;
}

int split_iter_cap(int dim) { return 500 * dim; }

}  // namespace

// ---- leaves ------------------------------------------------------------------

namespace {

// Euclidean projection onto the l1 ball of radius r (sort-based threshold).
Vec l1_ball_project(const Vec& p, double r) {
  double l1 = p.cwiseAbs().sum();
  if (l1 <= r) return p;
  std::vector<double> a(std::size_t(p.size()));
  for (int i = 0; i < p.size(); ++i) a[std::size_t(i)] = std::abs(p[i]);
  std::sort(a.begin(), a.end(), std::greater<double>());
  double acc = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += a[k];
    double t = (acc - r) / double(k + 1);
    if (k + 1 == a.size() || t >= a[k + 1]) {
      tau = t;
      break;
    }
  }
  Vec q(p.size());
  for (int i = 0; i < p.size(); ++i) {
    double m = std::abs(p[i]) - tau;
    q[i] = m > 0 ? (p[i] > 0 ? m : -m) : 0.0;
  }
  return q;
}

// Projection onto { q : sum q_i^2 / s_i^2 <= 1 } given in the diagonalizing
// frame; bisection on the Lagrange multiplier.
Vec axis_ellipsoid_project(const Vec& p, const Vec& s) {
  double inside = 0.0;
  for (int i = 0; i < p.size(); ++i) inside += (p[i] / s[i]) * (p[i] / s[i]);
  if (inside <= 1.0) return p;
  auto phi = [&](double mu) {
    double v = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      double d = s[i] * s[i] + mu;
      v += p[i] * p[i] * s[i] * s[i] / (d * d);
    }
    return v;
  };
  double lo = 0.0, hi = 1.0;
  while (phi(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (phi(mid) > 1.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);
  Vec q(p.size());
  for (int i = 0; i < p.size(); ++i) q[i] = p[i] * s[i] * s[i] / (s[i] * s[i] + mu);
  return q;
}

class BallBody final : public Body {
 public:
  BallBody(int dim, double r)
      : Body(BodyKind::Ball, dim, r, r, true), radius_(r) {}

  Vec gauge_subgrad(const Vec& x, double) const override {
    double nx = x.norm();
    if (nx == 0.0) return Vec::Zero(dim_);
    return x / (nx * radius_);
  }
  Vec support_point(const Vec& u) const override {
    double nu = u.norm();
    if (nu == 0.0) return Vec::Zero(dim_);
    return radius_ * u / nu;
  }
  std::optional<Vec> project_body(const Vec& p) const override {
    double np = p.norm();
    return np <= radius_ ? p : Vec(p * (radius_ / np));
  }
  std::optional<Vec> project_polar(const Vec& p) const override {
    double np = p.norm();
    double r = 1.0 / radius_;
    return np <= r ? p : Vec(p * (r / np));
  }
  double radius() const { return radius_; }

 protected:
  double gauge_impl(const Vec& x) const override { return x.norm() / radius_; }
  double support_impl(const Vec& u) const override { return radius_ * u.norm(); }

 private:
  double radius_;
};

class EllipsoidBody final : public Body {
 public:
  explicit EllipsoidBody(Ellipsoid e)
      : Body(BodyKind::Ellipsoid, e.dim(), e.eigenvalues().minCoeff(),
             e.eigenvalues().maxCoeff(), true),
        e_(std::move(e)) {}

  const Ellipsoid& ellipsoid() const { return e_; }

  Vec gauge_subgrad(const Vec& x, double) const override {
    Vec w = e_.inverse() * x;
    double g = w.norm();
    if (g == 0.0) return Vec::Zero(dim_);
    return e_.inverse() * w / g;
  }
  Vec support_point(const Vec& u) const override {
    Vec w = e_.matrix() * u;
    double h = w.norm();
    if (h == 0.0) return Vec::Zero(dim_);
    return e_.matrix() * w / h;
  }
  std::optional<Vec> project_body(const Vec& p) const override {
    const Mat& V = e_.eigenvectors();
    Vec q = axis_ellipsoid_project(V.transpose() * p, e_.eigenvalues());
    return Vec(V * q);
  }
  std::optional<Vec> project_polar(const Vec& p) const override {
    const Mat& V = e_.eigenvectors();
    Vec sinv = e_.eigenvalues().cwiseInverse();
    Vec q = axis_ellipsoid_project(V.transpose() * p, sinv);
    return Vec(V * q);
  }

 protected:
  double gauge_impl(const Vec& x) const override { return e_.gauge(x); }
  double support_impl(const Vec& u) const override { return e_.support(u); }

 private:
  Ellipsoid e_;
};

class CubeBody final : public Body {
 public:
  CubeBody(int dim, double s)
      : Body(BodyKind::CubeLinf, dim, s, s * std::sqrt(double(dim)), true),
        scale_(s) {}

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0) return Vec::Zero(dim_);
    Vec g = Vec::Zero(dim_);
    int active = 0;
    for (int i = 0; i < dim_; ++i) {
      if (std::abs(x[i]) >= m * (1.0 - active_tol)) {
        g[i] = x[i] > 0 ? 1.0 : -1.0;
        ++active;
      }
    }
    return g / (scale_ * active);
  }
  Vec support_point(const Vec& u) const override {
    Vec y(dim_);
    for (int i = 0; i < dim_; ++i) {
      y[i] = u[i] > 0 ? scale_ : (u[i] < 0 ? -scale_ : 0.0);
    }
    return y;
  }
  std::optional<Vec> project_body(const Vec& p) const override {
    Vec q(dim_);
    for (int i = 0; i < dim_; ++i) q[i] = std::clamp(p[i], -scale_, scale_);
    return q;
  }
  std::optional<Vec> project_polar(const Vec& p) const override {
    return l1_ball_project(p, 1.0 / scale_);
  }
  double scale() const { return scale_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    return x.cwiseAbs().maxCoeff() / scale_;
  }
  double support_impl(const Vec& u) const override {
    return scale_ * u.cwiseAbs().sum();
  }

 private:
  double scale_;
};

class CrossBody final : public Body {
 public:
  CrossBody(int dim, double s)
      : Body(BodyKind::CrossPolytopeL1, dim, s / std::sqrt(double(dim)), s,
             true),
        scale_(s) {}

  Vec gauge_subgrad(const Vec& x, double) const override {
    Vec g(dim_);
    for (int i = 0; i < dim_; ++i) {
      g[i] = (x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0)) / scale_;
    }
    return g;
  }
  Vec support_point(const Vec& u) const override {
    double m = u.cwiseAbs().maxCoeff();
    if (m == 0.0) return Vec::Zero(dim_);
    Vec y = Vec::Zero(dim_);
    int active = 0;
    for (int i = 0; i < dim_; ++i) {
      if (std::abs(u[i]) >= m * (1.0 - kActiveTol)) {
        y[i] = u[i] > 0 ? scale_ : -scale_;
        ++active;
      }
    }
    return y / active;
  }
  std::optional<Vec> project_body(const Vec& p) const override {
    return l1_ball_project(p, scale_);
  }
  std::optional<Vec> project_polar(const Vec& p) const override {
    Vec q(dim_);
    double r = 1.0 / scale_;
    for (int i = 0; i < dim_; ++i) q[i] = std::clamp(p[i], -r, r);
    return q;
  }
  double scale() const { return scale_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    return x.cwiseAbs().sum() / scale_;
  }
  double support_impl(const Vec& u) const override {
    return scale_ * u.cwiseAbs().maxCoeff();
  }

 private:
  double scale_;
};

class LpBody final : public Body {
 public:
  LpBody(int dim, double p, double s)
      : Body(BodyKind::LpBall, dim,
             p >= 2.0 ? s : s * std::pow(double(dim), 0.5 - 1.0 / p),
             p >= 2.0 ? s * std::pow(double(dim), 0.5 - 1.0 / p) : s, true),
        p_(p),
        scale_(s) {}

  Vec gauge_subgrad(const Vec& x, double) const override {
    double np = lp_norm(x);
    if (np == 0.0) return Vec::Zero(dim_);
    Vec g(dim_);
    for (int i = 0; i < dim_; ++i) {
      double t = std::abs(x[i]) / np;
      g[i] = (x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0)) *
             std::pow(t, p_ - 1.0) / scale_;
    }
    return g;
  }
  Vec support_point(const Vec& u) const override {
    if (p_ <= 1.0 + 1e-12) {  // q = inf: cross-polytope face
      double m = u.cwiseAbs().maxCoeff();
      if (m == 0.0) return Vec::Zero(dim_);
      Vec y = Vec::Zero(dim_);
      int active = 0;
      for (int i = 0; i < dim_; ++i) {
        if (std::abs(u[i]) >= m * (1.0 - kActiveTol)) {
          y[i] = u[i] > 0 ? scale_ : -scale_;
          ++active;
        }
      }
      return y / active;
    }
    double q = p_ / (p_ - 1.0);
    double nq = lq_norm(u, q);
    if (nq == 0.0) return Vec::Zero(dim_);
    Vec y(dim_);
    for (int i = 0; i < dim_; ++i) {
      double t = std::abs(u[i]) / nq;
      y[i] = (u[i] > 0 ? 1.0 : (u[i] < 0 ? -1.0 : 0.0)) * scale_ *
             std::pow(t, q - 1.0);
    }
    return y;
  }
  double p() const { return p_; }
  double scale() const { return scale_; }

 protected:
  double gauge_impl(const Vec& x) const override { return lp_norm(x) / scale_; }
  double support_impl(const Vec& u) const override {
    if (p_ <= 1.0 + 1e-12) return scale_ * u.cwiseAbs().maxCoeff();
    return scale_ * lq_norm(u, p_ / (p_ - 1.0));
  }

 private:
  double lp_norm(const Vec& x) const { return lq_norm(x, p_); }
  static double lq_norm(const Vec& x, double q) {
    double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      acc += std::pow(std::abs(x[i]) / m, q);
    }
    return m * std::pow(acc, 1.0 / q);
  }
  double p_;
  double scale_;
};

// combinations in lexicographic order
bool next_combination(std::vector<int>& idx, int m) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < m - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double binomial_guard(int m, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * double(m - i) / double(i + 1);
  return c;
}

std::vector<Vec> enumerate_basic_solutions(const Mat& A, const Vec& b,
                                           double feas_tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (m < n) return {};
  if (binomial_guard(m, n) > 5e6) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "hpolytope: too many facet subsets at this scale");
  }
  std::vector<Vec> verts;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Mat S(n, n);
  Vec rhs(n);
  do {
    for (int i = 0; i < n; ++i) {
      S.row(i) = A.row(idx[i]);
      rhs[i] = b[idx[i]];
    }
    Eigen::FullPivLU<Mat> lu(S);
    if (!lu.isInvertible()) continue;
    Vec v = lu.solve(rhs);
    if (!v.allFinite()) continue;
    bool feasible = true;
    for (int i = 0; i < m && feasible; ++i) {
      if (A.row(i).dot(v) > b[i] + feas_tol) feasible = false;
    }
    if (!feasible) continue;
    bool dup = false;
    for (const Vec& w : verts) {
      if ((w - v).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + v.cwiseAbs().maxCoeff())) {
        dup = true;
        break;
      }
    }
    if (!dup) verts.push_back(std::move(v));
  } while (next_combination(idx, m));
  return verts;
}

class PolytopeBody final : public Body {
 public:
  PolytopeBody(Mat rows, Vec b, std::vector<Vec> verts, double r_in,
               double r_out, bool symmetric)
      : Body(BodyKind::HPolytope, static_cast<int>(rows.cols()), r_in, r_out,
             symmetric),
        A_(std::move(rows)),
        b_(std::move(b)),
        verts_(std::move(verts)) {}

  const std::vector<Vec>& vertices() const { return verts_; }
  const Mat& rows() const { return A_; }
  const Vec& offsets() const { return b_; }

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    Vec r = A_ * x;
    double best = -kInf;
    for (int i = 0; i < r.size(); ++i) best = std::max(best, r[i] / b_[i]);
    if (best <= 0.0) return Vec::Zero(dim_);
    Vec g = Vec::Zero(dim_);
    int active = 0;
    for (int i = 0; i < r.size(); ++i) {
      if (r[i] / b_[i] >= best * (1.0 - active_tol)) {
        g += A_.row(i).transpose() / b_[i];
        ++active;
      }
    }
    return g / active;
  }
  Vec support_point(const Vec& u) const override {
    double best = -kInf;
    for (const Vec& v : verts_) best = std::max(best, u.dot(v));
    Vec y = Vec::Zero(dim_);
    int active = 0;
    for (const Vec& v : verts_) {
      if (u.dot(v) >= best - kActiveTol * (1.0 + std::abs(best))) {
        y += v;
        ++active;
      }
    }
    return y / active;
  }

 protected:
  double gauge_impl(const Vec& x) const override {
    double best = 0.0;
    Vec r = A_ * x;
    for (int i = 0; i < r.size(); ++i) best = std::max(best, r[i] / b_[i]);
    return best;
  }
  double support_impl(const Vec& u) const override {
    double best = -kInf;
    for (const Vec& v : verts_) best = std::max(best, u.dot(v));
    return best;
  }

 private:
  Mat A_;
  Vec b_;
  std::vector<Vec> verts_;
};

// ---- combinators ---------------------------------------------------------

class IntersectionBody final : public Body {
 public:
  IntersectionBody(BodyPtr l, BodyPtr r)
      : Body(BodyKind::Intersection, l->dim(),
             std::min(l->inradius(), r->inradius()),
             std::min(l->outradius(), r->outradius()),
             l->symmetric() && r->symmetric()),
        l_(std::move(l)),
        r_(std::move(r)) {}

  GaugeBracket gauge_bracket(const Vec& x, double lo_cut, double hi_cut,
                             double rel_tol) const override {
    // gauge of an intersection is the exact max of the inner gauges
    GaugeBracket a = l_->gauge_bracket(x, lo_cut, hi_cut, rel_tol);
    if (a.lower >= hi_cut) return a;
    GaugeBracket b = r_->gauge_bracket(x, std::max(lo_cut, a.lower), hi_cut, rel_tol);
    GaugeBracket out;
    out.lower = std::max(a.lower, b.lower);
    out.upper = std::max(a.upper, b.upper);
    out.converged = a.converged && b.converged;
    return out;
  }

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    double ga = l_->gauge_bracket(x, -kInf, kInf, kCombTol).upper;
    double gb = r_->gauge_bracket(x, -kInf, kInf, kCombTol).upper;
    double m = std::max(ga, gb);
    if (m == 0.0) return Vec::Zero(dim_);
    bool la = ga >= m * (1.0 - active_tol);
    bool lb = gb >= m * (1.0 - active_tol);
    if (la && lb) {
      return 0.5 * (l_->gauge_subgrad(x, active_tol) +
                    r_->gauge_subgrad(x, active_tol));
    }
    return la ? l_->gauge_subgrad(x, active_tol)
              : r_->gauge_subgrad(x, active_tol);
  }
  Vec support_point(const Vec& u) const override {
    SplitResult s = intersection_support_split(*l_, *r_, u, kCombTol);
    Vec ya = l_->support_point(s.split);
    Vec yb = r_->support_point(u - s.split);
    Vec y = 0.5 * (ya + yb);
    double g = std::max(l_->gauge_bracket(y, -kInf, kInf, kCombTol).upper,
                        r_->gauge_bracket(y, -kInf, kInf, kCombTol).upper);
    if (g > 1.0) y /= g;
    return y;
  }

  const BodyPtr& left() const { return l_; }
  const BodyPtr& right() const { return r_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    return std::max(l_->gauge(x), r_->gauge(x));
  }
  double support_impl(const Vec& u) const override {
    SplitResult s = intersection_support_split(*l_, *r_, u, kCombTol);
    if (!s.converged) {
      throw ToolkitError(ErrorKind::SolverFailure,
                         "intersection support: split solve stalled", s.lower,
                         s.value);
    }
    return s.value;
  }

 private:
  BodyPtr l_, r_;
};

class HullBody final : public Body {
 public:
  HullBody(BodyPtr l, BodyPtr r)
      : Body(BodyKind::Hull, l->dim(), std::max(l->inradius(), r->inradius()),
             std::max(l->outradius(), r->outradius()),
             l->symmetric() && r->symmetric()),
        l_(std::move(l)),
        r_(std::move(r)) {}

  GaugeBracket gauge_bracket(const Vec& x, double lo_cut, double hi_cut,
                             double rel_tol) const override {
    if (x.isZero(0.0)) return {0.0, 0.0, true};
    SplitResult s = hull_gauge_split(*l_, *r_, x, lo_cut, hi_cut, rel_tol);
    return {s.lower, s.value, s.converged};
  }

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    SplitResult s = hull_gauge_split(*l_, *r_, x, -kInf, kInf, kCombTol);
    Vec p = 0.5 * (l_->gauge_subgrad(s.split, active_tol) +
                   r_->gauge_subgrad(x - s.split, active_tol));
    // rescale so the pairing <p,x> matches the gauge value; at endpoint
    // optima one side's subgradient vanishes and the average alone is short
    double px = p.dot(x);
    if (px > 0.0 && s.value > 0.0) p *= s.value / px;
    return p;
  }
  Vec support_point(const Vec& u) const override {
    double ha = l_->support(u);
    double hb = r_->support(u);
    return ha >= hb ? l_->support_point(u) : r_->support_point(u);
  }

  const BodyPtr& left() const { return l_; }
  const BodyPtr& right() const { return r_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    SplitResult s = hull_gauge_split(*l_, *r_, x, -kInf, kInf, kCombTol);
    if (!s.converged) {
      throw ToolkitError(ErrorKind::SolverFailure,
                         "hull gauge: split solve stalled", s.lower, s.value);
    }
    return s.value;
  }
  double support_impl(const Vec& u) const override {
    return std::max(l_->support(u), r_->support(u));
  }

 private:
  BodyPtr l_, r_;
};

class LinearImageBody final : public Body {
 public:
  LinearImageBody(BodyPtr inner, Mat M, Mat Minv, double smin, double smax)
      : Body(BodyKind::LinearImage, inner->dim(), smin * inner->inradius(),
             smax * inner->outradius(), inner->symmetric()),
        inner_(std::move(inner)),
        M_(std::move(M)),
        Minv_(std::move(Minv)) {}

  GaugeBracket gauge_bracket(const Vec& x, double lo_cut, double hi_cut,
                             double rel_tol) const override {
    return inner_->gauge_bracket(Minv_ * x, lo_cut, hi_cut, rel_tol);
  }

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    return Minv_.transpose() * inner_->gauge_subgrad(Minv_ * x, active_tol);
  }
  Vec support_point(const Vec& u) const override {
    return M_ * inner_->support_point(M_.transpose() * u);
  }

  const BodyPtr& inner() const { return inner_; }
  const Mat& map() const { return M_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    return inner_->gauge(Minv_ * x);
  }
  double support_impl(const Vec& u) const override {
    return inner_->support(M_.transpose() * u);
  }

 private:
  BodyPtr inner_;
  Mat M_, Minv_;
};

class DifferenceBodyImpl final : public Body {
 public:
  explicit DifferenceBodyImpl(BodyPtr inner)
      : Body(BodyKind::DifferenceBody, inner->dim(), 2.0 * inner->inradius(),
             2.0 * inner->outradius(), true),
        inner_(std::move(inner)) {}

  GaugeBracket gauge_bracket(const Vec& x, double lo_cut, double hi_cut,
                             double rel_tol) const override {
    if (x.isZero(0.0)) return {0.0, 0.0, true};
    SplitResult s = difference_gauge_split(*inner_, x, lo_cut, hi_cut, rel_tol);
    return {s.lower, s.value, s.converged};
  }

  Vec gauge_subgrad(const Vec& x, double active_tol) const override {
    SplitResult s = difference_gauge_split(*inner_, x, -kInf, kInf, kCombTol);
    Vec u1 = inner_->gauge_subgrad(s.split, active_tol);
    Vec u2 = inner_->gauge_subgrad(s.split - x, active_tol);
    Vec p = 0.5 * (u1 - u2);
    double h = inner_->support(p) + inner_->support(-p);
    if (h > 0.0) p /= h;
    return p;
  }
  Vec support_point(const Vec& u) const override {
    return inner_->support_point(u) - inner_->support_point(-u);
  }

  const BodyPtr& inner() const { return inner_; }

 protected:
  double gauge_impl(const Vec& x) const override {
    SplitResult s = difference_gauge_split(*inner_, x, -kInf, kInf, kCombTol);
    if (!s.converged) {
      throw ToolkitError(ErrorKind::SolverFailure,
                         "difference gauge: split solve stalled", s.lower,
                         s.value);
    }
    return s.value;
  }
  double support_impl(const Vec& u) const override {
    return inner_->support(u) + inner_->support(-u);
  }

 private:
  BodyPtr inner_;
};

bool is_closed_form(const Body& b) {
  switch (b.kind()) {
    case BodyKind::Ball:
    case BodyKind::Ellipsoid:
    case BodyKind::CubeLinf:
    case BodyKind::CrossPolytopeL1:
    case BodyKind::LpBall:
    case BodyKind::HPolytope:
      return true;
    default:
      return false;
  }
}

}  // namespace

// ---- split solve wrappers ------------------------------------------------

SplitResult hull_gauge_split(const Body& left, const Body& right, const Vec& x,
                             double lo_cut, double hi_cut, double rel_tol) {
  const int n = left.dim();
  SplitOps ops;
  ops.eval = [&](const Vec& y) {
    SplitEval ev;
    Vec xr = x - y;
    ev.fl = left.gauge_bracket(y, -kInf, kInf, rel_tol).upper;
    ev.fr = right.gauge_bracket(xr, -kInf, kInf, rel_tol).upper;
    ev.value = ev.fl + ev.fr;
    ev.pl = left.gauge_subgrad(y);
    ev.pr = right.gauge_subgrad(xr);
    ev.descent = ev.pl - ev.pr;
    return ev;
  };
  ops.dual_value = [&](const Vec& p) {
    double denom = std::max(left.support(p), right.support(p));
    if (!(denom > 0.0)) return 0.0;
    return std::max(0.0, x.dot(p) / denom);
  };
  ops.dual_every = (is_closed_form(left) && is_closed_form(right)) ? 1 : 6;
  ops.starts = {x, Vec(Vec::Zero(n))};  // all-left and all-right splits
  ops.stall_dirs = [&](const Vec& y, const SplitEval& ev) {
    std::vector<Vec> dirs;
    // min-norm subgradient at an endpoint: project the active side's
    // gradient onto the idle side's subdifferential at zero (its polar body)
    if (ev.fl <= 1e-12 * std::max(1.0, ev.value)) {
      if (auto q = left.project_polar(ev.pr)) dirs.push_back(ev.pr - *q);
    }
    if (ev.fr <= 1e-12 * std::max(1.0, ev.value)) {
      if (auto q = right.project_polar(ev.pl)) dirs.push_back(*q - ev.pl);
    }
    (void)y;
    return dirs;
  };
  // proportional split warm start
  double rl = left.outradius(), rr = right.outradius();
  Vec y0 = x * (rl / (rl + rr));
  return solve_split(ops, y0, x.norm(), split_iter_cap(n), rel_tol, lo_cut,
                     hi_cut);
}

SplitResult intersection_support_split(const Body& left, const Body& right,
                                       const Vec& u, double rel_tol) {
  const int n = left.dim();
  SplitOps ops;
  ops.eval = [&](const Vec& v) {
    SplitEval ev;
    Vec ur = u - v;
    ev.fl = left.support(v);
    ev.fr = right.support(ur);
    ev.value = ev.fl + ev.fr;
    ev.pl = left.support_point(v);
    ev.pr = right.support_point(ur);
    ev.descent = ev.pl - ev.pr;
    return ev;
  };
  ops.dual_value = [&](const Vec& y) {
    double g = std::max(left.gauge_bracket(y, -kInf, kInf, rel_tol).upper,
                        right.gauge_bracket(y, -kInf, kInf, rel_tol).upper);
    if (!(g > 0.0)) return 0.0;
    return std::max(0.0, u.dot(y) / g);
  };
  ops.dual_every = (is_closed_form(left) && is_closed_form(right)) ? 1 : 6;
  ops.starts = {u, Vec(Vec::Zero(n))};  // all-left and all-right splits
  ops.stall_dirs = [&](const Vec& v, const SplitEval& ev) {
    std::vector<Vec> dirs;
    // the subdifferential of a support function at zero is the body itself
    if (ev.fl <= 1e-12 * std::max(1.0, ev.value)) {
      if (auto q = left.project_body(ev.pr)) dirs.push_back(ev.pr - *q);
    }
    if (ev.fr <= 1e-12 * std::max(1.0, ev.value)) {
      if (auto q = right.project_body(ev.pl)) dirs.push_back(*q - ev.pl);
    }
    (void)v;
    return dirs;
  };
  double rl = left.outradius(), rr = right.outradius();
  Vec v0 = u * (rr / (rl + rr));  // smaller support share to the bigger body
  return solve_split(ops, v0, u.norm(), split_iter_cap(n), rel_tol, -kInf,
                     kInf);
}

SplitResult difference_gauge_split(const Body& inner, const Vec& x,
                                   double lo_cut, double hi_cut,
                                   double rel_tol) {
  const int n = inner.dim();
  SplitOps ops;
  ops.eval = [&](const Vec& y) {
    SplitEval ev;
    Vec yr = y - x;
    ev.fl = inner.gauge_bracket(y, -kInf, kInf, rel_tol).upper;
    ev.fr = inner.gauge_bracket(yr, -kInf, kInf, rel_tol).upper;
    ev.value = std::max(ev.fl, ev.fr);
    Vec u1 = inner.gauge_subgrad(y);
    Vec u2 = inner.gauge_subgrad(yr);
    if (ev.fl >= ev.fr * (1.0 + kActiveTol)) {
      ev.descent = u1;
    } else if (ev.fr >= ev.fl * (1.0 + kActiveTol)) {
      ev.descent = u2;
    } else {
      ev.descent = 0.5 * (u1 + u2);
    }
    // dual candidate for the K-K gauge pairs the two branch gradients
    ev.pl = 0.5 * (u1 - u2);
    ev.pr = ev.pl;
    return ev;
  };
  ops.dual_value = [&](const Vec& p) {
    double denom = inner.support(p) + inner.support(-p);
    if (!(denom > 0.0)) return 0.0;
    return std::max(0.0, x.dot(p) / denom);
  };
  ops.dual_every = is_closed_form(inner) ? 1 : 6;
  ops.starts = {x, Vec(Vec::Zero(n))};
  Vec y0 = 0.5 * x;
  return solve_split(ops, y0, x.norm(), split_iter_cap(n), rel_tol, lo_cut,
                     hi_cut);
}

// ---- constructors ----------------------------------------------------------

BodyPtr make_ball(int dim, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ToolkitError(ErrorKind::InvalidInput, "ball: radius must be > 0");
  }
  return std::make_shared<BallBody>(dim, radius);
}

BodyPtr make_ellipsoid(Mat A) {
  return std::make_shared<EllipsoidBody>(Ellipsoid(std::move(A)));
}

BodyPtr make_cube(int dim, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ToolkitError(ErrorKind::InvalidInput, "cube: scale must be > 0");
  }
  return std::make_shared<CubeBody>(dim, scale);
}

BodyPtr make_cross_polytope(int dim, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ToolkitError(ErrorKind::InvalidInput, "cross: scale must be > 0");
  }
  return std::make_shared<CrossBody>(dim, scale);
}

BodyPtr make_lp_ball(int dim, double p, double scale) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw ToolkitError(ErrorKind::InvalidInput, "lpball: need p >= 1");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ToolkitError(ErrorKind::InvalidInput, "lpball: scale must be > 0");
  }
  return std::make_shared<LpBody>(dim, p, scale);
}

BodyPtr make_hpolytope(Mat rows, Vec offsets) {
  const int m = static_cast<int>(rows.rows());
  const int n = static_cast<int>(rows.cols());
  if (m < n + 1) {
    throw ToolkitError(ErrorKind::InvalidInput, "hpolytope: too few facets");
  }
  if (offsets.size() != m || !rows.allFinite() || !offsets.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "hpolytope: malformed input");
  }
  double r_in = kInf;
  for (int i = 0; i < m; ++i) {
    double an = rows.row(i).norm();
    if (!(an > 0.0)) {
      throw ToolkitError(ErrorKind::InvalidInput, "hpolytope: zero facet normal");
    }
    if (!(offsets[i] > 0.0)) {
      throw ToolkitError(ErrorKind::InvalidInput,
                         "hpolytope: offsets must be > 0 (origin interior)");
    }
    r_in = std::min(r_in, offsets[i] / an);
  }

  // boundedness: the recession cone {Ad <= 0} clipped to the unit box must be
  // the origin alone
  Mat Arec(m + 2 * n, n);
  Vec brec(m + 2 * n);
  Arec.topRows(m) = rows;
  brec.head(m).setZero();
  Arec.middleRows(m, n) = Mat::Identity(n, n);
  Arec.bottomRows(n) = -Mat::Identity(n, n);
  brec.tail(2 * n).setOnes();
  for (const Vec& d : enumerate_basic_solutions(Arec, brec, 1e-9)) {
    if (d.cwiseAbs().maxCoeff() > 1e-7) {
      throw ToolkitError(ErrorKind::InvalidInput, "hpolytope: unbounded");
    }
  }

  double scale = 0.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, offsets[i] / rows.row(i).norm());
  std::vector<Vec> verts = enumerate_basic_solutions(rows, offsets, 1e-9 * scale);
  if (verts.empty()) {
    throw ToolkitError(ErrorKind::InvalidInput, "hpolytope: no vertices found");
  }
  double r_out = 0.0;
  for (const Vec& v : verts) r_out = std::max(r_out, v.norm());

  // symmetric iff the facet list is closed under negation
  bool symmetric = true;
  for (int i = 0; i < m && symmetric; ++i) {
    bool matched = false;
    for (int j = 0; j < m && !matched; ++j) {
      double s = (rows.row(i) + rows.row(j)).cwiseAbs().maxCoeff();
      if (s <= 1e-9 * (1.0 + rows.row(i).cwiseAbs().maxCoeff()) &&
          std::abs(offsets[i] - offsets[j]) <= 1e-9 * (1.0 + offsets[i])) {
        matched = true;
      }
    }
    symmetric = matched;
  }
  return std::make_shared<PolytopeBody>(std::move(rows), std::move(offsets),
                                        std::move(verts), r_in, r_out,
                                        symmetric);
}

BodyPtr make_intersection(BodyPtr left, BodyPtr right) {
  if (left->dim() != right->dim()) {
    throw ToolkitError(ErrorKind::InvalidInput, "intersection: dim mismatch");
  }
  return std::make_shared<IntersectionBody>(std::move(left), std::move(right));
}

BodyPtr make_hull(BodyPtr left, BodyPtr right) {
  if (left->dim() != right->dim()) {
    throw ToolkitError(ErrorKind::InvalidInput, "hull: dim mismatch");
  }
  return std::make_shared<HullBody>(std::move(left), std::move(right));
}

const std::vector<Vec>* hpolytope_vertices(const Body& body) {
  if (body.kind() != BodyKind::HPolytope) return nullptr;
  return &static_cast<const PolytopeBody&>(body).vertices();
}

namespace {

bool is_scalar_multiple_of_identity(const Mat& M, double* c) {
  const int n = static_cast<int>(M.rows());
  double diag = M(0, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double want = (i == j) ? diag : 0.0;
      if (std::abs(M(i, j) - want) > 1e-14 * (1.0 + std::abs(diag))) return false;
    }
  }
  *c = diag;
  return c != nullptr && diag > 0.0;
}

}  // namespace

BodyPtr apply_linear(const BodyPtr& body, const Mat& M, const Config& cfg) {
  const int n = body->dim();
  if (M.rows() != n || M.cols() != n || !M.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "apply_linear: bad matrix");
  }
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > cfg.cond_cap) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "apply_linear: matrix singular or too ill-conditioned");
  }

  // exact folds keep sandwich radii tight through the iteration
  double c = 0.0;
  if (is_scalar_multiple_of_identity(M, &c)) {
    switch (body->kind()) {
      case BodyKind::Ball:
        return make_ball(n, c * static_cast<const BallBody&>(*body).radius());
      case BodyKind::CubeLinf:
        return make_cube(n, c * static_cast<const CubeBody&>(*body).scale());
      case BodyKind::CrossPolytopeL1:
        return make_cross_polytope(
            n, c * static_cast<const CrossBody&>(*body).scale());
      case BodyKind::LpBall: {
        const auto& lp = static_cast<const LpBody&>(*body);
        return make_lp_ball(n, lp.p(), c * lp.scale());
      }
      default:
        break;
    }
  }
  switch (body->kind()) {  // breaks fall through to the generic wrapper
    case BodyKind::Ball: {
      double r = static_cast<const BallBody&>(*body).radius();
      return make_ellipsoid(r * psd_factor(M));
    }
    case BodyKind::Ellipsoid: {
      const auto& e = static_cast<const EllipsoidBody&>(*body).ellipsoid();
      return make_ellipsoid(psd_factor(M * e.matrix()));
    }
    case BodyKind::HPolytope: {
      const auto& p = static_cast<const PolytopeBody&>(*body);
      Mat Minv = svd.matrixV() *
                 svd.singularValues().cwiseInverse().asDiagonal() *
                 svd.matrixU().transpose();
      return make_hpolytope(p.rows() * Minv, p.offsets());
    }
    case BodyKind::CubeLinf: {
      // fold to the facet representation so radii and supports stay exact
      double sc = static_cast<const CubeBody&>(*body).scale();
      Mat rows(2 * n, n);
      rows.topRows(n) = Mat::Identity(n, n);
      rows.bottomRows(n) = -Mat::Identity(n, n);
      Mat Minv = svd.matrixV() *
                 svd.singularValues().cwiseInverse().asDiagonal() *
                 svd.matrixU().transpose();
      return make_hpolytope(rows * Minv, Vec::Constant(2 * n, sc));
    }
    case BodyKind::CrossPolytopeL1: {
      if (n > 4) break;  // 2^n facets; fall through to the generic wrapper
      double sc = static_cast<const CrossBody&>(*body).scale();
      Mat rows(1 << n, n);
      for (int m = 0; m < (1 << n); ++m) {
        for (int j = 0; j < n; ++j) rows(m, j) = (m >> j) & 1 ? -1.0 : 1.0;
      }
      Mat Minv = svd.matrixV() *
                 svd.singularValues().cwiseInverse().asDiagonal() *
                 svd.matrixU().transpose();
      return make_hpolytope(rows * Minv, Vec::Constant(1 << n, sc));
    }
    case BodyKind::LinearImage: {
      const auto& li = static_cast<const LinearImageBody&>(*body);
      return apply_linear(li.inner(), M * li.map(), cfg);
    }
    default:
      break;
  }
  Mat Minv = svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
             svd.matrixU().transpose();
  return std::make_shared<LinearImageBody>(body, M, std::move(Minv), smin, smax);
}

BodyPtr difference_body(const BodyPtr& body) {
  if (body->symmetric()) {
    // K - K = 2K for symmetric K
    return apply_linear(body, 2.0 * Mat::Identity(body->dim(), body->dim()));
  }
  return std::make_shared<DifferenceBodyImpl>(body);
}

// ---- direction nets and measured radii --------------------------------------

std::vector<Vec> direction_net(int dim, int extra, std::uint64_t seed) {
  std::vector<Vec> net;
  for (int i = 0; i < dim; ++i) {
    Vec e = Vec::Zero(dim);
    e[i] = 1.0;
    net.push_back(e);
    net.push_back(-e);
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      for (double sj : {1.0, -1.0}) {
        Vec e = Vec::Zero(dim);
        e[i] = inv_sqrt2;
        e[j] = sj * inv_sqrt2;
        net.push_back(e);
        net.push_back(-e);
      }
    }
  }
  SplitMix64 rng(seed);
  int added = 0;
  while (added < extra) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.sym_uniform();
    double nv = v.norm();
    if (nv < 1e-3) continue;
    net.push_back(v / nv);
    ++added;
  }
  return net;
}

std::pair<double, double> measure_radii(const Body& body, int net_extra) {
  auto net = direction_net(body.dim(), net_extra);
  double gmax = 0.0, hmax = 0.0;
  for (const Vec& u : net) {
    gmax = std::max(gmax, body.gauge(u));
    hmax = std::max(hmax, body.support(u));
  }
  return {1.0 / gmax, hmax};
}

}  // namespace mellip
