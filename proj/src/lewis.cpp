#include "mellip/lewis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mellip/ellnorm.hpp"

namespace mellip {

namespace {

struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double sym_uniform() { return 2.0 * (double(next() >> 11) * 0x1.0p-53) - 1.0; }
};

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

// project a symmetric matrix to the (strictly) PD cone by eigenvalue clamping
Mat psd_clamp(const Mat& S, double floor_ratio = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym(S));
  Vec lam = eig.eigenvalues();
  double lmax = lam.maxCoeff();
  double floorv = std::max(lmax, 0.0) * floor_ratio;
  if (!(floorv > 0.0)) floorv = 1e-300;
  for (int i = 0; i < lam.size(); ++i) lam[i] = std::max(lam[i], floorv);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

double logdet_spd(const Mat& A) {
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  for (int i = 0; i < A.rows(); ++i) v += std::log(llt.matrixL()(i, i));
  return 2.0 * v;
}

}  // namespace

LewisSolution solve_lewis(const BodyPtr& K, double eps, const Config& cfg) {
  const int n = K->dim();
  if (!K->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput, "solve_lewis: body must be symmetric");
  }
  const double eps_cap = 1.0 / (36.0 * std::pow(double(n), 4));
  if (!(eps > 0.0) || eps > eps_cap) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "solve_lewis: eps must lie in (0, 1/(36 n^4)]");
  }

  auto alpha = [&](const Mat& A, Mat* grad) {
    return detail::ell_tilde_with_grad(*K, A, grad, cfg);
  };
  // stationarity is measured with a wide tie window so polyhedral kinks do
  // not make the raw subgradient chatter at the optimum
  auto smoothed_residual = [&](const Mat& A, const Mat& Ainv) {
    Mat Gs;
    double as = detail::ell_tilde_with_grad(*K, A, &Gs, cfg, 1e-4);
    Mat grad_phi = Ainv / K->dim() - sym(Gs) / as;
    return grad_phi.norm() * A.norm();
  };

  // warm start: I / ell_tilde(I) is always feasible
  double a0 = alpha(Mat::Identity(n, n), nullptr);
  Mat A = Mat::Identity(n, n) / a0;

  Mat G;                      // subgradient of alpha at A
  double av = alpha(A, &G);   // == 1 up to rounding
  Mat Ainv = A.inverse();
  // scale-invariant objective phi = logdet(A)/n - log alpha(A)
  double phi = logdet_spd(A) / n - std::log(av);

  const int max_iter = cfg.lewis_iter_factor * n;
  const int window = 20;
  std::vector<double> history;
  history.reserve(max_iter + 1);
  history.push_back(phi);

  double t = 0.0;  // step length, re-seeded from the gradient scale below
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;

  for (int k = 0; k < max_iter; ++k) {
    Mat grad_phi = Ainv / n - sym(G) / av;
    residual = grad_phi.norm() * A.norm();
    bool stall_ok = history.size() > std::size_t(window) &&
                    history.back() - history[history.size() - 1 - window] <
                        0.25 * eps;
    if (residual >= eps && (stall_ok || residual < 8.0 * eps)) {
      residual = std::min(residual, smoothed_residual(A, Ainv));
    }
    if (residual < eps && (stall_ok || residual < 1e-3 * eps)) break;

    if (t <= 0.0) t = 0.25 * A.norm() / std::max(grad_phi.norm(), 1e-300);
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Mat Atrial = psd_clamp(A + t * grad_phi);
      double a_trial = alpha(Atrial, nullptr);
      if (!(a_trial > 0.0)) {
        t *= 0.5;
        continue;
      }
      Atrial /= a_trial;  // radial rescale keeps every accepted iterate feasible
      double phi_trial = logdet_spd(Atrial) / n;  // alpha == 1 after rescale
      if (phi_trial > phi + 1e-18 * std::abs(phi)) {
        A = std::move(Atrial);
        av = alpha(A, &G);
        Ainv = A.inverse();
        phi = phi_trial;
        accepted = true;
        t *= 1.4;
        break;
      }
      t *= 0.5;
    }
    iters = k + 1;
    history.push_back(phi);
    if (!accepted) {
      // no ascent step available: stationary up to line-search resolution
      residual = std::min(residual, smoothed_residual(A, Ainv));
      break;
    }
  }

  if (!(residual < std::sqrt(eps))) {
    // far from stationary: report the best iterate and the achieved residual
    throw ToolkitError(ErrorKind::SolverFailure,
                       "solve_lewis: stationarity not reached within iteration cap",
                       residual, phi);
  }

  // final rescale with a one-ulp-scale downward bias so the recorded
  // constraint value lands in [1 - tau_feas, 1]
  double af = alpha(A, nullptr);
  A /= af * (1.0 + 1e-12);
  LewisSolution sol;
  sol.ell_value = alpha(A, nullptr);
  sol.A = A;
  sol.objective = std::exp(logdet_spd(A) / n);
  sol.eps_target = eps;
  sol.residual = residual;
  sol.iterations = iters;
  for (double phi_k : history) sol.objective_history.push_back(std::exp(phi_k));
  return sol;
}

LewisCertificate certify_lewis(const BodyPtr& K, const LewisSolution& sol,
                               int trials, const Config& cfg) {
  const int n = K->dim();
  LewisCertificate cert;
  cert.threshold = 2.0 * n;
  cert.pass = true;
  if (trials <= 0) return cert;  // vacuous

  Mat Ainv = sol.A.inverse();
  auto push = [&](const std::string& name, Mat T) {
    double a = ell_tilde(*K, T, cfg).value;
    if (!(a > 0.0)) return;
    double tr = (Ainv * (T / a)).trace();
    cert.entries.emplace_back(name, tr);
    cert.max_trace = std::max(cert.max_trace, tr);
  };

  int budget = trials;
  push("identity", Mat::Identity(n, n));
  --budget;

  // rank-one tests vv^T on the fixed direction net mirror the variational
  // argument; alpha(vv^T) <= ||vv^T||_F = 1 for unit v
  auto net = direction_net(n, std::max(0, budget / 2), 0x5eedcafe12345678ull);
  for (const Vec& v : net) {
    if (budget <= 0) break;
    if (v[0] < 0 || (v[0] == 0 && v.sum() < 0)) continue;  // skip mirrored pairs
    push("rank_one", v * v.transpose());
    --budget;
  }

  SplitMix64 rng(0xabcdef0122334455ull);
  int idx = 0;
  while (budget > 0) {
    Mat T(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) T(i, j) = rng.sym_uniform();
    }
    push("random_sym_" + std::to_string(idx++), sym(T));
    --budget;
  }

  cert.pass = cert.max_trace <= cert.threshold;
  return cert;
}

// ---- position normalization (declared in body.hpp) ---------------------------

NormalizeResult normalize_position(const BodyPtr& body, const Config& cfg) {
  if (!body->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "normalize_position: body must be symmetric");
  }
  const int n = body->dim();
  const double eps_cap = 1.0 / (36.0 * std::pow(double(n), 4));
  const double eps = std::min(cfg.eps_normalize, eps_cap);

  Mat T = Mat::Identity(n, n);
  BodyPtr K = body;
  double ratio = K->outradius() / K->inradius();
  int rounds = 0;

  for (int r = 0; r < cfg.normalize_max_rounds && ratio > double(n); ++r) {
    LewisSolution sol = solve_lewis(K, eps, cfg);
    Mat Ainv = sol.A.inverse();
    BodyPtr Knext = apply_linear(K, Ainv, cfg);
    // rescale by the measured gauge over the direction net so the unit ball
    // sits inside (exact for folded leaves)
    auto net = direction_net(n, std::min(256, 4 * n * n));
    double gmax = 0.0;
    for (const Vec& u : net) gmax = std::max(gmax, Knext->gauge(u));
    Knext = apply_linear(Knext, gmax * Mat::Identity(n, n), cfg);
    double rnext = Knext->outradius() / Knext->inradius();
    ++rounds;
    if (rnext >= ratio * 0.95) {
      if (rnext < ratio) {
        K = Knext;
        T = gmax * (Ainv * T);
        ratio = rnext;
      }
      break;  // stopped improving
    }
    K = Knext;
    T = gmax * (Ainv * T);
    ratio = rnext;
  }

  // pin the stored inradius to exactly 1
  double s = 1.0 / K->inradius();
  K = apply_linear(K, s * Mat::Identity(n, n), cfg);
  T = s * T;
  ratio = K->outradius() / K->inradius();

  if (ratio > cfg.c_pos * double(n) * (1.0 + 1e-9)) {
    throw ToolkitError(ErrorKind::NormalizationFailure,
                       "normalize_position: sandwich ratio target not reached",
                       ratio, cfg.c_pos * double(n));
  }
  return {std::move(T), std::move(K), ratio, rounds};
}

}  // namespace mellip
