#include "mellip/milman.hpp"

#include <cmath>

#include "mellip/ellnorm.hpp"

namespace mellip {

double iter_log(int n, int i) {
  if (n < 2 || i < 1) {
    throw ToolkitError(ErrorKind::InvalidInput, "iter_log: need n >= 2, i >= 1");
  }
  double v = std::log2(double(n));
  v = std::max(v, 2.0);
  for (int k = 1; k < i; ++k) v = std::max(std::log2(v), 2.0);
  return v;
}

int iteration_count(int n) {
  int i = 1;
  double v = iter_log(n, 1);
  while (v > 2.0 + 1e-12) {
    ++i;
    v = iter_log(n, i);
  }
  return i + 1;
}

Ellipsoid m_ellipsoid(const BodyPtr& K, const Config& cfg, double eps,
                      MilmanTrace* partial) {
  const int n = K->dim();
  if (!K->symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput, "m_ellipsoid: body must be symmetric");
  }
  if (eps <= 0.0) eps = default_lewis_eps(n);
  const int T = iteration_count(n);
  const double sqn = std::sqrt(double(n));

  MilmanTrace local;
  MilmanTrace& trace = partial ? *partial : local;
  trace = MilmanTrace{};
  trace.n = n;
  trace.T = T;
  trace.final_transform = Mat::Identity(n, n);

  BodyPtr Ki = K;
  Mat S = Mat::Identity(n, n);  // working coords -> input coords

  for (int i = 1; i <= T - 1; ++i) {
    if (int(trace.iters.size()) >= T) {
      throw ToolkitError(ErrorKind::Internal, "m_ellipsoid: iteration overflow");
    }
    LewisSolution sol = solve_lewis(Ki, eps, cfg);
    Mat Ainv = sol.A.inverse();
    double li = sol.ell_value;
    double lo = ell_tilde_polar(*Ki, Ainv, cfg).value;
    double a = iter_log(n, i);
    double r_in = sqn / (a * li);
    double r_out = a * lo / sqn;

    MilmanIteration rec;
    rec.A = sol.A;
    rec.ell_in = li;
    rec.ell_out = lo;
    rec.r_in = r_in;
    rec.r_out = r_out;
    rec.bm_ratio = r_out / r_in;
    rec.body = Ki;
    rec.lewis = sol;
    trace.iters.push_back(std::move(rec));

    if (i == T - 1) {
      trace.final_ellipsoid = Ellipsoid(psd_factor((sqn / li) * (S * sol.A)));
    }

    BodyPtr Ei = make_ellipsoid(sol.A);
    BodyPtr clipped = make_intersection(
        Ki, apply_linear(Ei, r_out * Mat::Identity(n, n), cfg));
    BodyPtr raw =
        make_hull(clipped, apply_linear(Ei, r_in * Mat::Identity(n, n), cfg));
    // renormalize so the inscribed ellipsoid becomes the unit ball
    Mat M = Ainv / r_in;
    Ki = apply_linear(raw, M, cfg);
    S = S * (r_in * sol.A);
  }

  trace.final_body = Ki;
  trace.final_transform = S;
  return *trace.final_ellipsoid;
}

std::vector<double> banach_mazur_diag(const MilmanTrace& trace) {
  if (trace.n == 0 || trace.iters.empty() ||
      int(trace.iters.size()) != trace.T - 1) {
    throw ToolkitError(ErrorKind::InvalidInput, "banach_mazur_diag: incomplete trace");
  }
  std::vector<double> out;
  out.reserve(trace.iters.size());
  for (const auto& it : trace.iters) out.push_back(it.bm_ratio);
  return out;
}

MilmanPipelineResult m_ellipsoid_pipeline(const BodyPtr& body,
                                          const Config& cfg, double eps) {
  BodyPtr sym = body;
  bool symmetrized = false;
  if (!body->symmetric()) {
    sym = difference_body(body);
    symmetrized = true;
  }
  NormalizeResult norm = normalize_position(sym, cfg);
  MilmanTrace trace;
  Ellipsoid En = m_ellipsoid(norm.body, cfg, eps, &trace);
  Mat Tinv = norm.transform.inverse();
  Ellipsoid E(psd_factor(Tinv * En.matrix()));
  return {std::move(E),    std::move(En), std::move(trace),
          std::move(norm), std::move(sym), symmetrized};
}

}  // namespace mellip
