#include <doctest.h>

#include <cmath>

#include "mellip/milman.hpp"
#include "oracles.hpp"

using namespace mellip;

TEST_CASE("iterated logarithm with clamp") {
  CHECK(iter_log(16, 1) == doctest::Approx(4.0));
  CHECK(iter_log(16, 2) == doctest::Approx(2.0));
  CHECK(iter_log(4, 2) == doctest::Approx(2.0));  // clamped from 1
  CHECK(iter_log(2, 1) == doctest::Approx(2.0));  // clamped
  CHECK_THROWS_AS((void)iter_log(1, 1), ToolkitError);

  CHECK(iteration_count(2) == 2);
  CHECK(iteration_count(4) == 2);
  CHECK(iteration_count(5) == 3);
  CHECK(iteration_count(16) == 3);
}

TEST_CASE("ball idempotence with full trace structure") {
  for (int n : {2, 3, 5}) {
    MilmanTrace trace;
    Ellipsoid E = m_ellipsoid(make_ball(n, 1.0), Config{}, 0.0, &trace);
    CHECK(trace.T == iteration_count(n));
    CHECK(int(trace.iters.size()) == trace.T - 1);
    for (int i = 0; i < n; ++i) {
      Vec u = Vec::Zero(n);
      u[i] = 1.0;
      CHECK(E.gauge(u) == doctest::Approx(1.0).epsilon(1e-6));
    }
    // ball trace: bm ratio is exactly the squared iterated log
    for (std::size_t i = 0; i < trace.iters.size(); ++i) {
      double a = iter_log(n, int(i) + 1);
      CHECK(trace.iters[i].bm_ratio == doctest::Approx(a * a).epsilon(1e-6));
    }
  }
}

TEST_CASE("banach-mazur diagnostics") {
  MilmanTrace trace;
  (void)m_ellipsoid(make_ball(2, 1.0), Config{}, 0.0, &trace);
  auto diag = banach_mazur_diag(trace);
  CHECK(diag.size() == 1);
  for (double r : diag) CHECK(r >= 1.0);

  MilmanTrace empty;
  CHECK_THROWS_AS((void)banach_mazur_diag(empty), ToolkitError);
}

TEST_CASE("ellipsoid input reproduces its own shape") {
  Mat M(2, 2);
  M << 1.8, 0.4, 0.4, 0.9;
  auto pipe = m_ellipsoid_pipeline(make_ellipsoid(M));
  Mat C = pipe.ellipsoid.matrix().inverse() * M;
  Eigen::JacobiSVD<Mat> svd(C);
  double d = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
  CHECK(d <= 1.0 + 1e-3);
}

TEST_CASE("per-iteration sandwich on a direction net") {
  // r_in A B ⊆ K_{i+1} ⊆ r_out A B, checked in the pre-renormalization frame
  auto K = make_cube(3, 1.0);
  auto norm = normalize_position(K);
  MilmanTrace trace;
  (void)m_ellipsoid(norm.body, Config{}, 0.0, &trace);
  REQUIRE(trace.iters.size() >= 1);
  const auto& it = trace.iters[0];
  BodyPtr Ei = make_ellipsoid(it.A);
  BodyPtr inner = apply_linear(Ei, it.r_in * Mat::Identity(3, 3));
  BodyPtr outer = apply_linear(Ei, it.r_out * Mat::Identity(3, 3));
  BodyPtr next = make_hull(make_intersection(it.body, outer), inner);
  for (const Vec& u : direction_net(3, 36)) {
    Vec p = u / inner->gauge(u);  // boundary of the inner ellipsoid
    CHECK(next->gauge(p) <= 1.0 + 1e-6);
    Vec q = u / outer->gauge(u);  // boundary of the outer ellipsoid
    CHECK(next->gauge(q) >= 1.0 - 1e-6);
  }
}

TEST_CASE("final sandwich constant bounded by the last ratio") {
  auto norm = normalize_position(make_cross_polytope(3, 1.0));
  MilmanTrace trace;
  Ellipsoid E = m_ellipsoid(norm.body, Config{}, 0.0, &trace);
  REQUIRE(trace.final_body);
  double bm_last = trace.iters.back().bm_ratio;
  // in the final working coordinates E maps to a ball of radius iter_log
  double c_f = 0.0;
  Mat S = trace.final_transform;
  Mat Efin = S.inverse() * E.matrix();
  Ellipsoid Ef(psd_factor(Efin));
  for (const Vec& u : direction_net(3, 36)) {
    Vec p = u / Ef.gauge(u);
    double g = trace.final_body->gauge(p);
    c_f = std::max(c_f, std::max(g, 1.0 / g));
  }
  CHECK(c_f <= bm_last * (1.0 + 1e-6));
}

TEST_CASE("containment chain re-check via the minimizing split") {
  auto norm = normalize_position(make_cube(2, 1.0));
  MilmanTrace trace;
  (void)m_ellipsoid(norm.body, Config{}, 0.0, &trace);
  const auto& it = trace.iters[0];
  BodyPtr Ei = make_ellipsoid(it.A);
  BodyPtr inner = apply_linear(Ei, it.r_in * Mat::Identity(2, 2));
  BodyPtr clipped = make_intersection(
      it.body, apply_linear(Ei, it.r_out * Mat::Identity(2, 2)));
  oracle::Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    Vec u = rng.vec(2);
    BodyPtr hull = make_hull(clipped, inner);
    Vec p = u / hull->gauge(u);  // boundary point of K_{i+1}
    SplitResult sp = hull_gauge_split(*clipped, *inner, p, -1e300, 1e300, 1e-7);
    CHECK(sp.value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(clipped->gauge(sp.split) + inner->gauge(p - sp.split) ==
          doctest::Approx(sp.value).epsilon(1e-9));
  }
}

TEST_CASE("affine covariance of the pipeline") {
  Mat M(2, 2);
  M << 1.4, 0.3, 0.3, 0.8;  // SPD, condition below 10
  auto K = make_cube(2, 1.0);
  auto base = m_ellipsoid_pipeline(K);
  auto mapped = m_ellipsoid_pipeline(apply_linear(K, M));
  Mat C = mapped.ellipsoid.matrix().inverse() * (M * base.ellipsoid.matrix());
  Eigen::JacobiSVD<Mat> svd(C);
  double d = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
  CHECK(d <= 1.05);
}
