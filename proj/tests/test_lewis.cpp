#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mellip/ellnorm.hpp"
#include "mellip/lewis.hpp"
#include "oracles.hpp"

using namespace mellip;

TEST_CASE("ball optimum is the scaled identity") {
  for (int n : {2, 3}) {
    auto sol = solve_lewis(make_ball(n, 1.0), 1e-6);
    Mat want = Mat::Identity(n, n) / std::sqrt(double(n));
    CHECK((sol.A - want).norm() < 1e-6);
    CHECK(sol.objective == doctest::Approx(std::pow(n, -0.5)).epsilon(1e-6));
    CHECK(sol.ell_value <= 1.0);
    CHECK(sol.ell_value >= 1.0 - 1e-6);
  }
}

TEST_CASE("cube optimum matches the dense grid oracle at n = 2") {
  auto K = make_cube(2, 1.0);
  auto sol = solve_lewis(K, 1e-6);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  double oracle_obj = oracle::lewis_objective_2d(K);
  CHECK(sol.objective >= oracle_obj * 0.99);
}

TEST_CASE("cross-polytope and a random polytope against the grid oracle") {
  auto cross = make_cross_polytope(2, 1.0);
  auto sol = solve_lewis(cross, 1e-6);
  CHECK(sol.objective >= oracle::lewis_objective_2d(cross) * 0.99);

  oracle::Rng rng(41);
  Mat A(6, 2);
  Vec b(6);
  for (int i = 0; i < 3; ++i) {
    Vec a = rng.vec(2);
    a.normalize();
    A.row(2 * i) = a.transpose();
    A.row(2 * i + 1) = -a.transpose();
    double off = 1.0 + 0.5 * std::abs(rng.uniform());
    b[2 * i] = off;
    b[2 * i + 1] = off;
  }
  auto poly = make_hpolytope(A, b);
  auto sp = solve_lewis(poly, 1e-6);
  CHECK(sp.objective >= oracle::lewis_objective_2d(poly) * 0.99);
  CHECK(sp.objective <= oracle::lewis_objective_2d(poly) * 1.01);
}

TEST_CASE("ellipsoid optimum is proportional to the shape matrix") {
  Mat M(2, 2);
  M << 2.0, 0.6, 0.6, 1.2;
  auto sol = solve_lewis(make_ellipsoid(M), 1e-6);
  Config cfg;
  double scale = 1.0 / ell_tilde(*make_ellipsoid(M), M, cfg).value;
  CHECK((sol.A - scale * M).norm() < 1e-5 * M.norm());
}

TEST_CASE("scale covariance of the solution") {
  auto K = make_cube(2, 1.0);
  auto base = solve_lewis(K, 1e-6);
  auto scaled = solve_lewis(apply_linear(K, 3.0 * Mat::Identity(2, 2)), 1e-6);
  CHECK((scaled.A - 3.0 * base.A).norm() <= 1e-6 * 3.0 * base.A.norm() + 1e-9);
}

TEST_CASE("certificates: identity, rank-one, and trivial cases") {
  auto Kb = make_ball(2, 1.0);
  auto sol = solve_lewis(Kb, 1e-6);
  auto cert = certify_lewis(Kb, sol, 100);
  CHECK(cert.pass);
  CHECK(cert.max_trace <= 2.0 * 2);
  CHECK(cert.max_trace == doctest::Approx(2.0).epsilon(1e-6));  // tr at T = I/sqrt2

  auto vac = certify_lewis(Kb, sol, 0);
  CHECK(vac.pass);
  CHECK(vac.entries.empty());

  // cube at A = I: T = e1 e1^T has ell_tilde = 1 and trace 1 <= 2n
  auto Kc = make_cube(2, 1.0);
  auto sc = solve_lewis(Kc, 1e-6);
  auto cc = certify_lewis(Kc, sc, 100);
  CHECK(cc.pass);
  bool saw_rank_one = false;
  for (const auto& [name, tr] : cc.entries) {
    if (name == "rank_one") {
      saw_rank_one = true;
      CHECK(tr <= 2.0 * 2 + 1e-9);
    }
  }
  CHECK(saw_rank_one);
}

TEST_CASE("certificate threshold across solve family") {
  // n(1 + 6 n^2 sqrt(eps)) from the variational argument
  for (auto& K : {make_cube(3, 1.0), make_cross_polytope(3, 1.0),
                  make_lp_ball(3, 1.5, 1.0)}) {
    double eps = default_lewis_eps(3);
    auto sol = solve_lewis(K, eps);
    CHECK(sol.ell_value <= 1.0);
    CHECK(sol.ell_value >= 1.0 - 1e-6);
    auto cert = certify_lewis(K, sol, 60);
    CHECK(cert.max_trace <= 3.0 * (1.0 + 6.0 * 9.0 * std::sqrt(eps)));
  }
}

TEST_CASE("objective history is monotone; solves are deterministic") {
  auto a = solve_lewis(make_cross_polytope(2, 1.0), 1e-6);
  CHECK(std::is_sorted(a.objective_history.begin(), a.objective_history.end()));
  auto mk = solve_lewis(make_lp_ball(3, 3.0, 1.0), 1e-6);
  CHECK(std::is_sorted(mk.objective_history.begin(), mk.objective_history.end()));
  auto b = solve_lewis(make_cross_polytope(2, 1.0), 1e-6);
  CHECK(a.A == b.A);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("eps outside the admissible range is rejected") {
  CHECK_THROWS_AS((void)solve_lewis(make_ball(2, 1.0), 0.5), ToolkitError);
  CHECK_THROWS_AS((void)solve_lewis(make_ball(2, 1.0), 0.0), ToolkitError);
}
