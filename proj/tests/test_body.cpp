#include <doctest.h>

#include <cmath>

#include "mellip/body.hpp"
#include "oracles.hpp"

using namespace mellip;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

BodyPtr shifted_simplex2() {
  // conv{0, e1, e2} - centroid: offsets strictly positive
  Mat A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  Vec b(3);
  b << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  return make_hpolytope(A, b);
}

}  // namespace

TEST_CASE("gauge closed forms on leaves") {
  CHECK(make_ball(2, 1.0)->gauge(v2(2, 0)) == doctest::Approx(2.0));
  CHECK(make_cube(3, 1.0)->gauge(v3(0.5, -1, 0.25)) == doctest::Approx(1.0));
  CHECK(make_cross_polytope(2, 1.0)->gauge(v2(0.5, -0.5)) == doctest::Approx(1.0));
  CHECK(make_lp_ball(2, 3.0, 2.0)->gauge(v2(2, 2)) ==
        doctest::Approx(std::pow(2.0, 1.0 / 3)));

  Mat D = Mat::Zero(2, 2);
  D.diagonal() << 2, 3;
  CHECK(make_ellipsoid(D)->gauge(v2(2, 0)) == doctest::Approx(1.0));
  CHECK(make_ellipsoid(D)->support(v2(1, 0)) == doctest::Approx(2.0));
}

TEST_CASE("hull gauge: nested balls take the bigger one") {
  auto hull = make_hull(make_ball(2, 1.0), make_ball(2, 2.0));
  CHECK(hull->gauge(v2(0, 3)) == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("intersection gauge is the exact max of the leaf gauges") {
  auto body = make_intersection(make_cube(2, 1.0), make_ball(2, 1.0));
  Vec x = v2(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  double expect = std::max(make_cube(2, 1.0)->gauge(x), make_ball(2, 1.0)->gauge(x));
  CHECK(body->gauge(x) == doctest::Approx(expect));
  CHECK(body->gauge(x) == doctest::Approx(1.0));
}

TEST_CASE("support: cube is l1, intersection of nested balls is the smaller") {
  CHECK(make_cube(3, 1.0)->support(v3(1, -2, 0)) == doctest::Approx(3.0));
  auto body = make_intersection(make_ball(2, 1.0), make_ball(2, 2.0));
  CHECK(body->support(v2(0, 1)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("membership classification") {
  auto ball = make_ball(2, 1.0);
  CHECK(ball->membership(v2(0, 0), 1e-6) == Membership::Inside);
  CHECK(ball->membership(v2(1.01, 0), 1e-6) == Membership::Outside);
  CHECK(make_cube(2, 1.0)->membership(v2(1, 1), 1e-6) == Membership::Boundary);
}

TEST_CASE("difference body of a ball doubles it") {
  auto d = difference_body(make_ball(2, 1.0));
  CHECK(d->gauge(v2(1, 0)) == doctest::Approx(0.5).epsilon(1e-6));
  auto dc = difference_body(make_cube(3, 1.0));
  CHECK(dc->gauge(v3(2, 0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("difference body of an asymmetric polytope") {
  auto simplex = shifted_simplex2();
  CHECK_FALSE(simplex->symmetric());
  auto d = difference_body(simplex);
  CHECK(d->symmetric());
  // K - K of the standard simplex is the hexagon conv{+-e1, +-e2, +-(e1-e2)}
  CHECK(d->gauge(v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(d->gauge(v2(1, -1)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(d->gauge(v2(1, 1)) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(d->support(v2(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("apply_linear folds and roundtrips") {
  auto scaled = apply_linear(make_ball(2, 1.0), 2.0 * Mat::Identity(2, 2));
  CHECK(scaled->gauge(v2(2, 0)) == doctest::Approx(1.0));

  // rotated cube equals the directly constructed H-polytope
  double c = std::cos(0.3), s = std::sin(0.3);
  Mat R(2, 2);
  R << c, -s, s, c;
  auto rotated = apply_linear(make_cube(2, 1.0), R);
  // facet normals of R*cube are the columns of R
  Mat An(4, 2);
  An << R(0, 0), R(1, 0), -R(0, 0), -R(1, 0), R(0, 1), R(1, 1), -R(0, 1), -R(1, 1);
  Vec b = Vec::Ones(4);
  auto direct = make_hpolytope(An, b);
  oracle::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Vec x = rng.vec(2);
    CHECK(rotated->gauge(x) == doctest::Approx(direct->gauge(x)).epsilon(1e-9));
  }

  // identity roundtrip through a generic map
  Mat M(2, 2);
  M << 1.5, 0.4, -0.2, 0.9;
  auto body = make_intersection(make_cube(2, 1.0), make_ball(2, 1.2));
  auto round = apply_linear(apply_linear(body, M), M.inverse());
  for (int i = 0; i < 100; ++i) {
    Vec x = rng.vec(2);
    CHECK(round->gauge(x) == doctest::Approx(body->gauge(x)).epsilon(1e-6));
  }
}

TEST_CASE("gauge-support pairing inequality on sampled points") {
  auto bodies = {make_ball(3, 1.0), make_cube(3, 1.0), make_cross_polytope(3, 2.0),
                 make_lp_ball(3, 1.5, 1.0)};
  oracle::Rng rng(11);
  for (const auto& K : bodies) {
    for (int i = 0; i < 40; ++i) {
      Vec x = rng.vec(3), u = rng.vec(3);
      CHECK(x.dot(u) <= K->gauge(x) * K->support(u) * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("hull gauge below both children, split re-checks") {
  auto L = make_cube(2, 1.0);
  auto R = make_ball(2, 1.3);
  auto hull = make_hull(L, R);
  oracle::Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    Vec x = rng.vec(2);
    double gh = hull->gauge(x);
    CHECK(gh <= L->gauge(x) * (1.0 + 1e-6));
    CHECK(gh <= R->gauge(x) * (1.0 + 1e-6));
    SplitResult sp = hull_gauge_split(*L, *R, x, -1e300, 1e300, 1e-8);
    CHECK(L->gauge(sp.split) + R->gauge(x - sp.split) ==
          doctest::Approx(sp.value).epsilon(1e-9));
    CHECK(sp.lower <= sp.value * (1.0 + 1e-12));
  }
}

TEST_CASE("hpolytope vertex cache and validation") {
  Mat A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b = Vec::Ones(4);
  auto box = make_hpolytope(A, b);
  CHECK(box->symmetric());
  const auto* verts = hpolytope_vertices(*box);
  REQUIRE(verts != nullptr);
  CHECK(verts->size() == 4);
  CHECK(box->support(v2(1, 1)) == doctest::Approx(2.0));

  // unbounded: only two facets of a stripe
  Mat A2(2, 2);
  A2 << 1, 0, -1, 0;
  Vec b2 = Vec::Ones(2);
  CHECK_THROWS_AS((void)make_hpolytope(A2, b2), ToolkitError);

  Vec b3 = Vec::Ones(4);
  b3[0] = -0.5;  // origin not interior
  CHECK_THROWS_AS((void)make_hpolytope(A, b3), ToolkitError);
}

TEST_CASE("error paths: non-finite input and singular maps") {
  auto ball = make_ball(2, 1.0);
  Vec bad = v2(std::nan(""), 0);
  CHECK_THROWS_AS((void)ball->gauge(bad), ToolkitError);
  Mat S = Mat::Zero(2, 2);
  CHECK_THROWS_AS((void)apply_linear(ball, S), ToolkitError);
}

TEST_CASE("normalize_position: ball, skewed ellipsoid, cube") {
  auto r1 = normalize_position(make_ball(2, 5.0));
  CHECK((r1.transform - Mat::Identity(2, 2) / 5.0).norm() < 1e-9);
  CHECK(r1.body->inradius() == doctest::Approx(1.0));
  CHECK(r1.ratio == doctest::Approx(1.0));

  Mat D = Mat::Zero(2, 2);
  D.diagonal() << 1, 100;
  auto r2 = normalize_position(make_ellipsoid(D));
  CHECK(r2.ratio <= 2.0 * 2);
  CHECK(r2.body->inradius() == doctest::Approx(1.0));

  auto r3 = normalize_position(make_cube(4, 1.0));
  CHECK(r3.ratio <= doctest::Approx(2.0).epsilon(1e-9));  // sqrt(4)

  CHECK_THROWS_AS((void)normalize_position(shifted_simplex2()), ToolkitError);
}

TEST_CASE("measured radii tighten conservative combinator bounds") {
  auto body = make_intersection(make_cube(2, 1.0), make_ball(2, 1.0));
  auto [rin, rout] = measure_radii(*body);
  CHECK(rin == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rout == doctest::Approx(1.0).epsilon(0.05));
}
