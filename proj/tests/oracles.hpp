// Independent brute-force oracles for the test suite. These deliberately take
// the dumbest correct path (dense scans, exhaustive boxes) and never share
// code with the implementation they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mellip/body.hpp"
#include "mellip/ellnorm.hpp"
#include "mellip/lattice.hpp"
#include "mellip/covering.hpp"
#include "mellip/volume.hpp"

namespace oracle {

using mellip::Body;
using mellip::BodyPtr;
using mellip::Config;
using mellip::Mat;
using mellip::Vec;

// Dense grid search over symmetric PSD 2x2 matrices: maximize
// det(A)^{1/2} / ell_tilde_K(A) (scale-invariant form of the program).
inline double lewis_objective_2d(const BodyPtr& K, int steps = 60) {
  double best = 0.0;
  // scan the unit Frobenius sphere of symmetric matrices; scale drops out
  for (int ia = 0; ia <= steps; ++ia) {
    double theta = M_PI * 0.5 * double(ia) / steps;  // a,c >= 0 quadrant
    for (int ib = -steps; ib <= steps; ++ib) {
      double phi = 0.5 * M_PI * double(ib) / steps;
      double a = std::cos(theta) * std::cos(phi);
      double c = std::sin(theta) * std::cos(phi);
      double b = std::sin(phi) / std::sqrt(2.0);
      double det = a * c - b * b;
      if (det <= 0.0) continue;
      Mat A(2, 2);
      A << a, b, b, c;
      double ell = mellip::ell_tilde_reference(*K, A);
      if (!(ell > 0.0)) continue;
      best = std::max(best, std::sqrt(det) / ell);
    }
  }
  return best;
}

// Exhaustive lattice points of a region: scan the integer coefficient box
// derived from the Euclidean circumradius of the region.
template <typename Inside>
std::vector<std::vector<std::int64_t>> lattice_scan(const mellip::LatticeBasis& L,
                                                    double circumradius,
                                                    const Vec& center,
                                                    Inside&& inside) {
  const int n = L.dim();
  Mat Binv = L.basis().inverse();
  std::vector<std::int64_t> bound(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // |z_i| = |<v - c... z = (v) B^{-1}: row-wise bound via column norms
    double cn = Binv.col(i).norm();
    double ci = (center.transpose() * Binv).coeff(0, i);
    bound[std::size_t(i)] =
        std::int64_t(std::ceil(circumradius * cn + std::abs(ci) + 1.0));
  }
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[std::size_t(i)] = -bound[std::size_t(i)];
  while (true) {
    Vec p = L.point(z);
    if (inside(p)) out.push_back(z);
    int d = 0;
    while (d < n && ++z[std::size_t(d)] > bound[std::size_t(d)]) {
      z[std::size_t(d)] = -bound[std::size_t(d)];
      ++d;
    }
    if (d == n) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::vector<std::int64_t>> coeffs_of(
    const std::vector<mellip::LatticePoint>& pts) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& p : pts) out.push_back(p.coeffs);
  std::sort(out.begin(), out.end());
  return out;
}

// Exhaustive tile count over the bounding index box, same intersection test.
inline std::int64_t tile_box_scan(const Body& K, const mellip::TilingSpec& t,
                                  const Config& cfg) {
  const int n = t.dim();
  std::vector<std::int64_t> zmax(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    zmax[std::size_t(i)] =
        std::int64_t(std::floor(K.outradius() / t.side[i] + 1e-9));
  }
  std::vector<std::int64_t> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[std::size_t(i)] = -zmax[std::size_t(i)] - 1;
  std::int64_t count = 0;
  while (true) {
    if (mellip::tile_intersects(K, t, z, cfg)) ++count;
    int d = 0;
    while (d < n && ++z[std::size_t(d)] > zmax[std::size_t(d)]) {
      z[std::size_t(d)] = -zmax[std::size_t(d)] - 1;
      ++d;
    }
    if (d == n) break;
  }
  return count;
}

// Deterministic pseudo-random vectors for sampling-based checks.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return 2.0 * (double(next() >> 11) * 0x1.0p-53) - 1.0; }
  Vec vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }
};

inline double exact_volume_cube(int n, double s) { return std::pow(2.0 * s, n); }
inline double exact_volume_cross(int n, double s) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return std::pow(2.0 * s, n) / f;
}
inline double exact_volume_ball(int n, double r) {
  return mellip::unit_ball_volume(n) * std::pow(r, n);
}

}  // namespace oracle
