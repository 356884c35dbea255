#pragma once

#include <cstdint>

#include "mellip/body.hpp"
#include "mellip/common.hpp"

namespace mellip {

/// Value of the discrete sign-vector norm, with enumeration provenance.
struct EllNormValue {
  double value = 0.0;
  int n = 0;
  std::uint64_t terms = 0;  // always exactly 2^n
};

/// Discrete surrogate norm: the exact average of ||A x||_K over all sign
/// vectors x in {-1,1}^n, enumerated in Gray-code order with a fixed blocked
/// summation. Bit-identical for any worker count.
EllNormValue ell_tilde(const Body& K, const Mat& A, const Config& cfg = Config{});

/// Same sweep on the polar side: average of h_K(B x) (the gauge of K* equals
/// the support of K). Callers pass B = A^{-1}.
EllNormValue ell_tilde_polar(const Body& K, const Mat& B,
                             const Config& cfg = Config{});

/// Straightforward serial evaluation (full matrix-vector product per sign
/// vector, plain left-to-right sum). Kept as the reference for kernel tests
/// and benchmarks.
double ell_tilde_reference(const Body& K, const Mat& A);
double ell_tilde_polar_reference(const Body& K, const Mat& B);

/// Deterministic estimate of the Gaussian norm ell_K(A): root mean square of
/// ||A x||_K over a fixed low-discrepancy point set mapped through the normal
/// inverse CDF. Test oracle only; never used inside algorithms.
double ell_gauss_estimate(const Body& K, const Mat& A, std::int64_t nodes);

namespace detail {

/// One sweep returning both the average gauge and (optionally) its
/// subgradient in A: avg over x of u(Ax) x^T, symmetrized by the caller.
/// Used by the determinant-maximization solver. `active_tol` widens the tie
/// window of the inner subgradients (smoothed residual measurements).
double ell_tilde_with_grad(const Body& K, const Mat& A, Mat* grad,
                           const Config& cfg, double active_tol = 1e-8);

/// Normal inverse CDF (Acklam's rational approximation, ~1e-9 relative).
double inverse_normal_cdf(double p);

/// Halton sequence point (1-based index), bases = first dim primes.
void halton_point(std::int64_t index, int dim, double* out);

}  // namespace detail

}  // namespace mellip
