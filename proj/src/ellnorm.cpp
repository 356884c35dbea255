#include "mellip/ellnorm.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "mellip/parallel.hpp"

namespace mellip {

namespace {

std::uint64_t gray_code(std::uint64_t k) { return k ^ (k >> 1); }

// sign vector for Gray rank k: bit 0 -> +1, bit 1 -> -1
Vec sign_vector(std::uint64_t k, int n) {
  std::uint64_t g = gray_code(k);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = (g >> i) & 1 ? -1.0 : 1.0;
  return x;
}

void check_ell_inputs(const Body& K, const Mat& A, const Config& cfg,
                      bool require_symmetric) {
  const int n = K.dim();
  if (A.rows() != n || A.cols() != n || !A.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "ell_tilde: bad matrix");
  }
  if (require_symmetric && !K.symmetric()) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "ell_tilde: body must be symmetric");
  }
  if (n > cfg.n_max_ell) {
    throw ToolkitError(ErrorKind::BudgetExceeded,
                       "ell_tilde: 2^n sweep exceeds configured n_max");
  }
}

// Blocked Gray-code sweep. The block count depends only on n, so the partial
// sums and their combination order are fixed regardless of worker count.
template <typename Term>
double blocked_sweep(int n, const Mat& A, int workers, Term&& term, Mat* grad) {
  const std::uint64_t total = std::uint64_t(1) << n;
  const int block_bits = std::min(n, 8);
  const std::uint64_t nblocks = std::uint64_t(1) << block_bits;
  const std::uint64_t block_len = total >> block_bits;

  std::vector<double> partial(nblocks, 0.0);
  std::vector<Mat> gpartial;
  if (grad) gpartial.assign(nblocks, Mat::Zero(n, n));

  std::vector<Vec> cols(n);
  for (int j = 0; j < n; ++j) cols[j] = A.col(j);

  parallel_for(std::int64_t(nblocks), workers, [&](std::int64_t b) {
    const std::uint64_t k0 = std::uint64_t(b) * block_len;
    Vec x = sign_vector(k0, n);
    Vec v = A * x;
    double acc = 0.0;
    Mat gacc;
    if (grad) gacc = Mat::Zero(n, n);
    for (std::uint64_t k = k0;; ++k) {
      if (grad) {
        Vec u;
        acc += term(v, &u);
        // d/dA ||Av x||_K = u x^T
        gacc += u * x.transpose();
      } else {
        acc += term(v, nullptr);
      }
      if (k + 1 >= k0 + block_len) break;
      // bit flipped between gray(k) and gray(k+1)
      int j = std::countr_zero(k + 1);
      std::uint64_t bit = (gray_code(k + 1) >> j) & 1;
      double step = bit ? -2.0 : 2.0;
      x[j] += step;
      v += step * cols[j];
    }
    partial[std::size_t(b)] = acc;
    if (grad) gpartial[std::size_t(b)] = gacc;
  });

  double sum = 0.0;
  for (std::uint64_t b = 0; b < nblocks; ++b) sum += partial[b];
  if (grad) {
    grad->setZero(n, n);
    for (std::uint64_t b = 0; b < nblocks; ++b) *grad += gpartial[b];
    *grad /= double(total);
  }
  return sum / double(total);
}

}  // namespace

EllNormValue ell_tilde(const Body& K, const Mat& A, const Config& cfg) {
  check_ell_inputs(K, A, cfg, true);
  const int n = K.dim();
  double v = blocked_sweep(
      n, A, cfg.workers,
      [&](const Vec& w, Vec*) { return K.gauge(w); }, nullptr);
  return {v, n, std::uint64_t(1) << n};
}

EllNormValue ell_tilde_polar(const Body& K, const Mat& B, const Config& cfg) {
  check_ell_inputs(K, B, cfg, true);
  const int n = K.dim();
  double v = blocked_sweep(
      n, B, cfg.workers,
      [&](const Vec& w, Vec*) { return K.support(w); }, nullptr);
  return {v, n, std::uint64_t(1) << n};
}

double ell_tilde_reference(const Body& K, const Mat& A) {
  const int n = K.dim();
  const std::uint64_t total = std::uint64_t(1) << n;
  double acc = 0.0;
  for (std::uint64_t k = 0; k < total; ++k) {
    acc += K.gauge(A * sign_vector(k, n));
  }
  return acc / double(total);
}

double ell_tilde_polar_reference(const Body& K, const Mat& B) {
  const int n = K.dim();
  const std::uint64_t total = std::uint64_t(1) << n;
  double acc = 0.0;
  for (std::uint64_t k = 0; k < total; ++k) {
    acc += K.support(B * sign_vector(k, n));
  }
  return acc / double(total);
}

namespace detail {

double ell_tilde_with_grad(const Body& K, const Mat& A, Mat* grad,
                           const Config& cfg, double active_tol) {
  check_ell_inputs(K, A, cfg, true);
  return blocked_sweep(
      K.dim(), A, cfg.workers,
      [&](const Vec& w, Vec* u) {
        if (u) {
          *u = K.gauge_subgrad(w, active_tol);
          return w.isZero(0.0) ? 0.0 : K.gauge(w);
        }
        return K.gauge(w);
      },
      grad);
}

double inverse_normal_cdf(double p) {
  // Acklam's approximation
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (!(p > 0.0 && p < 1.0)) {
    throw ToolkitError(ErrorKind::InvalidInput, "inverse_normal_cdf: p in (0,1)");
  }
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void halton_point(std::int64_t index, int dim, double* out) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                               23, 29, 31, 37, 41, 43, 47, 53};
  for (int d = 0; d < dim; ++d) {
    const int base = primes[d];
    double f = 1.0, r = 0.0;
    std::int64_t i = index;
    while (i > 0) {
      f /= base;
      r += f * double(i % base);
      i /= base;
    }
    out[d] = r;
  }
}

}  // namespace detail

double ell_gauss_estimate(const Body& K, const Mat& A, std::int64_t nodes) {
  const int n = K.dim();
  if (A.rows() != n || A.cols() != n || !A.allFinite()) {
    throw ToolkitError(ErrorKind::InvalidInput, "ell_gauss_estimate: bad matrix");
  }
  if (nodes < 256) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "ell_gauss_estimate: need at least 256 nodes");
  }
  if (n > 16) {
    throw ToolkitError(ErrorKind::InvalidInput,
                       "ell_gauss_estimate: dimension above Halton base table");
  }
  if (A.isZero(0.0)) return 0.0;
  std::vector<double> u(n);
  Vec g(n);
  double acc = 0.0;
  for (std::int64_t i = 1; i <= nodes; ++i) {
    detail::halton_point(i, n, u.data());
    for (int d = 0; d < n; ++d) g[d] = detail::inverse_normal_cdf(u[d]);
    double val = K.gauge(A * g);
    acc += val * val;
  }
  return std::sqrt(acc / double(nodes));
}

}  // namespace mellip
