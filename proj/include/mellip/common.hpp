#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mellip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  InvalidInput,
  SolverFailure,
  BudgetExceeded,
  NormalizationFailure,
  ResolutionFailure,
  GammaCapExceeded,
  ParseError,
  Internal,
};

/// Toolkit-wide error. Solver failures carry the best bracket reached so the
/// caller can inspect how far the computation got.
class ToolkitError : public std::runtime_error {
 public:
  ToolkitError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ToolkitError(ErrorKind kind, const std::string& msg, double lo, double hi)
      : std::runtime_error(msg), kind_(kind), bracket_lo_(lo), bracket_hi_(hi) {}

  ErrorKind kind() const { return kind_; }
  double bracket_lo() const { return bracket_lo_; }
  double bracket_hi() const { return bracket_hi_; }

 private:
  ErrorKind kind_;
  double bracket_lo_ = 0.0;
  double bracket_hi_ = 0.0;
};

/// Global tunables. Defaults are the shipped configuration; everything here
/// is overridable from the CLI.
struct Config {
  // gauge / support evaluation
  double tau_gauge_leaf = 1e-9;   // relative tolerance, closed-form leaves
  double tau_gauge_comb = 1e-6;   // relative tolerance, combinator solves
  int split_iter_factor = 500;    // inf-convolution cap = factor * n

  // lewis solver
  double tau_feas = 1e-8;         // feasibility slack after rescale
  int lewis_iter_factor = 300;    // iteration cap = factor * n
  double eps_normalize = 1e-4;    // optimality gap for rounding solves

  // position normalization
  double c_pos = 2.0;             // target sandwich: B ⊆ K ⊆ c_pos*n*B
  int normalize_max_rounds = 4;

  // milman / volume iterations
  double fig_C = 1.0;             // damping constant in the eps-damped radii
  double tau_tile = 1e-8;         // tile intersection slack
  double tau_lattice = 1e-9;      // boundary slack for lattice membership

  // budgets
  std::int64_t cell_budget = 100'000'000;   // grid cells
  std::int64_t point_budget = 4'000'000;    // lattice points per enumeration
  std::int64_t tile_budget = 50'000'000;    // tiles per traversal
  int n_max_ell = 16;                       // 2^n sweep cap
  double cond_cap = 1e8;                    // linear map condition limit

  // parallelism (deterministic regardless of the value)
  int workers = 1;
};

/// Default optimality gap for the determinant-maximization solve:
/// min(1/(36 n^4), 1e-4).
inline double default_lewis_eps(int n) {
  double cap = 1.0 / (36.0 * std::pow(double(n), 4));
  return std::min(cap, 1e-4);
}

/// PSD matrix S with S*B_2^n = M*B_2^n as sets (polar decomposition M = S Q).
inline Mat psd_factor(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.singularValues().asDiagonal() *
         svd.matrixU().transpose();
}

}  // namespace mellip
