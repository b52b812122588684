#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace watsonmle {

/// Argument outside the mathematical domain of an operation
/// (e.g. r outside (0,1), c <= a, non-unit observation).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for iterative procedures that ran out of budget.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Kummer series did not reach the requested tolerance within max_terms.
class SeriesConvergenceError : public NumericError {
 public:
  SeriesConvergenceError(const std::string& what, double partial_log_sum, std::size_t terms)
      : NumericError(what), partial_log_sum_(partial_log_sum), terms_(terms) {}

  double partial_log_sum() const noexcept { return partial_log_sum_; }
  std::size_t terms() const noexcept { return terms_; }

 private:
  double partial_log_sum_;
  std::size_t terms_;
};

/// Newton iteration hit max_iter before the residual criterion was met.
class SolverConvergenceError : public NumericError {
 public:
  SolverConvergenceError(const std::string& what, double best_kappa, double best_residual)
      : NumericError(what), best_kappa_(best_kappa), best_residual_(best_residual) {}

  double best_kappa() const noexcept { return best_kappa_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_kappa_;
  double best_residual_;
};

/// Jacobi sweeps exhausted before the off-diagonal norm fell below threshold.
class EigenConvergenceError : public NumericError {
 public:
  EigenConvergenceError(const std::string& what, double off_diagonal_norm)
      : NumericError(what), off_diagonal_norm_(off_diagonal_norm) {}

  double off_diagonal_norm() const noexcept { return off_diagonal_norm_; }

 private:
  double off_diagonal_norm_;
};

}  // namespace watsonmle
