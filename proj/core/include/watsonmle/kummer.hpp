#pragma once

// Kummer's confluent hypergeometric function M(a, c, x) = 1F1(a; c; x) and
// the ratio g(a, c; x) = M'(a, c, x) / M(a, c, x), evaluated on the whole
// real line without overflow.

#include <cstddef>

namespace watsonmle {

struct KummerParams {
  double a = 0.5;
  double c = 1.0;

  /// Throws DomainError unless c > a > 0 and both are finite.
  void validate() const;
};

struct EvalControls {
  double rel_tolerance = 1e-14;
  /// Budget of series terms on each side of the peak term.
  std::size_t max_terms = 1'000'000;

  void validate() const;
};

/// ln M(a, c, x). Only a > 0 and c > 0 are required here.
///
/// For x >= 0 the series has positive terms and is summed outward from its
/// largest term in log-scaled form, so the result stays finite long after
/// M itself would overflow. For x < 0 the Kummer transformation
/// M(a, c, x) = e^x M(c - a, c, -x) is applied first.
double log_kummer_m(double a, double c, double x, const EvalControls& ctl = {});

inline double log_kummer_m(KummerParams params, double x, const EvalControls& ctl = {}) {
  return log_kummer_m(params.a, params.c, x, ctl);
}

/// g and 1 - g, each carried to full relative precision.
struct RatioPair {
  double value;
  double complement;
};

/// g(a, c; x) = (a/c) M(a+1, c+1, x) / M(a, c, x), strictly inside (0, 1).
///
/// Computed as the term-weighted mean of (a+k)/(c+k) over the series of
/// M(a, c, x), so numerator and denominator share one scale.
double kummer_ratio(KummerParams params, double x, const EvalControls& ctl = {});

/// Same as kummer_ratio, but also returns 1 - g without cancellation.
RatioPair kummer_ratio_pair(KummerParams params, double x, const EvalControls& ctl = {});

/// g'(a, c; x) = (1 - c/x) g + a/x - g^2 from an already computed g.
/// x must be nonzero; use kummer_ratio_derivative_at_zero for x = 0.
double kummer_ratio_derivative(KummerParams params, double x, double g_value);

/// g'(a, c; 0) = a (c - a) / (c^2 (1 + c)).
double kummer_ratio_derivative_at_zero(KummerParams params);

}  // namespace watsonmle
