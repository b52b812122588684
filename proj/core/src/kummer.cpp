#include "watsonmle/kummer.hpp"

#include <math.h>  // lgamma_r

#include <cmath>
#include <sstream>

#include "watsonmle/errors.hpp"

namespace watsonmle {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// Weight of the form (offset + slope * k) / (c + k).
struct TermWeight {
  double offset;
  double slope;
  double c;
  double operator()(double k) const { return (offset + slope * k) / (c + k); }
};

// Sum of t_k / t_peak for the positive series M(a, c, y), y >= 0, walking
// outward from the largest term, plus two weighted sums sharing that scale.
struct ScaledSeries {
  double log_peak = 0.0;
  CompensatedSum rest;  // all terms except the peak, relative to the peak
  CompensatedSum first;
  CompensatedSum second;

  double total() const { return 1.0 + rest.value(); }
  double log_sum() const { return log_peak + std::log1p(rest.value()); }
};

// Smallest index k with t_{k+1} <= t_k, i.e. the position of the largest term.
double peak_index(double a, double c, double y) {
  // Terms grow while (a + k) y > (c + k)(k + 1); solve the quadratic in k.
  const double b = c + 1.0 - y;
  const double disc = b * b - 4.0 * (c - a * y);
  if (disc <= 0.0) return 0.0;
  const double root = 0.5 * (-b + std::sqrt(disc));
  if (!(root > 0.0)) return 0.0;
  return std::ceil(root);
}

double log_peak_term(double a, double c, double y, double k_peak) {
  if (k_peak == 0.0) return 0.0;
  if (k_peak <= 64.0) {
    double acc = 0.0;
    for (double j = 0.0; j < k_peak; j += 1.0) {
      acc += std::log((a + j) * y / ((c + j) * (j + 1.0)));
    }
    return acc;
  }
  return log_gamma(a + k_peak) - log_gamma(a) - log_gamma(c + k_peak) + log_gamma(c) +
         k_peak * std::log(y) - log_gamma(k_peak + 1.0);
}

[[noreturn]] void fail_series(double a, double c, double y, const ScaledSeries& s,
                              std::size_t terms) {
  std::ostringstream msg;
  msg << "Kummer series M(" << a << ", " << c << ", " << y << ") did not converge within "
      << terms << " terms";
  throw SeriesConvergenceError(msg.str(), s.log_sum(), terms);
}

ScaledSeries sum_series(double a, double c, double y, const EvalControls& ctl,
                        const TermWeight* w1 = nullptr, const TermWeight* w2 = nullptr) {
  ScaledSeries s;
  const double k_peak = peak_index(a, c, y);
  s.log_peak = log_peak_term(a, c, y, k_peak);

  auto visit = [&](double k, double t) {
    s.rest.add(t);
    if (w1) s.first.add(t * (*w1)(k));
    if (w2) s.second.add(t * (*w2)(k));
  };
  if (w1) s.first.add((*w1)(k_peak));
  if (w2) s.second.add((*w2)(k_peak));

  constexpr int kSmallRun = 3;

  // Upward from the peak.
  {
    double t = 1.0;
    int small = 0;
    std::size_t count = 0;
    for (double k = k_peak; small < kSmallRun; k += 1.0) {
      if (++count > ctl.max_terms) fail_series(a, c, y, s, count);
      t *= (a + k) * y / ((c + k) * (k + 1.0));
      visit(k + 1.0, t);
      small = (t <= ctl.rel_tolerance * s.total()) ? small + 1 : 0;
    }
  }
  // Downward to k = 0.
  {
    double t = 1.0;
    int small = 0;
    std::size_t count = 0;
    for (double k = k_peak; k > 0.0 && small < kSmallRun; k -= 1.0) {
      if (++count > ctl.max_terms) fail_series(a, c, y, s, count);
      t *= (c + k - 1.0) * k / ((a + k - 1.0) * y);
      visit(k - 1.0, t);
      small = (t <= ctl.rel_tolerance * s.total()) ? small + 1 : 0;
    }
  }
  return s;
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

}  // namespace

void KummerParams::validate() const {
  require_finite(a, "a");
  require_finite(c, "c");
  if (!(c > a && a > 0.0)) {
    std::ostringstream msg;
    msg << "Kummer parameters require c > a > 0 (got a=" << a << ", c=" << c << ")";
    throw DomainError(msg.str());
  }
}

void EvalControls::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance <= 1e-6)) {
    throw DomainError("rel_tolerance must lie in (0, 1e-6]");
  }
  if (max_terms < 100) throw DomainError("max_terms must be at least 100");
}

double log_kummer_m(double a, double c, double x, const EvalControls& ctl) {
  require_finite(a, "a");
  require_finite(c, "c");
  require_finite(x, "x");
  if (!(a > 0.0) || !(c > 0.0)) {
    throw DomainError("log_kummer_m requires a > 0 and c > 0");
  }
  ctl.validate();
  if (x >= 0.0) return sum_series(a, c, x, ctl).log_sum();

  // M(a, c, x) = e^x M(c - a, c, -x)
  const double shifted = c - a;
  if (shifted < 0.0) {
    throw DomainError("log_kummer_m for x < 0 requires c >= a");
  }
  if (shifted == 0.0) return x;
  return x + sum_series(shifted, c, -x, ctl).log_sum();
}

RatioPair kummer_ratio_pair(KummerParams params, double x, const EvalControls& ctl) {
  params.validate();
  require_finite(x, "x");
  ctl.validate();
  const double a = params.a;
  const double c = params.c;

  // Term k of M(a+1, c+1, x) is term k of M(a, c, x) times (c/a)(a+k)/(c+k),
  // so g is the t_k-weighted mean of (a+k)/(c+k). For x < 0 both functions
  // go through the Kummer transformation and the weights become a/(c+k).
  if (x >= 0.0) {
    const TermWeight value{a, 1.0, c};
    const TermWeight complement{c - a, 0.0, c};
    const ScaledSeries s = sum_series(a, c, x, ctl, &value, &complement);
    return {s.first.value() / s.total(), s.second.value() / s.total()};
  }
  const TermWeight value{a, 0.0, c};
  const TermWeight complement{c - a, 1.0, c};
  const ScaledSeries s = sum_series(c - a, c, -x, ctl, &value, &complement);
  return {s.first.value() / s.total(), s.second.value() / s.total()};
}

double kummer_ratio(KummerParams params, double x, const EvalControls& ctl) {
  return kummer_ratio_pair(params, x, ctl).value;
}

double kummer_ratio_derivative(KummerParams params, double x, double g_value) {
  params.validate();
  require_finite(x, "x");
  require_finite(g_value, "g_value");
  if (x == 0.0) {
    throw DomainError("kummer_ratio_derivative needs x != 0; use the closed limit at zero");
  }
  return (1.0 - params.c / x) * g_value + params.a / x - g_value * g_value;
}

double kummer_ratio_derivative_at_zero(KummerParams params) {
  params.validate();
  const double a = params.a;
  const double c = params.c;
  return a * (c - a) / (c * c * (1.0 + c));
}

}  // namespace watsonmle
