#include "watsonmle/kappa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "watsonmle/errors.hpp"

namespace watsonmle {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_r(double r) {
  if (!std::isfinite(r) || !(r > 0.0 && r < 1.0)) {
    std::ostringstream msg;
    msg << "r must lie strictly inside (0, 1), got " << r
        << " (kappa is -inf at r = 0 and +inf at r = 1)";
    throw DomainError(msg.str());
  }
}

// (rc - a) / (r (1 - r)) with the numerator formed by a single rounding.
// Exactly zero at the double nearest a/c, where the solver returns 0.
double common_factor(KummerParams p, double r) {
  if (r == p.a / p.c) return 0.0;
  return std::fma(r, p.c, -p.a) / (r * (1.0 - r));
}

// Widens a closed-form bound by a few ulps so rounding in the bound itself
// cannot exclude the root.
double widen_down(double v) { return v - 64.0 * kEps * std::abs(v); }
double widen_up(double v) { return v + 64.0 * kEps * std::abs(v); }

}  // namespace

std::string_view to_string(KappaMethod method) {
  switch (method) {
    case KappaMethod::L: return "L";
    case KappaMethod::B: return "B";
    case KappaMethod::U: return "U";
    case KappaMethod::BBG: return "BBG";
    case KappaMethod::Combined: return "Combined";
    case KappaMethod::Newton: return "Newton";
  }
  return "?";
}

std::optional<KappaMethod> parse_kappa_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "l") return KappaMethod::L;
  if (lower == "b") return KappaMethod::B;
  if (lower == "u") return KappaMethod::U;
  if (lower == "bbg") return KappaMethod::BBG;
  if (lower == "combined") return KappaMethod::Combined;
  if (lower == "newton") return KappaMethod::Newton;
  return std::nullopt;
}

void NewtonControls::validate() const {
  if (!(residual_tol > 0.0)) throw DomainError("residual_tol must be positive");
  if (max_iter < 1) throw DomainError("max_iter must be at least 1");
  eval.validate();
}

double bound_L(KummerParams params, double r) {
  params.validate();
  check_r(r);
  return common_factor(params, r) * (1.0 + (1.0 - r) / (params.c - params.a));
}

double bound_B(KummerParams params, double r) {
  params.validate();
  check_r(r);
  const double a = params.a;
  const double c = params.c;
  const double radicand = 1.0 + 4.0 * (c + 1.0) * r * (1.0 - r) / (a * (c - a));
  return 0.5 * common_factor(params, r) * (1.0 + std::sqrt(radicand));
}

double bound_U(KummerParams params, double r) {
  params.validate();
  check_r(r);
  return common_factor(params, r) * (1.0 + r / params.a);
}

double bbg(KummerParams params, double r) {
  params.validate();
  check_r(r);
  return common_factor(params, r) + r / (2.0 * params.c * (1.0 - r));
}

BbgViolations bbg_violation_intervals(KummerParams params) {
  params.validate();
  const double a = params.a;
  const double c = params.c;
  const double two_c2 = 2.0 * c * c;

  BbgViolations out{{0.0, 0.0}, {0.0, 0.0}};
  const double disc = (two_c2 - a) * (two_c2 - a - 8.0 * a * c);
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double denom = 2.0 * (two_c2 - a + c);
    out.lower = {(two_c2 + a - root) / denom, (two_c2 + a + root) / denom};
  }
  // BBG(r) > U(r)  <=>  r (2c^2 - a) < 2ac
  if (two_c2 - a > 0.0) {
    out.upper = {0.0, std::min(1.0, 2.0 * a * c / (two_c2 - a))};
  } else {
    out.upper = {0.0, 1.0};
  }
  return out;
}

KappaMethod combined_choice(KummerParams params, double r) {
  params.validate();
  check_r(r);
  const double a = params.a;
  const double c = params.c;
  if (r < a / (2.0 * c)) return KappaMethod::U;
  if (r < 2.0 * a / std::sqrt(c)) return KappaMethod::B;
  return KappaMethod::L;
}

SolveReport estimate_combined(KummerParams params, double r) {
  SolveReport report;
  report.method = KappaMethod::Combined;
  switch (combined_choice(params, r)) {
    case KappaMethod::U: report.kappa = bound_U(params, r); break;
    case KappaMethod::B: report.kappa = bound_B(params, r); break;
    default: report.kappa = bound_L(params, r); break;
  }
  return report;
}

SolveReport solve_newton(KummerParams params, double r, const NewtonControls& ctl) {
  params.validate();
  check_r(r);
  ctl.validate();
  const double a = params.a;
  const double c = params.c;

  SolveReport report;
  report.method = KappaMethod::Newton;
  if (r == a / c) {
    report.kappa = 0.0;
    return report;
  }

  double lo = widen_down(bound_L(params, r));
  double hi = widen_up(bound_U(params, r));
  double kappa = bound_B(params, r);
  if (!(kappa > lo && kappa < hi)) kappa = 0.5 * (lo + hi);

  // 1 - r is exact for r >= 1/2, and near r = 1 the residual is formed from
  // complements so that it keeps its relative precision.
  const bool upper_half = r >= 0.5;
  const double one_minus_r = 1.0 - r;
  const double scale = std::min({r, one_minus_r, std::abs(r - a / c)});

  double best_kappa = kappa;
  double best_residual = std::numeric_limits<double>::infinity();
  // After the residual test passes, a few more steps take kappa to working
  // precision; near r = 0 or 1 the bounds sit within 1e-13 of kappa.
  constexpr int kPolishSteps = 3;
  bool tolerance_met = false;
  int polish = 0;

  // Truncating the series at the default tolerance biases 1 - g low by a few
  // ulps for large kappa, which is the whole gap to L near r = 1.
  EvalControls eval = ctl.eval;
  eval.rel_tolerance = std::min(eval.rel_tolerance, 1e-17);

  auto finish = [&](int iterations) {
    report.kappa = best_kappa;
    report.residual = best_residual;
    report.iterations = iterations;
    report.bracket = {std::min(lo, best_kappa), std::max(hi, best_kappa)};
    return report;
  };

  for (int it = 1; it <= ctl.max_iter; ++it) {
    const RatioPair g = kummer_ratio_pair(params, kappa, eval);
    ++report.ratio_evaluations;
    const double residual = upper_half ? one_minus_r - g.complement : g.value - r;
    const double abs_res = std::abs(residual);
    if (abs_res < best_residual) {
      best_residual = abs_res;
      best_kappa = kappa;
    }
    // g is strictly increasing, so the residual sign says which side the root is on.
    if (residual > 0.0) {
      hi = std::min(hi, kappa);
    } else if (residual < 0.0) {
      lo = std::max(lo, kappa);
    }

    double slope = 0.0;
    if (kappa == 0.0) {
      slope = kummer_ratio_derivative_at_zero(params);
    } else {
      // (1 - c/k) g + a/k - g^2 = g (1 - g) - (c g - a)/k
      const double cg_minus_a = g.value > 0.5 ? (c - a) - c * g.complement : c * g.value - a;
      slope = g.value * g.complement - cg_minus_a / kappa;
    }
    const double step = residual / slope;
    const bool tiny_step = std::abs(step) <= 4.0 * kEps * std::abs(kappa);

    if (abs_res <= ctl.residual_tol && (abs_res <= ctl.residual_tol * scale || tiny_step)) {
      tolerance_met = true;
    }
    if (tolerance_met && (residual == 0.0 || tiny_step || polish == kPolishSteps)) return finish(it);
    if (tolerance_met) ++polish;

    double next = kappa - step;
    if (!std::isfinite(next) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == kappa) {
      if (tolerance_met) return finish(it);
      break;
    }
    kappa = next;
  }
  if (tolerance_met) return finish(ctl.max_iter);

  std::ostringstream msg;
  msg << "Newton iteration for g(" << a << ", " << c << "; kappa) = " << r
      << " did not converge in " << ctl.max_iter << " iterations (best residual "
      << best_residual << ")";
  throw SolverConvergenceError(msg.str(), best_kappa, best_residual);
}

SolveReport solve_kappa(KummerParams params, double r, KappaMethod method,
                        const NewtonControls& ctl) {
  SolveReport report;
  report.method = method;
  switch (method) {
    case KappaMethod::L: report.kappa = bound_L(params, r); break;
    case KappaMethod::B: report.kappa = bound_B(params, r); break;
    case KappaMethod::U: report.kappa = bound_U(params, r); break;
    case KappaMethod::BBG: report.kappa = bbg(params, r); break;
    case KappaMethod::Combined: return estimate_combined(params, r);
    case KappaMethod::Newton: return solve_newton(params, r, ctl);
  }
  return report;
}

double kappa_asymptotic(KummerParams params, double r, ExpansionPoint point) {
  params.validate();
  const double a = params.a;
  const double c = params.c;
  switch (point) {
    case ExpansionPoint::Zero:
      return -a / r + (c - a - 1.0) + (c - a - 1.0) * (1.0 + a) / a * r;
    case ExpansionPoint::AOverC: {
      const double d = r - a / c;
      const double first = c * c * (1.0 + c) / (a * (c - a));
      const double second =
          c * c * c * (1.0 + c) * (1.0 + c) * (2.0 * a - c) / (a * a * (c - a) * (c - a) * (c + 2.0));
      return d * (first + second * d);
    }
    case ExpansionPoint::One: {
      const double q = 1.0 - r;
      return (c - a) / q + 1.0 - a + (a - 1.0) * (a - c - 1.0) / (c - a) * q;
    }
  }
  return 0.0;
}

double clamp_r(double r, double eps) { return std::clamp(r, eps, 1.0 - eps); }

}  // namespace watsonmle
