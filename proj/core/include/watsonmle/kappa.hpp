#pragma once

// Solvers for the concentration equation g(a, c; kappa) = r, c > a > 0,
// 0 < r < 1: closed-form bounds and a bracketed Newton iteration.

#include <cstddef>
#include <optional>
#include <string_view>

#include "watsonmle/kummer.hpp"

namespace watsonmle {

enum class KappaMethod { L, B, U, BBG, Combined, Newton };

std::string_view to_string(KappaMethod method);
/// Accepts "L", "B", "U", "BBG", "Combined", "Newton" in any letter case.
std::optional<KappaMethod> parse_kappa_method(std::string_view name);

struct Interval {
  double low;
  double high;

  bool empty() const { return !(low < high); }
  bool contains(double v) const { return low <= v && v <= high; }
};

struct SolveReport {
  double kappa = 0.0;
  KappaMethod method = KappaMethod::Newton;
  // Newton only.
  double residual = 0.0;
  int iterations = 0;
  int ratio_evaluations = 0;
  Interval bracket{0.0, 0.0};
};

struct NewtonControls {
  double residual_tol = 1e-12;
  int max_iter = 50;
  EvalControls eval{};

  void validate() const;
};

/// L(r) = ((rc - a) / (r(1 - r))) (1 + (1 - r)/(c - a)); a strict lower bound on kappa(r).
double bound_L(KummerParams params, double r);
/// B(r): the square-root bound, above kappa for r > a/c and below it for r < a/c.
double bound_B(KummerParams params, double r);
/// U(r) = ((rc - a) / (r(1 - r))) (1 + r/a); a strict upper bound on kappa(r).
double bound_U(KummerParams params, double r);
/// The earlier ad-hoc approximation (cr - a)/(r(1 - r)) + r/(2c(1 - r)).
double bbg(KummerParams params, double r);

struct BbgViolations {
  /// Where BBG(r) < L(r). Empty when the discriminant is negative.
  Interval lower;
  /// Where BBG(r) > U(r): (0, 2ac/(2c^2 - a)).
  Interval upper;
};

BbgViolations bbg_violation_intervals(KummerParams params);

/// U for r < a/(2c), B for a/(2c) <= r < 2a/sqrt(c), L above that.
SolveReport estimate_combined(KummerParams params, double r);

/// The selection rule of estimate_combined, exposed for reporting.
KappaMethod combined_choice(KummerParams params, double r);

/// Newton iteration started at B(r) and safeguarded inside [L(r), U(r)].
/// Each iteration costs one evaluation of the Kummer ratio.
SolveReport solve_newton(KummerParams params, double r, const NewtonControls& ctl = {});

/// Evaluates one closed form (L, B, U, BBG, Combined) or Newton.
SolveReport solve_kappa(KummerParams params, double r, KappaMethod method,
                        const NewtonControls& ctl = {});

enum class ExpansionPoint { Zero, AOverC, One };

/// Truncated expansion of kappa(r) about r = 0, a/c or 1 (remainder dropped).
double kappa_asymptotic(KummerParams params, double r, ExpansionPoint point);

/// Clamps r into [eps, 1 - eps]; used by callers that opt into robustness.
double clamp_r(double r, double eps = 1e-9);

}  // namespace watsonmle
