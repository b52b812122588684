#include "testkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "watsonmle/kummer.hpp"
#include "watsonmle/watson.hpp"

namespace testkit {

std::string identifier(std::string_view text) {
  std::string out;
  for (char ch : text) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return out;
}

namespace {

using watsonmle::log_kummer_m;
using mp50 = boost::multiprecision::cpp_bin_float_50;

double M(double a, double c, double x) { return std::exp(log_kummer_m(a, c, x)); }

mp50 mp_m(double a, double c, const mp50& x) { return boost::math::hypergeometric_1F1(mp50(a), mp50(c), x); }

// n-th derivative of M(a, c, .) at x by central differences in 50 digits.
double mp_derivative(double a, double c, double x, int n) {
  const mp50 x0(x);
  if (n == 1) {
    const mp50 h("1e-15");
    return static_cast<double>((mp_m(a, c, x0 + h) - mp_m(a, c, x0 - h)) / (2 * h));
  }
  const mp50 h("1e-12");
  return static_cast<double>((mp_m(a, c, x0 + h) - 2 * mp_m(a, c, x0) + mp_m(a, c, x0 - h)) / (h * h));
}

double rel_residual(double lhs, double rhs, std::initializer_list<double> terms) {
  double scale = std::max(std::abs(lhs), std::abs(rhs));
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return std::abs(lhs - rhs) / scale;
}

double identity_error(Identity id, double a, double c, double x) {
  switch (id) {
    case Identity::Derivative1: {
      const double rhs = (a / c) * M(a + 1, c + 1, x);
      return std::abs(mp_derivative(a, c, x, 1) - rhs) / std::abs(rhs);
    }
    case Identity::Derivative2: {
      const double rhs = (a * (a + 1)) / (c * (c + 1)) * M(a + 2, c + 2, x);
      return std::abs(mp_derivative(a, c, x, 2) - rhs) / std::abs(rhs);
    }
    case Identity::Contiguous: {
      const double t1 = c * (1 - c + x) / (a * x) * M(a, c, x);
      const double t2 = c * (c - 1) / (a * x) * M(a - 1, c - 1, x);
      const double lhs = M(a + 1, c + 1, x);
      return rel_residual(lhs, t1 + t2, {t1, t2});
    }
    case Identity::RaiseBothShift: {
      const double lhs = (c - a) * M(a + 1, c + 2, x);
      const double t1 = (c + 1) * M(a + 1, c + 1, x);
      const double t2 = (a + 1) * M(a + 2, c + 2, x);
      return rel_residual(lhs, t1 - t2, {t1, t2});
    }
    case Identity::ScaledSecondShift: {
      const double lhs = (c - a) * x * M(a + 2, c + 3, x);
      const double t1 = (c + 1) * (c + 2) * M(a + 2, c + 2, x);
      const double t2 = (c + 1) * (c + 2) * M(a + 1, c + 1, x);
      return rel_residual(lhs, t1 - t2, {t1, t2});
    }
    case Identity::ThreeTermRecurrence: {
      const double lhs = (a + 1) * x * M(a + 2, c + 2, x);
      const double t1 = (c + 1) * (x - c) * M(a + 1, c + 1, x);
      const double t2 = c * (c + 1) * M(a, c, x);
      return rel_residual(lhs, t1 + t2, {t1, t2});
    }
    case Identity::SecondShiftDifference: {
      const double lhs = x * M(a + 2, c + 3, x);
      const double t1 = (c + 2) * M(a + 2, c + 2, x);
      const double t2 = (c + 2) * M(a + 1, c + 2, x);
      return rel_residual(lhs, t1 - t2, {t1, t2});
    }
    case Identity::SquareDifference: {
      const double m0 = M(a, c, x);
      const double m1 = M(a + 1, c + 1, x);
      const double m2 = M(a + 2, c + 2, x);
      const double u = M(a + 1, c + 2, x);
      const double pre = (c - a) * x / (c + 1);
      const double b1 = pre * u * u / (c + 1);
      const double b2 = pre * M(a + 2, c + 3, x) * M(a, c + 1, x) / (c + 2);
      const double b3 = pre * u * M(a + 2, c + 2, x) / (c * (c + 1));
      return rel_residual(m1 * m1 - m2 * m0, b1 - b2 + b3, {m1 * m1, m2 * m0, b1, b2, b3});
    }
    case Identity::KummerTransformation: {
      // Relative error in M: the library's left side against x + ln M(c-a, c, -x)
      // summed independently in 50 digits.
      const double rhs = x + static_cast<double>(log(mp_m(c - a, c, mp50(-x))));
      return std::abs(log_kummer_m(a, c, x) - rhs);
    }
  }
  return 0.0;
}

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::string_view name(Identity id) {
  switch (id) {
    case Identity::Derivative1: return "d/dx M = (a/c) M(a+1,c+1)";
    case Identity::Derivative2: return "d2/dx2 M = (a)_2/(c)_2 M(a+2,c+2)";
    case Identity::Contiguous: return "contiguous M1 = c(1-c+x)/(ax) M0 + c(c-1)/(ax) M-1";
    case Identity::RaiseBothShift: return "(c-a) M(a+1,c+2) = (c+1) M1 - (a+1) M2";
    case Identity::ScaledSecondShift: return "(c-a) x M(a+2,c+3) = (c+1)(c+2) (M2 - M1)";
    case Identity::ThreeTermRecurrence: return "(a+1) x M2 = (c+1)(x-c) M1 + c(c+1) M0";
    case Identity::SecondShiftDifference: return "x M(a+2,c+3) = (c+2) (M2 - M(a+1,c+2))";
    case Identity::SquareDifference: return "M1^2 - M2 M0 expansion";
    case Identity::KummerTransformation: return "M(a,c,x) = e^x M(c-a,c,-x)";
  }
  return "?";
}

IdentityResult check_identity(Identity id, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  IdentityResult result;
  for (int s = 0; s < samples; ++s) {
    // M(a-1, c-1, .) needs a > 1.
    const double a_min = id == Identity::Contiguous ? 1.05 : 0.05;
    const double a = a_min + 10.0 * unit(rng);
    const double c = a + 0.05 + 20.0 * unit(rng);
    double x = -50.0 + 100.0 * unit(rng);
    if (std::abs(x) < 1e-3) x = 1e-3;
    const double err = identity_error(id, a, c, x);
    if (!(err <= result.max_rel_error)) {
      result = {err, a, c, x};
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string_view name(Anchor anchor) {
  switch (anchor) {
    case Anchor::Zero: return "r=0";
    case Anchor::AOverC: return "r=a/c";
    case Anchor::One: return "r=1";
  }
  return "?";
}

std::string_view name(Order order) {
  switch (order) {
    case Order::Incorrect: return "Incorrect";
    case Order::One: return "order 1";
    case Order::Two: return "order 2";
    case Order::Three: return "order 3";
    case Order::Higher: return "order >3";
    case Order::Undetermined: return "undetermined";
  }
  return "?";
}

OrderProbe classify_order(KummerParams params, KappaMethod method, Anchor anchor) {
  // Below this, f/kappa - 1 is dominated by rounding in the Newton reference.
  constexpr double kNoiseFloor = 1e-12;
  OrderProbe probe;
  std::vector<double> log_offset;
  std::vector<double> log_dev;
  std::vector<double> log_abs_ratio;
  for (int k = 0; k <= 6; ++k) {
    const double d = std::pow(10.0, -3.0 - 0.5 * k);
    const double r = anchor == Anchor::Zero ? d : anchor == Anchor::AOverC ? params.a / params.c + d : 1.0 - d;
    const double kappa = watsonmle::solve_newton(params, r).kappa;
    const double f = watsonmle::solve_kappa(params, r, method).kappa;
    const double ratio = f / kappa;
    probe.offsets.push_back(d);
    probe.ratios.push_back(ratio);
    log_offset.push_back(std::log(d));
    log_dev.push_back(std::log(std::abs(ratio - 1.0)));
    log_abs_ratio.push_back(std::log(std::abs(ratio)));
  }

  // f/kappa -> 0 or infinity: the deviation grows without bound, or the
  // ratio itself decays.
  const std::size_t n = probe.offsets.size();
  const std::span<const double> tail_x(log_offset.data() + n - 3, 3);
  const double dev_tail = fit_slope(tail_x, std::span<const double>(log_dev.data() + n - 3, 3));
  const double ratio_tail = fit_slope(tail_x, std::span<const double>(log_abs_ratio.data() + n - 3, 3));
  if ((dev_tail < -0.5 && std::abs(probe.ratios.back() - 1.0) > 0.1) || ratio_tail > 0.5) {
    probe.slope = dev_tail;
    probe.order = Order::Incorrect;
    return probe;
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(probe.ratios[k] - 1.0) > kNoiseFloor) {
      xs.push_back(log_offset[k]);
      ys.push_back(log_dev[k]);
    }
  }
  if (xs.size() < 3) return probe;
  // The smallest usable offsets are the most asymptotic.
  const std::size_t take = std::min<std::size_t>(4, xs.size());
  probe.slope = fit_slope(std::span<const double>(xs.data() + xs.size() - take, take),
                          std::span<const double>(ys.data() + ys.size() - take, take));
  if (probe.slope < 0.5) {
    probe.order = Order::One;
  } else if (probe.slope < 1.5) {
    probe.order = Order::Two;
  } else if (probe.slope < 2.5) {
    probe.order = Order::Three;
  } else {
    probe.order = Order::Higher;
  }
  return probe;
}

Order expected_order(KappaMethod method, Anchor anchor) {
  switch (anchor) {
    case Anchor::Zero:
      return method == KappaMethod::L ? Order::One : method == KappaMethod::U ? Order::Three : Order::Two;
    case Anchor::AOverC:
      return method == KappaMethod::BBG ? Order::Incorrect
             : method == KappaMethod::B ? Order::Three
                                        : Order::Two;
    case Anchor::One:
      return method == KappaMethod::L ? Order::Three : method == KappaMethod::B ? Order::Two : Order::One;
  }
  return Order::Undetermined;
}

// ---------------------------------------------------------------------------

Vector random_unit(std::size_t p, std::uint64_t seed) {
  const Matrix draw = watsonmle::sample_uniform_sphere(p, 1, seed);
  return Vector(draw.row(0).begin(), draw.row(0).end());
}

LabelledData watson_mixture(std::size_t p, std::span<const double> kappas, std::size_t per_cluster,
                            std::uint64_t seed) {
  LabelledData data;
  for (std::size_t j = 0; j < kappas.size(); ++j) {
    const Vector mu = random_unit(p, seed * 1000 + 2 * j + 1);
    data.X.append_rows(watsonmle::sample({mu, kappas[j]}, per_cluster, seed * 1000 + 2 * j + 2));
    data.labels.insert(data.labels.end(), per_cluster, j);
  }
  return data;
}

TwoClusterRow two_cluster_row(double kappa2, int restarts) {
  const double kappas[] = {3.0, kappa2};
  const LabelledData data = watson_mixture(30, kappas, 200, 52);
  TwoClusterRow row;
  row.kappa2 = kappa2;
  for (int s = 0; s < restarts; ++s) {
    watsonmle::EmConfig config;
    config.mode = watsonmle::AssignmentMode::Hard;
    config.seed = static_cast<std::uint64_t>(s);
    const auto em = watsonmle::em_fit(data.X, 2, config);
    row.mow.push_back(watsonmle::label_accuracy(watsonmle::hard_labels(em.beta), data.labels));
    const auto diam = watsonmle::diametrical(data.X, 2, static_cast<std::uint64_t>(s));
    row.diam.push_back(watsonmle::label_accuracy(diam.partition, data.labels));
  }
  auto summarize = [&](const std::vector<double>& v, double& best, double& mean) {
    best = *std::max_element(v.begin(), v.end());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
  };
  summarize(row.mow, row.mow_best, row.mow_mean);
  summarize(row.diam, row.diam_best, row.diam_mean);
  return row;
}

std::size_t separated_dataset_k(std::uint64_t index) { return 2 + index % 3; }

LabelledData separated_dataset(std::uint64_t index) {
  const std::vector<double> kappas(separated_dataset_k(index), 50.0);
  return watson_mixture(5 + index % 4, kappas, 60, 100 + index);
}

std::size_t mixed_dataset_k(std::uint64_t index) { return 2 + index % 3; }

LabelledData mixed_dataset(std::uint64_t index) {
  constexpr double kPool[] = {-20.0, 5.0, 30.0, 2.0};
  std::vector<double> kappas;
  for (std::size_t j = 0; j < mixed_dataset_k(index); ++j) kappas.push_back(kPool[(index + j) % 4]);
  return watson_mixture(3 + index % 6, kappas, 80, 500 + index);
}

bool limit_partitions_agree(const Matrix& X, std::size_t K, double kappa, std::uint64_t seed) {
  using namespace watsonmle;
  const auto init = random_point_centroids(X, K, seed);
  const DiametricalResult diam = diametrical_from(X, init);

  MixtureModel model;
  for (const Vector& mu : init) model.components.push_back({1.0 / static_cast<double>(K), {mu, kappa}});
  EmConfig config;
  config.mode = AssignmentMode::Hard;
  config.kappa_policy = KappaPolicy::shared_fixed(kappa);
  config.prior_policy = PriorPolicy::FixedEqual;
  const EmResult em = em_fit_from(X, model, config);
  return hard_labels(em.beta) == diam.partition;
}

}  // namespace testkit
