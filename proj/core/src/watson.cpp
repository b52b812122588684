#include "watsonmle/watson.hpp"

#include <math.h>  // lgamma_r

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "watsonmle/errors.hpp"

namespace watsonmle {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

void require_unit(std::span<const double> x) {
  if (!(std::abs(norm(x) - 1.0) <= kUnitNormTolerance)) {
    throw DomainError("observation is not a unit vector");
  }
}

struct Candidate {
  WatsonParams params;
  double r;
  double log_likelihood;
};

Candidate solve_branch(const Vector& axis, double eigenvalue, std::size_t p, double weight_total,
                       const FitOptions& options) {
  const KummerParams kp = watson_kummer_params(p);
  const double r_raw = std::clamp(eigenvalue, 0.0, 1.0);
  const double r = options.clamp_r ? clamp_r(r_raw, options.clamp_eps) : r_raw;
  const SolveReport solved = solve_newton(kp, r, options.newton);
  const double kappa = solved.kappa;
  const double per_unit =
      kappa * r_raw - log_kummer_m(kp, kappa, options.newton.eval) + uniform_log_density(p);
  return {{axis, kappa}, r_raw, weight_total * per_unit};
}

}  // namespace

void WatsonParams::validate() const {
  if (mu.size() < 2) throw DomainError("Watson distribution needs dimension p >= 2");
  if (!(std::abs(norm(mu) - 1.0) <= 1e-10)) throw DomainError("mean direction mu must be a unit vector");
  if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
}

std::string_view to_string(Branch branch) {
  return branch == Branch::Positive ? "Positive" : "Negative";
}

KummerParams watson_kummer_params(std::size_t p) {
  if (p < 2) throw DomainError("Watson distribution needs dimension p >= 2");
  return {0.5, 0.5 * static_cast<double>(p)};
}

double uniform_log_density(std::size_t p) {
  const double half_p = 0.5 * static_cast<double>(p);
  int sign = 0;
  return ::lgamma_r(half_p, &sign) - std::log(2.0) - half_p * std::log(std::numbers::pi);
}

double log_normalizer(std::size_t p, double kappa, const EvalControls& ctl) {
  return uniform_log_density(p) - log_kummer_m(watson_kummer_params(p), kappa, ctl);
}

double log_pdf(std::span<const double> x, const WatsonParams& params) {
  params.validate();
  if (x.size() != params.dim()) throw DomainError("dimension mismatch between x and mu");
  require_unit(x);
  const double proj = dot(params.mu, x);
  return log_normalizer(params.dim(), params.kappa) + params.kappa * proj * proj;
}

double log_likelihood(const Matrix& X, const WatsonParams& params) {
  params.validate();
  if (X.rows() == 0) throw DomainError("log_likelihood of an empty data matrix");
  if (X.cols() != params.dim()) throw DomainError("dimension mismatch between X and mu");
  require_unit_rows(X);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double proj = dot(params.mu, X.row(i));
    sum_sq += proj * proj;
  }
  const double n = static_cast<double>(X.rows());
  return params.kappa * sum_sq + n * log_normalizer(params.dim(), params.kappa);
}

FitReport fit_scatter(const ScatterMatrix& S, double weight_total, const FitOptions& options) {
  const std::size_t p = S.dim();
  if (p < 2) throw DomainError("Watson fit needs dimension p >= 2");
  const EigDecomposition eig = sym_eig(S);

  const Candidate pos = solve_branch(eig.vectors.front(), eig.values.front(), p, weight_total, options);
  const Candidate neg = solve_branch(eig.vectors.back(), eig.values.back(), p, weight_total, options);
  const bool take_negative = neg.log_likelihood > pos.log_likelihood;
  const Candidate& best = take_negative ? neg : pos;

  FitReport report;
  report.params = best.params;
  report.log_likelihood = best.log_likelihood;
  report.r = best.r;
  report.branch = best.params.kappa >= 0.0 ? Branch::Positive : Branch::Negative;
  const double gap = take_negative ? eig.values[p - 2] - eig.values[p - 1] : eig.values[0] - eig.values[1];
  report.degenerate_spectrum = gap < options.degenerate_gap;
  return report;
}

FitReport fit(const Matrix& X, const FitOptions& options) {
  if (X.rows() == 0) throw DomainError("fit needs at least one observation");
  const ScatterMatrix S = scatter(X);
  return fit_scatter(S, static_cast<double>(X.rows()), options);
}

// ---------------------------------------------------------------------------
// Sampling

WatsonSampler::WatsonSampler(WatsonParams params, std::uint64_t seed)
    : params_(std::move(params)), rng_(seed) {
  params_.validate();
  const double p = static_cast<double>(params_.dim());
  const double kappa = params_.kappa;

  // The angle theta = acos|mu^T x| has density proportional to
  // exp(kappa cos^2 theta) sin^{p-2} theta on [0, pi/2], which is unimodal.
  double mode = kHalfPi;
  if (params_.dim() == 2) {
    mode = kappa > 0.0 ? 0.0 : kHalfPi;
  } else if (kappa > 0.5 * (p - 2.0)) {
    mode = std::asin(std::sqrt((p - 2.0) / (2.0 * kappa)));
  }
  log_mode_ = angular_log_density(mode);

  auto h = [&](double theta) { return std::exp(angular_log_density(theta) - log_mode_); };

  struct Cell {
    double waste;
    double left;
    double width;
    double sup;
    bool operator<(const Cell& o) const {
      return waste < o.waste || (waste == o.waste && left > o.left);
    }
  };
  auto make_cell = [&](double left, double width) {
    const double right = left + width;
    const double hl = h(left);
    const double hr = h(right);
    const double sup = (mode >= left && mode <= right) ? 1.0 : std::max(hl, hr);
    const double inf = std::min(hl, hr);
    return Cell{(sup - inf) * width, left, width, sup};
  };

  constexpr int kInitialPieces = 32;
  constexpr std::size_t kMaxPieces = 4096;
  constexpr double kWasteFraction = 0.05;

  std::priority_queue<Cell> cells;
  double area = 0.0;
  double waste = 0.0;
  for (int i = 0; i < kInitialPieces; ++i) {
    const Cell cell = make_cell(kHalfPi * i / kInitialPieces, kHalfPi / kInitialPieces);
    area += cell.sup * cell.width;
    waste += cell.waste;
    cells.push(cell);
  }
  while (waste > kWasteFraction * area && cells.size() < kMaxPieces) {
    const Cell top = cells.top();
    cells.pop();
    area -= top.sup * top.width;
    waste -= top.waste;
    const double half = 0.5 * top.width;
    for (const Cell& part : {make_cell(top.left, half), make_cell(top.left + half, half)}) {
      area += part.sup * part.width;
      waste += part.waste;
      cells.push(part);
    }
  }

  std::vector<Cell> ordered;
  ordered.reserve(cells.size());
  while (!cells.empty()) {
    ordered.push_back(cells.top());
    cells.pop();
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const Cell& x, const Cell& y) { return x.left < y.left; });
  double running = 0.0;
  for (const Cell& cell : ordered) {
    pieces_.push_back({cell.left, cell.width, cell.sup});
    running += cell.sup * cell.width;
    cumulative_area_.push_back(running);
  }
}

double WatsonSampler::angular_log_density(double theta) const {
  const double cs = std::cos(theta);
  double value = params_.kappa * cs * cs;
  if (params_.dim() > 2) value += static_cast<double>(params_.dim() - 2) * std::log(std::sin(theta));
  return value;
}

double WatsonSampler::draw_angle() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double total = cumulative_area_.back();
  for (;;) {
    ++proposed_;
    const double pick = unit(rng_) * total;
    auto it = std::upper_bound(cumulative_area_.begin(), cumulative_area_.end(), pick);
    if (it == cumulative_area_.end()) --it;
    const Piece& piece = pieces_[static_cast<std::size_t>(it - cumulative_area_.begin())];
    const double theta = piece.left + piece.width * unit(rng_);
    const double density = std::exp(angular_log_density(theta) - log_mode_);
    if (unit(rng_) * piece.height <= density) {
      ++accepted_;
      return theta;
    }
  }
}

Vector WatsonSampler::draw() {
  const std::size_t p = params_.dim();
  const Vector& mu = params_.mu;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double theta = draw_angle();
  double t = std::cos(theta);
  if (unit(rng_) < 0.5) t = -t;
  const double s = std::sin(theta);

  Vector xi(p);
  for (;;) {
    for (double& v : xi) v = gauss(rng_);
    const double along = dot(xi, mu);
    for (std::size_t k = 0; k < p; ++k) xi[k] -= along * mu[k];
    const double len = norm(xi);
    if (len > 1e-12) {
      for (double& v : xi) v /= len;
      break;
    }
  }

  Vector x(p);
  for (std::size_t k = 0; k < p; ++k) x[k] = t * mu[k] + s * xi[k];
  const double len = norm(x);
  for (double& v : x) v /= len;
  return x;
}

Matrix WatsonSampler::draw(std::size_t n) {
  Matrix X(n, params_.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector x = draw();
    std::copy(x.begin(), x.end(), X.row(i).begin());
  }
  return X;
}

double WatsonSampler::acceptance_rate() const {
  return proposed_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposed_);
}

Matrix sample(const WatsonParams& params, std::size_t n, std::uint64_t seed) {
  WatsonSampler sampler(params, seed);
  return sampler.draw(n);
}

Matrix sample_uniform_sphere(std::size_t p, std::size_t n, std::uint64_t seed) {
  if (p < 1) throw DomainError("sphere dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = X.row(i);
    double len = 0.0;
    do {
      for (double& v : row) v = gauss(rng);
      len = norm(row);
    } while (len < 1e-12);
    for (double& v : row) v /= len;
  }
  return X;
}

}  // namespace watsonmle
