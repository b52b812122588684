#pragma once

// The multivariate Watson distribution on the projective sphere,
//   W_p(x; mu, kappa) = c_p(kappa) exp(kappa (mu^T x)^2),
//   c_p(kappa) = Gamma(p/2) / (2 pi^{p/2} M(1/2, p/2, kappa)).

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "watsonmle/kappa.hpp"
#include "watsonmle/linalg.hpp"
#include "watsonmle/matrix.hpp"

namespace watsonmle {

struct WatsonParams {
  Vector mu;  // unit; mu and -mu describe the same distribution
  double kappa = 0.0;

  std::size_t dim() const noexcept { return mu.size(); }
  /// Throws DomainError unless p >= 2, ||mu|| = 1 (1e-10) and kappa is finite.
  void validate() const;
};

enum class Branch { Positive, Negative };
std::string_view to_string(Branch branch);

struct FitReport {
  WatsonParams params;
  double log_likelihood = 0.0;
  double r = 0.0;  // mu^T S mu
  Branch branch = Branch::Positive;
  bool degenerate_spectrum = false;
};

struct FitOptions {
  /// Clamp r into [eps, 1 - eps] instead of failing at r in {0, 1}.
  bool clamp_r = false;
  double clamp_eps = 1e-9;
  NewtonControls newton{};
  /// Eigengap below which the maximizing axis is not unique.
  double degenerate_gap = 1e-10;
};

/// Kummer parameters (1/2, p/2) of the Watson normalizer.
KummerParams watson_kummer_params(std::size_t p);

/// ln Gamma(p/2) - ln(2 pi^{p/2}): log density of the uniform law on S^{p-1}.
double uniform_log_density(std::size_t p);

/// ln c_p(kappa).
double log_normalizer(std::size_t p, double kappa, const EvalControls& ctl = {});

double log_pdf(std::span<const double> x, const WatsonParams& params);

/// n (kappa mu^T S mu - ln M(1/2, p/2, kappa) + gamma) with gamma the
/// uniform log density, so the result equals the sum of log_pdf over rows.
double log_likelihood(const Matrix& X, const WatsonParams& params);

/// Maximum-likelihood fit. Solves for kappa on both the leading and the
/// trailing eigenvector of the scatter matrix and keeps the better one.
FitReport fit(const Matrix& X, const FitOptions& options = {});

/// The same two-branch fit from a precomputed (possibly weighted) scatter
/// matrix; log_likelihood is scaled by `weight_total`.
FitReport fit_scatter(const ScatterMatrix& S, double weight_total, const FitOptions& options = {});

/// Exact sampler. The tangent-normal decomposition x = t mu + sqrt(1 - t^2) xi
/// is used with xi uniform on the sphere orthogonal to mu; t = cos(theta) and
/// theta is drawn by rejection from an adaptive piecewise-constant envelope.
///
/// Each sampler owns its generator; draws from different instances never
/// share state.
class WatsonSampler {
 public:
  WatsonSampler(WatsonParams params, std::uint64_t seed);

  Vector draw();
  Matrix draw(std::size_t n);

  /// Accepted / proposed, for diagnostics.
  double acceptance_rate() const;

 private:
  struct Piece {
    double left;
    double width;
    double height;  // sup of the scaled angular density on the piece
  };

  double angular_log_density(double theta) const;
  double draw_angle();

  WatsonParams params_;
  std::mt19937_64 rng_;
  double log_mode_ = 0.0;
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_area_;
  std::size_t proposed_ = 0;
  std::size_t accepted_ = 0;
};

/// n i.i.d. draws from W_p(mu, kappa); deterministic given seed.
Matrix sample(const WatsonParams& params, std::size_t n, std::uint64_t seed);

/// Uniform draws on S^{p-1}.
Matrix sample_uniform_sphere(std::size_t p, std::size_t n, std::uint64_t seed);

}  // namespace watsonmle
