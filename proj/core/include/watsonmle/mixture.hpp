#pragma once

// Mixtures of Watson distributions fitted by EM (soft or hard assignments),
// diametrical clustering, and internal cluster-quality scores.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "watsonmle/matrix.hpp"
#include "watsonmle/watson.hpp"

namespace watsonmle {

struct MixtureComponent {
  double weight = 0.0;  // prior pi_j
  WatsonParams params;
};

struct MixtureModel {
  std::vector<MixtureComponent> components;

  std::size_t size() const noexcept { return components.size(); }
  /// Priors nonnegative and summing to 1 (1e-12); every mu_j unit.
  void validate() const;
};

/// n x K matrix of posterior weights beta_ij.
using Responsibilities = Matrix;

enum class AssignmentMode { Soft, Hard };
enum class InitScheme { RandomPoints, DiametricalWarmStart };
enum class PriorPolicy { Learned, FixedEqual };

struct KappaPolicy {
  enum class Kind { PerComponent, SharedFixed };
  Kind kind = Kind::PerComponent;
  double value = 0.0;  // used by SharedFixed

  static KappaPolicy per_component() { return {}; }
  static KappaPolicy shared_fixed(double kappa) { return {Kind::SharedFixed, kappa}; }
};

struct EmConfig {
  AssignmentMode mode = AssignmentMode::Soft;
  int max_iters = 200;
  double ll_rel_tol = 1e-8;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::RandomPoints;
  KappaPolicy kappa_policy{};
  PriorPolicy prior_policy = PriorPolicy::Learned;
  /// Clamp r_j into [1e-9, 1 - 1e-9] in the M-step so that a component
  /// collapsing onto a single axis does not abort the run.
  bool clamp_r = true;

  void validate() const;
};

struct MStepOptions {
  KappaPolicy kappa_policy{};
  PriorPolicy prior_policy = PriorPolicy::Learned;
  bool clamp_r = true;
};

struct MStepResult {
  MixtureModel model;
  /// Components whose responsibility column summed to zero and were re-seeded.
  std::vector<std::size_t> reseeded;
};

/// Row-normalized pi_j W_p(x_i | mu_j, kappa_j), computed in the log domain.
Responsibilities e_step_soft(const Matrix& X, const MixtureModel& model);

/// One-hot rows at argmax_j ln pi_j + ln W_p(x_i | mu_j, kappa_j); ties go to
/// the lowest index.
Responsibilities e_step_hard(const Matrix& X, const MixtureModel& model);

/// sum_i ln sum_j pi_j W_p(x_i | mu_j, kappa_j).
double mixture_log_likelihood(const Matrix& X, const MixtureModel& model);

/// Per-component weighted Watson fit plus priors. Empty components are
/// re-seeded at the worst-fitting point under the re-estimated components.
MStepResult m_step(const Matrix& X, const Responsibilities& beta, const MStepOptions& options = {});

struct EmResult {
  MixtureModel model;
  Responsibilities beta;
  std::vector<double> ll_trace;  // mixture log-likelihood of each E-step's model
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> log;  // re-seed events
};

/// K distinct data rows chosen by a seeded shuffle.
std::vector<Vector> random_point_centroids(const Matrix& X, std::size_t K, std::uint64_t seed);

EmResult em_fit(const Matrix& X, std::size_t K, const EmConfig& config);
/// EM from a caller-supplied starting model.
EmResult em_fit_from(const Matrix& X, MixtureModel initial, const EmConfig& config);

/// Index of the largest entry in each row, lowest index on ties.
std::vector<std::size_t> hard_labels(const Responsibilities& beta);

struct DiametricalResult {
  std::vector<Vector> centroids;
  std::vector<std::size_t> partition;
  int iterations = 0;
  bool converged = false;
  /// H_avg after each M-step.
  std::vector<double> homogeneity_trace;
};

inline constexpr int kDiametricalMaxIters = 1000;

DiametricalResult diametrical(const Matrix& X, std::size_t K, std::uint64_t seed);
DiametricalResult diametrical_from(const Matrix& X, std::vector<Vector> centroids,
                                   int max_iters = kDiametricalMaxIters);

struct ClusterMetrics {
  double homogeneity = 0.0;
  double separation = 0.0;
};

/// H_avg = (1/n) sum_j sum_{x in X_j} (x^T mu_j)^2 and the size-weighted
/// average over ordered pairs j != l of min(mu_j^T mu_l, -mu_j^T mu_l).
ClusterMetrics metrics(const Matrix& X, std::span<const std::size_t> partition,
                       const std::vector<Vector>& centroids);

/// Percentage of points labelled correctly under the best matching of
/// predicted to true labels (at most 8 labels).
double label_accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

}  // namespace watsonmle
