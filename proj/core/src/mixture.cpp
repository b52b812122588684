#include "watsonmle/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "watsonmle/errors.hpp"

namespace watsonmle {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInitialKappa = 1.0;

// ln pi_j + ln W_p(x | mu_j, kappa_j) for every row and component.
Matrix component_log_densities(const Matrix& X, const MixtureModel& model) {
  model.validate();
  const std::size_t K = model.size();
  const std::size_t p = X.cols();
  require_unit_rows(X);
  std::vector<double> offset(K);
  for (std::size_t j = 0; j < K; ++j) {
    const auto& comp = model.components[j];
    if (comp.params.dim() != p) throw DomainError("component dimension does not match data");
    const double log_prior = comp.weight > 0.0 ? std::log(comp.weight) : kNegInf;
    offset[j] = log_prior + log_normalizer(p, comp.params.kappa);
  }
  Matrix L(X.rows(), K);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    for (std::size_t j = 0; j < K; ++j) {
      const auto& comp = model.components[j];
      const double proj = dot(comp.params.mu, x);
      L(i, j) = offset[j] + comp.params.kappa * proj * proj;
    }
  }
  return L;
}

std::size_t row_argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

// Normalizes each row of log-densities in place into posteriors; returns
// the mixture log-likelihood.
double normalize_rows(Matrix& L) {
  double ll = 0.0;
  for (std::size_t i = 0; i < L.rows(); ++i) {
    auto row = L.row(i);
    const double peak = row[row_argmax(row)];
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (double& v : row) v /= total;
    ll += peak + std::log(total);
  }
  return ll;
}

double log_sum_exp_rows(const Matrix& L) {
  double ll = 0.0;
  for (std::size_t i = 0; i < L.rows(); ++i) {
    const auto row = L.row(i);
    const double peak = row[row_argmax(row)];
    double total = 0.0;
    for (double v : row) total += std::exp(v - peak);
    ll += peak + std::log(total);
  }
  return ll;
}

Responsibilities one_hot(const Matrix& L) {
  Responsibilities beta(L.rows(), L.cols());
  for (std::size_t i = 0; i < L.rows(); ++i) beta(i, row_argmax(L.row(i))) = 1.0;
  return beta;
}

std::vector<std::size_t> assign_diametrical(const Matrix& X, const std::vector<Vector>& centroids) {
  std::vector<std::size_t> labels(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t h = 0; h < centroids.size(); ++h) {
      const double proj = dot(X.row(i), centroids[h]);
      if (proj * proj > best_val) {
        best_val = proj * proj;
        best = h;
      }
    }
    labels[i] = best;
  }
  return labels;
}

Vector to_vector(std::span<const double> x) { return Vector(x.begin(), x.end()); }

MixtureModel initial_model(const std::vector<Vector>& centroids, const KappaPolicy& policy) {
  MixtureModel model;
  const double kappa = policy.kind == KappaPolicy::Kind::SharedFixed ? policy.value : kInitialKappa;
  const double weight = 1.0 / static_cast<double>(centroids.size());
  for (const Vector& mu : centroids) {
    Vector unit = mu;
    const double len = norm(unit);
    for (double& v : unit) v /= len;
    model.components.push_back({weight, {std::move(unit), kappa}});
  }
  return model;
}

}  // namespace

void MixtureModel::validate() const {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& comp : components) {
    if (!(comp.weight >= 0.0)) throw DomainError("mixture priors must be nonnegative");
    total += comp.weight;
    comp.params.validate();
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture priors must sum to 1");
}

void EmConfig::validate() const {
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(ll_rel_tol > 0.0)) throw DomainError("ll_rel_tol must be positive");
  if (kappa_policy.kind == KappaPolicy::Kind::SharedFixed && !std::isfinite(kappa_policy.value)) {
    throw DomainError("shared kappa must be finite");
  }
}

Responsibilities e_step_soft(const Matrix& X, const MixtureModel& model) {
  Matrix L = component_log_densities(X, model);
  normalize_rows(L);
  return L;
}

Responsibilities e_step_hard(const Matrix& X, const MixtureModel& model) {
  return one_hot(component_log_densities(X, model));
}

double mixture_log_likelihood(const Matrix& X, const MixtureModel& model) {
  return log_sum_exp_rows(component_log_densities(X, model));
}

std::vector<std::size_t> hard_labels(const Responsibilities& beta) {
  std::vector<std::size_t> labels(beta.rows());
  for (std::size_t i = 0; i < beta.rows(); ++i) labels[i] = row_argmax(beta.row(i));
  return labels;
}

MStepResult m_step(const Matrix& X, const Responsibilities& beta, const MStepOptions& options) {
  const std::size_t n = X.rows();
  const std::size_t K = beta.cols();
  if (beta.rows() != n) throw DomainError("responsibility rows do not match data rows");
  if (K == 0) throw DomainError("responsibilities need at least one column");

  const bool fixed_kappa = options.kappa_policy.kind == KappaPolicy::Kind::SharedFixed;
  FitOptions fit_options;
  fit_options.clamp_r = options.clamp_r;

  MStepResult out;
  out.model.components.resize(K);
  std::vector<bool> filled(K, false);
  Vector weights(n);
  for (std::size_t j = 0; j < K; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = beta(i, j);
      total += weights[i];
    }
    if (!(total > 0.0)) continue;

    const ScatterMatrix S = scatter(X, weights);
    MixtureComponent& comp = out.model.components[j];
    if (fixed_kappa) {
      const EigDecomposition eig = sym_eig(S);
      const double kappa = options.kappa_policy.value;
      comp.params = {kappa >= 0.0 ? eig.vectors.front() : eig.vectors.back(), kappa};
    } else {
      comp.params = fit_scatter(S, total, fit_options).params;
    }
    comp.weight = total / static_cast<double>(n);
    filled[j] = true;
  }

  // Re-seed empty components at the points explained worst by the others.
  std::vector<std::size_t> empty;
  for (std::size_t j = 0; j < K; ++j)
    if (!filled[j]) empty.push_back(j);
  if (!empty.empty()) {
    MixtureModel present;
    double present_total = 0.0;
    for (std::size_t j = 0; j < K; ++j)
      if (filled[j]) present_total += out.model.components[j].weight;
    for (std::size_t j = 0; j < K; ++j) {
      if (!filled[j]) continue;
      MixtureComponent comp = out.model.components[j];
      comp.weight /= present_total;
      present.components.push_back(std::move(comp));
    }
    const Matrix L = component_log_densities(X, present);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> best(n);
    for (std::size_t i = 0; i < n; ++i) best[i] = L(i, row_argmax(L.row(i)));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return best[x] < best[y]; });
    const double kappa = fixed_kappa ? options.kappa_policy.value : kInitialKappa;
    for (std::size_t k = 0; k < empty.size(); ++k) {
      const std::size_t i = order[k % n];
      out.model.components[empty[k]] = {1.0 / static_cast<double>(n), {to_vector(X.row(i)), kappa}};
      out.reseeded.push_back(empty[k]);
    }
  }

  if (options.prior_policy == PriorPolicy::FixedEqual) {
    for (auto& comp : out.model.components) comp.weight = 1.0 / static_cast<double>(K);
  } else {
    double total = 0.0;
    for (const auto& comp : out.model.components) total += comp.weight;
    for (auto& comp : out.model.components) comp.weight /= total;
  }
  return out;
}

std::vector<Vector> random_point_centroids(const Matrix& X, std::size_t K, std::uint64_t seed) {
  if (K == 0) throw DomainError("K must be at least 1");
  if (X.rows() < K) throw DomainError("need at least K observations");
  std::vector<std::size_t> idx(X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates; std::shuffle's draw pattern is library-specific.
  std::vector<Vector> centroids;
  for (std::size_t k = 0; k < K; ++k) {
    const std::uint64_t span = X.rows() - k;
    const std::size_t pick = k + static_cast<std::size_t>(rng() % span);
    std::swap(idx[k], idx[pick]);
    centroids.push_back(to_vector(X.row(idx[k])));
  }
  return centroids;
}

EmResult em_fit(const Matrix& X, std::size_t K, const EmConfig& config) {
  config.validate();
  if (K == 0) throw DomainError("K must be at least 1");
  if (X.rows() < K) throw DomainError("need at least K observations");
  std::vector<Vector> centroids = config.init == InitScheme::DiametricalWarmStart
                                      ? diametrical(X, K, config.seed).centroids
                                      : random_point_centroids(X, K, config.seed);
  return em_fit_from(X, initial_model(centroids, config.kappa_policy), config);
}

EmResult em_fit_from(const Matrix& X, MixtureModel initial, const EmConfig& config) {
  config.validate();
  initial.validate();
  if (X.rows() < initial.size()) throw DomainError("need at least K observations");

  const MStepOptions m_options{config.kappa_policy, config.prior_policy, config.clamp_r};
  EmResult result;
  result.model = std::move(initial);
  std::vector<std::size_t> previous_labels;

  for (int it = 0;; ++it) {
    Matrix L = component_log_densities(X, result.model);
    double ll = 0.0;
    if (config.mode == AssignmentMode::Soft) {
      ll = normalize_rows(L);
      result.beta = std::move(L);
    } else {
      ll = log_sum_exp_rows(L);
      result.beta = one_hot(L);
    }
    result.ll_trace.push_back(ll);

    if (it > 0) {
      const double prev = result.ll_trace[result.ll_trace.size() - 2];
      bool done = std::abs(ll - prev) <= config.ll_rel_tol * std::abs(prev);
      if (config.mode == AssignmentMode::Hard) {
        const auto labels = hard_labels(result.beta);
        done = done || labels == previous_labels;
      }
      if (done) {
        result.converged = true;
        break;
      }
    }
    if (it == config.max_iters) break;
    if (config.mode == AssignmentMode::Hard) previous_labels = hard_labels(result.beta);

    MStepResult step = m_step(X, result.beta, m_options);
    for (std::size_t j : step.reseeded) {
      std::ostringstream msg;
      msg << "iteration " << it + 1 << ": component " << j << " was empty and has been re-seeded";
      result.log.push_back(msg.str());
    }
    result.model = std::move(step.model);
    result.iterations = it + 1;
  }
  return result;
}

DiametricalResult diametrical(const Matrix& X, std::size_t K, std::uint64_t seed) {
  return diametrical_from(X, random_point_centroids(X, K, seed));
}

DiametricalResult diametrical_from(const Matrix& X, std::vector<Vector> centroids, int max_iters) {
  if (centroids.empty()) throw DomainError("diametrical clustering needs K >= 1");
  if (X.rows() == 0) throw DomainError("diametrical clustering of an empty data matrix");
  require_unit_rows(X);
  const std::size_t p = X.cols();
  for (Vector& mu : centroids) {
    if (mu.size() != p) throw DomainError("centroid dimension does not match data");
    const double len = norm(mu);
    if (!(len > 0.0)) throw DomainError("centroids must be nonzero");
    for (double& v : mu) v /= len;
  }
  const std::size_t K = centroids.size();

  DiametricalResult result;
  std::vector<std::size_t> partition = assign_diametrical(X, centroids);

  for (int it = 0; it < max_iters; ++it) {
    // M-step: one power-iteration step mu_j <- A_j mu_j / ||A_j mu_j||.
    std::vector<Vector> next(K, Vector(p, 0.0));
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
      const std::size_t j = partition[i];
      const auto x = X.row(i);
      const double proj = dot(x, centroids[j]);
      for (std::size_t k = 0; k < p; ++k) next[j][k] += proj * x[k];
      ++counts[j];
    }
    std::vector<std::size_t> used;
    for (std::size_t j = 0; j < K; ++j) {
      if (counts[j] == 0) {
        // Re-seed at the point with the smallest best squared cosine.
        std::size_t worst = X.rows();
        double worst_val = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < X.rows(); ++i) {
          if (std::find(used.begin(), used.end(), i) != used.end()) continue;
          double best = 0.0;
          for (const Vector& mu : centroids) {
            const double proj = dot(X.row(i), mu);
            best = std::max(best, proj * proj);
          }
          if (best < worst_val) {
            worst_val = best;
            worst = i;
          }
        }
        if (worst < X.rows()) {
          used.push_back(worst);
          next[j] = to_vector(X.row(worst));
        } else {
          next[j] = centroids[j];
        }
        continue;
      }
      const double len = norm(next[j]);
      if (len > 0.0) {
        for (double& v : next[j]) v /= len;
      } else {
        next[j] = centroids[j];
      }
    }
    centroids = std::move(next);
    result.homogeneity_trace.push_back(metrics(X, partition, centroids).homogeneity);
    result.iterations = it + 1;

    std::vector<std::size_t> updated = assign_diametrical(X, centroids);
    if (updated == partition) {
      result.converged = true;
      break;
    }
    partition = std::move(updated);
  }
  result.centroids = std::move(centroids);
  result.partition = std::move(partition);
  return result;
}

ClusterMetrics metrics(const Matrix& X, std::span<const std::size_t> partition,
                       const std::vector<Vector>& centroids) {
  if (partition.size() != X.rows()) throw DomainError("partition size does not match data rows");
  if (X.rows() == 0) throw DomainError("metrics of an empty data matrix");
  const std::size_t K = centroids.size();
  std::vector<double> sizes(K, 0.0);
  double homogeneity = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const std::size_t j = partition[i];
    if (j >= K) throw DomainError("partition label out of range");
    const double proj = dot(X.row(i), centroids[j]);
    homogeneity += proj * proj;
    sizes[j] += 1.0;
  }

  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t l = 0; l < K; ++l) {
      if (j == l) continue;
      const double w = sizes[j] * sizes[l];
      const double v = dot(centroids[j], centroids[l]);
      weighted += w * std::min(v, -v);
      total += w;
    }
  }
  return {homogeneity / static_cast<double>(X.rows()), total > 0.0 ? weighted / total : 0.0};
}

double label_accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) throw DomainError("label vectors differ in length");
  if (predicted.empty()) throw DomainError("label_accuracy of empty labelings");
  const std::size_t K =
      1 + std::max(*std::max_element(predicted.begin(), predicted.end()),
                   *std::max_element(truth.begin(), truth.end()));
  if (K > 8) throw DomainError("label_accuracy supports at most 8 labels");

  std::vector<std::size_t> confusion(K * K, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) ++confusion[predicted[i] * K + truth[i]];

  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < K; ++k) hits += confusion[k * K + perm[k]];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 100.0 * static_cast<double>(best) / static_cast<double>(predicted.size());
}

}  // namespace watsonmle
