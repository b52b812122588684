#pragma once

// Command implementations behind the `watsonmle` executable. Each command
// returns its JSON document (or writes its CSV table) so that tests can
// drive it without spawning a process.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "watsonmle/matrix.hpp"

namespace watsonmle::cli {

using Json = nlohmann::ordered_json;

/// Bad flag values detected after parsing; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool normalize = false;
  bool clamp_r = false;
  std::string out;             // empty: standard output
  std::string format = "json";  // json | csv
  bool skip_header = false;

  Json to_json() const;
};

struct SolveKappaArgs {
  double a = 0.5;
  double c = 0.0;
  double r = 0.0;
  std::string method = "newton";
};
Json cmd_solve_kappa(const SolveKappaArgs& args, const GlobalOptions& global);

struct BenchApproxArgs {
  std::vector<double> c_list{10.0, 100.0, 1000.0, 10000.0};
  double a = 0.5;
  double kappa_range_multiple = 200.0;  // largest |kappa*| / c
  double kappa_min_multiple = 0.01;     // smallest |kappa*| / c
  int grid_size = 64;                   // points per sign

  Json to_json() const;
};
inline constexpr const char* kBenchHeader = "c,kappa_star,r,method,estimate,rel_error";
/// Geometric kappa* grid for one c: negative values ascending, then positive.
std::vector<double> bench_kappa_grid(double c, const BenchApproxArgs& args);
void cmd_bench_approx(const BenchApproxArgs& args, std::ostream& csv);

/// Reads the data matrix, then normalizes it or insists on unit rows.
Matrix load_observations(const std::string& path, const GlobalOptions& global);

Json cmd_fit(const Matrix& X, const GlobalOptions& global);

struct MixtureArgs {
  std::size_t k = 2;
  std::string mode = "soft";  // soft | hard
  int restarts = 1;
  int max_iters = 200;
  double tol = 1e-8;
  std::string init = "random";  // random | diametrical
  std::optional<double> shared_kappa;
  bool equal_priors = false;
};
/// Runs `restarts` seeded fits (seed, seed+1, ...) and reports the one with
/// the highest final log-likelihood.
Json cmd_mixture(const Matrix& X, const MixtureArgs& args, const std::vector<std::size_t>* labels,
                 const GlobalOptions& global);

struct DiametricalArgs {
  std::size_t k = 2;
  int restarts = 1;
  int max_iters = 1000;
};
/// Best restart by final homogeneity.
Json cmd_diametrical(const Matrix& X, const DiametricalArgs& args,
                     const std::vector<std::size_t>* labels, const GlobalOptions& global);

struct SampleArgs {
  std::size_t p = 3;
  double kappa = 0.0;
  std::size_t n = 100;
  /// "e<k>" (1-based axis), "random:<seed>", or comma-separated components.
  std::string mu = "e1";
};
Vector parse_mu(const std::string& spec, std::size_t p);
Matrix cmd_sample(const SampleArgs& args, const GlobalOptions& global);

Json cmd_metrics(const Matrix& X, const std::vector<std::size_t>& partition, const Matrix& centroids,
                 const std::vector<std::size_t>* labels);

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 usage error, 2 numeric, domain or I/O failure.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace watsonmle::cli
