#include "watsonmle_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "watsonmle/errors.hpp"
#include "watsonmle/kappa.hpp"
#include "watsonmle/mixture.hpp"
#include "watsonmle/watson.hpp"
#include "watsonmle_cli/io.hpp"

namespace watsonmle::cli {
namespace {

constexpr KappaMethod kClosedForms[] = {KappaMethod::L, KappaMethod::B, KappaMethod::U, KappaMethod::BBG,
                                        KappaMethod::Combined};
constexpr KappaMethod kBenchMethods[] = {KappaMethod::BBG, KappaMethod::L,        KappaMethod::B,
                                         KappaMethod::U,   KappaMethod::Combined, KappaMethod::Newton};

Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

Json model_json(const MixtureModel& model) {
  Json comps = Json::array();
  for (const auto& comp : model.components) {
    comps.push_back({{"weight", comp.weight}, {"kappa", comp.params.kappa}, {"mu", comp.params.mu}});
  }
  return comps;
}

void check_labels(const std::vector<std::size_t>* labels, std::size_t n) {
  if (labels && labels->size() != n) {
    throw DomainError("label file has " + std::to_string(labels->size()) + " entries for " +
                      std::to_string(n) + " observations");
  }
}

std::vector<Vector> rows_of(const Matrix& M) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < M.rows(); ++i) out.emplace_back(M.row(i).begin(), M.row(i).end());
  return out;
}

void write_output(const GlobalOptions& global, std::ostream& out, const std::string& text) {
  if (global.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(global.out, std::ios::binary);
  if (!file) throw IoError("cannot write output file '" + global.out + "'");
  file << text;
  if (!file) throw IoError("failed while writing '" + global.out + "'");
}

std::string labels_csv(const std::vector<std::size_t>& labels) {
  std::ostringstream csv;
  csv << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) csv << i << ',' << labels[i] << '\n';
  return csv.str();
}

}  // namespace

Json GlobalOptions::to_json() const {
  return {{"seed", seed},     {"normalize", normalize}, {"clamp_r", clamp_r},
          {"out", out},       {"format", format},       {"header", skip_header ? "skip" : "none"}};
}

Json BenchApproxArgs::to_json() const {
  return {{"c_list", c_list},
          {"a", a},
          {"kappa_range_multiple", kappa_range_multiple},
          {"kappa_min_multiple", kappa_min_multiple},
          {"grid_size", grid_size}};
}

// ---------------------------------------------------------------------------

Json cmd_solve_kappa(const SolveKappaArgs& args, const GlobalOptions& global) {
  const auto method = parse_kappa_method(args.method);
  if (!method) throw UsageError("unknown method '" + args.method + "' (L, B, U, BBG, Combined, Newton)");
  const KummerParams params{args.a, args.c};
  params.validate();
  const double r = global.clamp_r ? clamp_r(args.r) : args.r;

  const SolveReport report = solve_kappa(params, r, *method);
  Json out;
  out["command"] = "solve-kappa";
  out["config"] = {{"a", args.a}, {"c", args.c}, {"r", args.r}, {"method", to_string(*method)},
                   {"clamp_r", global.clamp_r}};
  out["r_used"] = r;
  out["kappa"] = report.kappa;
  out["method"] = to_string(report.method);
  if (*method == KappaMethod::Newton) {
    out["residual"] = report.residual;
    out["iterations"] = report.iterations;
    out["bracket"] = {report.bracket.low, report.bracket.high};
  }
  out["combined_choice"] = to_string(combined_choice(params, r));
  Json estimates;
  for (KappaMethod m : kClosedForms) estimates[std::string(to_string(m))] = solve_kappa(params, r, m).kappa;
  if (*method == KappaMethod::Newton) estimates["Newton"] = report.kappa;
  out["estimates"] = estimates;
  return out;
}

std::vector<double> bench_kappa_grid(double c, const BenchApproxArgs& args) {
  const double lo = args.kappa_min_multiple * c;
  const double hi = args.kappa_range_multiple * c;
  const int m = args.grid_size;
  std::vector<double> magnitudes(m);
  for (int i = 0; i < m; ++i) magnitudes[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (m - 1));
  magnitudes.front() = lo;
  magnitudes.back() = hi;
  std::vector<double> grid;
  for (auto it = magnitudes.rbegin(); it != magnitudes.rend(); ++it) grid.push_back(-*it);
  grid.insert(grid.end(), magnitudes.begin(), magnitudes.end());
  return grid;
}

void cmd_bench_approx(const BenchApproxArgs& args, std::ostream& csv) {
  if (args.c_list.empty()) throw UsageError("--c-list must name at least one c");
  if (args.grid_size < 2) throw UsageError("--grid-size must be at least 2");
  if (!(args.kappa_min_multiple > 0.0) || !(args.kappa_range_multiple > args.kappa_min_multiple)) {
    throw UsageError("kappa range multiples must satisfy 0 < min < max");
  }
  csv << kBenchHeader << '\n';
  for (double c : args.c_list) {
    const KummerParams params{args.a, c};
    params.validate();
    for (double kappa_star : bench_kappa_grid(c, args)) {
      const double r = kummer_ratio(params, kappa_star);
      for (KappaMethod m : kBenchMethods) {
        const double estimate = solve_kappa(params, r, m).kappa;
        const double rel = std::abs(estimate - kappa_star) / std::abs(kappa_star);
        csv << format_double(c) << ',' << format_double(kappa_star) << ',' << format_double(r) << ','
            << to_string(m) << ',' << format_double(estimate) << ',' << format_double(rel) << '\n';
      }
    }
  }
}

Matrix load_observations(const std::string& path, const GlobalOptions& global) {
  Matrix X = read_matrix_file(path, {global.skip_header});
  if (global.normalize) {
    normalize_rows(X);
  } else {
    require_unit_rows(X);
  }
  return X;
}

Json cmd_fit(const Matrix& X, const GlobalOptions& global) {
  FitOptions options;
  options.clamp_r = global.clamp_r;
  const FitReport report = fit(X, options);
  Json out;
  out["command"] = "fit";
  out["config"] = global.to_json();
  out["n"] = X.rows();
  out["p"] = X.cols();
  out["kappa"] = report.params.kappa;
  out["mu"] = report.params.mu;
  out["r"] = report.r;
  out["branch"] = to_string(report.branch);
  out["log_likelihood"] = report.log_likelihood;
  out["degenerate_spectrum"] = report.degenerate_spectrum;
  return out;
}

Json cmd_mixture(const Matrix& X, const MixtureArgs& args, const std::vector<std::size_t>* labels,
                 const GlobalOptions& global) {
  if (args.k < 1) throw UsageError("--k must be at least 1");
  if (args.restarts < 1) throw UsageError("--restarts must be at least 1");
  if (args.mode != "soft" && args.mode != "hard") throw UsageError("--mode must be soft or hard");
  if (args.init != "random" && args.init != "diametrical") throw UsageError("--init must be random or diametrical");
  check_labels(labels, X.rows());

  EmConfig config;
  config.mode = args.mode == "hard" ? AssignmentMode::Hard : AssignmentMode::Soft;
  config.max_iters = args.max_iters;
  config.ll_rel_tol = args.tol;
  config.init = args.init == "diametrical" ? InitScheme::DiametricalWarmStart : InitScheme::RandomPoints;
  if (args.shared_kappa) config.kappa_policy = KappaPolicy::shared_fixed(*args.shared_kappa);
  config.prior_policy = args.equal_priors ? PriorPolicy::FixedEqual : PriorPolicy::Learned;
  config.clamp_r = true;

  Json runs = Json::array();
  std::optional<EmResult> best;
  std::size_t best_index = 0;
  double accuracy_sum = 0.0;
  double accuracy_best = 0.0;
  for (int r = 0; r < args.restarts; ++r) {
    config.seed = global.seed + static_cast<std::uint64_t>(r);
    EmResult result = em_fit(X, args.k, config);
    Json run = {{"seed", config.seed},
                {"final_log_likelihood", result.ll_trace.back()},
                {"iterations", result.iterations},
                {"converged", result.converged}};
    if (labels) {
      const double acc = label_accuracy(hard_labels(result.beta), *labels);
      run["accuracy"] = acc;
      accuracy_sum += acc;
      accuracy_best = std::max(accuracy_best, acc);
    }
    runs.push_back(run);
    if (!best || result.ll_trace.back() > best->ll_trace.back()) {
      best = std::move(result);
      best_index = static_cast<std::size_t>(r);
    }
  }

  const auto assignments = hard_labels(best->beta);
  std::vector<Vector> centroids;
  for (const auto& comp : best->model.components) centroids.push_back(comp.params.mu);
  const ClusterMetrics m = metrics(X, assignments, centroids);

  Json out;
  out["command"] = "mixture";
  Json cfg = global.to_json();
  cfg["clamp_r"] = config.clamp_r;
  cfg["k"] = args.k;
  cfg["mode"] = args.mode;
  cfg["restarts"] = args.restarts;
  cfg["max_iters"] = args.max_iters;
  cfg["tol"] = args.tol;
  cfg["init"] = args.init;
  cfg["shared_kappa"] = args.shared_kappa ? Json(*args.shared_kappa) : Json(nullptr);
  cfg["equal_priors"] = args.equal_priors;
  out["config"] = cfg;
  out["restarts"] = runs;
  out["best_restart"] = best_index;
  out["model"] = model_json(best->model);
  out["ll_trace"] = best->ll_trace;
  out["iterations"] = best->iterations;
  out["converged"] = best->converged;
  out["assignments"] = assignments;
  out["metrics"] = {{"homogeneity", m.homogeneity}, {"separation", m.separation}};
  if (labels) {
    out["accuracy"] = label_accuracy(assignments, *labels);
    out["mean_accuracy"] = accuracy_sum / args.restarts;
    out["best_accuracy"] = accuracy_best;
  }
  out["log"] = best->log;
  return out;
}

Json cmd_diametrical(const Matrix& X, const DiametricalArgs& args, const std::vector<std::size_t>* labels,
                     const GlobalOptions& global) {
  if (args.k < 1) throw UsageError("--k must be at least 1");
  if (args.restarts < 1) throw UsageError("--restarts must be at least 1");
  if (args.max_iters < 1) throw UsageError("--max-iters must be at least 1");
  check_labels(labels, X.rows());

  Json runs = Json::array();
  std::optional<DiametricalResult> best;
  double best_h = 0.0;
  std::size_t best_index = 0;
  double accuracy_sum = 0.0;
  double accuracy_best = 0.0;
  for (int r = 0; r < args.restarts; ++r) {
    const std::uint64_t seed = global.seed + static_cast<std::uint64_t>(r);
    DiametricalResult result = diametrical_from(X, random_point_centroids(X, args.k, seed), args.max_iters);
    const double h = metrics(X, result.partition, result.centroids).homogeneity;
    Json run = {{"seed", seed}, {"homogeneity", h}, {"iterations", result.iterations},
                {"converged", result.converged}};
    if (labels) {
      const double acc = label_accuracy(result.partition, *labels);
      run["accuracy"] = acc;
      accuracy_sum += acc;
      accuracy_best = std::max(accuracy_best, acc);
    }
    runs.push_back(run);
    if (!best || h > best_h) {
      best = std::move(result);
      best_h = h;
      best_index = static_cast<std::size_t>(r);
    }
  }

  const ClusterMetrics m = metrics(X, best->partition, best->centroids);
  Json out;
  out["command"] = "diametrical";
  Json cfg = global.to_json();
  cfg["k"] = args.k;
  cfg["restarts"] = args.restarts;
  cfg["max_iters"] = args.max_iters;
  out["config"] = cfg;
  out["restarts"] = runs;
  out["best_restart"] = best_index;
  Json centroids = Json::array();
  for (const Vector& mu : best->centroids) centroids.push_back(mu);
  out["centroids"] = centroids;
  out["partition"] = best->partition;
  out["iterations"] = best->iterations;
  out["converged"] = best->converged;
  out["homogeneity_trace"] = best->homogeneity_trace;
  out["metrics"] = {{"homogeneity", m.homogeneity}, {"separation", m.separation}};
  if (labels) {
    out["accuracy"] = label_accuracy(best->partition, *labels);
    out["mean_accuracy"] = accuracy_sum / args.restarts;
    out["best_accuracy"] = accuracy_best;
  }
  return out;
}

Vector parse_mu(const std::string& spec, std::size_t p) {
  if (spec.size() > 1 && spec[0] == 'e') {
    std::size_t axis = 0;
    const auto [end, ec] = std::from_chars(spec.data() + 1, spec.data() + spec.size(), axis);
    if (ec != std::errc() || end != spec.data() + spec.size() || axis < 1 || axis > p) {
      throw UsageError("--mu " + spec + ": axis must be e1 .. e" + std::to_string(p));
    }
    Vector mu(p, 0.0);
    mu[axis - 1] = 1.0;
    return mu;
  }
  if (spec.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    const char* first = spec.data() + 7;
    const auto [end, ec] = std::from_chars(first, spec.data() + spec.size(), seed);
    if (ec != std::errc() || end != spec.data() + spec.size()) throw UsageError("--mu " + spec + ": bad seed");
    const Matrix draw = sample_uniform_sphere(p, 1, seed);
    return Vector(draw.row(0).begin(), draw.row(0).end());
  }
  std::istringstream in(spec);
  Matrix parsed;
  try {
    parsed = read_matrix(in);
  } catch (const IoError& e) {
    throw UsageError("--mu " + spec + ": " + e.what());
  }
  if (parsed.rows() != 1 || parsed.cols() != p) {
    throw UsageError("--mu must list exactly " + std::to_string(p) + " components");
  }
  Vector mu(parsed.row(0).begin(), parsed.row(0).end());
  const double len = norm(mu);
  if (!(len > 0.0)) throw DomainError("--mu must be a nonzero vector");
  for (double& v : mu) v /= len;
  return mu;
}

Matrix cmd_sample(const SampleArgs& args, const GlobalOptions& global) {
  if (args.p < 2) throw UsageError("--p must be at least 2");
  if (args.n < 1) throw UsageError("--n must be at least 1");
  return sample({parse_mu(args.mu, args.p), args.kappa}, args.n, global.seed);
}

Json cmd_metrics(const Matrix& X, const std::vector<std::size_t>& partition, const Matrix& centroids,
                 const std::vector<std::size_t>* labels) {
  if (centroids.cols() != X.cols()) throw DomainError("centroid dimension does not match data");
  require_unit_rows(centroids);
  const ClusterMetrics m = metrics(X, partition, rows_of(centroids));
  Json out;
  out["command"] = "metrics";
  out["n"] = X.rows();
  out["k"] = centroids.rows();
  out["homogeneity"] = m.homogeneity;
  out["separation"] = m.separation;
  if (labels) {
    check_labels(labels, X.rows());
    out["accuracy"] = label_accuracy(partition, *labels);
  }
  return out;
}

// ---------------------------------------------------------------------------

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Watson distribution estimation and axial clustering", "watsonmle"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_flag("--normalize", global.normalize, "Rescale input rows to unit norm");
  app.add_flag("--clamp-r", global.clamp_r, "Clamp r into [1e-9, 1 - 1e-9] instead of failing");
  app.add_option("--out", global.out, "Write the result to this file instead of stdout");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  std::string header = "none";
  app.add_option("--header", header, "Input header handling")
      ->check(CLI::IsMember({"none", "skip"}))
      ->capture_default_str();

  SolveKappaArgs solve_args;
  auto* solve = app.add_subcommand("solve-kappa", "Solve g(a, c; kappa) = r");
  solve->add_option("--a", solve_args.a, "Kummer parameter a")->capture_default_str();
  solve->add_option("--c", solve_args.c, "Kummer parameter c")->required();
  solve->add_option("--r", solve_args.r, "Target ratio r")->required();
  solve->add_option("--method", solve_args.method, "L, B, U, BBG, Combined or Newton")->capture_default_str();

  BenchApproxArgs bench_args;
  auto* bench = app.add_subcommand("bench-approx", "Relative errors of all estimators on a kappa* grid (CSV)");
  bench->add_option("--c-list", bench_args.c_list, "Values of c")->delimiter(',')->capture_default_str();
  bench->add_option("--a", bench_args.a, "Kummer parameter a")->capture_default_str();
  bench->add_option("--kappa-range-multiple", bench_args.kappa_range_multiple, "Largest |kappa*| / c")
      ->capture_default_str();
  bench->add_option("--kappa-min-multiple", bench_args.kappa_min_multiple, "Smallest |kappa*| / c")
      ->capture_default_str();
  bench->add_option("--grid-size", bench_args.grid_size, "Grid points per sign")->capture_default_str();

  std::string input;
  std::string labels_path;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood Watson fit");
  fit_cmd->add_option("input", input, "Data file ('-' for stdin)")->required();

  MixtureArgs mix_args;
  auto* mix = app.add_subcommand("mixture", "EM for a mixture of Watson distributions");
  mix->add_option("input", input, "Data file ('-' for stdin)")->required();
  mix->add_option("--k", mix_args.k, "Number of components")->required();
  mix->add_option("--mode", mix_args.mode, "soft or hard assignments")->capture_default_str();
  mix->add_option("--restarts", mix_args.restarts, "Seeded restarts")->capture_default_str();
  mix->add_option("--max-iters", mix_args.max_iters, "EM iteration cap")->capture_default_str();
  mix->add_option("--tol", mix_args.tol, "Relative log-likelihood tolerance")->capture_default_str();
  mix->add_option("--init", mix_args.init, "random or diametrical")->capture_default_str();
  mix->add_option("--shared-kappa", mix_args.shared_kappa, "Fix every kappa_j to this value");
  mix->add_flag("--equal-priors", mix_args.equal_priors, "Keep pi_j = 1/K");
  mix->add_option("--labels", labels_path, "True labels for accuracy");

  DiametricalArgs diam_args;
  auto* diam = app.add_subcommand("diametrical", "Diametrical clustering");
  diam->add_option("input", input, "Data file ('-' for stdin)")->required();
  diam->add_option("--k", diam_args.k, "Number of clusters")->required();
  diam->add_option("--restarts", diam_args.restarts, "Seeded restarts")->capture_default_str();
  diam->add_option("--max-iters", diam_args.max_iters, "Iteration cap")->capture_default_str();
  diam->add_option("--labels", labels_path, "True labels for accuracy");

  SampleArgs sample_args;
  auto* samp = app.add_subcommand("sample", "Draw from a Watson distribution (CSV rows)");
  samp->add_option("--p", sample_args.p, "Dimension")->required();
  samp->add_option("--kappa", sample_args.kappa, "Concentration")->required();
  samp->add_option("--n", sample_args.n, "Number of draws")->required();
  samp->add_option("--mu", sample_args.mu, "e<k>, random:<seed> or comma-separated vector")
      ->capture_default_str();

  std::string partition_path;
  std::string centroids_path;
  auto* met = app.add_subcommand("metrics", "Homogeneity and separation of a clustering");
  met->add_option("input", input, "Data file ('-' for stdin)")->required();
  met->add_option("--partition", partition_path, "Cluster label per row")->required();
  met->add_option("--centroids", centroids_path, "One centroid per row")->required();
  met->add_option("--labels", labels_path, "True labels for accuracy");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  global.skip_header = header == "skip";

  try {
    std::optional<std::vector<std::size_t>> labels;
    if (!labels_path.empty()) labels = read_labels_file(labels_path);
    const auto* labels_ptr = labels ? &*labels : nullptr;
    const bool csv = global.format == "csv";

    std::ostringstream text;
    if (solve->parsed()) {
      const Json result = cmd_solve_kappa(solve_args, global);
      if (csv) {
        text << "method,estimate\n";
        for (const auto& [name, value] : result["estimates"].items()) {
          text << name << ',' << format_double(value.get<double>()) << '\n';
        }
      } else {
        text << result.dump(2) << '\n';
      }
    } else if (bench->parsed()) {
      if (!csv && app.get_option("--format")->count() > 0) throw UsageError("bench-approx writes CSV only");
      global.format = "csv";
      err << "config: " << Json{{"global", global.to_json()}, {"bench", bench_args.to_json()}}.dump() << '\n';
      cmd_bench_approx(bench_args, text);
    } else if (samp->parsed()) {
      if (app.get_option("--format")->count() == 0) global.format = "csv";
      const Matrix X = cmd_sample(sample_args, global);
      const Json cfg = {{"global", global.to_json()},
                        {"p", sample_args.p},
                        {"kappa", sample_args.kappa},
                        {"n", sample_args.n},
                        {"mu", sample_args.mu}};
      if (global.format == "csv") {
        err << "config: " << cfg.dump() << '\n';
        write_matrix(text, X);
      } else {
        Json rows = Json::array();
        for (std::size_t i = 0; i < X.rows(); ++i) rows.push_back(vector_json(X.row(i)));
        text << Json{{"command", "sample"}, {"config", cfg}, {"data", rows}}.dump(2) << '\n';
      }
    } else {
      const Matrix X = load_observations(input, global);
      if (fit_cmd->parsed()) {
        const Json result = cmd_fit(X, global);
        if (csv) {
          text << "kappa,r,branch,log_likelihood";
          for (std::size_t k = 0; k < X.cols(); ++k) text << ",mu_" << k;
          text << '\n'
               << format_double(result["kappa"].get<double>()) << ',' << format_double(result["r"].get<double>())
               << ',' << result["branch"].get<std::string>() << ','
               << format_double(result["log_likelihood"].get<double>());
          for (const auto& v : result["mu"]) text << ',' << format_double(v.get<double>());
          text << '\n';
        } else {
          text << result.dump(2) << '\n';
        }
      } else if (mix->parsed()) {
        const Json result = cmd_mixture(X, mix_args, labels_ptr, global);
        if (csv) {
          text << labels_csv(result["assignments"].get<std::vector<std::size_t>>());
        } else {
          text << result.dump(2) << '\n';
        }
      } else if (diam->parsed()) {
        const Json result = cmd_diametrical(X, diam_args, labels_ptr, global);
        if (csv) {
          text << labels_csv(result["partition"].get<std::vector<std::size_t>>());
        } else {
          text << result.dump(2) << '\n';
        }
      } else if (met->parsed()) {
        const auto partition = read_labels_file(partition_path);
        Matrix centroids = read_matrix_file(centroids_path);
        if (global.normalize) normalize_rows(centroids);
        const Json result = cmd_metrics(X, partition, centroids, labels_ptr);
        if (csv) {
          text << "homogeneity,separation\n"
               << format_double(result["homogeneity"].get<double>()) << ','
               << format_double(result["separation"].get<double>()) << '\n';
        } else {
          text << result.dump(2) << '\n';
        }
      }
    }
    write_output(global, out, text.str());
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace watsonmle::cli
