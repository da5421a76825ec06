#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "empiproc/chaining.hpp"
#include "empiproc/core.hpp"
#include "empiproc/empirical.hpp"
#include "empiproc/generators.hpp"
#include "empiproc/io.hpp"
#include "empiproc/limit.hpp"
#include "empiproc/mixing.hpp"

using json = nlohmann::json;
using namespace empiproc;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStatistical = 3;
constexpr int kExitUnknownCommand = 64;
constexpr int kExitBadConfig = 65;
constexpr int kExitMissingInput = 66;

[[noreturn]] void fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << "EMPIPROC-ERROR code=" << code << " kind=" << kind << " msg=\"" << msg << "\"\n";
  std::exit(code);
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<unsigned> threads_flag;
  std::optional<std::string> out_flag;
  std::optional<std::string> format_flag;
  bool warn_only = false;
  json config = json::object();

  // precedence: flags > config > defaults
  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (config.contains(key)) {
      try {
        return config.at(key).get<T>();
      } catch (const json::exception& e) {
        fail(kExitBadConfig, "config", "field '" + key + "': " + e.what());
      }
    }
    return fallback;
  }

  std::uint64_t seed() const {
    if (seed_flag) return *seed_flag;
    if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
    if (const char* env = std::getenv("EMPIPROC_SEED")) return std::strtoull(env, nullptr, 10);
    return 12345;
  }
  std::string out_dir() const { return out_flag ? *out_flag : get<std::string>("out", "."); }
  std::string format() const { return format_flag ? *format_flag : get<std::string>("format", "csv"); }
};

void load_config(Options& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) fail(kExitMissingInput, "missing-input", "config file not found: " + opt.config_path);
  try {
    in >> opt.config;
  } catch (const json::exception& e) {
    fail(kExitBadConfig, "config", e.what());
  }
}

int statistical_gate(const Options& opt, bool ok, const std::string& what) {
  if (ok) return 0;
  if (opt.warn_only) {
    std::cerr << "EMPIPROC-WARN kind=statistical msg=\"" << what << "\"\n";
    return 0;
  }
  std::cerr << "EMPIPROC-ERROR code=" << kExitStatistical << " kind=statistical msg=\"" << what
            << "\"\n";
  return kExitStatistical;
}

std::vector<std::vector<long long>> matrix_from_json(const json& j) {
  std::vector<std::vector<long long>> m;
  for (const auto& row : j) m.push_back(row.get<std::vector<long long>>());
  return m;
}

generators::SamplePath make_path(const Options& opt, std::size_t n, std::uint64_t replicate) {
  std::string gen = opt.get<std::string>("generator", "iid");
  std::uint64_t seed = opt.seed();
  std::size_t d = opt.get<std::size_t>("d", 2);
  if (gen == "iid") return generators::simulate_iid_uniform(d, n, seed, replicate);
  if (gen == "torus") {
    json mj = opt.config.value("matrix", json::array({{2, 1}, {1, 1}}));
    auto aut = generators::validate_torus(matrix_from_json(mj));
    if (!aut.is_ergodic) throw std::invalid_argument("torus matrix is not ergodic");
    return generators::simulate_torus(aut, n, seed, replicate);
  }
  if (gen == "linear") {
    auto model = generators::LinearProcessModel::geometric(d, opt.get<Real>("theta", 0.5));
    return generators::simulate_linear(model, n, seed, replicate);
  }
  if (gen == "lipschitz") {
    auto model = generators::LipschitzIterationModel::contraction_default(d);
    return generators::simulate_lipschitz(model, n, seed, replicate);
  }
  if (gen == "markov") {
    auto model = generators::FiniteMarkovModel::two_state(opt.get<Real>("flip", 0.25));
    return generators::simulate_markov(model, n, seed, replicate);
  }
  throw std::invalid_argument("unknown generator: " + gen);
}

std::shared_ptr<const core::DistributionModel> make_model(const Options& opt) {
  std::string gen = opt.get<std::string>("generator", "iid");
  std::size_t d = opt.get<std::size_t>("d", 2);
  if (gen == "iid" || gen == "torus")
    return std::make_shared<core::DistributionModel>(core::DistributionModel::uniform_cube(d));
  // plug-in calibration for the non-uniform generators
  std::size_t cal_n = opt.get<std::size_t>("calibration_size", 100000);
  auto cal = make_path(opt, cal_n, 0xCA11B007);
  return std::make_shared<core::DistributionModel>(
      core::DistributionModel::empirical(cal.values, d));
}

std::shared_ptr<const core::EvaluationGrid> make_grid(const Options& opt, std::size_t d) {
  if (opt.config.contains("grid_axes")) {
    std::vector<std::vector<Real>> axes;
    for (const auto& a : opt.config.at("grid_axes")) axes.push_back(a.get<std::vector<Real>>());
    return std::make_shared<core::EvaluationGrid>(std::move(axes));
  }
  std::size_t pts = opt.get<std::size_t>("grid_points", 5);
  std::vector<std::vector<Real>> axes(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 1; j <= pts; ++j)
      axes[i].push_back(static_cast<Real>(j) / static_cast<Real>(pts + 1));
  return std::make_shared<core::EvaluationGrid>(std::move(axes));
}

void emit(const Options& opt, const std::string& name, const json& body) {
  std::filesystem::create_directories(opt.out_dir());
  std::string file = opt.out_dir() + "/" + name;
  std::ofstream out(file);
  if (!out) fail(kExitMissingInput, "missing-input", "cannot write " + file);
  out << body.dump(2) << "\n";
  io::write_sidecar(file, json{{"artifact", name}}, opt.config);
  std::cout << body.dump(2) << "\n";
}

// --- subcommands -----------------------------------------------------------------

int cmd_validate_matrix(const Options& opt, const std::string& matrix_arg) {
  json mj;
  if (!matrix_arg.empty()) {
    try {
      mj = json::parse(matrix_arg);
    } catch (const json::exception& e) {
      fail(kExitBadConfig, "config", std::string("matrix: ") + e.what());
    }
  } else if (opt.config.contains("matrix")) {
    mj = opt.config.at("matrix");
  } else {
    fail(kExitMissingInput, "missing-input", "no matrix given (flag or config)");
  }
  auto aut = generators::validate_torus(matrix_from_json(mj));
  json body{{"ergodic", aut.is_ergodic},
            {"hyperbolic", aut.is_hyperbolic},
            {"det_sign", aut.det_sign},
            {"jordan_exponent", aut.jordan_exponent},
            {"jordan_exponent_numerical", aut.jordan_exponent_numerical},
            {"expansion_rate", aut.expansion_rate},
            {"eigen_moduli", aut.eigen_moduli}};
  emit(opt, "validate-matrix.json", body);
  return 0;
}

int cmd_simulate(const Options& opt) {
  std::size_t n = opt.get<std::size_t>("n", 1024);
  std::uint64_t replicate = opt.get<std::uint64_t>("replicate", 0);
  auto path = make_path(opt, n, replicate);
  std::filesystem::create_directories(opt.out_dir());
  std::string base = opt.out_dir() + "/path";
  std::string file;
  if (opt.format() == "binary") {
    file = base + ".bin";
    io::write_path_binary(path, file);
  } else if (opt.format() == "csv") {
    file = base + ".csv";
    io::write_path_csv(path, file);
  } else {
    fail(kExitValidation, "validation", "unknown format: " + opt.format());
  }
  json meta{{"generator", path.generator_id}, {"n", path.n}, {"d", path.d},
            {"seed", path.seed},             {"replicate", path.replicate_id}};
  for (const auto& [k, v] : path.metadata) meta[k] = v;
  io::write_sidecar(file, meta, opt.config);
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_empirical(const Options& opt, const std::string& input) {
  generators::SamplePath path;
  if (!input.empty()) {
    if (!std::filesystem::exists(input))
      fail(kExitMissingInput, "missing-input", "path file not found: " + input);
    path = io::read_path_auto(input);
  } else {
    path = make_path(opt, opt.get<std::size_t>("n", 1024), opt.get<std::uint64_t>("replicate", 0));
  }
  auto model = make_model(opt);
  auto grid = make_grid(opt, path.d);
  auto field = empirical::empirical_process(path, grid, *model);
  std::filesystem::create_directories(opt.out_dir());
  std::string file = opt.out_dir() + "/field.csv";
  io::write_field_csv(field, file);
  io::write_sidecar(file, json{{"n", field.n}, {"d", path.d}}, opt.config);

  std::size_t m = opt.get<std::size_t>("m", 0);
  json body{{"n", field.n}, {"field", file}};
  if (m >= 2) {
    auto part = empirical::build_partition(model, m);
    auto approx = empirical::approx_process(path, part, model);
    body["sup_gap"] = empirical::sup_abs_process_gap(path, approx, *model, grid.get());
    body["m"] = m;
  }
  emit(opt, "empirical.json", body);
  return 0;
}

int cmd_chain_check(const Options& opt) {
  std::size_t n = opt.get<std::size_t>("n", 1024);
  std::size_t m = opt.get<std::size_t>("m", 8);
  Real alpha = opt.get<Real>("alpha", 0.5);
  Real epsilon = opt.get<Real>("epsilon", 1.0);
  std::size_t t_count = opt.get<std::size_t>("t_count", 200);
  auto model = make_model(opt);
  auto path = make_path(opt, n, opt.get<std::uint64_t>("replicate", 0));
  auto part = empirical::build_partition(model, m);
  chaining::ChainingSystem system(part, alpha, epsilon, n);

  auto rng = make_rng(opt.seed(), 0xC4A1);
  std::vector<Point> ts;
  for (std::size_t i = 0; i < t_count; ++i) ts.push_back(model->sample(rng));
  auto sandwich = chaining::verify_sandwich(system, path, ts);

  bool consistent = true;
  for (const Point& t : ts) {
    auto idx = chaining::chain_index(system, t);
    for (int k = 1; k <= system.depth() && consistent; ++k)
      for (std::size_t i = 0; i < system.dimension(); ++i)
        if (idx.l[static_cast<std::size_t>(k - 1)][i] !=
            idx.l[static_cast<std::size_t>(k)][i] / 2) {
          consistent = false;
          break;
        }
  }

  std::vector<std::size_t> cell(system.dimension(), std::min<std::size_t>(2, m));
  std::vector<long> l(system.dimension(), 1);
  auto inc = chaining::increment_norm_check(system, cell, std::min(2, system.depth()), l,
                                            opt.get<Real>("r", 1.0), 20000, opt.seed());
  bool inc_ok = inc.estimate_pow <= inc.bound_pow + 3.0 * inc.mc_stderr;

  json body{{"K", system.depth()},
            {"window_ok", system.levels().window_ok},
            {"window_checked", system.levels().window_checked},
            {"sandwich_checks", sandwich.checks},
            {"sandwich_violations", sandwich.violations},
            {"worst_slack", sandwich.worst_slack},
            {"chain_consistent", consistent},
            {"increment_estimate", inc.estimate},
            {"increment_bound", inc.bound},
            {"increment_mc_stderr", inc.mc_stderr}};
  emit(opt, "chain-check.json", body);
  bool ok = sandwich.violations == 0 && consistent && inc_ok &&
            (system.levels().window_ok || !system.levels().window_checked);
  return statistical_gate(opt, ok, "chain checks failed");
}

int cmd_mixing(const Options& opt) {
  std::size_t n = opt.get<std::size_t>("n", 512);
  std::size_t replicates = opt.get<std::size_t>("replicates", 200);
  std::size_t max_gap = opt.get<std::size_t>("max_gap", 12);
  auto f = mixing::Observable::cosine(opt.get<std::size_t>("axis", 0));

  std::vector<generators::SamplePath> ensemble(replicates);
  parallel_for(replicates, [&](std::size_t r) { ensemble[r] = make_path(opt, n, r); });

  std::vector<std::size_t> gaps;
  std::vector<Real> covs, errs;
  for (std::size_t k = 1; k <= max_gap; ++k) {
    auto est = mixing::block_covariance(ensemble, f, {}, k, {});
    gaps.push_back(k);
    covs.push_back(est.estimate);
    errs.push_back(est.stderr_);
  }
  auto report = mixing::fit_mixing_envelope(gaps, covs, errs);
  json body{{"gaps", gaps},
            {"covariances", covs},
            {"stderrs", errs},
            {"status", report.status == mixing::FitStatus::Fitted ? "fitted" : "below-noise-floor"}};
  if (report.status == mixing::FitStatus::Fitted) {
    body["theta_hat"] = report.theta_hat;
    body["theta_ci"] = {report.theta_ci_low, report.theta_ci_high};
    body["degree"] = report.degree;
    body["log_c"] = report.log_c;
  }
  emit(opt, "mixing.json", body);
  bool ok = report.status == mixing::FitStatus::BelowNoiseFloor || report.theta_hat < 1.0;
  return statistical_gate(opt, ok, "fitted decay rate is not below 1");
}

int cmd_moments(const Options& opt) {
  int p = opt.get<int>("p", 1);
  std::size_t replicates = opt.get<std::size_t>("replicates", 500);
  std::vector<std::size_t> n_grid =
      opt.get<std::vector<std::size_t>>("n_grid", {64, 128, 256, 512, 1024});
  auto f = mixing::Observable::cosine(opt.get<std::size_t>("axis", 0));
  auto report = mixing::partial_sum_moments(
      [&](std::size_t n, std::uint64_t rep) { return make_path(opt, n, rep); }, f, n_grid, p,
      replicates, opt.get<Real>("r_norm", 1.0), opt.get<Real>("theta", 0.5));
  json body{{"p", p},
            {"n_grid", n_grid},
            {"even_moment", report.even_moment},
            {"even_stderr", report.even_stderr},
            {"odd_moment", report.odd_moment},
            {"slope", report.slope},
            {"slope_stderr", report.slope_stderr},
            {"fitted_K", report.fitted_k},
            {"bound", report.bound}};
  emit(opt, "moments.json", body);
  Real tol = opt.get<Real>("slope_tol", 0.15);
  bool ok = std::abs(report.slope - static_cast<Real>(p)) <= tol * static_cast<Real>(p);
  return statistical_gate(opt, ok, "moment growth slope outside tolerance");
}

int cmd_limit(const Options& opt) {
  std::size_t n = opt.get<std::size_t>("n", 512);
  std::size_t replicates = opt.get<std::size_t>("replicates", 200);
  std::vector<generators::SamplePath> ensemble(replicates);
  parallel_for(replicates, [&](std::size_t r) { ensemble[r] = make_path(opt, n, r); });
  auto grid = make_grid(opt, ensemble.front().d);
  std::size_t lag = opt.get<std::size_t>("lag", limit::default_lag(n, opt.get<Real>("theta", 0.5)));
  auto taper = opt.get<std::string>("taper", "bartlett") == "flat" ? limit::Taper::Flat
                                                                   : limit::Taper::Bartlett;
  auto model = limit::estimate_gamma(ensemble, grid, lag, taper);
  std::filesystem::create_directories(opt.out_dir());
  std::string file = opt.out_dir() + "/gamma.csv";
  io::write_gamma_csv(model, file);
  io::write_sidecar(file,
                    json{{"lag", lag},
                         {"taper", taper == limit::Taper::Flat ? "flat" : "bartlett"},
                         {"min_eigen_pre", model.min_eigen_pre},
                         {"psd_clip", model.psd_clip}},
                    opt.config);
  emit(opt, "limit.json",
       json{{"gamma", file},
            {"lag", lag},
            {"min_eigen_pre", model.min_eigen_pre},
            {"psd_clip", model.psd_clip}});
  return 0;
}

int cmd_fidi(const Options& opt) {
  std::size_t n = opt.get<std::size_t>("n", 1024);
  std::size_t replicates = opt.get<std::size_t>("replicates", 500);
  std::vector<generators::SamplePath> ensemble(replicates);
  parallel_for(replicates, [&](std::size_t r) { ensemble[r] = make_path(opt, n, r); });
  std::size_t d = ensemble.front().d;
  auto dist = make_model(opt);

  std::vector<Point> points;
  if (opt.config.contains("points")) {
    for (const auto& pj : opt.config.at("points")) points.push_back(pj.get<Point>());
  } else {
    points.push_back(Point(d, 0.5));
    points.push_back(Point(d, 0.25));
  }
  // target covariance from the same ensemble on the grid spanned by the points
  std::vector<std::vector<Real>> axes(d);
  for (const Point& p : points)
    for (std::size_t i = 0; i < d; ++i) axes[i].push_back(p[i]);
  for (auto& a : axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto grid = std::make_shared<core::EvaluationGrid>(axes);
  std::size_t lag = opt.get<std::size_t>("lag", limit::default_lag(n, opt.get<Real>("theta", 0.5)));
  auto gm = limit::estimate_gamma(ensemble, grid, lag);
  std::size_t k = points.size();
  std::vector<Real> gamma_matrix(k * k);
  auto flat_of = [&](const Point& p) {
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& ax = grid->axis(i);
      idx[i] = static_cast<std::size_t>(
          std::lower_bound(ax.begin(), ax.end(), p[i]) - ax.begin());
    }
    return grid->flat_index(idx);
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) gamma_matrix[i * k + j] = gm.at(flat_of(points[i]), flat_of(points[j]));

  std::vector<std::vector<Real>> directions;
  if (opt.config.contains("directions")) {
    for (const auto& dj : opt.config.at("directions"))
      directions.push_back(dj.get<std::vector<Real>>());
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<Real> e(k, 0.0);
      e[i] = 1.0;
      directions.push_back(e);
    }
  }
  auto report = limit::fidi_normality(ensemble, *dist, points, directions, gamma_matrix);
  json tests = json::array();
  bool ok = true;
  Real ratio_tol = opt.get<Real>("ratio_tol", 0.15);
  Real p_floor = opt.get<Real>("p_floor", 0.005);
  for (const auto& t : report.tests) {
    tests.push_back(json{{"direction", t.direction},
                         {"skipped", t.skipped},
                         {"variance_target", t.variance_target},
                         {"variance_ratio", t.variance_ratio},
                         {"ad_pvalue", t.ad_pvalue},
                         {"ks_pvalue", t.ks_pvalue}});
    if (!t.skipped)
      ok = ok && std::abs(t.variance_ratio - 1.0) <= ratio_tol && t.ad_pvalue > p_floor;
  }
  emit(opt, "fidi.json", json{{"replicates", report.replicates}, {"tests", tests}});
  return statistical_gate(opt, ok, "fidi normality check failed");
}

int cmd_report(const Options& opt) {
  if (!std::filesystem::is_directory(opt.out_dir()))
    fail(kExitMissingInput, "missing-input", "no such directory: " + opt.out_dir());
  json summary;
  summary["reports"] = json::array();
  bool any = false;
  for (const auto& entry : std::filesystem::directory_iterator(opt.out_dir())) {
    auto name = entry.path().filename().string();
    if (entry.path().extension() != ".json" || name == "summary.json") continue;
    std::ifstream in(entry.path());
    json body;
    try {
      in >> body;
    } catch (const json::exception&) {
      continue;  // sidecars of binary artifacts parse; anything else is skipped
    }
    summary["reports"].push_back(json{{"file", name}, {"body", body}});
    any = true;
  }
  if (!any) fail(kExitMissingInput, "missing-input", "no JSON reports in " + opt.out_dir());
  std::filesystem::create_directories(opt.out_dir());
  std::ofstream out(opt.out_dir() + "/summary.json");
  out << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"empirical-process laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // shared flags may follow the subcommand
  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "master seed (overrides config)");
  unsigned threads_val = 0;
  auto* threads_opt = app.add_option("--threads", threads_val, "worker pool size");
  std::string out_val, format_val;
  auto* out_opt = app.add_option("--out", out_val, "output directory");
  auto* format_opt = app.add_option("--format", format_val, "csv or binary")
                         ->check(CLI::IsMember({"csv", "binary"}));
  app.add_flag("--warn-only", opt.warn_only, "downgrade statistical failures to warnings");

  std::string matrix_arg, input_arg;
  auto* c_validate = app.add_subcommand("validate-matrix", "classify a torus matrix");
  c_validate->add_option("--matrix", matrix_arg, "matrix as JSON, e.g. [[2,1],[1,1]]");
  auto* c_simulate = app.add_subcommand("simulate", "generate a sample path");
  auto* c_empirical = app.add_subcommand("empirical", "empirical process field");
  c_empirical->add_option("--in", input_arg, "path file (csv or binary)");
  auto* c_chain = app.add_subcommand("chain-check", "sandwich / schedule / increment checks");
  auto* c_mixing = app.add_subcommand("mixing", "covariance decay fit");
  auto* c_moments = app.add_subcommand("moments", "partial-sum moment growth");
  auto* c_limit = app.add_subcommand("limit", "long-run covariance estimate");
  auto* c_fidi = app.add_subcommand("fidi", "finite-dimensional normality");
  auto* c_report = app.add_subcommand("report", "aggregate JSON reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "EMPIPROC-ERROR code=" << kExitUnknownCommand << " kind=usage msg=\"" << e.what()
              << "\"\n";
    return kExitUnknownCommand;
  }

  if (*seed_opt) opt.seed_flag = seed_val;
  if (*threads_opt) opt.threads_flag = threads_val;
  if (*out_opt) opt.out_flag = out_val;
  if (*format_opt) opt.format_flag = format_val;
  load_config(opt);
  if (opt.threads_flag)
    set_thread_count(*opt.threads_flag);
  else if (opt.config.contains("threads"))
    set_thread_count(opt.config.at("threads").get<unsigned>());

  try {
    if (c_validate->parsed()) return cmd_validate_matrix(opt, matrix_arg);
    if (c_simulate->parsed()) return cmd_simulate(opt);
    if (c_empirical->parsed()) return cmd_empirical(opt, input_arg);
    if (c_chain->parsed()) return cmd_chain_check(opt);
    if (c_mixing->parsed()) return cmd_mixing(opt);
    if (c_moments->parsed()) return cmd_moments(opt);
    if (c_limit->parsed()) return cmd_limit(opt);
    if (c_fidi->parsed()) return cmd_fidi(opt);
    if (c_report->parsed()) return cmd_report(opt);
  } catch (const std::invalid_argument& e) {
    fail(kExitValidation, "validation", e.what());
  } catch (const std::exception& e) {
    fail(kExitValidation, "runtime", e.what());
  }
  return kExitUnknownCommand;
}
