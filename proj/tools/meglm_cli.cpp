#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "meglm/config.hpp"
#include "meglm/elicit.hpp"
#include "meglm/errors.hpp"
#include "meglm/fit.hpp"
#include "meglm/report.hpp"
#include "meglm/studygen.hpp"

namespace fs = std::filesystem;
using namespace meglm;

namespace {

struct FitArgs {
  std::string config;
  std::string data;
  std::string method = "laplace";
  std::string out;
  double dz = 0.5;
  double diff_logdens = 20.0;
  int iterations = 100000;
  int burn_in = 10000;
  int thin = 10;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool timing = false;
};

struct SimulateArgs {
  std::string study;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::string out;
};

struct CompareArgs {
  std::vector<std::string> reports;
  std::string truth;
  std::string out;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

int run_fit(const FitArgs& a) {
  std::vector<Method> methods;
  if (a.method == "all") {
    methods = {Method::Naive, Method::Laplace, Method::Mcmc};
  } else {
    methods = {parse_method(a.method)};
  }
  const bool needs_seed = std::find(methods.begin(), methods.end(), Method::Mcmc) != methods.end();
  if (needs_seed && !a.seed) throw InputError("--seed is required for mcmc fits");

  const ModelSpec spec = load_model_config(a.config);
  const Dataset data = Dataset::read_csv(a.data);
  GridOptions grid;
  grid.dz = a.dz;
  grid.diff_logdens = a.diff_logdens;
  grid.threads = a.threads;
  ChainConfig chain;
  chain.iterations = a.iterations;
  chain.burn_in = a.burn_in;
  chain.thin = a.thin;
  if (a.seed) chain.seed = *a.seed;
  chain.validate();

  std::optional<JointModel> model;
  std::vector<ComparisonInput> compared;
  for (Method m : methods) {
    const auto start = std::chrono::steady_clock::now();
    PosteriorReport report;
    if (m == Method::Naive) {
      report = fit_naive(spec, data, grid);
    } else {
      if (!model) model = build_joint_model(spec, data);
      report = m == Method::Laplace ? fit_laplace(*model, grid) : fit_mcmc(*model, chain);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path dir = fs::path(a.out) / to_string(m);
    write_report(report, dir, a.timing ? std::optional<double>(seconds) : std::nullopt);
    std::cout << to_string(m) << ": " << report.parameters.size() << " parameters -> " << dir.string() << " ("
              << seconds << " s)\n";
    compared.push_back({to_string(m), report.parameters});
  }
  if (methods.size() > 1) {
    const fs::path table = fs::path(a.out) / "comparison.csv";
    write_file(table, comparison_csv(compared));
    std::cout << "comparison -> " << table.string() << '\n';
  }
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  if (!a.seed) throw InputError("--seed is required for simulate");
  StudyRecipe recipe = default_recipe(parse_study(a.study));
  recipe.seed = *a.seed;
  if (a.n) {
    recipe.n = *a.n;
    if (recipe.study == Study::SeedlingLike) {
      const int per_house = static_cast<int>(recipe.light_targets.size() * recipe.defoliation.size());
      if (*a.n <= 0 || *a.n % per_house != 0)
        throw InputError("seedling --n must be a positive multiple of " + std::to_string(per_house));
      recipe.shadehouses = *a.n / per_house;
    }
  }
  const SimulatedStudy s = simulate(recipe);
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create '" + dir.string() + "': " + ec.message());
  s.data.write_csv((dir / "data.csv").string());
  write_file(dir / "truth.json", ground_truth_json(recipe, s.truth));
  write_file(dir / "model.yaml", model_config_yaml(s.spec));
  std::cout << to_string(recipe.study) << ": " << s.data.rows() << " rows -> " << dir.string() << '\n';
  return 0;
}

int run_compare(const CompareArgs& a) {
  std::vector<ComparisonInput> inputs;
  for (const auto& r : a.reports) {
    fs::path p(r);
    if (fs::is_directory(p)) p /= "summary.json";
    auto params = read_summary(p);
    if (params.empty()) throw InputError(p.string() + ": no parameters");
    inputs.push_back({params.front().method, std::move(params)});
  }
  std::map<std::string, double> truth;
  if (!a.truth.empty()) {
    std::ifstream in(a.truth);
    if (!in) throw InputError("cannot open '" + a.truth + "'");
    try {
      const auto j = nlohmann::json::parse(in);
      for (const auto& [k, v] : j.at("parameters").items()) truth[k] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(a.truth + ": " + e.what());
    }
  }
  const std::string table = comparison_csv(inputs, truth);
  if (a.out.empty()) {
    std::cout << table;
  } else {
    write_file(a.out, table);
  }
  return 0;
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian GLM/GLMM fitting with classical or Berkson measurement error"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model by naive, laplace and/or mcmc");
  fit_cmd->add_option("--config", fit.config, "model YAML")->required();
  fit_cmd->add_option("--data", fit.data, "data CSV (NA marks absent values)")->required();
  fit_cmd->add_option("--method", fit.method, "naive | laplace | mcmc | all")
      ->check(CLI::IsMember({"naive", "laplace", "mcmc", "all"}));
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  fit_cmd->add_option("--dz", fit.dz, "grid step in standardized units")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--diff-logdens", fit.diff_logdens, "grid log-density cutoff")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iterations", fit.iterations, "chain length");
  fit_cmd->add_option("--burn-in", fit.burn_in, "discarded iterations");
  fit_cmd->add_option("--thin", fit.thin, "keep every thin-th draw");
  fit_cmd->add_option("--seed", fit.seed, "random seed (required for mcmc)");
  fit_cmd->add_option("--threads", fit.threads, "grid worker threads (0 = all cores)");
  fit_cmd->add_flag("--timing", fit.timing, "record wall-clock seconds in summary.json");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic study");
  sim_cmd->add_option("--study", sim.study, "ibex | framingham | seedling")->required();
  sim_cmd->add_option("--seed", sim.seed, "random seed (required)");
  sim_cmd->add_option("--n", sim.n, "number of rows");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "side-by-side table of fitted reports");
  cmp_cmd->add_option("reports", cmp.reports, "report directories or summary.json files")->required();
  cmp_cmd->add_option("--truth", cmp.truth, "ground-truth JSON from simulate");
  cmp_cmd->add_option("--out", cmp.out, "write the table here instead of stdout");

  auto* elicit_cmd = app.add_subcommand("elicit", "prior parameters from expert statements");
  elicit_cmd->require_subcommand(1);
  std::vector<double> q, p = {0.025, 0.975};
  auto* e_gamma = elicit_cmd->add_subcommand("gamma", "gamma prior from two quantiles");
  e_gamma->add_option("--q", q, "lower and upper quantile")->expected(2)->required();
  e_gamma->add_option("--p", p, "probabilities of the quantiles")->expected(2);
  auto* e_lnorm = elicit_cmd->add_subcommand("lognormal", "log-normal from two quantiles");
  e_lnorm->add_option("--q", q, "lower and upper quantile")->expected(2)->required();
  e_lnorm->add_option("--p", p, "probabilities of the quantiles")->expected(2);
  double width = 0.0, interval = 0.0, z = 1.96, mean = 0.0;
  auto* e_unif = elicit_cmd->add_subcommand("uniform-precision", "precision of a uniform range");
  e_unif->add_option("--width", width, "range width")->required();
  auto* e_berk = elicit_cmd->add_subcommand("berkson", "precision from an interval half-width");
  e_berk->add_option("--interval", interval, "interval half-width")->required();
  e_berk->add_option("--z", z, "normal quantile of the interval");
  auto* e_eq = elicit_cmd->add_subcommand("equal-moments", "gamma with equal mean and variance");
  e_eq->add_option("--mean", mean, "prior mean")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
    if (*cmp_cmd) return run_compare(cmp);
    if (*e_gamma) {
      const auto g = gamma_from_quantiles({p[0], q[0], p[1], q[1]});
      print_json({{"distribution", "gamma"}, {"shape", g.shape}, {"rate", g.rate}});
    } else if (*e_lnorm) {
      const auto l = lognormal_from_quantiles({p[0], q[0], p[1], q[1]});
      print_json({{"distribution", "lognormal"}, {"mu", l.mu}, {"sigma2", l.sigma2}});
    } else if (*e_unif) {
      print_json({{"precision", precision_from_uniform_range(width)}});
    } else if (*e_berk) {
      print_json({{"precision", berkson_sigma_from_interval(interval, z)}, {"sigma", interval / z}});
    } else if (*e_eq) {
      const auto g = gamma_from_mean_equal_variance(mean);
      print_json({{"distribution", "gamma"}, {"shape", g.shape}, {"rate", g.rate}});
    }
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}
