#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "meglm/closed_forms.hpp"
#include "meglm/config.hpp"
#include "meglm/elicit.hpp"
#include "meglm/errors.hpp"
#include "meglm/fit.hpp"
#include "meglm/report.hpp"
#include "meglm/studygen.hpp"

namespace py = pybind11;
using namespace meglm;

namespace {

py::tuple as_tuple(const DiagonalGaussian& g) { return py::make_tuple(g.mean, g.precision); }

Family parse_family(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "binomial") return Family::Binomial;
  if (name == "poisson") return Family::Poisson;
  throw InputError("unknown family '" + name + "'");
}

// Reports cross the boundary as the same JSON document the CLI writes.
std::string fit_json(const std::string& config_text, const std::string& csv_text, const std::string& method,
                     double dz, double diff_logdens, int iterations, int burn_in, int thin,
                     std::optional<std::uint64_t> seed) {
  const ModelSpec spec = parse_model_config(config_text);
  std::istringstream in(csv_text);
  const Dataset data = Dataset::parse_csv(in, "<data>");
  const Method m = parse_method(method);
  GridOptions grid;
  grid.dz = dz;
  grid.diff_logdens = diff_logdens;
  PosteriorReport report;
  {
    py::gil_scoped_release release;
    if (m == Method::Naive) {
      report = fit_naive(spec, data, grid);
    } else if (m == Method::Laplace) {
      report = fit_laplace(build_joint_model(spec, data), grid);
    } else {
      if (!seed) throw InputError("a seed is required for mcmc fits");
      ChainConfig chain;
      chain.iterations = iterations;
      chain.burn_in = burn_in;
      chain.thin = thin;
      chain.seed = *seed;
      chain.validate();
      report = fit_mcmc(build_joint_model(spec, data), chain);
    }
  }
  return report_json(report).dump();
}

py::dict simulate_study(const std::string& study, std::uint64_t seed, std::optional<int> n) {
  StudyRecipe recipe = default_recipe(parse_study(study));
  recipe.seed = seed;
  if (n) {
    recipe.n = *n;
    if (recipe.study == Study::SeedlingLike) {
      const int per_house = static_cast<int>(recipe.light_targets.size() * recipe.defoliation.size());
      if (*n <= 0 || *n % per_house != 0)
        throw InputError("seedling n must be a positive multiple of " + std::to_string(per_house));
      recipe.shadehouses = *n / per_house;
    }
  }
  const SimulatedStudy s = simulate(recipe);
  std::ostringstream csv;
  s.data.write_csv(csv);
  py::dict out;
  out["data_csv"] = csv.str();
  out["truth_json"] = ground_truth_json(recipe, s.truth);
  out["model_yaml"] = model_config_yaml(s.spec);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("mec_conditional", [](const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u,
                              const Eigen::VectorXd& d) { return as_tuple(mec_conditional(w, alpha0, tau_x, tau_u, d)); },
        py::arg("w"), py::arg("alpha0"), py::arg("tau_x"), py::arg("tau_u"), py::arg("d"));
  m.def("mec_marginal_w", [](double alpha0, double tau_x, double tau_u, const Eigen::VectorXd& d) {
    return as_tuple(mec_marginal_w(alpha0, tau_x, tau_u, d));
  }, py::arg("alpha0"), py::arg("tau_x"), py::arg("tau_u"), py::arg("d"));
  m.def("mec_scaled_conditional",
        [](const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u, const Eigen::VectorXd& d,
           double beta_x) { return as_tuple(mec_scaled_conditional(w, alpha0, tau_x, tau_u, d, beta_x)); },
        py::arg("w"), py::arg("alpha0"), py::arg("tau_x"), py::arg("tau_u"), py::arg("d"), py::arg("beta_x"));
  m.def("meb_conditional", [](const Eigen::VectorXd& w, double tau_u, const Eigen::VectorXd& d, double beta_x) {
    return as_tuple(meb_conditional(w, tau_u, d, beta_x));
  }, py::arg("w"), py::arg("tau_u"), py::arg("d"), py::arg("beta_x"));
  m.def("attenuation_factor", &attenuation_factor, py::arg("tau_x"), py::arg("tau_u"));
  m.def("naive_glm_fit", [](const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Eigen::MatrixXd& z,
                            const std::string& family) {
    const GlmFit f = naive_glm_fit(y, w, z, parse_family(family));
    py::dict out;
    out["coefficients"] = f.coefficients;
    out["standard_errors"] = f.standard_errors;
    out["deviance"] = f.deviance;
    out["dispersion"] = f.dispersion;
    return out;
  }, py::arg("y"), py::arg("w"), py::arg("z"), py::arg("family"));

  m.def("gamma_from_quantiles", [](double q_lo, double q_hi, double p_lo, double p_hi) {
    const GammaPrior g = gamma_from_quantiles({p_lo, q_lo, p_hi, q_hi});
    return py::make_tuple(g.shape, g.rate);
  }, py::arg("q_lo"), py::arg("q_hi"), py::arg("p_lo") = 0.025, py::arg("p_hi") = 0.975);
  m.def("lognormal_from_quantiles", [](double q_lo, double q_hi, double p_lo, double p_hi) {
    const LogNormal l = lognormal_from_quantiles({p_lo, q_lo, p_hi, q_hi});
    return py::make_tuple(l.mu, l.sigma2);
  }, py::arg("q_lo"), py::arg("q_hi"), py::arg("p_lo") = 0.025, py::arg("p_hi") = 0.975);
  m.def("precision_from_uniform_range", &precision_from_uniform_range, py::arg("width"));
  m.def("berkson_precision_from_interval", &berkson_sigma_from_interval, py::arg("interval"), py::arg("z"));

  m.def("simulate", &simulate_study, py::arg("study"), py::arg("seed"), py::arg("n") = py::none());
  m.def("fit_json", &fit_json, py::arg("config"), py::arg("data"), py::arg("method"), py::arg("dz") = 0.5,
        py::arg("diff_logdens") = 20.0, py::arg("iterations") = 100000, py::arg("burn_in") = 10000,
        py::arg("thin") = 10, py::arg("seed") = py::none());
}
