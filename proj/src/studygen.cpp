#include "meglm/studygen.hpp"

#include <algorithm>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <nlohmann/json.hpp>

#include "meglm/errors.hpp"
#include "meglm/rng.hpp"

namespace meglm {

std::string to_string(Study s) {
  switch (s) {
    case Study::IbexLike: return "ibex";
    case Study::FraminghamLike: return "framingham";
    case Study::SeedlingLike: return "seedling";
  }
  return "?";
}

Study parse_study(const std::string& name) {
  if (name == "ibex") return Study::IbexLike;
  if (name == "framingham") return Study::FraminghamLike;
  if (name == "seedling") return Study::SeedlingLike;
  throw InputError("unknown study '" + name + "' (expected ibex, framingham or seedling)");
}

void StudyRecipe::validate() const {
  for (double t : {tau_x, tau_u, tau_eps, tau_gamma})
    if (!(t > 0.0)) throw InputError("recipe: precisions must be positive");
  switch (study) {
    case Study::IbexLike:
      if (n < 2) throw InputError("recipe: ibex needs n >= 2");
      if (beta_z.size() != 4) throw InputError("recipe: ibex has four z coefficients");
      if (!(kappa > 0.0) || !(c0 > 0.0) || c1 < 0.0) throw InputError("recipe: invalid error-weight law");
      break;
    case Study::FraminghamLike:
      if (n < 2) throw InputError("recipe: framingham needs n >= 2");
      if (replicates < 1) throw InputError("recipe: framingham needs at least one replicate");
      if (beta_z.size() != 1 || alpha_z.size() != 1) throw InputError("recipe: framingham has one z coefficient");
      if (!(smoker_rate > 0.0 && smoker_rate < 1.0)) throw InputError("recipe: smoker rate must be in (0, 1)");
      break;
    case Study::SeedlingLike:
      if (light_targets.empty() || shadehouses < 1 || defoliation.empty())
        throw InputError("recipe: seedling sizes must be positive");
      if (n != static_cast<int>(light_targets.size() * defoliation.size()) * shadehouses)
        throw InputError("recipe: seedling n must equal light conditions x shadehouses x defoliation levels (" +
                         std::to_string(light_targets.size()) + " x " + std::to_string(shadehouses) + " x " +
                         std::to_string(defoliation.size()) + ")");
      if (beta_z.size() != 1) throw InputError("recipe: seedling has one z coefficient");
      break;
  }
}

StudyRecipe default_recipe(Study s) {
  StudyRecipe r;
  r.study = s;
  switch (s) {
    case Study::IbexLike: break;
    case Study::FraminghamLike:
      r.n = 641;
      r.beta0 = -1.0;
      r.beta_x = 2.0;
      r.beta_z = {0.5};
      r.alpha0 = 0.0;
      r.alpha_z = {0.1};
      r.tau_x = 10.0;
      r.tau_u = 100.0;
      break;
    case Study::SeedlingLike:
      r.n = 60;
      r.beta0 = 1.5;
      r.beta_x = 0.4;
      r.beta_z = {-0.8};
      r.tau_u = 10.0;
      r.tau_gamma = 20.0;
      break;
  }
  return r;
}

namespace {

ModelSpec ibex_spec() {
  ModelSpec m;
  m.observation.family = Family::Gaussian;
  m.observation.covariates = {"z1", "z2", "z3", "z4"};
  m.observation.intercept = PriorSpec::gaussian(0.0, 1e-4);
  m.observation.coefficients = PriorSpec::gaussian(0.0, 1e-4);
  m.observation.residual_precision = PriorSpec::gamma(1.0, 0.001);
  m.error.kind = ErrorKind::Classical;
  m.error.proxies = {"w"};
  m.error.weights = "error.prec";
  m.error.precision = PriorSpec::gamma(8.5, 7.5);
  ExposureModel ex;
  ex.intercept = PriorSpec::fixed(0.0);
  ex.precision = PriorSpec::gamma(1.0, 0.0009);
  m.exposure = ex;
  m.beta_x = PriorSpec::gaussian(0.0, 1e-4);
  return m;
}

ModelSpec framingham_spec(int replicates) {
  ModelSpec m;
  m.observation.family = Family::Binomial;
  m.observation.covariates = {"z"};
  m.observation.intercept = PriorSpec::gaussian(0.0, 1e-2);
  m.observation.coefficients = PriorSpec::gaussian(0.0, 1e-2);
  m.error.kind = ErrorKind::Classical;
  m.error.proxies.clear();
  for (int j = 1; j <= replicates; ++j) m.error.proxies.push_back("w" + std::to_string(j));
  m.error.precision = PriorSpec::gamma(100.0, 1.0);
  ExposureModel ex;
  ex.covariates = {"z"};
  ex.intercept = PriorSpec::gaussian(0.0, 1.0);
  ex.coefficients = PriorSpec::gaussian(0.0, 1.0);
  ex.precision = PriorSpec::gamma(10.0, 1.0);
  m.exposure = ex;
  m.beta_x = PriorSpec::gaussian(0.0, 1e-2);
  return m;
}

ModelSpec seedling_spec() {
  ModelSpec m;
  m.observation.family = Family::Poisson;
  m.observation.covariates = {"z"};
  m.observation.intercept = PriorSpec::gaussian(0.0, 1e-2);
  m.observation.coefficients = PriorSpec::gaussian(0.0, 1e-2);
  m.observation.random_effect = RandomEffect{PriorSpec::gamma(1.0, 0.005)};
  m.error.kind = ErrorKind::Berkson;
  m.error.proxies = {"w"};
  m.error.group = "shadehouse";
  m.error.precision = PriorSpec::gamma(1.0, 0.02);
  m.beta_x = PriorSpec::gaussian(0.0, 1e-2);
  return m;
}

}  // namespace

SimulatedStudy simulate(const StudyRecipe& r) {
  r.validate();
  SplitMix64 rng(r.seed);
  auto normal = [&](double mean, double precision) {
    boost::random::normal_distribution<double> dist(mean, 1.0 / std::sqrt(precision));
    return dist(rng);
  };
  SimulatedStudy out;
  auto& truth = out.truth.parameters;
  truth["beta0"] = r.beta0;
  truth["beta_x"] = r.beta_x;
  truth["tau_u"] = r.tau_u;
  const auto n = static_cast<std::size_t>(r.n);
  std::vector<double> y(n), x(n);

  switch (r.study) {
    case Study::IbexLike: {
      std::vector<std::vector<double>> z(4, std::vector<double>(n));
      std::vector<double> w(n), d(n);
      for (std::size_t i = 0; i < n; ++i) {
        z[0][i] = normal(0.0, 1.0);
        z[1][i] = normal(0.0, 1.0);
        z[2][i] = normal(0.0, 1.0);
        z[3][i] = z[0][i] * z[1][i];
        x[i] = normal(r.alpha0, r.tau_x);
        d[i] = r.kappa / (r.c0 + r.c1 * std::max(x[i], 0.0));
        w[i] = normal(x[i], r.tau_u * d[i]);
        double mean = r.beta0 + r.beta_x * x[i];
        for (std::size_t k = 0; k < 4; ++k) mean += r.beta_z[k] * z[k][i];
        y[i] = normal(mean, r.tau_eps);
      }
      out.data.add_column("y", y);
      out.data.add_column("w", w);
      for (std::size_t k = 0; k < 4; ++k) {
        out.data.add_column("z" + std::to_string(k + 1), z[k]);
        truth["beta_z" + std::to_string(k + 1)] = r.beta_z[k];
      }
      out.data.add_column("error.prec", d);
      truth["alpha0"] = r.alpha0;
      truth["tau_x"] = r.tau_x;
      truth["tau_eps"] = r.tau_eps;
      out.spec = ibex_spec();
      break;
    }
    case Study::FraminghamLike: {
      boost::random::bernoulli_distribution<double> smoker(r.smoker_rate);
      std::vector<double> z(n);
      std::vector<std::vector<double>> w(static_cast<std::size_t>(r.replicates), std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = smoker(rng) ? 1.0 : 0.0;
        x[i] = normal(r.alpha0 + r.alpha_z[0] * z[i], r.tau_x);
        for (auto& rep : w) rep[i] = normal(x[i], r.tau_u);
        const double eta = r.beta0 + r.beta_x * x[i] + r.beta_z[0] * z[i];
        boost::random::bernoulli_distribution<double> outcome(1.0 / (1.0 + std::exp(-eta)));
        y[i] = outcome(rng) ? 1.0 : 0.0;
      }
      out.data.add_column("y", y);
      for (std::size_t j = 0; j < w.size(); ++j) out.data.add_column("w" + std::to_string(j + 1), w[j]);
      out.data.add_column("z", z);
      truth["beta_z"] = r.beta_z[0];
      truth["alpha0"] = r.alpha0;
      truth["alpha_z"] = r.alpha_z[0];
      truth["tau_x"] = r.tau_x;
      out.spec = framingham_spec(r.replicates);
      break;
    }
    case Study::SeedlingLike: {
      std::vector<double> w, z, group;
      std::size_t row = 0;
      for (std::size_t light = 0; light < r.light_targets.size(); ++light)
        for (int house = 0; house < r.shadehouses; ++house) {
          const double target = r.light_targets[light];
          const double actual = normal(target, r.tau_u);
          for (double defol : r.defoliation) {
            x[row] = actual;
            w.push_back(target);
            z.push_back(defol);
            group.push_back(static_cast<double>(light * static_cast<std::size_t>(r.shadehouses) +
                                                static_cast<std::size_t>(house) + 1));
            const double gamma = normal(0.0, r.tau_gamma);
            boost::random::poisson_distribution<int, double> count(
                std::exp(r.beta0 + r.beta_x * actual + r.beta_z[0] * defol + gamma));
            y[row] = count(rng);
            ++row;
          }
        }
      out.data.add_column("y", y);
      out.data.add_column("w", w);
      out.data.add_column("z", z);
      out.data.add_column("shadehouse", group);
      truth["beta_z"] = r.beta_z[0];
      truth["tau_gamma"] = r.tau_gamma;
      out.spec = seedling_spec();
      break;
    }
  }
  out.truth.x = std::move(x);
  return out;
}

std::string ground_truth_json(const StudyRecipe& recipe, const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["study"] = to_string(recipe.study);
  j["seed"] = recipe.seed;
  j["n"] = recipe.n;
  j["parameters"] = truth.parameters;
  j["x"] = truth.x;
  return j.dump(2) + "\n";
}

}  // namespace meglm
