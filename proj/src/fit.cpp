#include "meglm/fit.hpp"

#include <algorithm>
#include <cmath>

#include "meglm/errors.hpp"

namespace meglm {

std::string to_string(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::Laplace: return "laplace";
    case Method::Mcmc: return "mcmc";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "naive") return Method::Naive;
  if (name == "laplace") return Method::Laplace;
  if (name == "mcmc") return Method::Mcmc;
  throw InputError("unknown method '" + name + "' (expected naive, laplace, mcmc or all)");
}

const ParameterSummary* PosteriorReport::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.parameter == name) return &p;
  return nullptr;
}

namespace {

/// Report order: beta0, beta_x, beta_<z>..., alpha..., then precisions.
int rank_of(const std::string& name) {
  if (name == "beta0") return 0;
  if (name == "beta_x") return 1;
  if (name.rfind("beta_", 0) == 0) return 2;
  if (name == "alpha0") return 3;
  if (name.rfind("alpha_", 0) == 0) return 4;
  if (name == "tau_u") return 5;
  if (name == "tau_x") return 6;
  if (name == "tau_eps") return 7;
  if (name == "tau_gamma") return 8;
  return 9;
}

void sort_parameters(std::vector<ParameterSummary>& ps) {
  std::stable_sort(ps.begin(), ps.end(),
                   [](const auto& a, const auto& b) { return rank_of(a.parameter) < rank_of(b.parameter); });
}

ParameterSummary from_marginal(const std::string& name, Method method, const PosteriorMarginal& m) {
  ParameterSummary s;
  s.parameter = name;
  s.method = to_string(method);
  s.mean = m.mean;
  s.sd = m.sd;
  s.q025 = m.q025;
  s.q50 = m.q50;
  s.q975 = m.q975;
  if (m.has_density) {
    s.values = m.values;
    s.density = m.density;
  }
  return s;
}

PosteriorReport grid_report(const JointModel& model, const GridOptions& options_in, Method method) {
  const LatentLayout& L = model.layout;
  std::vector<int> latent = {L.beta0};
  for (int k = 0; k < L.n_beta_z; ++k)
    if (!(model.data.naive && k == 0 && model.spec.beta_x.is_fixed())) latent.push_back(L.beta_z + k);
  if (L.alpha0 >= 0) latent.push_back(L.alpha0);
  for (int k = 0; k < L.n_alpha_z; ++k) latent.push_back(L.alpha_z + k);

  GridOptions options = options_in;
  if (!options.variance_indices) options.variance_indices = latent;
  const IntegrationGrid grid = explore_grid(model, options);
  PosteriorReport r;
  r.method = method;
  r.centering = model.data.centering;
  r.family = to_string(model.data.family);
  r.error_kind = to_string(model.data.error_kind);
  r.observations = model.sizes.regression;
  r.grid_points = grid.points.size();
  r.grid_evaluations = grid.evaluations;
  r.grid_truncated = grid.truncated;
  r.dz = grid.dz;
  r.diff_logdens = grid.diff_logdens;

  for (int i : latent)
    r.parameters.push_back(from_marginal(L.names[static_cast<std::size_t>(i)], method, latent_marginal(model, grid, i)));
  for (int k : grid.free)
    r.parameters.push_back(from_marginal(model.hypers[static_cast<std::size_t>(k)].name, method, hyper_marginal(grid, k)));
  sort_parameters(r.parameters);
  return r;
}

}  // namespace

PosteriorReport fit_laplace(const JointModel& model, const GridOptions& options) {
  if (model.data.naive) return grid_report(model, options, Method::Naive);
  return grid_report(model, options, Method::Laplace);
}

PosteriorReport fit_naive(const ModelSpec& spec, const Dataset& data, const GridOptions& options) {
  return grid_report(build_naive_model(spec, data), options, Method::Naive);
}

ParameterSummary summarize_draws(const std::string& name, const Eigen::VectorXd& draws) {
  if (draws.size() < 2) throw std::invalid_argument("summarize_draws: need at least two draws");
  ParameterSummary s;
  s.parameter = name;
  s.method = to_string(Method::Mcmc);
  const double n = static_cast<double>(draws.size());
  s.mean = draws.mean();
  s.sd = std::sqrt((draws.array() - s.mean).square().sum() / (n - 1.0));
  std::vector<double> sorted(draws.data(), draws.data() + draws.size());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double h = (n - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  s.q025 = quantile(0.025);
  s.q50 = quantile(0.5);
  s.q975 = quantile(0.975);
  return s;
}

PosteriorReport fit_mcmc(const JointModel& model, const ChainConfig& config) {
  PosteriorReport r;
  r.method = Method::Mcmc;
  r.centering = model.data.centering;
  r.family = to_string(model.data.family);
  r.error_kind = to_string(model.data.error_kind);
  r.observations = model.sizes.regression;
  r.chain_config = config;
  ChainOutput out = run_chain(model, config);
  for (std::size_t c = 0; c < out.names.size(); ++c) {
    const auto& name = out.names[c];
    if (name.rfind("x[", 0) == 0) continue;
    const auto k = model.hyper_index(name == "beta_x"      ? HyperKind::BetaX
                                     : name == "tau_u"     ? HyperKind::ErrorPrecision
                                     : name == "tau_x"     ? HyperKind::ExposurePrecision
                                     : name == "tau_eps"   ? HyperKind::ResidualPrecision
                                     : name == "tau_gamma" ? HyperKind::RandomEffectPrecision
                                                           : HyperKind::BetaX);
    const bool is_hyper = name == "beta_x" || name.rfind("tau_", 0) == 0;
    if (is_hyper && k >= 0 && model.hypers[static_cast<std::size_t>(k)].prior.is_fixed()) continue;
    r.parameters.push_back(summarize_draws(name, out.draws.col(static_cast<Eigen::Index>(c))));
  }
  sort_parameters(r.parameters);
  r.chain = std::move(out);
  return r;
}

}  // namespace meglm
