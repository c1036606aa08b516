#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meglm/dataset.hpp"
#include "meglm/inla.hpp"
#include "meglm/mcmc.hpp"
#include "meglm/model.hpp"

namespace meglm {

enum class Method { Naive, Laplace, Mcmc };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct ParameterSummary {
  std::string parameter;
  std::string method;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  /// Tabulated marginal; empty for sampled parameters and for coarse hyper grids.
  std::vector<double> values;
  std::vector<double> density;
};

struct PosteriorReport {
  Method method = Method::Laplace;
  std::vector<ParameterSummary> parameters;
  std::map<std::string, double> centering;
  std::string family;
  std::string error_kind;
  std::size_t observations = 0;
  // Laplace / naive
  std::size_t grid_points = 0;
  std::size_t grid_evaluations = 0;
  bool grid_truncated = false;
  double dz = 0.0;
  double diff_logdens = 0.0;
  // MCMC
  std::optional<ChainOutput> chain;
  ChainConfig chain_config;

  const ParameterSummary* find(const std::string& name) const;
};

/// Posterior summaries of the regression and exposure coefficients and of the
/// free hyperparameters from the nested Laplace grid.
PosteriorReport fit_laplace(const JointModel& model, const GridOptions& options);

/// Same machinery applied to the model that uses the replicate-mean proxy as x.
PosteriorReport fit_naive(const ModelSpec& spec, const Dataset& data, const GridOptions& options);

PosteriorReport fit_mcmc(const JointModel& model, const ChainConfig& config);

/// Moments and type-7 quantiles of a sample.
ParameterSummary summarize_draws(const std::string& name, const Eigen::VectorXd& draws);

}  // namespace meglm
