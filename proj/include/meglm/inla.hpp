#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "meglm/gaussian.hpp"
#include "meglm/model.hpp"

namespace meglm {

struct GridOptions {
  double dz = 0.5;
  double diff_logdens = 20.0;
  std::size_t max_points = 50000;
  /// Central-difference step for the curvature at the mode (internal scale).
  double fd_step = 5e-3;
  unsigned threads = 0;
  NewtonOptions newton;
  /// Latent indices whose conditional variances are kept per grid point; unset keeps all.
  std::optional<std::vector<int>> variance_indices;
};

struct GridPoint {
  Eigen::VectorXd theta;     // natural scale, all hyperparameters
  Eigen::VectorXd internal;  // free coordinates, internal scale
  Eigen::VectorXi lattice;   // integer position on the standardized lattice
  double log_post = 0.0;     // internal-scale log density, unnormalized
  double weight = 0.0;
  Eigen::VectorXd latent_mode;
  /// Conditional variances; NaN for indices not requested.
  Eigen::VectorXd latent_variance;
};

/// Support points theta_k with weights Delta_k for the finite-sum marginals.
struct IntegrationGrid {
  std::vector<GridPoint> points;
  std::vector<int> free;          // hyperparameter index per free coordinate
  std::vector<bool> log_scale;    // per free coordinate
  std::vector<std::string> names; // per free coordinate
  Eigen::VectorXd mode;           // internal scale
  Eigen::VectorXd mode_theta;     // natural scale, all hyperparameters
  /// Columns map standardized coordinates to internal-scale offsets.
  Eigen::MatrixXd axes;
  double dz = 0.5;
  double diff_logdens = 20.0;
  std::size_t evaluations = 0;
  /// Set when max_points stopped the walk before the cutoff did; the retained
  /// points are then the highest-density ones.
  bool truncated = false;

  int coordinate_of(int hyper) const;
};

/// Density on a value grid with trapezoid summaries. When density is not
/// available (too few distinct grid values) only the moments are set.
struct PosteriorMarginal {
  std::vector<double> values;
  std::vector<double> density;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  bool has_density = true;
};

/// Trapezoid mass, mean, sd and 2.5/50/97.5% quantiles of a tabulated density.
PosteriorMarginal summarize_density(std::vector<double> values, std::vector<double> density);

double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

/// Laplace approximation log p~(theta | y) on the natural scale, up to a
/// model-wide constant. `approx` receives the Gaussian approximation used.
double log_hyperposterior(const JointModel& model, const Eigen::VectorXd& theta, const NewtonOptions& options = {},
                          const Eigen::VectorXd* start = nullptr, GaussianApprox* approx = nullptr);

/// Natural-scale theta from internal coordinates of the free hyperparameters.
Eigen::VectorXd theta_from_internal(const JointModel& model, const std::vector<int>& free,
                                    const Eigen::VectorXd& internal);
Eigen::VectorXd internal_from_theta(const JointModel& model, const std::vector<int>& free,
                                    const Eigen::VectorXd& theta);

/// Mode search, curvature-standardized lattice walk and weights.
IntegrationGrid explore_grid(const JointModel& model, const GridOptions& options = {});

/// Mixture-of-Gaussians marginal of latent component i on `points` values
/// spanning +-`span` mixture sd.
PosteriorMarginal latent_marginal(const JointModel& model, const IntegrationGrid& grid, int i, int points = 75,
                                  double span = 5.0);

/// Marginal of hyperparameter `hyper` (index into model.hypers), reported on the
/// natural scale.
PosteriorMarginal hyper_marginal(const IntegrationGrid& grid, int hyper);

}  // namespace meglm
