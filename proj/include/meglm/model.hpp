#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meglm/dataset.hpp"
#include "meglm/prior.hpp"

namespace meglm {

enum class Family { Gaussian, Binomial, Poisson };
enum class ErrorKind { Classical, Berkson };

std::string to_string(Family f);
std::string to_string(ErrorKind k);

struct RandomEffect {
  PriorSpec precision = PriorSpec::gamma(1.0, 0.005);
};

/// First level: family, response and error-free covariates. Binomial uses a
/// logit link, Poisson a log link, Gaussian the identity.
struct ObservationModel {
  Family family = Family::Gaussian;
  std::string response = "y";
  std::vector<std::string> covariates;
  int trials = 1;
  std::optional<std::string> trials_column;
  PriorSpec residual_precision = PriorSpec::gamma(1.0, 0.001);
  /// Per-observation iid normal effect (overdispersion).
  std::optional<RandomEffect> random_effect;
  PriorSpec intercept = PriorSpec::gaussian(0.0, 1e-3);
  PriorSpec coefficients = PriorSpec::gaussian(0.0, 1e-3);
};

struct ErrorModel {
  ErrorKind kind = ErrorKind::Classical;
  /// Replicate proxy columns w_1..w_J. Berkson takes exactly one.
  std::vector<std::string> proxies = {"w"};
  /// Column of positive weights d_i; absent means D = I.
  std::optional<std::string> weights;
  /// Berkson only: rows sharing a group id share one latent x.
  std::optional<std::string> group;
  PriorSpec precision = PriorSpec::gamma(1.0, 0.01);
};

/// Law of the unobserved covariate, x ~ N(alpha0 + z alpha_z, tau_x).
struct ExposureModel {
  PriorSpec intercept = PriorSpec::gaussian(0.0, 1.0);
  std::vector<std::string> covariates;
  PriorSpec coefficients = PriorSpec::gaussian(0.0, 1.0);
  PriorSpec precision = PriorSpec::gamma(1.0, 0.01);
};

struct ModelSpec {
  ObservationModel observation;
  ErrorModel error;
  std::optional<ExposureModel> exposure;
  PriorSpec beta_x = PriorSpec::gaussian(0.0, 1e-3);
  /// Precision of the x* = beta_x x link; nullopt builds the model without a copy.
  std::optional<double> copy_precision = 1e9;
  bool center = true;

  /// Throws InputError when the combination is unsupported.
  void validate() const;
};

enum class Block { Regression, Exposure, Error, Copy, LatentPrior };

enum class HyperKind { BetaX, ErrorPrecision, ExposurePrecision, ResidualPrecision, RandomEffectPrecision };

struct HyperParameter {
  HyperKind kind;
  std::string name;
  PriorSpec prior;
  bool log_scale = true;
};

/// coef * v[index], multiplied by beta_x when `times_beta_x`.
struct Term {
  int index = 0;
  double coef = 1.0;
  bool times_beta_x = false;
};

/// One row of the stacked response. Gaussian rows take their precision from
/// theta[precision_hyper] * precision_scale, or from precision_scale alone when
/// precision_hyper < 0.
struct StackedRow {
  Block block = Block::Regression;
  Family family = Family::Gaussian;
  double observed = 0.0;
  double trials = 1.0;
  double offset = 0.0;
  std::vector<Term> terms;
  int precision_hyper = -1;
  double precision_scale = 1.0;
};

/// Index map over v = (beta0, beta_z, alpha0, alpha_z, x, x*, gamma). Absent
/// blocks have start -1 and count 0.
struct LatentLayout {
  int beta0 = -1;
  int beta_z = -1;
  int n_beta_z = 0;
  int alpha0 = -1;
  int alpha_z = -1;
  int n_alpha_z = 0;
  int x = -1;
  int n_x = 0;
  int x_copy = -1;
  int gamma = -1;
  int n_gamma = 0;
  int size = 0;
  std::vector<std::string> names;

  int index_of(const std::string& name) const;
};

struct BlockSizes {
  std::size_t regression = 0;
  std::size_t exposure = 0;
  std::size_t proxy = 0;
};

struct ProxyObservation {
  int unit = 0;
  int replicate = 0;
  double value = 0.0;
  double weight = 1.0;
};

/// Structured copy of the (centered) data a model was built from.
struct ModelData {
  Family family = Family::Gaussian;
  ErrorKind error_kind = ErrorKind::Classical;
  bool naive = false;
  std::vector<std::optional<double>> y;
  std::vector<double> trials;
  Eigen::MatrixXd z;
  std::vector<std::string> z_names;
  /// Row -> latent unit (index into x).
  std::vector<int> unit;
  Eigen::MatrixXd exposure_z;
  std::vector<std::string> exposure_names;
  std::vector<ProxyObservation> proxies;
  /// Mean of the available proxies per unit.
  std::vector<double> unit_proxy_mean;
  int replicates = 1;
  std::optional<double> alpha0_fixed;
  /// Column name -> subtracted constant.
  std::map<std::string, double> centering;
};

/// Stacked multi-likelihood model: regression, exposure pseudo-observations,
/// proxy observations, the copy link and Gaussian latent priors.
struct JointModel {
  ModelSpec spec;
  ModelData data;
  LatentLayout layout;
  std::vector<HyperParameter> hypers;
  std::vector<StackedRow> rows;
  BlockSizes sizes;
  std::optional<double> copy_precision;

  int hyper_index(HyperKind kind) const;
  /// Prior means for free hyperparameters, fixed values otherwise.
  Eigen::VectorXd default_theta() const;
  std::vector<int> free_hypers() const;
  std::vector<std::string> hyper_names() const;
  bool all_gaussian() const;
};

JointModel build_joint_model(const ModelSpec& spec, const Dataset& data);

/// Model that substitutes the proxy (replicate mean) for x, with beta_x as an
/// ordinary latent coefficient and the same priors.
JointModel build_naive_model(const ModelSpec& spec, const Dataset& data);

/// Adds x* with link density exp(-tau/2 |x* - beta_x x|^2); regression rows read x*.
JointModel copy_augment(const JointModel& model, double copy_precision);

/// log p(y|v,theta) + log p(v|theta) + log p(theta), theta on the natural scale.
double joint_log_density(const JointModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& theta);

/// Sum of the stacked-row log densities of one block.
double block_log_density(const JointModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                         Block block);

double log_prior_theta(const JointModel& model, const Eigen::VectorXd& theta);

/// Throws std::invalid_argument unless theta conforms and all precisions are positive.
void check_theta(const JointModel& model, const Eigen::VectorXd& theta);

/// Precision of a Gaussian stacked row under theta.
inline double row_precision(const StackedRow& row, const Eigen::VectorXd& theta) {
  return row.precision_hyper < 0 ? row.precision_scale : theta[row.precision_hyper] * row.precision_scale;
}

/// Linear predictor of a stacked row.
inline double row_predictor(const StackedRow& row, const Eigen::VectorXd& v, double beta_x) {
  double eta = row.offset;
  for (const auto& t : row.terms) eta += (t.times_beta_x ? beta_x * t.coef : t.coef) * v[t.index];
  return eta;
}

double beta_x_of(const JointModel& model, const Eigen::VectorXd& theta);

/// Row log-likelihood and its first two derivatives in the linear predictor.
struct RowDerivatives {
  double value;
  double d1;
  double neg_d2;
};
RowDerivatives row_log_likelihood(const StackedRow& row, double eta, double precision);

}  // namespace meglm
