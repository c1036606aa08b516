#pragma once

#include <Eigen/Dense>
#include <vector>

#include "meglm/model.hpp"

namespace meglm {

/// Independent normals in the precision parameterization.
struct DiagonalGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd precision;
};

/// x | w, theta for classical error: precision tau_x + tau_u d_i and mean
/// (tau_x alpha0 + tau_u d_i w_i) / precision.
DiagonalGaussian mec_conditional(const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u,
                                 const Eigen::VectorXd& d);

/// w | theta = N(alpha0, 1 / (1/(tau_u d_i) + 1/tau_x)).
DiagonalGaussian mec_marginal_w(double alpha0, double tau_x, double tau_u, const Eigen::VectorXd& d);

/// nu = beta_x x given w under classical error.
DiagonalGaussian mec_scaled_conditional(const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u,
                                        const Eigen::VectorXd& d, double beta_x);

/// nu = beta_x x given w under Berkson error: N(beta_x w, tau_u d_i / beta_x^2).
DiagonalGaussian meb_conditional(const Eigen::VectorXd& w, double tau_u, const Eigen::VectorXd& d, double beta_x);

/// tau_u / (tau_u + tau_x).
double attenuation_factor(double tau_x, double tau_u);

struct GlmFit {
  Eigen::VectorXd coefficients;  // (intercept, w, z...)
  Eigen::VectorXd standard_errors;
  double deviance = 0.0;
  /// Residual variance estimate (Gaussian family), otherwise 1.
  double dispersion = 1.0;
  int iterations = 0;
};

/// Maximum-likelihood GLM of y on (1, w, z) by iteratively reweighted least
/// squares. Throws NumericalError on rank deficiency or divergence.
GlmFit naive_glm_fit(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Eigen::MatrixXd& z, Family family,
                     const Eigen::VectorXd& trials = Eigen::VectorXd());

}  // namespace meglm
