#pragma once

#include <Eigen/Dense>

#include "meglm/model.hpp"

namespace meglm {

/// Gaussian approximation of the latent field given theta: mode and the
/// Cholesky factor of the negative Hessian at the mode.
struct GaussianApprox {
  Eigen::VectorXd mode;
  Eigen::MatrixXd precision_chol;  // lower triangular, Q = L L^T
  double log_det_precision = 0.0;
  int converged_in = 0;

  /// diag(Q^{-1}) for every latent index.
  Eigen::VectorXd marginal_variances() const;
  /// (Q^{-1})_{ii} by a single forward solve.
  double marginal_variance(int i) const;
};

struct NewtonOptions {
  double tol = 1e-8;  // max-norm of the gradient
  int max_iter = 100;
  double ridge = 1e-8;
};

/// Gradient and negative Hessian of joint_log_density in v (theta held fixed).
struct LatentDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd neg_hessian;
};

LatentDerivatives latent_derivatives(const JointModel& model, const Eigen::VectorXd& v,
                                     const Eigen::VectorXd& theta);

/// Newton iteration with step halving for the mode of log p(v | y, theta).
/// Throws NumericalError when Newton does not converge or the Hessian is not
/// negative definite even after one ridge correction.
GaussianApprox latent_gaussian_approx(const JointModel& model, const Eigen::VectorXd& theta,
                                      const NewtonOptions& options = {}, const Eigen::VectorXd* start = nullptr);

/// Multivariate normal log density in the precision parameterization.
double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision_chol);

/// Closed-form conditional posterior for models whose stacked rows are all
/// Gaussian, assembled as Q = A^T W A and b = A^T W (y - offset).
GaussianApprox exact_linear_gaussian_posterior(const JointModel& model, const Eigen::VectorXd& theta);

/// Lower Cholesky factor of a symmetric positive definite matrix; retries once
/// with `ridge` added to the diagonal. Throws NumericalError if both fail.
Eigen::MatrixXd cholesky_with_ridge(const Eigen::MatrixXd& q, double ridge);

}  // namespace meglm
