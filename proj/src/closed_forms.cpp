#include "meglm/closed_forms.hpp"

#include <cmath>
#include <stdexcept>

#include "meglm/errors.hpp"

namespace meglm {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_weights(const Eigen::VectorXd& d, Eigen::Index n) {
  if (d.size() != n) throw std::invalid_argument("weight vector length does not match w");
  for (Eigen::Index i = 0; i < n; ++i) require_positive(d[i], "error weights");
}

}  // namespace

DiagonalGaussian mec_conditional(const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u,
                                 const Eigen::VectorXd& d) {
  require_positive(tau_x, "tau_x");
  require_positive(tau_u, "tau_u");
  require_weights(d, w.size());
  DiagonalGaussian out;
  out.precision = tau_x + tau_u * d.array();
  out.mean = (tau_x * alpha0 + tau_u * d.array() * w.array()) / out.precision.array();
  return out;
}

DiagonalGaussian mec_marginal_w(double alpha0, double tau_x, double tau_u, const Eigen::VectorXd& d) {
  require_positive(tau_x, "tau_x");
  require_positive(tau_u, "tau_u");
  require_weights(d, d.size());
  DiagonalGaussian out;
  out.mean = Eigen::VectorXd::Constant(d.size(), alpha0);
  out.precision = (1.0 / (tau_u * d.array()) + 1.0 / tau_x).inverse();
  return out;
}

DiagonalGaussian mec_scaled_conditional(const Eigen::VectorXd& w, double alpha0, double tau_x, double tau_u,
                                        const Eigen::VectorXd& d, double beta_x) {
  if (beta_x == 0.0 || !std::isfinite(beta_x)) throw std::invalid_argument("beta_x must be nonzero");
  DiagonalGaussian out = mec_conditional(w, alpha0, tau_x, tau_u, d);
  out.mean *= beta_x;
  out.precision /= beta_x * beta_x;
  return out;
}

DiagonalGaussian meb_conditional(const Eigen::VectorXd& w, double tau_u, const Eigen::VectorXd& d, double beta_x) {
  if (beta_x == 0.0 || !std::isfinite(beta_x)) throw std::invalid_argument("beta_x must be nonzero");
  require_positive(tau_u, "tau_u");
  require_weights(d, w.size());
  return {beta_x * w, tau_u * d / (beta_x * beta_x)};
}

double attenuation_factor(double tau_x, double tau_u) {
  require_positive(tau_x, "tau_x");
  require_positive(tau_u, "tau_u");
  return tau_u / (tau_u + tau_x);
}

GlmFit naive_glm_fit(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Eigen::MatrixXd& z, Family family,
                     const Eigen::VectorXd& trials_in) {
  const Eigen::Index n = y.size();
  if (w.size() != n || z.rows() != n) throw std::invalid_argument("naive_glm_fit: y, w and z lengths differ");
  Eigen::VectorXd trials = trials_in.size() ? trials_in : Eigen::VectorXd::Ones(n);
  if (trials.size() != n) throw std::invalid_argument("naive_glm_fit: trials length differs");

  const Eigen::Index p = 2 + z.cols();
  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  x.col(1) = w;
  x.rightCols(z.cols()) = z;
  if (n < p) throw NumericalError("naive_glm_fit: fewer observations than coefficients");

  constexpr double clamp = 30.0;
  auto mean_of = [&](double eta, Eigen::Index i) {
    switch (family) {
      case Family::Gaussian: return eta;
      case Family::Binomial: return trials[i] / (1.0 + std::exp(-eta));
      case Family::Poisson: return std::exp(eta);
    }
    return eta;
  };
  auto deviance_of = [&](const Eigen::VectorXd& eta) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = mean_of(eta[i], i);
      switch (family) {
        case Family::Gaussian: dev += (y[i] - mu) * (y[i] - mu); break;
        case Family::Binomial: {
          const double m = trials[i];
          if (y[i] > 0) dev += 2.0 * y[i] * std::log(y[i] / mu);
          if (y[i] < m) dev += 2.0 * (m - y[i]) * std::log((m - y[i]) / (m - mu));
          break;
        }
        case Family::Poisson:
          dev += 2.0 * ((y[i] > 0 ? y[i] * std::log(y[i] / mu) : 0.0) - (y[i] - mu));
          break;
      }
    }
    return dev;
  };

  GlmFit fit;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double dev = deviance_of(eta);
  Eigen::MatrixXd xtwx;
  constexpr int max_iter = 100;
  bool converged = false;
  bool hit_clamp = false;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd weight(n), work(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = mean_of(eta[i], i);
      double var = 1.0;
      if (family == Family::Binomial) var = mu * (1.0 - mu / trials[i]);
      if (family == Family::Poisson) var = mu;
      var = std::max(var, 1e-300);
      // canonical links: d mu / d eta = var
      weight[i] = family == Family::Gaussian ? 1.0 : var;
      work[i] = eta[i] + (y[i] - mu) / (family == Family::Gaussian ? 1.0 : var);
    }
    xtwx = x.transpose() * weight.asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtwx);
    if (qr.rank() < p) throw NumericalError("naive_glm_fit: design matrix is rank deficient");
    beta = qr.solve(x.transpose() * weight.asDiagonal() * work);
    eta = x * beta;
    hit_clamp = false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(eta[i]) > clamp && family != Family::Gaussian) {
        eta[i] = std::copysign(clamp, eta[i]);
        hit_clamp = true;
      }
    const double dev_new = deviance_of(eta);
    fit.iterations = it;
    if (!std::isfinite(dev_new)) throw NumericalError("naive_glm_fit: IRLS diverged (non-finite deviance)");
    const bool small_change = std::abs(dev_new - dev) < 1e-10 * (1.0 + std::abs(dev_new)) ||
                              std::abs(dev_new - dev) < 1e-10;
    dev = dev_new;
    if (small_change) {
      converged = true;
      break;
    }
  }
  if (hit_clamp) throw NumericalError("naive_glm_fit: IRLS diverged (linear predictor unbounded; separation?)");
  if (!converged) throw NumericalError("naive_glm_fit: IRLS did not converge");

  fit.coefficients = beta;
  fit.deviance = dev;
  if (family == Family::Gaussian) fit.dispersion = dev / static_cast<double>(std::max<Eigen::Index>(n - p, 1));
  // Recompute the information at the final estimate.
  Eigen::VectorXd weight(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = mean_of(eta[i], i);
    weight[i] = family == Family::Gaussian ? 1.0 : (family == Family::Binomial ? mu * (1.0 - mu / trials[i]) : mu);
  }
  xtwx = x.transpose() * weight.asDiagonal() * x;
  const Eigen::MatrixXd cov = xtwx.inverse() * fit.dispersion;
  fit.standard_errors = cov.diagonal().cwiseSqrt();
  return fit;
}

}  // namespace meglm
