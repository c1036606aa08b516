#include "meglm/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "meglm/errors.hpp"

namespace meglm {

Eigen::VectorXd GaussianApprox::marginal_variances() const {
  const auto n = precision_chol.rows();
  const Eigen::MatrixXd inv =
      precision_chol.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  return inv.colwise().squaredNorm().transpose();
}

double GaussianApprox::marginal_variance(int i) const {
  const auto n = precision_chol.rows();
  if (i < 0 || i >= n) throw std::out_of_range("latent index out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[i] = 1.0;
  precision_chol.triangularView<Eigen::Lower>().solveInPlace(e);
  return e.squaredNorm();
}

LatentDerivatives latent_derivatives(const JointModel& model, const Eigen::VectorXd& v,
                                     const Eigen::VectorXd& theta) {
  const auto n = static_cast<Eigen::Index>(model.layout.size);
  LatentDerivatives d;
  d.gradient = Eigen::VectorXd::Zero(n);
  d.neg_hessian = Eigen::MatrixXd::Zero(n, n);
  const double beta_x = beta_x_of(model, theta);
  for (const auto& row : model.rows) {
    const double prec = row.family == Family::Gaussian ? row_precision(row, theta) : 0.0;
    const auto r = row_log_likelihood(row, row_predictor(row, v, beta_x), prec);
    d.value += r.value;
    for (const auto& a : row.terms) {
      const double ca = a.times_beta_x ? beta_x * a.coef : a.coef;
      d.gradient[a.index] += r.d1 * ca;
      for (const auto& b : row.terms) {
        const double cb = b.times_beta_x ? beta_x * b.coef : b.coef;
        d.neg_hessian(a.index, b.index) += r.neg_d2 * ca * cb;
      }
    }
  }
  return d;
}

namespace {

double latent_objective(const JointModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& theta) {
  const double beta_x = beta_x_of(model, theta);
  double total = 0.0;
  for (const auto& row : model.rows) {
    const double prec = row.family == Family::Gaussian ? row_precision(row, theta) : 0.0;
    total += row_log_likelihood(row, row_predictor(row, v, beta_x), prec).value;
  }
  return total;
}

}  // namespace

Eigen::MatrixXd cholesky_with_ridge(const Eigen::MatrixXd& q, double ridge) {
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd shifted = q;
  shifted.diagonal().array() += ridge;
  llt.compute(shifted);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  return llt.matrixL();
}

GaussianApprox latent_gaussian_approx(const JointModel& model, const Eigen::VectorXd& theta,
                                      const NewtonOptions& options, const Eigen::VectorXd* start) {
  check_theta(model, theta);
  const auto n = static_cast<Eigen::Index>(model.layout.size);
  Eigen::VectorXd v = start ? *start : Eigen::VectorXd::Zero(n);
  if (v.size() != n) throw std::invalid_argument("start vector does not match the latent layout");
  const bool quadratic = model.all_gaussian();

  double f = latent_objective(model, v, theta);
  auto d = latent_derivatives(model, v, theta);
  int steps = 0;
  // The factor is reused across steps while the gradient keeps shrinking fast;
  // each refactorization costs far more than a derivative pass.
  Eigen::MatrixXd chol;
  bool fresh = false, refactor = true;
  double last_grad = std::numeric_limits<double>::infinity();
  while (d.gradient.lpNorm<Eigen::Infinity>() >= options.tol) {
    if (steps == options.max_iter)
      throw NumericalError("Newton iteration did not converge in " + std::to_string(options.max_iter) + " steps");
    const double grad = d.gradient.lpNorm<Eigen::Infinity>();
    if (refactor || grad > 0.25 * last_grad) {
      chol = cholesky_with_ridge(d.neg_hessian, options.ridge);
      fresh = true;
    } else {
      fresh = false;
    }
    last_grad = grad;
    refactor = false;
    Eigen::VectorXd delta = chol.triangularView<Eigen::Lower>().solve(d.gradient);
    chol.transpose().triangularView<Eigen::Upper>().solveInPlace(delta);

    double step = 1.0;
    Eigen::VectorXd candidate = v + delta;
    double f_new = latent_objective(model, candidate, theta);
    const double slack = 1e-12 * (1.0 + std::abs(f));
    while (!(f_new >= f - slack) && step > 1e-10) {
      step *= 0.5;
      candidate = v + step * delta;
      f_new = latent_objective(model, candidate, theta);
    }
    if (!(f_new >= f - slack)) {
      if (!fresh) {
        refactor = true;
        continue;
      }
      throw NumericalError("Newton line search failed to increase the objective");
    }
    refactor = step < 1.0;
    v = std::move(candidate);
    f = f_new;
    ++steps;
    d = latent_derivatives(model, v, theta);
    // A Gaussian objective is quadratic: one full Newton step lands on the mode.
    if (quadratic && fresh && step == 1.0) break;
    if ((step * delta).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + v.lpNorm<Eigen::Infinity>())) break;
  }

  GaussianApprox out;
  out.mode = std::move(v);
  out.precision_chol = cholesky_with_ridge(d.neg_hessian, options.ridge);
  out.log_det_precision = 2.0 * out.precision_chol.diagonal().array().log().sum();
  out.converged_in = steps;
  return out;
}

double gaussian_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision_chol) {
  const auto n = x.size();
  if (mean.size() != n || precision_chol.rows() != n || precision_chol.cols() != n)
    throw std::invalid_argument("gaussian_logpdf: dimension mismatch");
  const Eigen::VectorXd r = precision_chol.transpose() * (x - mean);
  return -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) +
         precision_chol.diagonal().array().log().sum() - 0.5 * r.squaredNorm();
}

GaussianApprox exact_linear_gaussian_posterior(const JointModel& model, const Eigen::VectorXd& theta) {
  if (!model.all_gaussian())
    throw std::invalid_argument("exact_linear_gaussian_posterior requires an all-Gaussian model");
  check_theta(model, theta);
  const auto n = static_cast<Eigen::Index>(model.layout.size);
  const auto m = static_cast<Eigen::Index>(model.rows.size());
  const double beta_x = beta_x_of(model, theta);

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd weight(m), response(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = model.rows[static_cast<std::size_t>(r)];
    for (const auto& t : row.terms) design(r, t.index) += t.times_beta_x ? beta_x * t.coef : t.coef;
    weight[r] = row_precision(row, theta);
    response[r] = row.observed - row.offset;
  }
  const Eigen::MatrixXd q = design.transpose() * weight.asDiagonal() * design;
  const Eigen::VectorXd b = design.transpose() * weight.asDiagonal() * response;

  GaussianApprox out;
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw NumericalError("linear-Gaussian precision is not positive definite");
  out.mode = llt.solve(b);
  out.precision_chol = llt.matrixL();
  out.log_det_precision = 2.0 * out.precision_chol.diagonal().array().log().sum();
  out.converged_in = 0;
  return out;
}

}  // namespace meglm
