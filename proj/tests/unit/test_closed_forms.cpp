#include <doctest.h>

#include <cmath>
#include <random>

#include "meglm/closed_forms.hpp"
#include "meglm/errors.hpp"
#include "oracles.hpp"

using namespace meglm;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("closed-forms") {
  TEST_CASE("worked examples") {
    const auto c = mec_conditional(vec({3.0}), 2.0, 1.0, 4.0, vec({1.0}));
    CHECK(c.precision[0] == 5.0);
    CHECK(c.mean[0] == doctest::Approx(2.8));
    const auto w = mec_marginal_w(0.0, 2.0, 2.0, vec({1.0}));
    CHECK(w.precision[0] == doctest::Approx(1.0));
    const auto s1 = mec_scaled_conditional(vec({3.0}), 2.0, 1.0, 4.0, vec({1.0}), 1.0);
    const auto s2 = mec_scaled_conditional(vec({3.0}), 2.0, 1.0, 4.0, vec({1.0}), 2.0);
    CHECK(s2.mean[0] == doctest::Approx(2.0 * s1.mean[0]));
    CHECK(1.0 / s2.precision[0] == doctest::Approx(4.0 / s1.precision[0]));
    const auto b = meb_conditional(vec({1.0}), 4.0, vec({1.0}), 2.0);
    CHECK(b.mean[0] == 2.0);
    CHECK(b.precision[0] == 1.0);
    CHECK(attenuation_factor(1.0, 1.0) == 0.5);
    CHECK(attenuation_factor(1.0, 3.0) == 0.75);
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(mec_conditional(vec({1.0}), 0.0, 0.0, 1.0, vec({1.0})), std::invalid_argument);
    CHECK_THROWS_AS(mec_conditional(vec({1.0}), 0.0, 1.0, 1.0, vec({-1.0})), std::invalid_argument);
    CHECK_THROWS_AS(meb_conditional(vec({1.0}), 1.0, vec({1.0}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mec_conditional(vec({1.0, 2.0}), 0.0, 1.0, 1.0, vec({1.0})), std::invalid_argument);
  }

  TEST_CASE("conditionals agree with brute-force quadrature") {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> logu(std::log(0.1), std::log(10.0));
    for (int rep = 0; rep < 100; ++rep) {
      const double w = nd(gen), alpha0 = nd(gen), tau_x = std::exp(logu(gen)), tau_u = std::exp(logu(gen));
      const double d = std::exp(logu(gen)), beta_x = nd(gen) + (rep % 2 ? 0.5 : -0.5);
      const double sx = 1.0 / std::sqrt(tau_x), su = 1.0 / std::sqrt(tau_u * d);

      // Classical: p(x | w) proportional to N(x; alpha0, tau_x) N(w; x, tau_u d).
      const double lo = std::min(w, alpha0) - 12.0 * std::min(sx, su), hi = std::max(w, alpha0) + 12.0 * std::min(sx, su);
      const auto q = oracle::quadrature_moments(
          [&](double x) { return -0.5 * tau_x * (x - alpha0) * (x - alpha0) - 0.5 * tau_u * d * (w - x) * (w - x); }, lo, hi);
      const auto c = mec_conditional(vec({w}), alpha0, tau_x, tau_u, vec({d}));
      CHECK(std::abs(c.mean[0] - q.mean) < 1e-6);
      CHECK(std::abs(1.0 / c.precision[0] - q.var) < 1e-6);

      const auto sc = mec_scaled_conditional(vec({w}), alpha0, tau_x, tau_u, vec({d}), beta_x);
      CHECK(std::abs(sc.mean[0] - beta_x * q.mean) < 1e-6);
      CHECK(std::abs(1.0 / sc.precision[0] - beta_x * beta_x * q.var) < 1e-6);

      // Berkson: x = w + u, so nu = beta_x x has its law from the density of x.
      const auto qb = oracle::quadrature_moments([&](double x) { return -0.5 * tau_u * d * (x - w) * (x - w); },
                                                 w - 12.0 * su, w + 12.0 * su);
      const auto b = meb_conditional(vec({w}), tau_u, vec({d}), beta_x);
      CHECK(std::abs(b.mean[0] - beta_x * qb.mean) < 1e-6);
      CHECK(std::abs(1.0 / b.precision[0] - beta_x * beta_x * qb.var) < 1e-6);
    }
  }

  TEST_CASE("proxy marginal variance by simulation") {
    std::mt19937_64 gen(2);
    const double tau_x = 2.0, tau_u = 0.5, alpha0 = 1.0;
    std::normal_distribution<double> ex(alpha0, 1.0 / std::sqrt(tau_x)), eu(0.0, 1.0 / std::sqrt(tau_u));
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    std::vector<double> w(n);
    for (auto& v : w) {
      v = ex(gen) + eu(gen);
      sum += v;
    }
    const double mean = sum / n;
    for (double v : w) {
      sum2 += (v - mean) * (v - mean);
      sum4 += std::pow(v - mean, 4);
    }
    const double var = sum2 / (n - 1);
    const double se = std::sqrt((sum4 / n - var * var) / n);
    const auto m = mec_marginal_w(alpha0, tau_x, tau_u, Eigen::VectorXd::Ones(1));
    CHECK(std::abs(var - 1.0 / m.precision[0]) < 3.0 * se);
    CHECK(std::abs(mean - alpha0) < 3.0 * std::sqrt(var / n));
  }

  TEST_CASE("least squares matches the normal equations") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    const int n = 60;
    Eigen::VectorXd y(n), w(n);
    Eigen::MatrixXd z(n, 2);
    for (int i = 0; i < n; ++i) {
      w[i] = nd(gen);
      z(i, 0) = nd(gen);
      z(i, 1) = i % 2;
      y[i] = 1.0 + 0.5 * w[i] - 0.3 * z(i, 0) + 0.2 * z(i, 1) + 0.4 * nd(gen);
    }
    Eigen::MatrixXd X(n, 4);
    X << Eigen::VectorXd::Ones(n), w, z;
    const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const auto fit = naive_glm_fit(y, w, z, Family::Gaussian);
    CHECK((fit.coefficients - beta).lpNorm<Eigen::Infinity>() < 1e-10);
    const double rss = (y - X * beta).squaredNorm();
    CHECK(fit.dispersion == doctest::Approx(rss / (n - 4)).epsilon(1e-10));
    const Eigen::VectorXd se = (fit.dispersion * (X.transpose() * X).inverse()).diagonal().cwiseSqrt();
    CHECK((fit.standard_errors - se).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  TEST_CASE("poisson and logistic fits agree with an independent optimizer") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> nd;
    const int n = 80;
    Eigen::VectorXd yp(n), yb(n), w(n);
    Eigen::MatrixXd z(n, 1);
    for (int i = 0; i < n; ++i) {
      w[i] = nd(gen);
      z(i, 0) = nd(gen);
      yp[i] = std::poisson_distribution<int>(std::exp(0.3 + 0.6 * w[i] - 0.2 * z(i, 0)))(gen);
      yb[i] = std::uniform_real_distribution<double>()(gen) < 1.0 / (1.0 + std::exp(-(0.2 - 0.8 * w[i]))) ? 1.0 : 0.0;
    }
    auto loglik = [&](const Eigen::VectorXd& b, bool poisson) {
      double l = 0.0;
      for (int i = 0; i < n; ++i) {
        const double e = b[0] + b[1] * w[i] + b[2] * z(i, 0);
        l += poisson ? yp[i] * e - std::exp(e) : yb[i] * e - std::log1p(std::exp(e));
      }
      return l;
    };
    for (bool poisson : {true, false}) {
      const auto fit = naive_glm_fit(poisson ? yp : yb, w, z, poisson ? Family::Poisson : Family::Binomial);
      const Eigen::VectorXd ref =
          oracle::bfgs_maximize([&](const Eigen::VectorXd& b) { return loglik(b, poisson); }, Eigen::VectorXd::Zero(3));
      CHECK((fit.coefficients - ref).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }

  TEST_CASE("degenerate designs are reported") {
    const Eigen::VectorXd w = vec({-2.0, -1.0, 1.0, 2.0});
    const Eigen::MatrixXd none(4, 0);
    CHECK_THROWS_AS(naive_glm_fit(vec({0.0, 0.0, 1.0, 1.0}), w, none, Family::Binomial), NumericalError);
    Eigen::MatrixXd dup(4, 1);
    dup.col(0) = w;
    CHECK_THROWS_AS(naive_glm_fit(vec({0.1, 0.5, 0.2, 0.9}), w, dup, Family::Gaussian), NumericalError);
  }

  TEST_CASE("attenuation of the naive slope") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    const int n = 5000;
    Eigen::VectorXd x(n), wc(n), wb(n), xb(n), yc(n), yb(n);
    for (int i = 0; i < n; ++i) {
      x[i] = nd(gen);
      wc[i] = x[i] + nd(gen);
      yc[i] = x[i] + nd(gen);
      wb[i] = nd(gen);
      xb[i] = wb[i] + nd(gen);
      yb[i] = xb[i] + nd(gen);
    }
    const Eigen::MatrixXd none(n, 0);
    const auto classical = naive_glm_fit(yc, wc, none, Family::Gaussian);
    const auto berkson = naive_glm_fit(yb, wb, none, Family::Gaussian);
    CHECK(std::abs(classical.coefficients[1] - attenuation_factor(1.0, 1.0)) < 3.0 * classical.standard_errors[1]);
    CHECK(std::abs(berkson.coefficients[1] - 1.0) < 3.0 * berkson.standard_errors[1]);
  }
}
