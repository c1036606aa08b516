#include <doctest.h>

#include <cmath>

#include "meglm/elicit.hpp"
#include "oracles.hpp"

using namespace meglm;

namespace {

// Gamma CDF by Simpson integration in u = log t, where the integrand
// exp(shape u - rate e^u) is smooth for every shape.
double gamma_cdf_simpson(double shape, double rate, double x) {
  const double log_norm = shape * std::log(rate) - std::lgamma(shape);
  auto f = [&](double u) { return std::exp(log_norm + shape * u - rate * std::exp(u)); };
  return oracle::simpson(f, std::log(x) - 60.0, std::log(x), 200000);
}

}  // namespace

TEST_SUITE("prior-elicit") {
  TEST_CASE("gamma from the ibex error-precision statement") {
    const auto g = gamma_from_quantiles({0.025, 0.5, 0.975, 2.0});
    CHECK(g.shape == doctest::Approx(8.5).epsilon(0.15));
    CHECK(g.rate == doctest::Approx(7.5).epsilon(0.15));
    CHECK(std::abs(gamma_cdf(g, 0.5) - 0.025) < 1e-8);
    CHECK(std::abs(gamma_cdf(g, 2.0) - 0.975) < 1e-8);
  }

  TEST_CASE("fitted gamma hits both probabilities under an independent CDF") {
    for (auto [lo, hi] : {std::pair{0.5, 2.0}, {59.0, 4800.0}, {1.93, 193.0}, {10.0, 40.0}}) {
      const auto g = gamma_from_quantiles({0.025, lo, 0.975, hi});
      CHECK(std::abs(gamma_cdf_simpson(g.shape, g.rate, lo) - 0.025) < 1e-7);
      CHECK(std::abs(gamma_cdf_simpson(g.shape, g.rate, hi) - 0.975) < 1e-7);
      CHECK(std::abs(gamma_cdf(g, lo) - 0.025) < 1e-8);
      CHECK(std::abs(gamma_cdf(g, hi) - 0.975) < 1e-8);
    }
  }

  TEST_CASE("the printed G(1, 0.0009) does not reproduce (59, 4800)") {
    // Reference only: the exact fit differs from the printed parameters.
    const GammaPrior printed{1.0, 0.0009};
    CHECK(std::abs(gamma_cdf(printed, 59.0) - 0.025) > 0.01);
    const double q_lo = -std::log(1.0 - 0.025) / 0.0009, q_hi = -std::log(1.0 - 0.975) / 0.0009;
    CHECK(q_lo == doctest::Approx(28.13).epsilon(1e-3));
    CHECK(q_hi == doctest::Approx(4098.8).epsilon(1e-3));
    const auto fit = gamma_from_quantiles({0.025, 59.0, 0.975, 4800.0});
    CHECK(fit.shape == doctest::Approx(1.193).epsilon(1e-3));
    CHECK(fit.rate == doctest::Approx(0.0008506).epsilon(1e-3));
  }

  TEST_CASE("lognormal from the blood-pressure statement") {
    const auto l = lognormal_from_quantiles({0.025, 40.0, 0.975, 130.0});
    CHECK(std::abs(l.mu - 4.3) < 0.05);
    CHECK(std::abs(l.sigma2 - 0.091) < 0.002);
    CHECK(lognormal_cdf(l, 40.0) == doctest::Approx(0.025).epsilon(1e-10));
    CHECK(lognormal_cdf(l, 130.0) == doctest::Approx(0.975).epsilon(1e-10));
  }

  TEST_CASE("lognormal symmetric case") {
    const auto l = lognormal_from_quantiles({0.025, std::exp(1.0), 0.975, std::exp(3.0)});
    CHECK(l.mu == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::sqrt(l.sigma2) == doctest::Approx(1.0 / 1.959964).epsilon(1e-6));
  }

  TEST_CASE("degenerate quantile statements are rejected") {
    CHECK_THROWS_AS(lognormal_from_quantiles({0.025, 5.0, 0.975, 5.0}), std::invalid_argument);
    CHECK_THROWS_AS(gamma_from_quantiles({0.025, 5.0, 0.975, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(gamma_from_quantiles({0.9, 1.0, 0.1, 2.0}), std::invalid_argument);
  }

  TEST_CASE("uniform range precision") {
    CHECK(precision_from_uniform_range(0.45) == doctest::Approx(59.26).epsilon(1e-4));
    CHECK(precision_from_uniform_range(0.05) == doctest::Approx(4800.0).epsilon(1e-12));
    CHECK(precision_from_uniform_range(0.3) / precision_from_uniform_range(0.6) == 4.0);
    CHECK_THROWS_AS(precision_from_uniform_range(0.0), std::invalid_argument);
  }

  TEST_CASE("berkson interval precision") {
    // The printed values round sigma to 0.72 and 0.072 first.
    CHECK(berkson_sigma_from_interval(1.42, 1.96) == doctest::Approx(1.93).epsilon(0.02));
    CHECK(berkson_sigma_from_interval(0.142, 1.96) == doctest::Approx(193.0).epsilon(0.02));
    CHECK(berkson_sigma_from_interval(0.142, 1.96) / berkson_sigma_from_interval(1.42, 1.96) ==
          doctest::Approx(100.0).epsilon(1e-12));
    CHECK(berkson_sigma_from_interval(0.72 * 1.96, 1.96) == doctest::Approx(1.93).epsilon(1e-3));
    CHECK(berkson_sigma_from_interval(1.7, 1.7) == 1.0);
  }

  TEST_CASE("equal mean and variance gamma") {
    const auto g = gamma_from_mean_equal_variance(10.0);
    CHECK(g.shape / g.rate == doctest::Approx(10.0));
    CHECK(g.shape / (g.rate * g.rate) == doctest::Approx(10.0));
  }
}
