#pragma once

#include "meglm/prior.hpp"

namespace meglm {

/// Two quantile statements: P(T <= q_lo) = p_lo and P(T <= q_hi) = p_hi.
struct QuantileTarget {
  double p_lo = 0.025;
  double q_lo = 0.0;
  double p_hi = 0.975;
  double q_hi = 0.0;

  void validate() const;
};

/// Gamma(shape, rate) matching both quantiles: bisection on the shape over the
/// scale-free quantile ratio, then the rate by scaling.
GammaPrior gamma_from_quantiles(const QuantileTarget& t);

struct LogNormal {
  double mu;
  double sigma2;
};

LogNormal lognormal_from_quantiles(const QuantileTarget& t);

/// Inverse variance of a uniform distribution of the given width, 12 / width^2.
double precision_from_uniform_range(double width);

/// 1 / (interval / z)^2: the precision implied by a half-width `interval` at normal quantile z.
double berkson_sigma_from_interval(double interval, double z);

/// Gamma with equal mean and variance: G(mean, 1).
GammaPrior gamma_from_mean_equal_variance(double mean);

double gamma_cdf(const GammaPrior& g, double t);
double lognormal_cdf(const LogNormal& l, double t);

}  // namespace meglm
