#include "meglm/elicit.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "meglm/errors.hpp"

namespace meglm {

void QuantileTarget::validate() const {
  if (!(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0))
    throw std::invalid_argument("quantile target: need 0 < p_lo < p_hi < 1");
  if (!(q_lo > 0.0 && q_lo < q_hi)) throw std::invalid_argument("quantile target: need 0 < q_lo < q_hi");
}

GammaPrior gamma_from_quantiles(const QuantileTarget& t) {
  t.validate();
  // For a unit-rate Gamma(a) the quantile ratio Q(p_hi)/Q(p_lo) falls monotonically in a.
  auto ratio = [&](double a) {
    return boost::math::gamma_p_inv(a, t.p_hi) / boost::math::gamma_p_inv(a, t.p_lo);
  };
  const double target = t.q_hi / t.q_lo;
  double lo = 1e-3, hi = 1e3;
  if (target > ratio(lo) || target < ratio(hi))
    throw NumericalError("gamma_from_quantiles: quantile ratio outside the shape bracket [1e-3, 1e3]");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double shape = 0.5 * (lo + hi);
  const double rate = boost::math::gamma_p_inv(shape, t.p_lo) / t.q_lo;
  return {shape, rate};
}

LogNormal lognormal_from_quantiles(const QuantileTarget& t) {
  t.validate();
  const boost::math::normal std_normal;
  const double z_lo = boost::math::quantile(std_normal, t.p_lo);
  const double z_hi = boost::math::quantile(std_normal, t.p_hi);
  const double sigma = (std::log(t.q_hi) - std::log(t.q_lo)) / (z_hi - z_lo);
  const double mu = std::log(t.q_lo) - sigma * z_lo;
  return {mu, sigma * sigma};
}

double precision_from_uniform_range(double width) {
  if (!(width > 0.0)) throw std::invalid_argument("uniform range width must be > 0");
  return 12.0 / (width * width);
}

double berkson_sigma_from_interval(double interval, double z) {
  if (!(interval > 0.0) || !(z > 0.0)) throw std::invalid_argument("interval and z must be > 0");
  const double sigma = interval / z;
  return 1.0 / (sigma * sigma);
}

GammaPrior gamma_from_mean_equal_variance(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("mean must be > 0");
  return {mean, 1.0};
}

double gamma_cdf(const GammaPrior& g, double t) {
  if (t <= 0.0) return 0.0;
  return boost::math::gamma_p(g.shape, g.rate * t);
}

double lognormal_cdf(const LogNormal& l, double t) {
  if (t <= 0.0) return 0.0;
  return boost::math::cdf(boost::math::normal(l.mu, std::sqrt(l.sigma2)), std::log(t));
}

}  // namespace meglm
