#include "meglm/prior.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace meglm {

PriorSpec PriorSpec::gaussian(double mean, double precision) {
  if (!std::isfinite(mean) || !std::isfinite(precision) || precision < 0.0)
    throw std::invalid_argument("gaussian prior needs a finite mean and precision >= 0");
  return PriorSpec(GaussianPrior{mean, precision});
}

PriorSpec PriorSpec::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw std::invalid_argument("gamma prior needs shape > 0 and rate > 0");
  return PriorSpec(GammaPrior{shape, rate});
}

PriorSpec PriorSpec::fixed(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("fixed value must be finite");
  return PriorSpec(FixedValue{value});
}

double PriorSpec::log_density(double value) const {
  if (const auto* g = std::get_if<GaussianPrior>(&kind_)) {
    if (g->precision == 0.0) return 0.0;
    const double r = value - g->mean;
    return 0.5 * std::log(g->precision / (2.0 * std::numbers::pi)) - 0.5 * g->precision * r * r;
  }
  if (const auto* g = std::get_if<GammaPrior>(&kind_)) {
    if (!(value > 0.0)) return -INFINITY;
    return g->shape * std::log(g->rate) - std::lgamma(g->shape) + (g->shape - 1.0) * std::log(value) -
           g->rate * value;
  }
  return 0.0;
}

double PriorSpec::mean() const {
  if (const auto* g = std::get_if<GaussianPrior>(&kind_)) return g->mean;
  if (const auto* g = std::get_if<GammaPrior>(&kind_)) return g->shape / g->rate;
  return std::get<FixedValue>(kind_).value;
}

std::string PriorSpec::describe() const {
  std::ostringstream os;
  if (const auto* g = std::get_if<GaussianPrior>(&kind_))
    os << "gaussian(mean=" << g->mean << ", precision=" << g->precision << ")";
  else if (const auto* g = std::get_if<GammaPrior>(&kind_))
    os << "gamma(shape=" << g->shape << ", rate=" << g->rate << ")";
  else
    os << "fixed(" << std::get<FixedValue>(kind_).value << ")";
  return os.str();
}

}  // namespace meglm
