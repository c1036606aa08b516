#pragma once

#include <string>
#include <variant>

namespace meglm {

/// Normal prior in the precision parameterization. precision == 0 is a flat prior.
struct GaussianPrior {
  double mean = 0.0;
  double precision = 0.0;
};

/// Gamma prior with shape/rate, mean shape/rate.
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

struct FixedValue {
  double value = 0.0;
};

class PriorSpec {
 public:
  PriorSpec() = default;

  static PriorSpec gaussian(double mean, double precision);
  static PriorSpec gamma(double shape, double rate);
  static PriorSpec fixed(double value);
  static PriorSpec flat() { return gaussian(0.0, 0.0); }

  bool is_gaussian() const { return std::holds_alternative<GaussianPrior>(kind_); }
  bool is_gamma() const { return std::holds_alternative<GammaPrior>(kind_); }
  bool is_fixed() const { return std::holds_alternative<FixedValue>(kind_); }

  const GaussianPrior& as_gaussian() const { return std::get<GaussianPrior>(kind_); }
  const GammaPrior& as_gamma() const { return std::get<GammaPrior>(kind_); }
  const FixedValue& as_fixed() const { return std::get<FixedValue>(kind_); }

  /// Log density at `value`, including normalizing constants. Flat priors
  /// and fixed values contribute 0.
  double log_density(double value) const;

  /// Prior mean; for a flat prior the location, for a fixed value the value.
  double mean() const;

  std::string describe() const;

 private:
  explicit PriorSpec(std::variant<GaussianPrior, GammaPrior, FixedValue> k) : kind_(k) {}
  std::variant<GaussianPrior, GammaPrior, FixedValue> kind_ = GaussianPrior{};
};

}  // namespace meglm
