#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "meglm/model.hpp"
#include "meglm/rng.hpp"

namespace meglm {

struct ProposalScales {
  double x = 0.5;
  double beta = 0.05;
  double gamma = 0.5;
};

struct ChainConfig {
  int iterations = 100000;
  int burn_in = 10000;
  int thin = 10;
  std::uint64_t seed = 1;
  ProposalScales proposal;
  bool adapt = true;
  /// Latent x components stored in the draws (unit indices).
  std::vector<int> monitor_x = {0, 1, 2, 3};
  bool store_all_x = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct ChainOutput {
  std::vector<std::string> names;
  Eigen::MatrixXd draws;  // kept iterations x monitored parameters
  std::map<std::string, double> acceptance_rates;
  ProposalScales final_scales;

  int column(const std::string& name) const;
};

/// Full state of the sampler. beta = (beta0, beta_z); alpha = (alpha0 unless
/// fixed, alpha_z).
struct ChainState {
  Eigen::VectorXd beta;
  double beta_x = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd x;
  Eigen::VectorXd gamma;
  double tau_u = 1.0;
  double tau_x = 1.0;
  double tau_eps = 1.0;
  double tau_gamma = 1.0;
};

struct GammaConditional {
  double shape;
  double rate;
};

struct NormalConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
};

/// Metropolis-within-Gibbs sampler over the structured model data. Gaussian
/// pieces are drawn exactly; non-Gaussian likelihoods use random-walk updates.
class Sampler {
 public:
  explicit Sampler(const JointModel& model);

  /// x at the proxy means, beta and alpha at zero, precisions at prior means.
  ChainState initial_state() const;

  /// tau_x | rest ~ G(a_x + n/2, b_x + 1/2 |x - alpha0 - z alpha_z|^2).
  GammaConditional tau_x_conditional(const ChainState& s) const;
  /// tau_u | rest ~ G(a_u + N_w/2, b_u + 1/2 sum_j (w_j - x)^T D (w_j - x)).
  GammaConditional tau_u_conditional(const ChainState& s) const;
  /// alpha | rest ~ N((tau_x X^T X + R)^{-1}(tau_x X^T x + R mu), tau_x X^T X + R).
  NormalConditional alpha_conditional(const ChainState& s) const;
  GammaConditional tau_eps_conditional(const ChainState& s) const;
  GammaConditional tau_gamma_conditional(const ChainState& s) const;
  /// (beta0, beta_z, beta_x unless fixed) given the rest; Gaussian family only.
  NormalConditional beta_conditional(const ChainState& s) const;
  /// Univariate normal law of x_j given the rest; Gaussian family only.
  std::pair<double, double> x_conditional(const ChainState& s, int unit) const;

  void gibbs_tau_x(ChainState& s, SplitMix64& rng) const;
  void gibbs_tau_u(ChainState& s, SplitMix64& rng) const;
  void gibbs_alpha(ChainState& s, SplitMix64& rng) const;
  void gibbs_tau_eps(ChainState& s, SplitMix64& rng) const;
  void gibbs_tau_gamma(ChainState& s, SplitMix64& rng) const;
  void gibbs_beta(ChainState& s, SplitMix64& rng) const;
  void gibbs_x(ChainState& s, SplitMix64& rng) const;
  void gibbs_gamma(ChainState& s, SplitMix64& rng) const;

  /// Componentwise random-walk Metropolis on x; returns the acceptance fraction.
  double mh_latent_x(ChainState& s, double scale, SplitMix64& rng) const;
  /// Componentwise random-walk Metropolis on gamma; returns the acceptance fraction.
  double mh_gamma(ChainState& s, double scale, SplitMix64& rng) const;
  /// Joint random-walk Metropolis on (beta0, beta_z, beta_x) with proposal
  /// scale * chol * N(0, I); returns whether the proposal was accepted.
  bool mh_beta(ChainState& s, double scale, const Eigen::MatrixXd& chol, SplitMix64& rng) const;

  /// log p(x_j | rest) up to a constant.
  double log_x_conditional(const ChainState& s, int unit, double value) const;
  /// log p(beta | rest) up to a constant, for the packed beta block.
  double log_beta_conditional(const ChainState& s, const Eigen::VectorXd& packed) const;

  int beta_dimension() const;
  Eigen::VectorXd pack_beta(const ChainState& s) const;
  void unpack_beta(ChainState& s, const Eigen::VectorXd& packed) const;

  bool gaussian_family() const { return md_.family == Family::Gaussian; }
  bool classical() const { return md_.error_kind == ErrorKind::Classical; }
  const JointModel& model() const { return model_; }

  /// Linear predictor of observation i under the state.
  double eta(const ChainState& s, int i) const;

 private:
  double log_lik_row(int i, double eta) const;

  const JointModel& model_;
  const ModelData& md_;
  std::vector<std::vector<int>> rows_of_unit_;
  std::vector<std::vector<int>> proxies_of_unit_;
  std::vector<int> observed_;
};

/// Runs one chain; deterministic given cfg.seed.
ChainOutput run_chain(const JointModel& model, const ChainConfig& cfg);

/// Effective sample size by Geyer's initial positive sequence.
double effective_sample_size(const Eigen::VectorXd& draws);

}  // namespace meglm
