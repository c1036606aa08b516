#include "meglm/mcmc.hpp"

#include <algorithm>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <stdexcept>

#include "meglm/errors.hpp"

namespace meglm {

void ChainConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("chain: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("chain: need 0 <= burn_in < iterations");
  if (thin < 1) throw std::invalid_argument("chain: thin must be >= 1");
  if (!(proposal.x >= 0.0) || !(proposal.beta >= 0.0) || !(proposal.gamma >= 0.0))
    throw std::invalid_argument("chain: proposal scales must be nonnegative");
}

int ChainOutput::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

namespace {

double gaussian_log_prior(const PriorSpec& p, double value) {
  if (!p.is_gaussian()) return 0.0;
  const auto& g = p.as_gaussian();
  return -0.5 * g.precision * (value - g.mean) * (value - g.mean);
}

double draw_gamma(const GammaConditional& c, SplitMix64& rng) {
  boost::random::gamma_distribution<double> dist(c.shape, 1.0 / c.rate);
  return dist(rng);
}

double draw_normal(SplitMix64& rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

Eigen::VectorXd draw_mvn(const NormalConditional& c, SplitMix64& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(c.precision);
  if (llt.info() != Eigen::Success) throw NumericalError("conditional precision is singular");
  Eigen::VectorXd z(c.mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = draw_normal(rng);
  return c.mean + llt.matrixU().solve(z);
}

/// Mean/precision of a linear-Gaussian block solve; throws on singular systems.
NormalConditional normal_from_canonical(const Eigen::MatrixXd& q, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw NumericalError("conditional precision is singular");
  return {llt.solve(b), q};
}

void add_gaussian_prior(const PriorSpec& p, Eigen::MatrixXd& q, Eigen::VectorXd& b, Eigen::Index k) {
  if (!p.is_gaussian()) return;
  q(k, k) += p.as_gaussian().precision;
  b[k] += p.as_gaussian().precision * p.as_gaussian().mean;
}

double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

}  // namespace

Sampler::Sampler(const JointModel& model) : model_(model), md_(model.data) {
  if (md_.naive) throw InputError("mcmc: the naive model has no latent covariate to sample");
  const int units = static_cast<int>(md_.unit_proxy_mean.size());
  rows_of_unit_.resize(static_cast<std::size_t>(units));
  proxies_of_unit_.resize(static_cast<std::size_t>(units));
  for (std::size_t i = 0; i < md_.y.size(); ++i)
    if (md_.y[i]) {
      rows_of_unit_[static_cast<std::size_t>(md_.unit[i])].push_back(static_cast<int>(i));
      observed_.push_back(static_cast<int>(i));
    }
  for (std::size_t p = 0; p < md_.proxies.size(); ++p)
    proxies_of_unit_[static_cast<std::size_t>(md_.proxies[p].unit)].push_back(static_cast<int>(p));
}

ChainState Sampler::initial_state() const {
  const auto& spec = model_.spec;
  ChainState s;
  s.beta = Eigen::VectorXd::Zero(1 + md_.z.cols());
  s.beta_x = spec.beta_x.is_fixed() ? spec.beta_x.as_fixed().value : 0.0;
  const Eigen::Index n_alpha = classical() ? (md_.alpha0_fixed ? 0 : 1) + md_.exposure_z.cols() : 0;
  s.alpha = Eigen::VectorXd::Zero(n_alpha);
  s.x = Eigen::Map<const Eigen::VectorXd>(md_.unit_proxy_mean.data(),
                                          static_cast<Eigen::Index>(md_.unit_proxy_mean.size()));
  s.gamma = Eigen::VectorXd::Zero(spec.observation.random_effect ? static_cast<Eigen::Index>(md_.y.size()) : 0);
  s.tau_u = spec.error.precision.mean();
  if (classical()) s.tau_x = spec.exposure->precision.mean();
  if (gaussian_family()) s.tau_eps = spec.observation.residual_precision.mean();
  if (spec.observation.random_effect) s.tau_gamma = spec.observation.random_effect->precision.mean();
  return s;
}

double Sampler::eta(const ChainState& s, int i) const {
  double e = s.beta[0] + s.beta_x * s.x[md_.unit[static_cast<std::size_t>(i)]];
  for (Eigen::Index k = 0; k < md_.z.cols(); ++k) e += md_.z(i, k) * s.beta[1 + k];
  if (s.gamma.size()) e += s.gamma[i];
  return e;
}

double Sampler::log_lik_row(int i, double e) const {
  const double y = *md_.y[static_cast<std::size_t>(i)];
  switch (md_.family) {
    case Family::Binomial: return y * e - md_.trials[static_cast<std::size_t>(i)] * softplus(e);
    case Family::Poisson: return y * e - std::exp(e);
    case Family::Gaussian: break;
  }
  throw std::logic_error("log_lik_row: Gaussian rows need tau_eps");
}

namespace {

double exposure_mean(const ModelData& md, const ChainState& s, int unit) {
  Eigen::Index k = 0;
  double m = md.alpha0_fixed ? *md.alpha0_fixed : s.alpha[k++];
  for (Eigen::Index c = 0; c < md.exposure_z.cols(); ++c) m += md.exposure_z(unit, c) * s.alpha[k++];
  return m;
}

}  // namespace

GammaConditional Sampler::tau_x_conditional(const ChainState& s) const {
  if (!classical()) throw std::invalid_argument("tau_x is defined for classical error only");
  const auto& prior = model_.spec.exposure->precision;
  if (!prior.is_gamma()) throw std::invalid_argument("tau_x is fixed");
  double ss = 0.0;
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    const double r = s.x[j] - exposure_mean(md_, s, static_cast<int>(j));
    ss += r * r;
  }
  return {prior.as_gamma().shape + 0.5 * static_cast<double>(s.x.size()), prior.as_gamma().rate + 0.5 * ss};
}

GammaConditional Sampler::tau_u_conditional(const ChainState& s) const {
  const auto& prior = model_.spec.error.precision;
  if (!prior.is_gamma()) throw std::invalid_argument("tau_u is fixed");
  double ss = 0.0;
  for (const auto& p : md_.proxies) {
    const double r = p.value - s.x[p.unit];
    ss += p.weight * r * r;
  }
  return {prior.as_gamma().shape + 0.5 * static_cast<double>(md_.proxies.size()), prior.as_gamma().rate + 0.5 * ss};
}

NormalConditional Sampler::alpha_conditional(const ChainState& s) const {
  if (!classical()) throw std::invalid_argument("alpha is defined for classical error only");
  const auto& ex = *model_.spec.exposure;
  const Eigen::Index d = s.alpha.size();
  const bool has_a0 = !md_.alpha0_fixed;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd row(d);
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    Eigen::Index k = 0;
    if (has_a0) row[k++] = 1.0;
    for (Eigen::Index c = 0; c < md_.exposure_z.cols(); ++c) row[k++] = md_.exposure_z(j, c);
    const double target = s.x[j] - (has_a0 ? 0.0 : *md_.alpha0_fixed);
    q.noalias() += s.tau_x * row * row.transpose();
    b.noalias() += s.tau_x * target * row;
  }
  Eigen::Index k = 0;
  if (has_a0) add_gaussian_prior(ex.intercept, q, b, k++);
  for (; k < d; ++k) add_gaussian_prior(ex.coefficients, q, b, k);
  return normal_from_canonical(q, b);
}

GammaConditional Sampler::tau_eps_conditional(const ChainState& s) const {
  const auto& prior = model_.spec.observation.residual_precision;
  if (!gaussian_family() || !prior.is_gamma()) throw std::invalid_argument("tau_eps is not sampled for this model");
  double ss = 0.0;
  for (int i : observed_) {
    const double r = *md_.y[static_cast<std::size_t>(i)] - eta(s, i);
    ss += r * r;
  }
  return {prior.as_gamma().shape + 0.5 * static_cast<double>(observed_.size()), prior.as_gamma().rate + 0.5 * ss};
}

GammaConditional Sampler::tau_gamma_conditional(const ChainState& s) const {
  const auto& re = model_.spec.observation.random_effect;
  if (!re || !re->precision.is_gamma()) throw std::invalid_argument("tau_gamma is not sampled for this model");
  return {re->precision.as_gamma().shape + 0.5 * static_cast<double>(s.gamma.size()),
          re->precision.as_gamma().rate + 0.5 * s.gamma.squaredNorm()};
}

int Sampler::beta_dimension() const {
  return static_cast<int>(1 + md_.z.cols()) + (model_.spec.beta_x.is_fixed() ? 0 : 1);
}

Eigen::VectorXd Sampler::pack_beta(const ChainState& s) const {
  Eigen::VectorXd p(beta_dimension());
  p.head(s.beta.size()) = s.beta;
  if (!model_.spec.beta_x.is_fixed()) p[s.beta.size()] = s.beta_x;
  return p;
}

void Sampler::unpack_beta(ChainState& s, const Eigen::VectorXd& packed) const {
  s.beta = packed.head(s.beta.size());
  if (!model_.spec.beta_x.is_fixed()) s.beta_x = packed[s.beta.size()];
}

NormalConditional Sampler::beta_conditional(const ChainState& s) const {
  if (!gaussian_family()) throw std::invalid_argument("beta has no conjugate conditional for this family");
  const auto& obs = model_.spec.observation;
  const Eigen::Index d = beta_dimension();
  const bool free_bx = !model_.spec.beta_x.is_fixed();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd row(d);
  for (int i : observed_) {
    row[0] = 1.0;
    for (Eigen::Index k = 0; k < md_.z.cols(); ++k) row[1 + k] = md_.z(i, k);
    const double xi = s.x[md_.unit[static_cast<std::size_t>(i)]];
    double target = *md_.y[static_cast<std::size_t>(i)] - (s.gamma.size() ? s.gamma[i] : 0.0);
    if (free_bx) {
      row[d - 1] = xi;
    } else {
      target -= s.beta_x * xi;
    }
    q.noalias() += s.tau_eps * row * row.transpose();
    b.noalias() += s.tau_eps * target * row;
  }
  add_gaussian_prior(obs.intercept, q, b, 0);
  for (Eigen::Index k = 0; k < md_.z.cols(); ++k) add_gaussian_prior(obs.coefficients, q, b, 1 + k);
  if (free_bx) add_gaussian_prior(model_.spec.beta_x, q, b, d - 1);
  return normal_from_canonical(q, b);
}

std::pair<double, double> Sampler::x_conditional(const ChainState& s, int unit) const {
  if (!gaussian_family()) throw std::invalid_argument("x has no conjugate conditional for this family");
  double prec = 0.0, lin = 0.0;
  if (classical()) {
    prec += s.tau_x;
    lin += s.tau_x * exposure_mean(md_, s, unit);
  }
  for (int p : proxies_of_unit_[static_cast<std::size_t>(unit)]) {
    const auto& po = md_.proxies[static_cast<std::size_t>(p)];
    prec += s.tau_u * po.weight;
    lin += s.tau_u * po.weight * po.value;
  }
  const double xj = s.x[unit];
  for (int i : rows_of_unit_[static_cast<std::size_t>(unit)]) {
    const double rest = eta(s, i) - s.beta_x * xj;
    prec += s.tau_eps * s.beta_x * s.beta_x;
    lin += s.tau_eps * s.beta_x * (*md_.y[static_cast<std::size_t>(i)] - rest);
  }
  return {lin / prec, prec};
}

void Sampler::gibbs_tau_x(ChainState& s, SplitMix64& rng) const { s.tau_x = draw_gamma(tau_x_conditional(s), rng); }
void Sampler::gibbs_tau_u(ChainState& s, SplitMix64& rng) const { s.tau_u = draw_gamma(tau_u_conditional(s), rng); }
void Sampler::gibbs_tau_eps(ChainState& s, SplitMix64& rng) const {
  s.tau_eps = draw_gamma(tau_eps_conditional(s), rng);
}
void Sampler::gibbs_tau_gamma(ChainState& s, SplitMix64& rng) const {
  s.tau_gamma = draw_gamma(tau_gamma_conditional(s), rng);
}

void Sampler::gibbs_alpha(ChainState& s, SplitMix64& rng) const {
  if (s.alpha.size() == 0) return;
  s.alpha = draw_mvn(alpha_conditional(s), rng);
}

void Sampler::gibbs_beta(ChainState& s, SplitMix64& rng) const { unpack_beta(s, draw_mvn(beta_conditional(s), rng)); }

void Sampler::gibbs_x(ChainState& s, SplitMix64& rng) const {
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    const auto [mean, prec] = x_conditional(s, static_cast<int>(j));
    s.x[j] = mean + draw_normal(rng) / std::sqrt(prec);
  }
}

void Sampler::gibbs_gamma(ChainState& s, SplitMix64& rng) const {
  if (!gaussian_family()) throw std::invalid_argument("gamma has no conjugate conditional for this family");
  for (Eigen::Index i = 0; i < s.gamma.size(); ++i) {
    double prec = s.tau_gamma, lin = 0.0;
    if (md_.y[static_cast<std::size_t>(i)]) {
      const double rest = eta(s, static_cast<int>(i)) - s.gamma[i];
      prec += s.tau_eps;
      lin += s.tau_eps * (*md_.y[static_cast<std::size_t>(i)] - rest);
    }
    s.gamma[i] = lin / prec + draw_normal(rng) / std::sqrt(prec);
  }
}

double Sampler::log_x_conditional(const ChainState& s, int unit, double value) const {
  double lp = 0.0;
  if (classical()) {
    const double r = value - exposure_mean(md_, s, unit);
    lp -= 0.5 * s.tau_x * r * r;
  }
  for (int p : proxies_of_unit_[static_cast<std::size_t>(unit)]) {
    const auto& po = md_.proxies[static_cast<std::size_t>(p)];
    lp -= 0.5 * s.tau_u * po.weight * (po.value - value) * (po.value - value);
  }
  const double delta = s.beta_x * (value - s.x[unit]);
  for (int i : rows_of_unit_[static_cast<std::size_t>(unit)]) {
    const double e = eta(s, i) + delta;
    if (gaussian_family()) {
      const double r = *md_.y[static_cast<std::size_t>(i)] - e;
      lp -= 0.5 * s.tau_eps * r * r;
    } else {
      lp += log_lik_row(i, e);
    }
  }
  return lp;
}

double Sampler::log_beta_conditional(const ChainState& s, const Eigen::VectorXd& packed) const {
  ChainState t = s;
  unpack_beta(t, packed);
  const auto& obs = model_.spec.observation;
  double lp = gaussian_log_prior(obs.intercept, t.beta[0]);
  for (Eigen::Index k = 1; k < t.beta.size(); ++k) lp += gaussian_log_prior(obs.coefficients, t.beta[k]);
  lp += gaussian_log_prior(model_.spec.beta_x, t.beta_x);
  for (int i : observed_) {
    const double e = eta(t, i);
    if (gaussian_family()) {
      const double r = *md_.y[static_cast<std::size_t>(i)] - e;
      lp -= 0.5 * t.tau_eps * r * r;
    } else {
      lp += log_lik_row(i, e);
    }
  }
  return lp;
}

double Sampler::mh_latent_x(ChainState& s, double scale, SplitMix64& rng) const {
  if (s.x.size() == 0) return 1.0;
  if (scale == 0.0) return 1.0;
  int accepted = 0;
  for (Eigen::Index j = 0; j < s.x.size(); ++j) {
    const int unit = static_cast<int>(j);
    const double proposal = s.x[j] + scale * draw_normal(rng);
    const double log_ratio = log_x_conditional(s, unit, proposal) - log_x_conditional(s, unit, s.x[j]);
    if (std::log(rng.uniform()) < log_ratio) {
      s.x[j] = proposal;
      ++accepted;
    }
  }
  return static_cast<double>(accepted) / static_cast<double>(s.x.size());
}

double Sampler::mh_gamma(ChainState& s, double scale, SplitMix64& rng) const {
  if (s.gamma.size() == 0 || scale == 0.0) return 1.0;
  int accepted = 0;
  for (Eigen::Index i = 0; i < s.gamma.size(); ++i) {
    const double cur = s.gamma[i];
    const double prop = cur + scale * draw_normal(rng);
    double log_ratio = -0.5 * s.tau_gamma * (prop * prop - cur * cur);
    if (md_.y[static_cast<std::size_t>(i)]) {
      const double base = eta(s, static_cast<int>(i)) - cur;
      log_ratio += log_lik_row(static_cast<int>(i), base + prop) - log_lik_row(static_cast<int>(i), base + cur);
    }
    if (std::log(rng.uniform()) < log_ratio) {
      s.gamma[i] = prop;
      ++accepted;
    }
  }
  return static_cast<double>(accepted) / static_cast<double>(s.gamma.size());
}

bool Sampler::mh_beta(ChainState& s, double scale, const Eigen::MatrixXd& chol, SplitMix64& rng) const {
  const Eigen::VectorXd cur = pack_beta(s);
  Eigen::VectorXd z(cur.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = draw_normal(rng);
  if (scale == 0.0) return true;
  const Eigen::VectorXd prop = cur + scale * (chol * z);
  const double log_ratio = log_beta_conditional(s, prop) - log_beta_conditional(s, cur);
  if (std::log(rng.uniform()) < log_ratio) {
    unpack_beta(s, prop);
    return true;
  }
  return false;
}

ChainOutput run_chain(const JointModel& model, const ChainConfig& cfg) {
  cfg.validate();
  const Sampler sampler(model);
  const auto& spec = model.spec;
  const ModelData& md = model.data;
  SplitMix64 rng(cfg.seed);
  ChainState s = sampler.initial_state();

  ChainOutput out;
  out.names.push_back("beta0");
  for (const auto& z : md.z_names) out.names.push_back("beta_" + z);
  out.names.push_back("beta_x");
  if (sampler.classical()) {
    if (!md.alpha0_fixed) out.names.push_back("alpha0");
    for (const auto& z : md.exposure_names) out.names.push_back("alpha_" + z);
  }
  out.names.push_back("tau_u");
  if (sampler.classical()) out.names.push_back("tau_x");
  if (sampler.gaussian_family()) out.names.push_back("tau_eps");
  if (spec.observation.random_effect) out.names.push_back("tau_gamma");
  std::vector<int> monitored;
  if (cfg.store_all_x) {
    for (Eigen::Index j = 0; j < s.x.size(); ++j) monitored.push_back(static_cast<int>(j));
  } else {
    for (int j : cfg.monitor_x)
      if (j >= 0 && j < s.x.size()) monitored.push_back(j);
  }
  for (int j : monitored) out.names.push_back("x[" + std::to_string(j) + "]");

  const int kept = (cfg.iterations - cfg.burn_in) / cfg.thin;
  out.draws.resize(kept, static_cast<Eigen::Index>(out.names.size()));

  const bool tau_x_free = sampler.classical() && spec.exposure->precision.is_gamma();
  const bool tau_u_free = spec.error.precision.is_gamma();
  const bool tau_eps_free = sampler.gaussian_family() && spec.observation.residual_precision.is_gamma();
  const bool tau_gamma_free = spec.observation.random_effect && spec.observation.random_effect->precision.is_gamma();
  const bool has_gamma = s.gamma.size() > 0;

  constexpr double target = 0.35;
  double log_sx = std::log(std::max(cfg.proposal.x, 1e-300));
  double log_sb = std::log(std::max(cfg.proposal.beta, 1e-300));
  double log_sg = std::log(std::max(cfg.proposal.gamma, 1e-300));
  const int dbeta = sampler.beta_dimension();
  Eigen::MatrixXd beta_chol = Eigen::MatrixXd::Identity(dbeta, dbeta);
  std::vector<Eigen::VectorXd> beta_history;
  double acc_x = 0.0, acc_b = 0.0, acc_g = 0.0;
  int row = 0;

  for (int it = 0; it < cfg.iterations; ++it) {
    const bool burning = it < cfg.burn_in;
    const bool adapting = cfg.adapt && burning;
    const double rm_step = std::pow(static_cast<double>(it) + 1.0, -0.6);

    if (tau_x_free) sampler.gibbs_tau_x(s, rng);
    if (tau_u_free) sampler.gibbs_tau_u(s, rng);
    if (sampler.classical()) sampler.gibbs_alpha(s, rng);

    if (sampler.gaussian_family()) {
      sampler.gibbs_x(s, rng);
      sampler.gibbs_beta(s, rng);
      if (has_gamma) sampler.gibbs_gamma(s, rng);
    } else {
      const double sx = cfg.proposal.x == 0.0 ? 0.0 : std::exp(log_sx);
      const double ax = sampler.mh_latent_x(s, sx, rng);
      const double sb = cfg.proposal.beta == 0.0 ? 0.0 : std::exp(log_sb);
      const double ab = sampler.mh_beta(s, sb, beta_chol, rng) ? 1.0 : 0.0;
      double ag = 1.0;
      if (has_gamma) ag = sampler.mh_gamma(s, cfg.proposal.gamma == 0.0 ? 0.0 : std::exp(log_sg), rng);
      if (adapting) {
        log_sx += rm_step * (ax - target);
        log_sb += rm_step * (ab - target);
        log_sg += rm_step * (ag - target);
        // Empirical proposal covariance for the beta block from the middle of burn-in.
        if (it >= cfg.burn_in / 4) beta_history.push_back(sampler.pack_beta(s));
        if ((it + 1 == cfg.burn_in / 2 || it + 1 == (3 * cfg.burn_in) / 4) && beta_history.size() > 10u * dbeta) {
          Eigen::MatrixXd samples(static_cast<Eigen::Index>(beta_history.size()), dbeta);
          for (std::size_t r = 0; r < beta_history.size(); ++r)
            samples.row(static_cast<Eigen::Index>(r)) = beta_history[r].transpose();
          const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
          Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(samples.rows() - 1);
          cov.diagonal().array() += 1e-12;
          Eigen::LLT<Eigen::MatrixXd> llt(cov);
          if (llt.info() == Eigen::Success) {
            beta_chol = llt.matrixL();
            log_sb = std::log(2.38 / std::sqrt(static_cast<double>(dbeta)));
          }
        }
      } else if (!burning) {
        acc_x += ax;
        acc_b += ab;
        acc_g += ag;
      }
    }
    if (tau_eps_free) sampler.gibbs_tau_eps(s, rng);
    if (tau_gamma_free) sampler.gibbs_tau_gamma(s, rng);

    if (!burning && (it - cfg.burn_in + 1) % cfg.thin == 0 && row < kept) {
      Eigen::Index c = 0;
      for (Eigen::Index k = 0; k < s.beta.size(); ++k) {
        out.draws(row, c++) = s.beta[k];
        if (k == s.beta.size() - 1) out.draws(row, c++) = s.beta_x;
      }
      for (Eigen::Index k = 0; k < s.alpha.size(); ++k) out.draws(row, c++) = s.alpha[k];
      out.draws(row, c++) = s.tau_u;
      if (sampler.classical()) out.draws(row, c++) = s.tau_x;
      if (sampler.gaussian_family()) out.draws(row, c++) = s.tau_eps;
      if (spec.observation.random_effect) out.draws(row, c++) = s.tau_gamma;
      for (int j : monitored) out.draws(row, c++) = s.x[j];
      ++row;
    }
  }

  if (!sampler.gaussian_family()) {
    const double post = static_cast<double>(cfg.iterations - cfg.burn_in);
    out.acceptance_rates["x"] = acc_x / post;
    out.acceptance_rates["beta"] = acc_b / post;
    if (has_gamma) out.acceptance_rates["gamma"] = acc_g / post;
  }
  out.final_scales = {std::exp(log_sx), std::exp(log_sb), std::exp(log_sg)};
  return out;
}

double effective_sample_size(const Eigen::VectorXd& draws) {
  const Eigen::Index n = draws.size();
  if (n < 4) return static_cast<double>(n);
  const Eigen::VectorXd c = draws.array() - draws.mean();
  const double var = c.squaredNorm() / static_cast<double>(n);
  if (var == 0.0) return static_cast<double>(n);
  auto rho = [&](Eigen::Index lag) {
    return c.head(n - lag).dot(c.tail(n - lag)) / (static_cast<double>(n) * var);
  };
  double sum = 0.0;
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = std::max(2.0 * sum - 1.0, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

}  // namespace meglm
