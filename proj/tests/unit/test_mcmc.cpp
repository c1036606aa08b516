#include <doctest.h>

#include <cmath>
#include <random>

#include "meglm/fit.hpp"
#include "meglm/inla.hpp"
#include "meglm/mcmc.hpp"
#include "meglm/studygen.hpp"
#include "oracles.hpp"

using namespace meglm;

namespace {

JointModel framingham_model(int n, int replicates, bool copy = true) {
  auto recipe = default_recipe(Study::FraminghamLike);
  recipe.n = n;
  recipe.replicates = replicates;
  recipe.seed = 4;
  auto sim = simulate(recipe);
  if (!copy) sim.spec.copy_precision.reset();
  return build_joint_model(sim.spec, sim.data);
}

ChainState random_state(const Sampler& sampler, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::gamma_distribution<double> gd(2.0, 1.0);
  ChainState s = sampler.initial_state();
  for (auto& b : s.beta) b = nd(gen);
  s.beta_x = nd(gen);
  for (auto& a : s.alpha) a = nd(gen);
  for (auto& x : s.x) x += nd(gen);
  for (auto& g : s.gamma) g = 0.3 * nd(gen);
  s.tau_u = gd(gen);
  s.tau_x = gd(gen);
  s.tau_eps = gd(gen);
  s.tau_gamma = gd(gen);
  return s;
}

// Latent vector and theta of the joint model (built without a copy) that
// correspond to a sampler state.
std::pair<Eigen::VectorXd, Eigen::VectorXd> joint_point(const JointModel& m, const ChainState& s) {
  const auto& L = m.layout;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(L.size);
  v[L.beta0] = s.beta[0];
  for (int k = 0; k < L.n_beta_z; ++k) v[L.beta_z + k] = s.beta[1 + k];
  int a = 0;
  if (L.alpha0 >= 0) v[L.alpha0] = s.alpha[a++];
  for (int k = 0; k < L.n_alpha_z; ++k) v[L.alpha_z + k] = s.alpha[a++];
  for (int j = 0; j < L.n_x; ++j) v[L.x + j] = s.x[j];
  for (int j = 0; j < L.n_gamma; ++j) v[L.gamma + j] = s.gamma[j];
  Eigen::VectorXd theta = m.default_theta();
  for (std::size_t k = 0; k < m.hypers.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    switch (m.hypers[k].kind) {
      case HyperKind::BetaX: theta[i] = s.beta_x; break;
      case HyperKind::ErrorPrecision: theta[i] = s.tau_u; break;
      case HyperKind::ExposurePrecision: theta[i] = s.tau_x; break;
      case HyperKind::ResidualPrecision: theta[i] = s.tau_eps; break;
      case HyperKind::RandomEffectPrecision: theta[i] = s.tau_gamma; break;
    }
  }
  return {v, theta};
}

double mc_se(const Eigen::VectorXd& draws) {
  const double mean = draws.mean();
  const double var = (draws.array() - mean).square().sum() / static_cast<double>(draws.size() - 1);
  return std::sqrt(var / effective_sample_size(draws));
}

}  // namespace

TEST_SUITE("mcmc-oracle") {
  TEST_CASE("conjugate conditionals match their formulas") {
    for (int replicates : {1, 2}) {
      const JointModel m = framingham_model(30, replicates);
      const Sampler sampler(m);
      const auto& md = m.data;
      const auto& ex = *m.spec.exposure;
      std::mt19937_64 gen(11);
      for (int rep = 0; rep < 50; ++rep) {
        const ChainState s = random_state(sampler, gen);
        double ss_x = 0.0;
        for (int j = 0; j < s.x.size(); ++j) {
          const double r = s.x[j] - s.alpha[0] - md.exposure_z(j, 0) * s.alpha[1];
          ss_x += r * r;
        }
        const auto cx = sampler.tau_x_conditional(s);
        CHECK(cx.shape == ex.precision.as_gamma().shape + 0.5 * static_cast<double>(s.x.size()));
        CHECK(cx.rate == doctest::Approx(ex.precision.as_gamma().rate + 0.5 * ss_x).epsilon(1e-14));

        double ss_u = 0.0;
        for (const auto& p : md.proxies) ss_u += p.weight * (p.value - s.x[p.unit]) * (p.value - s.x[p.unit]);
        const auto cu = sampler.tau_u_conditional(s);
        CHECK(md.proxies.size() == static_cast<std::size_t>(replicates * s.x.size()));
        CHECK(cu.shape == m.spec.error.precision.as_gamma().shape + 0.5 * static_cast<double>(md.proxies.size()));
        CHECK(cu.rate == doctest::Approx(m.spec.error.precision.as_gamma().rate + 0.5 * ss_u).epsilon(1e-14));

        Eigen::MatrixXd X(s.x.size(), 2);
        X.col(0).setOnes();
        X.col(1) = md.exposure_z.col(0);
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 2);
        R(0, 0) = ex.intercept.as_gaussian().precision;
        R(1, 1) = ex.coefficients.as_gaussian().precision;
        Eigen::VectorXd mu(2);
        mu << ex.intercept.as_gaussian().mean, ex.coefficients.as_gaussian().mean;
        const Eigen::MatrixXd Q = s.tau_x * X.transpose() * X + R;
        const Eigen::VectorXd mean = Q.fullPivLu().solve(s.tau_x * X.transpose() * s.x + R * mu);
        const auto ca = sampler.alpha_conditional(s);
        CHECK((ca.precision - Q).cwiseAbs().maxCoeff() <= 1e-12 * Q.cwiseAbs().maxCoeff());
        CHECK((ca.mean - mean).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + mean.cwiseAbs().maxCoeff()));
      }
    }
  }

  TEST_CASE("tau_x conditional: worked example and zero residuals") {
    const JointModel m = framingham_model(10, 2);
    const Sampler sampler(m);
    ChainState s = sampler.initial_state();
    s.alpha << 0.5, 0.0;
    s.x.setConstant(0.5);
    const auto c = sampler.tau_x_conditional(s);
    const auto prior = m.spec.exposure->precision.as_gamma();
    CHECK(c.shape == prior.shape + 5.0);
    CHECK(c.rate == prior.rate);
    s.x.setConstant(1.5);
    CHECK(sampler.tau_x_conditional(s).rate == doctest::Approx(prior.rate + 5.0));
  }

  TEST_CASE("gibbs draws follow the stated gamma law") {
    const JointModel m = framingham_model(20, 2);
    const Sampler sampler(m);
    ChainState s = sampler.initial_state();
    const auto c = sampler.tau_x_conditional(s);
    SplitMix64 rng(3);
    const int draws = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      sampler.gibbs_tau_x(s, rng);
      sum += s.tau_x;
      sum2 += s.tau_x * s.tau_x;
    }
    const double mean = sum / draws, var = sum2 / draws - mean * mean;
    const double expected_mean = c.shape / c.rate, expected_var = c.shape / (c.rate * c.rate);
    CHECK(std::abs(mean - expected_mean) < 4.0 * std::sqrt(expected_var / draws));
    CHECK(var == doctest::Approx(expected_var).epsilon(0.02));
  }

  TEST_CASE("alpha conditional tends to least squares as tau_x grows") {
    const JointModel m = framingham_model(40, 2);
    const Sampler sampler(m);
    ChainState s = sampler.initial_state();
    s.tau_x = 1e10;
    Eigen::MatrixXd X(s.x.size(), 2);
    X.col(0).setOnes();
    X.col(1) = m.data.exposure_z.col(0);
    const Eigen::VectorXd ols = X.colPivHouseholderQr().solve(s.x);
    const auto ca = sampler.alpha_conditional(s);
    CHECK((ca.mean - ols).lpNorm<Eigen::Infinity>() < 1e-6);
  }

  TEST_CASE("conditional densities differ from the joint by a constant") {
    for (Study study : {Study::FraminghamLike, Study::SeedlingLike}) {
      auto recipe = default_recipe(study);
      if (study == Study::FraminghamLike) recipe.n = 25;
      auto sim = simulate(recipe);
      sim.spec.copy_precision.reset();
      const JointModel m = build_joint_model(sim.spec, sim.data);
      const Sampler sampler(m);
      std::mt19937_64 gen(5);
      std::normal_distribution<double> nd;
      for (int rep = 0; rep < 10; ++rep) {
        const ChainState s = random_state(sampler, gen);
        const auto [v, theta] = joint_point(m, s);
        const double j0 = joint_log_density(m, v, theta);
        for (int unit : {0, 3}) {
          const double value = s.x[unit] + nd(gen);
          Eigen::VectorXd v1 = v;
          v1[m.layout.x + unit] = value;
          const double lhs = sampler.log_x_conditional(s, unit, value) - sampler.log_x_conditional(s, unit, s.x[unit]);
          CHECK(lhs == doctest::Approx(joint_log_density(m, v1, theta) - j0).epsilon(1e-9));
        }
        Eigen::VectorXd packed = sampler.pack_beta(s);
        Eigen::VectorXd moved = packed;
        for (auto& b : moved) b += 0.2 * nd(gen);
        ChainState t = s;
        sampler.unpack_beta(t, moved);
        const auto [v2, theta2] = joint_point(m, t);
        CHECK(sampler.log_beta_conditional(s, moved) - sampler.log_beta_conditional(s, packed) ==
              doctest::Approx(joint_log_density(m, v2, theta2) - j0).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("zero proposal scale never moves") {
    const JointModel m = framingham_model(20, 2);
    const Sampler sampler(m);
    ChainState s = sampler.initial_state();
    const ChainState before = s;
    SplitMix64 rng(1);
    CHECK(sampler.mh_latent_x(s, 0.0, rng) == 1.0);
    CHECK(s.x == before.x);
    CHECK(sampler.mh_beta(s, 0.0, Eigen::MatrixXd::Identity(3, 3), rng));
    CHECK(s.beta == before.beta);
  }

  TEST_CASE("with no observed responses the chain samples the prior") {
    auto spec = oracle::classical_gaussian_spec(1);
    std::vector<std::optional<double>> y(8);
    Dataset d;
    d.add_column("y", y);
    d.add_column("z", std::vector<double>{0.0, 1.0, 2.0, 3.0, -1.0, -2.0, 0.5, 1.5});
    d.add_column("w1", std::vector<double>{0.1, 0.4, 1.1, 1.9, -0.3, -0.8, 0.2, 0.9});
    const JointModel m = build_joint_model(spec, d);
    ChainConfig cfg;
    cfg.iterations = 60000;
    cfg.burn_in = 1000;
    cfg.thin = 1;
    cfg.seed = 9;
    const auto out = run_chain(m, cfg);
    const Eigen::VectorXd beta0 = out.draws.col(out.column("beta0"));
    const Eigen::VectorXd tau_eps = out.draws.col(out.column("tau_eps"));
    CHECK(std::abs(beta0.mean()) < 4.0 * mc_se(beta0));
    const double sd = std::sqrt((beta0.array() - beta0.mean()).square().mean());
    CHECK(sd == doctest::Approx(std::sqrt(10.0)).epsilon(0.05));
    CHECK(std::abs(tau_eps.mean() - 2.0) < 4.0 * mc_se(tau_eps));
  }

  TEST_CASE("logistic berkson chain agrees with two-dimensional quadrature") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    std::vector<double> w(50), y(50);
    for (int i = 0; i < 50; ++i) {
      w[static_cast<std::size_t>(i)] = nd(gen);
      const double p = 1.0 / (1.0 + std::exp(-(-0.5 + 1.2 * w[static_cast<std::size_t>(i)])));
      y[static_cast<std::size_t>(i)] = std::uniform_real_distribution<double>()(gen) < p ? 1.0 : 0.0;
    }
    ModelSpec spec;
    spec.observation.family = Family::Binomial;
    spec.observation.intercept = PriorSpec::gaussian(0.0, 0.1);
    spec.error.kind = ErrorKind::Berkson;
    spec.error.precision = PriorSpec::fixed(1e8);
    spec.beta_x = PriorSpec::gaussian(0.0, 0.1);
    spec.center = false;
    const JointModel m = build_joint_model(spec, oracle::table({{"y", y}, {"w", w}}));

    // Posterior of (beta0, beta_x) with x = w, tabulated on a fine grid.
    auto log_post = [&](double b0, double bx) {
      double lp = -0.05 * b0 * b0 - 0.05 * bx * bx;
      for (int i = 0; i < 50; ++i) {
        const double e = b0 + bx * w[static_cast<std::size_t>(i)];
        lp += y[static_cast<std::size_t>(i)] * e - std::log1p(std::exp(e));
      }
      return lp;
    };
    const int n = 401;
    double mass = 0.0, m0 = 0.0, mx = 0.0, s0 = 0.0, sx = 0.0;
    const double peak = log_post(-0.5, 1.2);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double b0 = -3.0 + 6.0 * a / (n - 1), bx = -2.0 + 7.0 * b / (n - 1);
        const double p = std::exp(log_post(b0, bx) - peak);
        mass += p;
        m0 += p * b0;
        mx += p * bx;
        s0 += p * b0 * b0;
        sx += p * bx * bx;
      }
    m0 /= mass;
    mx /= mass;
    const double sd0 = std::sqrt(s0 / mass - m0 * m0), sdx = std::sqrt(sx / mass - mx * mx);

    ChainConfig cfg;
    cfg.iterations = 60000;
    cfg.burn_in = 10000;
    cfg.thin = 5;
    cfg.seed = 2;
    const auto out = run_chain(m, cfg);
    const Eigen::VectorXd b0 = out.draws.col(out.column("beta0"));
    const Eigen::VectorXd bx = out.draws.col(out.column("beta_x"));
    CHECK(std::abs(b0.mean() - m0) < 4.0 * mc_se(b0));
    CHECK(std::abs(bx.mean() - mx) < 4.0 * mc_se(bx));
    CHECK(std::sqrt((b0.array() - b0.mean()).square().mean()) == doctest::Approx(sd0).epsilon(0.1));
    CHECK(std::sqrt((bx.array() - bx.mean()).square().mean()) == doctest::Approx(sdx).epsilon(0.1));
    CHECK(out.acceptance_rates.at("beta") > 0.2);
    CHECK(out.acceptance_rates.at("beta") < 0.5);
    CHECK(out.acceptance_rates.at("x") > 0.2);
    CHECK(out.acceptance_rates.at("x") < 0.5);
  }

  TEST_CASE("chains are deterministic given the seed") {
    const JointModel m = framingham_model(30, 2);
    ChainConfig cfg;
    cfg.iterations = 3000;
    cfg.burn_in = 500;
    cfg.thin = 5;
    cfg.seed = 17;
    const auto a = run_chain(m, cfg);
    const auto b = run_chain(m, cfg);
    CHECK(a.draws == b.draws);
    cfg.seed = 18;
    const auto c = run_chain(m, cfg);
    CHECK(a.draws != c.draws);
  }

  TEST_CASE("chain configuration validation") {
    ChainConfig cfg;
    CHECK(cfg.iterations == 100000);
    CHECK(cfg.burn_in == 10000);
    CHECK(cfg.thin == 10);
    CHECK_NOTHROW(cfg.validate());
    cfg.burn_in = cfg.iterations;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.burn_in = 10;
    cfg.thin = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.thin = 1;
    cfg.proposal.x = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("effective sample size of independent and autocorrelated series") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> nd;
    const int n = 40000;
    Eigen::VectorXd iid(n), ar(n);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      iid[i] = nd(gen);
      prev = 0.9 * prev + nd(gen);
      ar[i] = prev;
    }
    CHECK(effective_sample_size(iid) == doctest::Approx(n).epsilon(0.1));
    CHECK(effective_sample_size(ar) == doctest::Approx(n * 0.1 / 1.9).epsilon(0.2));
  }

  TEST_CASE("ibex gibbs chain agrees with the nested laplace fit") {
    auto sim = simulate(default_recipe(Study::IbexLike));
    const JointModel m = build_joint_model(sim.spec, sim.data);
    ChainConfig cfg;
    cfg.iterations = 40000;
    cfg.burn_in = 4000;
    cfg.thin = 4;
    cfg.seed = 6;
    const auto chain = run_chain(m, cfg);
    const Eigen::VectorXd bx = chain.draws.col(chain.column("beta_x"));
    const auto laplace = fit_laplace(m, GridOptions{});
    const auto* lb = laplace.find("beta_x");
    REQUIRE(lb != nullptr);
    CHECK(std::abs(bx.mean() - lb->mean) < 3.0 * mc_se(bx) + 0.05 * lb->sd);
  }
}
