#include <doctest.h>

#include <cmath>
#include <numbers>

#include "meglm/errors.hpp"
#include "meglm/gaussian.hpp"
#include "meglm/model.hpp"
#include "oracles.hpp"

using namespace meglm;

namespace {

Dataset classical_data() {
  return oracle::table({{"y", {0.4, -1.1, 2.3}},
                        {"z", {0.0, 1.0, -0.5}},
                        {"w1", {0.3, -0.8, 1.9}},
                        {"w2", {0.1, -1.2, 2.2}}});
}

ModelSpec berkson_poisson_spec() {
  ModelSpec s;
  s.observation.family = Family::Poisson;
  s.error.kind = ErrorKind::Berkson;
  s.error.proxies = {"w"};
  s.error.precision = PriorSpec::gamma(1.0, 0.02);
  s.exposure.reset();
  s.center = false;
  return s;
}

}  // namespace

TEST_SUITE("model-core") {
  TEST_CASE("classical stacking: block sizes and latent length") {
    auto spec = oracle::classical_gaussian_spec(2);
    const JointModel m = build_joint_model(spec, classical_data());
    CHECK(m.sizes.regression == 3);
    CHECK(m.sizes.exposure == 3);
    CHECK(m.sizes.proxy == 6);
    CHECK(m.layout.size == 3 + 3 + 2 + 2);
    CHECK(m.layout.names[static_cast<std::size_t>(m.layout.beta0)] == "beta0");
    CHECK(m.layout.alpha0 >= 0);
    CHECK(m.layout.x_copy == m.layout.x + 3);
  }

  TEST_CASE("berkson stacking has no exposure block and no alpha") {
    const Dataset d = oracle::table({{"y", {3.0, 5.0}}, {"w", {0.2, -0.4}}});
    const JointModel m = build_joint_model(berkson_poisson_spec(), d);
    CHECK(m.sizes.regression == 2);
    CHECK(m.sizes.exposure == 0);
    CHECK(m.sizes.proxy == 2);
    CHECK(m.layout.alpha0 == -1);
    CHECK(m.layout.n_alpha_z == 0);
    for (const auto& name : m.layout.names) CHECK(name.rfind("alpha", 0) != 0);
  }

  TEST_CASE("empty dataset is an error") {
    Dataset d;
    d.add_column("y", std::vector<double>{});
    d.add_column("w", std::vector<double>{});
    try {
      build_joint_model(berkson_poisson_spec(), d);
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()) == "empty dataset");
    }
  }

  TEST_CASE("invalid specifications are rejected") {
    auto spec = berkson_poisson_spec();
    spec.error.proxies = {"w1", "w2"};
    CHECK_THROWS_AS(spec.validate(), InputError);
    auto classical = oracle::classical_gaussian_spec(1);
    classical.exposure.reset();
    CHECK_THROWS_AS(classical.validate(), InputError);
    const Dataset d = oracle::table({{"y", {1.0, 2.0}}, {"w", {0.1, 0.2}}});
    auto missing = berkson_poisson_spec();
    missing.error.proxies = {"nope"};
    CHECK_THROWS_AS(build_joint_model(missing, d), InputError);
  }

  TEST_CASE("copy link: default precision and layout bookkeeping") {
    auto spec = oracle::classical_gaussian_spec(1);
    const Dataset d = oracle::table({{"y", {1.0, 2.0, 0.5}}, {"z", {0.0, 1.0, 2.0}}, {"w1", {0.2, 0.9, 1.7}}});
    CHECK(*ModelSpec{}.copy_precision == 1e9);
    spec.copy_precision.reset();
    const JointModel plain = build_joint_model(spec, d);
    const int k = plain.layout.size - 3;
    CHECK(plain.layout.size == 3 + k);
    const JointModel aug = copy_augment(plain, 1e9);
    CHECK(aug.layout.size == 6 + k);
    int copies = 0;
    for (const auto& r : aug.rows)
      if (r.block == Block::Copy) {
        ++copies;
        CHECK(r.precision_scale == 1e9);
      }
    CHECK(copies == 3);
    CHECK_THROWS(copy_augment(plain, 0.0));
    CHECK_THROWS(copy_augment(plain, -1.0));
  }

  TEST_CASE("copy with beta_x = 1 and huge precision reproduces the plain model") {
    auto spec = oracle::classical_gaussian_spec(2);
    spec.beta_x = PriorSpec::fixed(1.0);
    spec.copy_precision.reset();
    const JointModel plain = build_joint_model(spec, classical_data());
    const JointModel aug = copy_augment(plain, 1e8);
    Eigen::VectorXd theta = plain.default_theta();
    const auto gp = exact_linear_gaussian_posterior(plain, theta);
    const auto ga = exact_linear_gaussian_posterior(aug, theta);
    const auto& L = aug.layout;
    for (int j = 0; j < L.n_x; ++j) CHECK(std::abs(ga.mode[L.x_copy + j] - ga.mode[L.x + j]) < 1e-5);
    for (int i = 0; i < plain.layout.size; ++i)
      CHECK(std::abs(ga.mode[i] - gp.mode[i]) < 1e-5 * (1.0 + std::abs(gp.mode[i])));
  }

  TEST_CASE("joint density equals the sum of the block densities") {
    const JointModel m = build_joint_model(oracle::classical_gaussian_spec(2), classical_data());
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(m.layout.size, -1.0, 1.0);
    Eigen::VectorXd theta(4);
    theta << 0.7, 2.0, 1.5, 3.0;
    double sum = log_prior_theta(m, theta);
    for (Block b : {Block::Regression, Block::Exposure, Block::Error, Block::Copy, Block::LatentPrior})
      sum += block_log_density(m, v, theta, b);
    const double j = joint_log_density(m, v, theta);
    CHECK(std::abs(j - sum) <= 1e-10 * std::abs(j));
  }

  TEST_CASE("gaussian joint density at the conditional mode matches the covariance form") {
    auto spec = oracle::classical_gaussian_spec(2);
    spec.copy_precision = 1e4;
    const JointModel m = build_joint_model(spec, classical_data());
    Eigen::VectorXd theta(4);
    theta << 0.8, 2.5, 1.2, 4.0;
    const auto cf = oracle::classical_gaussian_oracle(m, theta);
    const double dim = m.layout.size;
    // log p(y, v*, theta) = log p(y | theta) + log p(theta) + log N(v*; v*, Sigma_post)
    const double expected = cf.log_marginal + log_prior_theta(m, theta) - 0.5 * dim * std::log(2.0 * std::numbers::pi) -
                            0.5 * std::log(cf.post_cov.determinant());
    CHECK(joint_log_density(m, cf.post_mean, theta) == doctest::Approx(expected).epsilon(1e-8));
  }

  TEST_CASE("scaling gamma prior rates shifts only the prior term") {
    auto spec = oracle::classical_gaussian_spec(2);
    const JointModel a = build_joint_model(spec, classical_data());
    const double c = 3.0;
    spec.error.precision = PriorSpec::gamma(3.0, 1.0 * c);
    spec.exposure->precision = PriorSpec::gamma(2.0, 2.0 * c);
    spec.observation.residual_precision = PriorSpec::gamma(2.0, 1.0 * c);
    const JointModel b = build_joint_model(spec, classical_data());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(a.layout.size, 0.3);
    Eigen::VectorXd theta(4);
    theta << 0.5, 2.0, 1.5, 3.0;
    // Each G(a, b) -> G(a, c b): a log c - (c - 1) b t
    const double shift = 3.0 * std::log(c) - (c - 1.0) * 1.0 * 2.0 + 2.0 * std::log(c) - (c - 1.0) * 2.0 * 1.5 +
                         2.0 * std::log(c) - (c - 1.0) * 1.0 * 3.0;
    const double ja = joint_log_density(a, v, theta), jb = joint_log_density(b, v, theta);
    CHECK(std::abs(jb - ja - shift) < 1e-12 * std::abs(ja) + 1e-12);
  }

  TEST_CASE("nonpositive precision in theta is an error") {
    const JointModel m = build_joint_model(oracle::classical_gaussian_spec(2), classical_data());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.layout.size);
    Eigen::VectorXd theta(4);
    theta << 0.5, 0.0, 1.5, 3.0;
    CHECK_THROWS_AS(joint_log_density(m, v, theta), std::invalid_argument);
    theta[1] = 1.0;
    v[0] = NAN;
    CHECK_THROWS_AS(joint_log_density(m, v, theta), std::invalid_argument);
  }

  TEST_CASE("continuous covariates are centered and the shift recorded") {
    auto spec = oracle::classical_gaussian_spec(2);
    spec.center = true;
    const JointModel m = build_joint_model(spec, classical_data());
    CHECK(m.data.centering.at("z") == doctest::Approx((0.0 + 1.0 - 0.5) / 3.0));
    CHECK(m.data.z.col(0).sum() == doctest::Approx(0.0).epsilon(1e-12));
    const double wbar = (0.3 - 0.8 + 1.9 + 0.1 - 1.2 + 2.2) / 6.0;
    CHECK(m.data.centering.at("w1") == doctest::Approx(wbar));
  }
}
