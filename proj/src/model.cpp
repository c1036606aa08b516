#include "meglm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "meglm/errors.hpp"

namespace meglm {

std::string to_string(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Binomial: return "binomial";
    case Family::Poisson: return "poisson";
  }
  return "?";
}

std::string to_string(ErrorKind k) { return k == ErrorKind::Classical ? "classical" : "berkson"; }

void ModelSpec::validate() const {
  if (observation.response.empty()) throw InputError("model: response column is not set");
  if (observation.family == Family::Binomial && !observation.trials_column && observation.trials < 1)
    throw InputError("model: binomial trials must be >= 1");
  if (observation.family != Family::Gaussian && observation.residual_precision.is_gamma() &&
      observation.residual_precision.as_gamma().shape <= 0.0)
    throw InputError("model: invalid residual precision prior");
  if (!observation.intercept.is_gaussian() || !observation.coefficients.is_gaussian())
    throw InputError("model: regression coefficients need gaussian priors");
  if (beta_x.is_gamma()) throw InputError("model: beta_x needs a gaussian or fixed prior");
  if (error.proxies.empty()) throw InputError("error model: at least one proxy column is required");
  if (error.precision.is_gaussian()) throw InputError("error model: tau_u needs a gamma or fixed prior");
  if (observation.family == Family::Gaussian && observation.residual_precision.is_gaussian())
    throw InputError("model: tau_eps needs a gamma or fixed prior");
  if (observation.random_effect && observation.random_effect->precision.is_gaussian())
    throw InputError("model: random effect precision needs a gamma or fixed prior");
  if (copy_precision && !(*copy_precision > 0.0)) throw InputError("model: copy precision must be > 0");

  if (error.kind == ErrorKind::Berkson) {
    if (error.proxies.size() != 1)
      throw InputError("error model: Berkson error takes exactly one proxy column (J = 1), got " +
                       std::to_string(error.proxies.size()));
    if (exposure) throw InputError("error model: Berkson error has no exposure model");
  } else {
    if (!exposure) throw InputError("error model: classical error requires an exposure model");
    if (error.group) throw InputError("error model: 'group' applies to Berkson error only");
    if (exposure->precision.is_gaussian()) throw InputError("exposure model: tau_x needs a gamma or fixed prior");
    if (exposure->intercept.is_gamma() || !exposure->coefficients.is_gaussian())
      throw InputError("exposure model: alpha0 needs a gaussian or fixed prior, alpha_z a gaussian prior");
  }
}

int LatentLayout::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

int JointModel::hyper_index(HyperKind kind) const {
  for (std::size_t k = 0; k < hypers.size(); ++k)
    if (hypers[k].kind == kind) return static_cast<int>(k);
  return -1;
}

Eigen::VectorXd JointModel::default_theta() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(hypers.size()));
  for (std::size_t k = 0; k < hypers.size(); ++k) theta[static_cast<Eigen::Index>(k)] = hypers[k].prior.mean();
  return theta;
}

std::vector<int> JointModel::free_hypers() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < hypers.size(); ++k)
    if (!hypers[k].prior.is_fixed()) out.push_back(static_cast<int>(k));
  return out;
}

std::vector<std::string> JointModel::hyper_names() const {
  std::vector<std::string> out;
  for (const auto& h : hypers) out.push_back(h.name);
  return out;
}

bool JointModel::all_gaussian() const { return data.family == Family::Gaussian; }

namespace {

bool is_continuous(const std::vector<double>& values) {
  std::set<double> distinct;
  for (double v : values) {
    distinct.insert(v);
    if (distinct.size() > 2) return true;
  }
  return false;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Loads a covariate column, centering it when continuous and centering is on.
std::vector<double> load_covariate(const Dataset& data, const std::string& name, bool center,
                                   std::map<std::string, double>& centering) {
  auto values = data.complete(name);
  if (center && is_continuous(values)) {
    const double shift = mean_of(values);
    for (double& v : values) v -= shift;
    centering[name] = shift;
  }
  return values;
}

struct PreparedData {
  ModelData data;
  std::vector<double> naive_w;  // per row
};

PreparedData prepare(const ModelSpec& spec, const Dataset& ds) {
  spec.validate();
  const std::size_t n = ds.rows();
  if (n == 0) throw InputError("empty dataset");

  PreparedData out;
  ModelData& md = out.data;
  md.family = spec.observation.family;
  md.error_kind = spec.error.kind;
  md.replicates = static_cast<int>(spec.error.proxies.size());

  md.y = ds.column(spec.observation.response);
  md.trials.assign(n, 1.0);
  if (md.family == Family::Binomial) {
    if (spec.observation.trials_column) {
      md.trials = ds.complete(*spec.observation.trials_column);
    } else {
      md.trials.assign(n, static_cast<double>(spec.observation.trials));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!md.y[i]) continue;
    const double y = *md.y[i];
    if (md.family == Family::Binomial) {
      if (!(md.trials[i] >= 1.0) || std::floor(md.trials[i]) != md.trials[i])
        throw InputError("data row " + std::to_string(i + 1) + ": trials must be a positive integer");
      if (y < 0.0 || y > md.trials[i] || std::floor(y) != y)
        throw InputError("data row " + std::to_string(i + 1) + ": binomial response must be an integer in [0, trials]");
    } else if (md.family == Family::Poisson) {
      if (y < 0.0 || std::floor(y) != y)
        throw InputError("data row " + std::to_string(i + 1) + ": Poisson response must be a nonnegative integer");
    }
  }

  md.z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.observation.covariates.size()));
  for (std::size_t k = 0; k < spec.observation.covariates.size(); ++k) {
    const auto& name = spec.observation.covariates[k];
    const auto col = load_covariate(ds, name, spec.center, md.centering);
    for (std::size_t i = 0; i < n; ++i) md.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
    md.z_names.push_back(name);
  }

  std::vector<double> weights(n, 1.0);
  if (spec.error.weights) {
    weights = ds.complete(*spec.error.weights);
    for (std::size_t i = 0; i < n; ++i)
      if (!(weights[i] > 0.0))
        throw InputError("data row " + std::to_string(i + 1) + ": error weight must be > 0");
  }

  out.naive_w.assign(n, 0.0);
  if (spec.error.kind == ErrorKind::Classical) {
    md.unit.resize(n);
    for (std::size_t i = 0; i < n; ++i) md.unit[i] = static_cast<int>(i);

    std::vector<Column> reps;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& name : spec.error.proxies) {
      reps.push_back(ds.column(name));
      for (const auto& v : reps.back())
        if (v) {
          sum += *v;
          ++count;
        }
    }
    if (count == 0) throw InputError("proxy columns contain no observed values");
    double shift = 0.0;
    if (spec.center) {
      shift = sum / static_cast<double>(count);
      for (const auto& name : spec.error.proxies) md.centering[name] = shift;
    }
    md.unit_proxy_mean.assign(n, 0.0);
    std::vector<int> per_unit(n, 0);
    for (std::size_t j = 0; j < reps.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) {
        if (!reps[j][i]) continue;
        const double w = *reps[j][i] - shift;
        md.proxies.push_back({static_cast<int>(i), static_cast<int>(j), w, weights[i]});
        md.unit_proxy_mean[i] += w;
        ++per_unit[i];
      }
    for (std::size_t i = 0; i < n; ++i) {
      if (per_unit[i] > 0) {
        md.unit_proxy_mean[i] /= per_unit[i];
        out.naive_w[i] = md.unit_proxy_mean[i];
      } else {
        out.naive_w[i] = std::nan("");
      }
    }

    const auto& ex = *spec.exposure;
    md.exposure_z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ex.covariates.size()));
    for (std::size_t k = 0; k < ex.covariates.size(); ++k) {
      const auto col = load_covariate(ds, ex.covariates[k], spec.center, md.centering);
      for (std::size_t i = 0; i < n; ++i)
        md.exposure_z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
      md.exposure_names.push_back(ex.covariates[k]);
    }
    if (ex.intercept.is_fixed()) md.alpha0_fixed = ex.intercept.as_fixed().value;
  } else {
    auto w = ds.complete(spec.error.proxies.front());
    if (spec.center) {
      const double shift = mean_of(w);
      for (double& v : w) v -= shift;
      md.centering[spec.error.proxies.front()] = shift;
    }
    md.unit.resize(n);
    std::vector<double> unit_w, unit_d;
    if (spec.error.group) {
      const auto groups = ds.complete(*spec.error.group);
      std::map<double, int> ids;
      for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = ids.try_emplace(groups[i], static_cast<int>(unit_w.size()));
        if (inserted) {
          unit_w.push_back(w[i]);
          unit_d.push_back(weights[i]);
        } else {
          const int g = it->second;
          const double tol = 1e-12 * std::max(1.0, std::abs(unit_w[static_cast<std::size_t>(g)]));
          if (std::abs(unit_w[static_cast<std::size_t>(g)] - w[i]) > tol ||
              unit_d[static_cast<std::size_t>(g)] != weights[i])
            throw InputError("data row " + std::to_string(i + 1) + ": proxy/weight differs within group " +
                             std::to_string(groups[i]) + "; dimension mismatch between proxies and latent x");
        }
        md.unit[i] = it->second;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) md.unit[i] = static_cast<int>(i);
      unit_w = w;
      unit_d = weights;
    }
    for (std::size_t g = 0; g < unit_w.size(); ++g)
      md.proxies.push_back({static_cast<int>(g), 0, unit_w[g], unit_d[g]});
    md.unit_proxy_mean = unit_w;
    out.naive_w = w;
  }
  return out;
}

void add_prior_row(std::vector<StackedRow>& rows, int index, const PriorSpec& prior) {
  if (!prior.is_gaussian() || prior.as_gaussian().precision == 0.0) return;
  StackedRow r;
  r.block = Block::LatentPrior;
  r.observed = prior.as_gaussian().mean;
  r.terms = {{index, 1.0, false}};
  r.precision_scale = prior.as_gaussian().precision;
  rows.push_back(std::move(r));
}

int n_units(const ModelData& md) { return static_cast<int>(md.unit_proxy_mean.size()); }

}  // namespace

JointModel build_joint_model(const ModelSpec& spec, const Dataset& ds) {
  auto prepared = prepare(spec, ds);
  JointModel m;
  m.spec = spec;
  m.data = std::move(prepared.data);
  const ModelData& md = m.data;
  const int n = static_cast<int>(md.y.size());
  const int units = n_units(md);
  const bool classical = spec.error.kind == ErrorKind::Classical;

  // Latent layout: (beta0, beta_z, alpha0, alpha_z, x, x*, gamma); x* is added by copy_augment.
  LatentLayout& L = m.layout;
  int next = 0;
  L.beta0 = next++;
  L.names.push_back("beta0");
  L.n_beta_z = static_cast<int>(md.z_names.size());
  L.beta_z = L.n_beta_z ? next : -1;
  for (const auto& z : md.z_names) L.names.push_back("beta_" + z), ++next;
  if (classical) {
    if (!md.alpha0_fixed) {
      L.alpha0 = next++;
      L.names.push_back("alpha0");
    }
    L.n_alpha_z = static_cast<int>(md.exposure_names.size());
    L.alpha_z = L.n_alpha_z ? next : -1;
    for (const auto& z : md.exposure_names) L.names.push_back("alpha_" + z), ++next;
  }
  L.x = next;
  L.n_x = units;
  for (int j = 0; j < units; ++j) L.names.push_back("x[" + std::to_string(j) + "]");
  next += units;
  if (spec.observation.random_effect) {
    L.gamma = next;
    L.n_gamma = n;
    for (int i = 0; i < n; ++i) L.names.push_back("gamma[" + std::to_string(i) + "]");
    next += n;
  }
  L.size = next;

  // theta = (beta_x, tau_u, tau_x, family hyperparameters)
  m.hypers.push_back({HyperKind::BetaX, "beta_x", spec.beta_x, false});
  m.hypers.push_back({HyperKind::ErrorPrecision, "tau_u", spec.error.precision, true});
  if (classical) m.hypers.push_back({HyperKind::ExposurePrecision, "tau_x", spec.exposure->precision, true});
  if (md.family == Family::Gaussian)
    m.hypers.push_back({HyperKind::ResidualPrecision, "tau_eps", spec.observation.residual_precision, true});
  if (spec.observation.random_effect)
    m.hypers.push_back({HyperKind::RandomEffectPrecision, "tau_gamma", spec.observation.random_effect->precision, true});

  const int h_tau_u = m.hyper_index(HyperKind::ErrorPrecision);
  const int h_tau_x = m.hyper_index(HyperKind::ExposurePrecision);
  const int h_tau_eps = m.hyper_index(HyperKind::ResidualPrecision);
  const int h_tau_gamma = m.hyper_index(HyperKind::RandomEffectPrecision);

  auto& rows = m.rows;
  for (int i = 0; i < n; ++i) {
    if (!md.y[static_cast<std::size_t>(i)]) continue;
    StackedRow r;
    r.block = Block::Regression;
    r.family = md.family;
    r.observed = *md.y[static_cast<std::size_t>(i)];
    r.trials = md.trials[static_cast<std::size_t>(i)];
    r.terms.push_back({L.beta0, 1.0, false});
    for (int k = 0; k < L.n_beta_z; ++k) r.terms.push_back({L.beta_z + k, md.z(i, k), false});
    r.terms.push_back({L.x + md.unit[static_cast<std::size_t>(i)], 1.0, true});
    if (L.gamma >= 0) r.terms.push_back({L.gamma + i, 1.0, false});
    if (md.family == Family::Gaussian) r.precision_hyper = h_tau_eps;
    rows.push_back(std::move(r));
    ++m.sizes.regression;
  }

  if (classical) {
    // 0 = -x + alpha0 + z alpha_z + eps_x
    for (int j = 0; j < units; ++j) {
      StackedRow r;
      r.block = Block::Exposure;
      r.observed = 0.0;
      r.terms.push_back({L.x + j, -1.0, false});
      if (L.alpha0 >= 0) {
        r.terms.push_back({L.alpha0, 1.0, false});
      } else {
        r.offset = *md.alpha0_fixed;
      }
      for (int k = 0; k < L.n_alpha_z; ++k) r.terms.push_back({L.alpha_z + k, md.exposure_z(j, k), false});
      r.precision_hyper = h_tau_x;
      rows.push_back(std::move(r));
      ++m.sizes.exposure;
    }
    for (const auto& p : md.proxies) {
      StackedRow r;
      r.block = Block::Error;
      r.observed = p.value;
      r.terms.push_back({L.x + p.unit, 1.0, false});
      r.precision_hyper = h_tau_u;
      r.precision_scale = p.weight;
      rows.push_back(std::move(r));
      ++m.sizes.proxy;
    }
  } else {
    // -w = -x + u
    for (const auto& p : md.proxies) {
      StackedRow r;
      r.block = Block::Error;
      r.observed = -p.value;
      r.terms.push_back({L.x + p.unit, -1.0, false});
      r.precision_hyper = h_tau_u;
      r.precision_scale = p.weight;
      rows.push_back(std::move(r));
      ++m.sizes.proxy;
    }
  }

  add_prior_row(rows, L.beta0, spec.observation.intercept);
  for (int k = 0; k < L.n_beta_z; ++k) add_prior_row(rows, L.beta_z + k, spec.observation.coefficients);
  if (L.alpha0 >= 0) add_prior_row(rows, L.alpha0, spec.exposure->intercept);
  for (int k = 0; k < L.n_alpha_z; ++k) add_prior_row(rows, L.alpha_z + k, spec.exposure->coefficients);
  for (int i = 0; i < L.n_gamma; ++i) {
    StackedRow r;
    r.block = Block::LatentPrior;
    r.terms = {{L.gamma + i, 1.0, false}};
    r.precision_hyper = h_tau_gamma;
    rows.push_back(std::move(r));
  }
  if (spec.copy_precision) return copy_augment(m, *spec.copy_precision);
  return m;
}

JointModel build_naive_model(const ModelSpec& spec, const Dataset& ds) {
  auto prepared = prepare(spec, ds);
  JointModel m;
  m.spec = spec;
  m.data = std::move(prepared.data);
  m.data.naive = true;
  const ModelData& md = m.data;
  const int n = static_cast<int>(md.y.size());
  for (int i = 0; i < n; ++i)
    if (md.y[static_cast<std::size_t>(i)] && std::isnan(prepared.naive_w[static_cast<std::size_t>(i)]))
      throw InputError("data row " + std::to_string(i + 1) + ": no proxy value for the naive fit");

  LatentLayout& L = m.layout;
  int next = 0;
  L.beta0 = next++;
  L.names.push_back("beta0");
  L.beta_z = next;
  L.names.push_back("beta_x");
  ++next;
  for (const auto& z : md.z_names) L.names.push_back("beta_" + z), ++next;
  L.n_beta_z = next - L.beta_z;
  if (spec.observation.random_effect) {
    L.gamma = next;
    L.n_gamma = n;
    for (int i = 0; i < n; ++i) L.names.push_back("gamma[" + std::to_string(i) + "]");
    next += n;
  }
  L.size = next;

  if (md.family == Family::Gaussian)
    m.hypers.push_back({HyperKind::ResidualPrecision, "tau_eps", spec.observation.residual_precision, true});
  if (spec.observation.random_effect)
    m.hypers.push_back({HyperKind::RandomEffectPrecision, "tau_gamma", spec.observation.random_effect->precision, true});
  const int h_tau_eps = m.hyper_index(HyperKind::ResidualPrecision);
  const int h_tau_gamma = m.hyper_index(HyperKind::RandomEffectPrecision);

  for (int i = 0; i < n; ++i) {
    if (!md.y[static_cast<std::size_t>(i)]) continue;
    StackedRow r;
    r.block = Block::Regression;
    r.family = md.family;
    r.observed = *md.y[static_cast<std::size_t>(i)];
    r.trials = md.trials[static_cast<std::size_t>(i)];
    const double w = prepared.naive_w[static_cast<std::size_t>(i)];
    r.terms.push_back({L.beta0, 1.0, false});
    if (spec.beta_x.is_fixed()) {
      r.offset += spec.beta_x.as_fixed().value * w;
    } else {
      r.terms.push_back({L.beta_z, w, false});
    }
    for (int k = 0; k < md.z.cols(); ++k) r.terms.push_back({L.beta_z + 1 + k, md.z(i, k), false});
    if (L.gamma >= 0) r.terms.push_back({L.gamma + i, 1.0, false});
    if (md.family == Family::Gaussian) r.precision_hyper = h_tau_eps;
    m.rows.push_back(std::move(r));
    ++m.sizes.regression;
  }
  add_prior_row(m.rows, L.beta0, spec.observation.intercept);
  if (spec.beta_x.is_fixed()) {
    // beta_x enters as an offset; keep its latent slot proper and detached from the data
    add_prior_row(m.rows, L.beta_z, PriorSpec::gaussian(spec.beta_x.as_fixed().value, 1.0));
  } else {
    add_prior_row(m.rows, L.beta_z, spec.beta_x);
  }
  for (int k = 1; k < L.n_beta_z; ++k) add_prior_row(m.rows, L.beta_z + k, spec.observation.coefficients);
  for (int i = 0; i < L.n_gamma; ++i) {
    StackedRow r;
    r.block = Block::LatentPrior;
    r.terms = {{L.gamma + i, 1.0, false}};
    r.precision_hyper = h_tau_gamma;
    m.rows.push_back(std::move(r));
  }
  return m;
}

JointModel copy_augment(const JointModel& model, double copy_precision) {
  if (!(copy_precision > 0.0) || !std::isfinite(copy_precision))
    throw std::invalid_argument("copy precision must be positive and finite");
  if (model.data.naive || model.layout.x < 0) throw std::invalid_argument("copy_augment needs a latent x");
  if (model.copy_precision) throw std::invalid_argument("model already carries a copy of x");

  JointModel m = model;
  LatentLayout& L = m.layout;
  const int units = L.n_x;
  L.x_copy = L.x + units;
  std::vector<std::string> names(L.names.begin(), L.names.begin() + L.x_copy);
  for (int j = 0; j < units; ++j) names.push_back("xcopy[" + std::to_string(j) + "]");
  names.insert(names.end(), L.names.begin() + L.x_copy, L.names.end());
  L.names = std::move(names);
  if (L.gamma >= 0) L.gamma += units;
  L.size += units;

  for (auto& r : m.rows) {
    for (auto& t : r.terms) {
      if (t.index >= L.x_copy) t.index += units;  // gamma block moved
      if (r.block == Block::Regression && t.times_beta_x) {
        t.index += units;  // x -> x*
        t.times_beta_x = false;
      }
    }
  }
  for (int j = 0; j < units; ++j) {
    StackedRow r;
    r.block = Block::Copy;
    r.observed = 0.0;
    r.terms = {{L.x_copy + j, 1.0, false}, {L.x + j, -1.0, true}};
    r.precision_scale = copy_precision;
    m.rows.push_back(std::move(r));
  }
  m.copy_precision = copy_precision;
  return m;
}

double beta_x_of(const JointModel& model, const Eigen::VectorXd& theta) {
  const int k = model.hyper_index(HyperKind::BetaX);
  return k < 0 ? 0.0 : theta[k];
}

void check_theta(const JointModel& model, const Eigen::VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(model.hypers.size()))
    throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries, model has " +
                                std::to_string(model.hypers.size()) + " hyperparameters");
  for (std::size_t k = 0; k < model.hypers.size(); ++k) {
    const double t = theta[static_cast<Eigen::Index>(k)];
    if (!std::isfinite(t)) throw std::invalid_argument("theta[" + model.hypers[k].name + "] is not finite");
    if (model.hypers[k].log_scale && !(t > 0.0))
      throw std::invalid_argument("precision " + model.hypers[k].name + " must be > 0");
  }
}

RowDerivatives row_log_likelihood(const StackedRow& row, double eta, double precision) {
  switch (row.family) {
    case Family::Gaussian: {
      const double r = row.observed - eta;
      return {0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * r * r, precision * r,
              precision};
    }
    case Family::Binomial: {
      // log(1 + e^eta) computed stably
      const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      const double p = 1.0 / (1.0 + std::exp(-eta));
      const double n = row.trials, y = row.observed;
      const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
      return {y * eta - n * softplus + log_choose, y - n * p, n * p * (1.0 - p)};
    }
    case Family::Poisson: {
      const double mu = std::exp(eta);
      return {row.observed * eta - mu - std::lgamma(row.observed + 1.0), row.observed - mu, mu};
    }
  }
  return {0.0, 0.0, 0.0};
}

double block_log_density(const JointModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                         Block block) {
  const double beta_x = beta_x_of(model, theta);
  double total = 0.0;
  for (const auto& row : model.rows) {
    if (row.block != block) continue;
    const double prec = row.family == Family::Gaussian ? row_precision(row, theta) : 0.0;
    total += row_log_likelihood(row, row_predictor(row, v, beta_x), prec).value;
  }
  return total;
}

double log_prior_theta(const JointModel& model, const Eigen::VectorXd& theta) {
  double total = 0.0;
  for (std::size_t k = 0; k < model.hypers.size(); ++k)
    total += model.hypers[k].prior.log_density(theta[static_cast<Eigen::Index>(k)]);
  return total;
}

double joint_log_density(const JointModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& theta) {
  if (v.size() != model.layout.size)
    throw std::invalid_argument("latent vector has " + std::to_string(v.size()) + " entries, layout has " +
                                std::to_string(model.layout.size));
  if (!v.allFinite()) throw std::invalid_argument("latent vector is not finite");
  check_theta(model, theta);
  double total = log_prior_theta(model, theta);
  for (Block b : {Block::Regression, Block::Exposure, Block::Error, Block::Copy, Block::LatentPrior})
    total += block_log_density(model, v, theta, b);
  return total;
}

}  // namespace meglm
