#include "meglm/inla.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "meglm/errors.hpp"
#include "meglm/parallel.hpp"

namespace meglm {

int IntegrationGrid::coordinate_of(int hyper) const {
  for (std::size_t c = 0; c < free.size(); ++c)
    if (free[c] == hyper) return static_cast<int>(c);
  return -1;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

PosteriorMarginal summarize_density(std::vector<double> values, std::vector<double> density) {
  if (values.size() != density.size() || values.size() < 2)
    throw std::invalid_argument("summarize_density needs matching value/density grids of length >= 2");
  PosteriorMarginal m;
  m.values = std::move(values);
  m.density = std::move(density);
  const auto& x = m.values;
  const auto& d = m.density;
  const double mass = trapezoid(x, d);
  if (!(mass > 0.0)) throw NumericalError("marginal density has no mass");

  std::vector<double> tmp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] * d[i];
  m.mean = trapezoid(x, tmp) / mass;
  for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = (x[i] - m.mean) * (x[i] - m.mean) * d[i];
  m.sd = std::sqrt(std::max(0.0, trapezoid(x, tmp) / mass));

  std::vector<double> cdf(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * (x[i] - x[i - 1]) * (d[i] + d[i - 1]) / mass;
  auto quantile = [&](double p) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
    if (it == cdf.begin()) return x.front();
    if (it == cdf.end()) return x.back();
    const auto k = static_cast<std::size_t>(it - cdf.begin());
    const double span = cdf[k] - cdf[k - 1];
    const double t = span > 0.0 ? (p - cdf[k - 1]) / span : 0.0;
    return x[k - 1] + t * (x[k] - x[k - 1]);
  };
  m.q025 = quantile(0.025);
  m.q50 = quantile(0.5);
  m.q975 = quantile(0.975);
  return m;
}

double log_hyperposterior(const JointModel& model, const Eigen::VectorXd& theta, const NewtonOptions& options,
                          const Eigen::VectorXd* start, GaussianApprox* approx) {
  GaussianApprox g = latent_gaussian_approx(model, theta, options, start);
  const double dim = static_cast<double>(model.layout.size);
  // log p(y, v*, theta) - log p_G(v* | theta, y)
  const double value = joint_log_density(model, g.mode, theta) + 0.5 * dim * std::log(2.0 * std::numbers::pi) -
                       0.5 * g.log_det_precision;
  if (approx) *approx = std::move(g);
  return value;
}

Eigen::VectorXd theta_from_internal(const JointModel& model, const std::vector<int>& free,
                                    const Eigen::VectorXd& internal) {
  Eigen::VectorXd theta = model.default_theta();
  for (std::size_t c = 0; c < free.size(); ++c) {
    const int k = free[c];
    const double u = internal[static_cast<Eigen::Index>(c)];
    theta[k] = model.hypers[static_cast<std::size_t>(k)].log_scale ? std::exp(u) : u;
  }
  return theta;
}

Eigen::VectorXd internal_from_theta(const JointModel& model, const std::vector<int>& free,
                                    const Eigen::VectorXd& theta) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) {
    const int k = free[c];
    u[static_cast<Eigen::Index>(c)] = model.hypers[static_cast<std::size_t>(k)].log_scale ? std::log(theta[k]) : theta[k];
  }
  return u;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Internal-scale log posterior: natural-scale value plus the log-Jacobian of
/// every log-transformed coordinate.
class InternalPosterior {
 public:
  InternalPosterior(const JointModel& model, std::vector<int> free, NewtonOptions options)
      : model_(model), free_(std::move(free)), options_(options) {}

  double operator()(const Eigen::VectorXd& u, const Eigen::VectorXd* start = nullptr,
                    GaussianApprox* approx = nullptr) const {
    for (Eigen::Index c = 0; c < u.size(); ++c)
      if (!std::isfinite(u[c]) || std::abs(u[c]) > 700.0) return kNegInf;
    const Eigen::VectorXd theta = theta_from_internal(model_, free_, u);
    double jac = 0.0;
    for (std::size_t c = 0; c < free_.size(); ++c)
      if (model_.hypers[static_cast<std::size_t>(free_[c])].log_scale) jac += u[static_cast<Eigen::Index>(c)];
    try {
      const double v = log_hyperposterior(model_, theta, options_, start, approx);
      return std::isfinite(v) ? v + jac : kNegInf;
    } catch (const NumericalError&) {
      return kNegInf;
    }
  }

  const std::vector<int>& free() const { return free_; }

 private:
  const JointModel& model_;
  std::vector<int> free_;
  NewtonOptions options_;
};

struct ModeResult {
  Eigen::VectorXd u;
  double value;
  Eigen::VectorXd latent;
};

Eigen::VectorXd fd_gradient(const InternalPosterior& h, const Eigen::VectorXd& u, double step,
                            const Eigen::VectorXd* start) {
  Eigen::VectorXd g(u.size());
  for (Eigen::Index c = 0; c < u.size(); ++c) {
    Eigen::VectorXd a = u, b = u;
    a[c] += step;
    b[c] -= step;
    const double fa = h(a, start), fb = h(b, start);
    if (!std::isfinite(fa) || !std::isfinite(fb)) throw NumericalError("hyperposterior not finite near the search point");
    g[c] = (fa - fb) / (2.0 * step);
  }
  return g;
}

/// BFGS ascent on the internal-scale log posterior with a backtracking line search.
ModeResult find_mode(const InternalPosterior& h, Eigen::VectorXd u) {
  const auto d = u.size();
  GaussianApprox approx;
  double f = h(u, nullptr, &approx);
  if (!std::isfinite(f)) throw NumericalError("hyperposterior is not finite at the starting point");
  Eigen::VectorXd latent = approx.mode;
  const double grad_step = 1e-3;
  Eigen::VectorXd g = fd_gradient(h, u, grad_step, &latent);
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(d, d);  // inverse of the negative Hessian

  for (int it = 0; it < 500; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-4) return {u, f, latent};
    Eigen::VectorXd dir = inv_h * g;
    if (dir.dot(g) <= 0.0) {
      inv_h.setIdentity();
      dir = g;
    }
    const double max_move = dir.lpNorm<Eigen::Infinity>();
    if (max_move > 2.0) dir *= 2.0 / max_move;

    double step = 1.0;
    Eigen::VectorXd cand;
    double f_new = kNegInf;
    for (int ls = 0; ls < 60; ++ls) {
      cand = u + step * dir;
      f_new = h(cand, &latent, &approx);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * g.dot(dir)) break;
      step *= 0.5;
    }
    if (!std::isfinite(f_new) || f_new < f - 1e-12 * (1.0 + std::abs(f))) {
      if (inv_h.isIdentity()) break;
      inv_h.setIdentity();
      continue;
    }
    const Eigen::VectorXd s = cand - u;
    u = cand;
    const double f_old = f;
    f = f_new;
    latent = approx.mode;
    const Eigen::VectorXd g_new = fd_gradient(h, u, grad_step, &latent);
    const Eigen::VectorXd y = g - g_new;  // gradient change of the negated objective
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
      inv_h = (eye - rho * s * y.transpose()) * inv_h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    g = g_new;
    if (std::abs(f - f_old) < 1e-12 * (1.0 + std::abs(f)) && s.lpNorm<Eigen::Infinity>() < 1e-9) break;
  }
  if (g.lpNorm<Eigen::Infinity>() > 1e-2)
    throw NumericalError("hyperparameter mode search did not converge (gradient max-norm " +
                         std::to_string(g.lpNorm<Eigen::Infinity>()) + ")");
  return {u, f, latent};
}

Eigen::MatrixXd fd_hessian(const InternalPosterior& h, const Eigen::VectorXd& u, double f0, double step,
                           const Eigen::VectorXd& latent) {
  const auto d = u.size();
  Eigen::MatrixXd hess(d, d);
  auto eval = [&](const Eigen::VectorXd& p) {
    const double v = h(p, &latent);
    if (!std::isfinite(v)) throw NumericalError("hyperposterior not finite while estimating curvature");
    return v;
  };
  for (Eigen::Index a = 0; a < d; ++a) {
    Eigen::VectorXd p = u, m = u;
    p[a] += step;
    m[a] -= step;
    hess(a, a) = (eval(p) - 2.0 * f0 + eval(m)) / (step * step);
    for (Eigen::Index b = 0; b < a; ++b) {
      Eigen::VectorXd pp = u, pm = u, mp = u, mm = u;
      pp[a] += step, pp[b] += step;
      pm[a] += step, pm[b] -= step;
      mp[a] -= step, mp[b] += step;
      mm[a] -= step, mm[b] -= step;
      hess(a, b) = hess(b, a) = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * step * step);
    }
  }
  return hess;
}

using LatticeKey = std::vector<int>;


}  // namespace

IntegrationGrid explore_grid(const JointModel& model, const GridOptions& options) {
  if (!(options.dz > 0.0) || !(options.diff_logdens > 0.0))
    throw std::invalid_argument("explore_grid: dz and diff_logdens must be positive");
  if (options.max_points == 0) throw std::invalid_argument("explore_grid: max_points must be positive");

  IntegrationGrid grid;
  grid.dz = options.dz;
  grid.diff_logdens = options.diff_logdens;
  grid.free = model.free_hypers();
  for (int k : grid.free) {
    grid.log_scale.push_back(model.hypers[static_cast<std::size_t>(k)].log_scale);
    grid.names.push_back(model.hypers[static_cast<std::size_t>(k)].name);
  }
  const auto d = static_cast<Eigen::Index>(grid.free.size());
  const InternalPosterior h(model, grid.free, options.newton);

  auto variances = [&](const GaussianApprox& g) {
    if (!options.variance_indices) return g.marginal_variances();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(model.layout.size, std::numeric_limits<double>::quiet_NaN());
    for (int i : *options.variance_indices) {
      if (i < 0 || i >= model.layout.size) throw std::out_of_range("explore_grid: variance index out of range");
      v[i] = g.marginal_variance(i);
    }
    return v;
  };

  if (d == 0) {
    GridPoint p;
    p.theta = model.default_theta();
    p.internal = Eigen::VectorXd(0);
    p.lattice = Eigen::VectorXi(0);
    GaussianApprox g;
    p.log_post = log_hyperposterior(model, p.theta, options.newton, nullptr, &g);
    p.weight = 1.0;
    p.latent_mode = g.mode;
    p.latent_variance = variances(g);
    grid.mode = p.internal;
    grid.mode_theta = p.theta;
    grid.axes = Eigen::MatrixXd(0, 0);
    grid.points.push_back(std::move(p));
    grid.evaluations = 1;
    return grid;
  }

  const ModeResult mode = find_mode(h, internal_from_theta(model, grid.free, model.default_theta()));
  grid.mode = mode.u;
  grid.mode_theta = theta_from_internal(model, grid.free, mode.u);

  const Eigen::MatrixXd hess = fd_hessian(h, mode.u, mode.value, options.fd_step, mode.latent);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-hess);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("hyperposterior curvature at the mode is not negative definite");
  grid.axes = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();

  // Best-first walk over the standardized lattice. A point's neighbours are
  // queued once the point is accepted; points are accepted in order of
  // decreasing density, so a max_points cap drops only the lowest-density tail.
  const double cutoff = mode.value - options.diff_logdens;
  std::set<LatticeKey> seen;
  std::vector<std::pair<LatticeKey, int>> pending{{LatticeKey(static_cast<std::size_t>(d), 0), -1}};
  seen.insert(pending.front().first);
  std::vector<GridPoint> accepted;
  // (log_post, key) ordered so the best candidate comes first; ties broken by key.
  auto better = [](const GridPoint& a, const GridPoint& b) {
    if (a.log_post != b.log_post) return a.log_post > b.log_post;
    return std::lexicographical_compare(b.lattice.data(), b.lattice.data() + b.lattice.size(), a.lattice.data(),
                                        a.lattice.data() + a.lattice.size());
  };
  std::vector<GridPoint> candidates;  // heap under `better`
  auto heap_cmp = [&](const GridPoint& a, const GridPoint& b) { return better(b, a); };

  while (!pending.empty() || !candidates.empty()) {
    std::vector<GridPoint> batch(pending.size());
    parallel_for(pending.size(), options.threads, [&](std::size_t b) {
      const auto& [key, parent] = pending[b];
      GridPoint& p = batch[b];
      p.lattice = Eigen::Map<const Eigen::VectorXi>(key.data(), d);
      Eigen::VectorXd z = options.dz * p.lattice.cast<double>();
      p.internal = mode.u + grid.axes * z;
      const Eigen::VectorXd* start = parent < 0 ? &mode.latent : &accepted[static_cast<std::size_t>(parent)].latent_mode;
      GaussianApprox g;
      p.log_post = h(p.internal, start, &g);
      if (std::isfinite(p.log_post) && p.log_post >= cutoff) {
        p.theta = theta_from_internal(model, grid.free, p.internal);
        p.latent_mode = std::move(g.mode);
        p.latent_variance = variances(g);
      }
    });
    grid.evaluations += pending.size();
    pending.clear();
    for (auto& p : batch) {
      if (!std::isfinite(p.log_post) || p.log_post < cutoff) continue;
      candidates.push_back(std::move(p));
      std::push_heap(candidates.begin(), candidates.end(), heap_cmp);
    }

    // Accept a chunk of the best candidates and queue their unseen neighbours.
    const std::size_t chunk = std::max<std::size_t>(64, 2 * candidates.size() / 3);
    for (std::size_t c = 0; c < chunk && !candidates.empty(); ++c) {
      if (accepted.size() == options.max_points) {
        grid.truncated = true;
        break;
      }
      std::pop_heap(candidates.begin(), candidates.end(), heap_cmp);
      accepted.push_back(std::move(candidates.back()));
      candidates.pop_back();
      const GridPoint& p = accepted.back();
      for (Eigen::Index c2 = 0; c2 < d; ++c2)
        for (int step : {-1, 1}) {
          LatticeKey nb(p.lattice.data(), p.lattice.data() + d);
          nb[static_cast<std::size_t>(c2)] += step;
          if (seen.insert(nb).second) pending.emplace_back(std::move(nb), static_cast<int>(accepted.size() - 1));
        }
    }
    if (grid.truncated) break;
  }

  double best = kNegInf;
  for (const auto& p : accepted) best = std::max(best, p.log_post);
  for (auto& p : accepted)
    if (p.log_post >= best - options.diff_logdens) grid.points.push_back(std::move(p));
  double total = 0.0;
  for (auto& p : grid.points) total += (p.weight = std::exp(p.log_post - best));
  for (auto& p : grid.points) p.weight /= total;
  return grid;
}

PosteriorMarginal latent_marginal(const JointModel& model, const IntegrationGrid& grid, int i, int points,
                                  double span) {
  if (grid.points.empty()) throw std::invalid_argument("latent_marginal: empty grid");
  if (i < 0 || i >= model.layout.size) throw std::out_of_range("latent_marginal: index out of range");
  if (points < 3) throw std::invalid_argument("latent_marginal: need at least 3 points");

  double mean = 0.0, second = 0.0;
  for (const auto& p : grid.points) {
    const double m = p.latent_mode[i], v = p.latent_variance[i];
    if (std::isnan(v)) throw std::invalid_argument("latent_marginal: variance of index " + std::to_string(i) +
                                                   " was not kept by the grid");
    mean += p.weight * m;
    second += p.weight * (v + m * m);
  }
  const double sd = std::sqrt(std::max(second - mean * mean, 0.0));
  if (!(sd > 0.0)) throw NumericalError("latent marginal has zero variance");

  std::vector<double> values(static_cast<std::size_t>(points)), density(static_cast<std::size_t>(points), 0.0);
  const double lo = mean - span * sd, hi = mean + span * sd;
  for (int k = 0; k < points; ++k) values[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (const auto& p : grid.points) {
    const double m = p.latent_mode[i], s = std::sqrt(p.latent_variance[i]);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double z = (values[k] - m) / s;
      density[k] += p.weight * norm / s * std::exp(-0.5 * z * z);
    }
  }
  return summarize_density(std::move(values), std::move(density));
}

PosteriorMarginal hyper_marginal(const IntegrationGrid& grid, int hyper) {
  if (grid.points.empty()) throw std::invalid_argument("hyper_marginal: empty grid");
  const int c = grid.coordinate_of(hyper);
  if (c < 0) throw std::invalid_argument("hyper_marginal: hyperparameter is fixed or unknown");
  const bool log_scale = grid.log_scale[static_cast<std::size_t>(c)];
  auto natural = [&](double u) { return log_scale ? std::exp(u) : u; };

  // Bin width along coordinate c: dz times the coordinate's standardized spread.
  const double width = grid.dz * grid.axes.row(c).norm();
  std::map<int, double> bins;
  for (const auto& p : grid.points) {
    const int b = static_cast<int>(std::lround((p.internal[c] - grid.mode[c]) / width));
    bins[b] += p.weight;
  }

  if (bins.size() < 3) {
    // Too coarse for a density: weighted moments of the support points only.
    PosteriorMarginal m;
    m.has_density = false;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : grid.points) pts.emplace_back(natural(p.internal[c]), p.weight);
    std::sort(pts.begin(), pts.end());
    double second = 0.0;
    for (const auto& [v, w] : pts) m.mean += w * v, second += w * v * v;
    m.sd = std::sqrt(std::max(second - m.mean * m.mean, 0.0));
    auto quantile = [&](double q) {
      double acc = 0.0;
      for (const auto& [v, w] : pts)
        if ((acc += w) >= q) return v;
      return pts.back().first;
    };
    m.q025 = quantile(0.025);
    m.q50 = quantile(0.5);
    m.q975 = quantile(0.975);
    return m;
  }

  const int first = bins.begin()->first, last = bins.rbegin()->first;
  std::vector<double> centre_density;
  bool positive = true;
  for (int b = first; b <= last; ++b) {
    const auto it = bins.find(b);
    const double dens = it == bins.end() ? 0.0 : it->second / width;
    positive = positive && dens > 0.0;
    centre_density.push_back(dens);
  }

  // Refine between bin centres; the centres themselves stay on the output grid.
  constexpr int refine = 8;
  const double u0 = grid.mode[c] + first * width;
  const std::size_t nb = centre_density.size();
  std::vector<double> u_grid, dens_u;
  if (positive && nb >= 4) {
    std::vector<double> logd(nb);
    for (std::size_t k = 0; k < nb; ++k) logd[k] = std::log(centre_density[k]);
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(logd.begin(), logd.end(), u0, width);
    for (std::size_t k = 0; k + 1 < nb; ++k)
      for (int r = 0; r < refine; ++r) {
        const double u = u0 + (static_cast<double>(k) + static_cast<double>(r) / refine) * width;
        u_grid.push_back(u);
        dens_u.push_back(r == 0 ? centre_density[k] : std::exp(spline(u)));
      }
  } else {
    for (std::size_t k = 0; k + 1 < nb; ++k)
      for (int r = 0; r < refine; ++r) {
        const double t = static_cast<double>(r) / refine;
        u_grid.push_back(u0 + (static_cast<double>(k) + t) * width);
        dens_u.push_back((1.0 - t) * centre_density[k] + t * centre_density[k + 1]);
      }
  }
  u_grid.push_back(u0 + static_cast<double>(nb - 1) * width);
  dens_u.push_back(centre_density.back());

  std::vector<double> values(u_grid.size()), density(u_grid.size());
  for (std::size_t k = 0; k < u_grid.size(); ++k) {
    values[k] = natural(u_grid[k]);
    density[k] = log_scale ? dens_u[k] / values[k] : dens_u[k];
  }
  return summarize_density(std::move(values), std::move(density));
}

}  // namespace meglm
