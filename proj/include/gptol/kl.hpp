#pragma once

#include "gptol/snapshot_io.hpp"

namespace gptol {

enum class KlMethod { Grid, Mcmc };

inline KlMethod parse_kl_method(const std::string& name) {
  if (name == "grid") return KlMethod::Grid;
  if (name == "mcmc") return KlMethod::Mcmc;
  throw ConfigError("unknown KL method '" + name + "' (known: grid, mcmc)");
}

namespace detail {

/// Tensor midpoint grid over the box, nodes_per_dim per axis (d <= 2 here).
inline std::vector<Vector> midpoint_grid(const PriorBox& box, int nodes_per_dim) {
  const int d = box.dim();
  require(d <= 2, "midpoint_grid: quadrature limited to d <= 2");
  std::vector<Vector> nodes;
  const Vector lo = box.lower(), w = box.widths();
  if (d == 1) {
    nodes.reserve(nodes_per_dim);
    for (int i = 0; i < nodes_per_dim; ++i) {
      Vector p(1);
      p[0] = lo[0] + w[0] * (i + 0.5) / nodes_per_dim;
      nodes.push_back(std::move(p));
    }
  } else {
    nodes.reserve(static_cast<std::size_t>(nodes_per_dim) * nodes_per_dim);
    for (int i = 0; i < nodes_per_dim; ++i)
      for (int k = 0; k < nodes_per_dim; ++k) {
        Vector p(2);
        p[0] = lo[0] + w[0] * (i + 0.5) / nodes_per_dim;
        p[1] = lo[1] + w[1] * (k + 0.5) / nodes_per_dim;
        nodes.push_back(std::move(p));
      }
  }
  return nodes;
}

}  // namespace detail

/// KL divergence of two unnormalized log densities by tensor-grid midpoint
/// quadrature with explicit normalization of both densities. Nonnegative up
/// to rounding since it reduces to a discrete KL on the shared grid. Returns
/// +inf when one density has no mass on the grid.
inline double kl_grid(const LogDensity& log_true, const LogDensity& log_surr,
                      const PriorBox& box, int nodes_per_dim) {
  const auto nodes = detail::midpoint_grid(box, nodes_per_dim);
  std::vector<double> lt(nodes.size()), ls(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    lt[i] = log_true(nodes[i]);
    ls[i] = log_surr(nodes[i]);
  }
  const double zt = logsumexp(lt), zs = logsumexp(ls);
  if (!std::isfinite(zt) || !std::isfinite(zs)) return kInf;
  double kl = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(lt[i])) continue;  // zero true mass contributes nothing
    const double pt = std::exp(lt[i] - zt);
    if (pt == 0.0) continue;
    if (!std::isfinite(ls[i])) return kInf;  // true mass where surrogate has none
    kl += pt * ((lt[i] - zt) - (ls[i] - zs));
  }
  return kl;
}

/// KL divergence estimated by Metropolis sampling of the true density; the
/// unknown ratio of normalizing constants is recovered from the same chain by
/// importance reweighting: KL = mean(delta) + log mean(exp(-delta)) with
/// delta the unnormalized log ratio. The adaptive prefix of the chain is
/// discarded.
inline double kl_mcmc(const LogDensity& log_true, const LogDensity& log_surr,
                      const PriorBox& box, const Vector& init, int n, std::uint64_t seed,
                      const McmcOptions& opt = {}) {
  McmcResult chain = mcmc_sample(log_true, n, init, box, seed, opt);
  const int burn = static_cast<int>(opt.burn_in_fraction * n);
  std::vector<double> delta;
  delta.reserve(chain.samples.size() - burn);
  for (std::size_t i = burn; i < chain.samples.size(); ++i) {
    const Vector& p = chain.samples[i];
    delta.push_back(log_true(p) - log_surr(p));
  }
  double mean = 0.0;
  for (double d : delta) mean += d;
  mean /= static_cast<double>(delta.size());
  std::vector<double> neg(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) neg[i] = -delta[i];
  const double log_ratio = logsumexp(neg) - std::log(static_cast<double>(neg.size()));
  return mean + log_ratio;
}

/// KL divergence between the true posterior (exact forward model, plug-in
/// likelihood) and the surrogated posterior of a design snapshot.
inline double true_posterior_kl(const DesignSnapshot& snap, const ExperimentConfig& cfg,
                                KlMethod method, std::uint64_t seed = 0) {
  const MeasurementModel meas = make_measurement(cfg);
  const GpModel model = model_from_snapshot(snap, cfg);
  const LogDensity log_true = [&](const Vector& p) {
    return log_posterior_true(p, cfg.model.exact, meas, cfg.prior);
  };
  const LogDensity log_surr = [&](const Vector& p) {
    return log_posterior(p, model, meas, cfg.prior, LikelihoodKind::Marginal);
  };
  if (method == KlMethod::Grid)
    return kl_grid(log_true, log_surr, cfg.prior, cfg.kl_nodes_per_dim());
  return kl_mcmc(log_true, log_surr, cfg.prior, cfg.prior.midpoint(), cfg.kl_mcmc_samples,
                 derive_seed(seed, 0x6b1));
}

/// Grid densities of the plug-in and marginal posteriors for the illustrative
/// 1D toy problem y(p) = p^2 sin(p) on [0,1], plus their grid entropies.
struct LikelihoodDemo {
  std::vector<double> grid;
  std::vector<double> plugin_density;
  std::vector<double> marginal_density;
  double plugin_entropy = 0.0;
  double marginal_entropy = 0.0;
};

inline LikelihoodDemo demo_likelihoods(int nodes = 2000, int design_points = 6,
                                       double design_tolerance = 0.08,
                                       double measurement_std = 0.03, double p_true = 0.8,
                                       std::uint64_t seed = 7) {
  const PriorBox box(Vector::Zero(1), Vector::Ones(1));
  const auto toy = [](const Vector& p) {
    Vector y(1);
    y[0] = p[0] * p[0] * std::sin(p[0]);
    return y;
  };

  MeasurementModel meas;
  meas.y_meas = toy(Vector::Constant(1, p_true));
  meas.sigma_l = Vector::Constant(1, measurement_std * measurement_std);

  TrainingDesign design;
  const auto pts = latin_hypercube(design_points, box, derive_seed(seed, 0xde30));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    design.add_point(pts[i], design_tolerance);
    auto rng = make_engine(derive_seed(seed, 0xde31, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector y = toy(pts[i]);
    y[0] += design_tolerance * normal(rng);
    design.set_value(static_cast<int>(i), y);
  }
  KernelParams params;
  params.length_scale = 0.15;
  params.output_scales = Vector::Constant(1, 0.05);
  const TuneResult tuned = optimize_hyperparameters(design, params, Vector::Zero(1));
  const GpModel model = GpModel::fit(design, tuned.params, Vector::Zero(1));

  LikelihoodDemo demo;
  const auto grid_nodes = detail::midpoint_grid(box, nodes);
  std::vector<double> lp(nodes), lm(nodes);
  for (int i = 0; i < nodes; ++i) {
    demo.grid.push_back(grid_nodes[i][0]);
    Vector mean, var;
    model.predict(grid_nodes[i], mean, var);
    lp[i] = log_plugin_likelihood(mean, meas);
    lm[i] = log_marginal_likelihood(mean, var, meas);
  }
  const double h = 1.0 / nodes;
  const double zp = logsumexp(lp) + std::log(h);
  const double zm = logsumexp(lm) + std::log(h);
  for (int i = 0; i < nodes; ++i) {
    const double dp = std::exp(lp[i] - zp);
    const double dm = std::exp(lm[i] - zm);
    demo.plugin_density.push_back(dp);
    demo.marginal_density.push_back(dm);
    if (dp > 0.0) demo.plugin_entropy -= h * dp * std::log(dp);
    if (dm > 0.0) demo.marginal_entropy -= h * dm * std::log(dm);
  }
  return demo;
}

}  // namespace gptol
