#pragma once

#include "gptol/candidates.hpp"
#include "gptol/config.hpp"
#include "gptol/gp_tuning.hpp"
#include "gptol/mcmc.hpp"
#include "gptol/tolerances.hpp"

namespace gptol {

enum class StrategyKind { AdaptiveFull, AdaptivePositionOnly, Lhs };

inline const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::AdaptiveFull: return "adaptive_full";
    case StrategyKind::AdaptivePositionOnly: return "adaptive_position_only";
    case StrategyKind::Lhs: return "lhs";
  }
  return "?";
}

inline StrategyKind parse_strategy(const std::string& name) {
  if (name == "adaptive_full") return StrategyKind::AdaptiveFull;
  if (name == "adaptive_position_only") return StrategyKind::AdaptivePositionOnly;
  if (name == "lhs") return StrategyKind::Lhs;
  throw ConfigError("unknown strategy '" + name +
                    "' (known: adaptive_full, adaptive_position_only, lhs)");
}

/// Per-iteration state capture: enough to rebuild the surrogate and audit the
/// run. Probe predictions pin the fitted model for consistency checks.
struct DesignSnapshot {
  int iteration = 0;
  double cumulative_work = 0.0;
  TrainingDesign design;
  KernelParams params;
  std::vector<Vector> probe_points;
  std::vector<Vector> probe_mean;
  std::vector<Vector> probe_variance;
};

struct RunResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<DesignSnapshot> snapshots;
  SampleChain chain;
  WorkLedger ledger;
  std::vector<double> acceptance_rates;  // one per sampling round
};

namespace detail {

inline std::vector<Vector> probe_grid(const PriorBox& box) {
  // 5 deterministic probes along the box diagonal, strictly inside.
  std::vector<Vector> probes;
  for (int i = 0; i < 5; ++i) {
    const double t = (i + 0.5) / 5.0;
    probes.push_back(box.lower() + t * box.widths());
  }
  return probes;
}

}  // namespace detail

/// Space-filling initial design: Latin hypercube points at the coarse initial
/// tolerance, evaluated and charged to the ledger.
inline TrainingDesign initial_design(const ExperimentConfig& cfg, WorkLedger& ledger,
                                     std::uint64_t run_seed) {
  TrainingDesign design;
  if (cfg.initial_points == 0) return design;
  const auto pts = latin_hypercube(cfg.initial_points, cfg.prior,
                                   derive_seed(run_seed, 0x1a5d0));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    design.add_point(pts[i], cfg.initial_tolerance);
    const Vector y = evaluate_noisy(cfg.model, pts[i], cfg.initial_tolerance,
                                    derive_seed(run_seed, 0xe7a1, i));
    design.set_value(static_cast<int>(i), y);
    design.spent_work[i] = ledger.charge(static_cast<int>(i), kInf, cfg.initial_tolerance,
                                         cfg.model.work_exponent);
  }
  return design;
}

/// The interleaved surrogate-training / posterior-sampling loop. Each
/// iteration: refresh the sample chain against the current surrogate, re-tune
/// hyperparameters, pick candidate points by the work-sensitivity utility,
/// assign tolerances (optimized, or fixed for the position-only baseline),
/// evaluate the forward model where tolerances decreased, refit, and charge
/// the iteration budget. One final sampling round follows loop exit.
inline RunResult run(const ExperimentConfig& cfg, StrategyKind strategy, std::uint64_t seed) {
  cfg.validate();
  require(strategy != StrategyKind::Lhs, "run: the LHS strategy has its own driver");
  const MeasurementModel meas = make_measurement(cfg);
  const Schedule& sched = cfg.schedule;
  const double lr = cfg.model.work_exponent;

  RunResult result;
  result.strategy = to_string(strategy);
  result.seed = seed;

  TrainingDesign design = initial_design(cfg, result.ledger, seed);
  KernelParams params;
  params.length_scale = std::clamp(cfg.length_scale_init, cfg.length_scale_min,
                                   cfg.length_scale_max);
  params.output_scales = Vector::Constant(cfg.model.output_dim, cfg.output_scale_init);
  GpModel model = GpModel::fit(design, params, cfg.prior_mean, cfg.jitter);

  double budget_spent = result.ledger.total;  // W_D: D_0 charged up front
  const auto probes = detail::probe_grid(cfg.prior);
  auto snapshot = [&](int iteration) {
    DesignSnapshot snap;
    snap.iteration = iteration;
    snap.cumulative_work = budget_spent;
    snap.design = design;
    snap.params = model.params();
    snap.probe_points = probes;
    for (const auto& p : probes) {
      Vector mean, var;
      model.predict(p, mean, var);
      snap.probe_mean.push_back(std::move(mean));
      snap.probe_variance.push_back(std::move(var));
    }
    result.snapshots.push_back(std::move(snap));
  };
  snapshot(0);

  SampleChain chain;
  chain.step_fraction = cfg.proposal_fraction;
  McmcOptions mcmc_opt;
  mcmc_opt.initial_step_fraction = cfg.proposal_fraction;

  TuneOptions tune_opt;
  tune_opt.length_scale_min = cfg.length_scale_min;
  tune_opt.length_scale_max = cfg.length_scale_max;
  tune_opt.max_iters = cfg.tune_max_iters;

  CandidateSearchOptions cand_opt;
  cand_opt.starts_per_dim = cfg.candidate_starts_per_dim;

  ToleranceOptions tol_opt;
  tol_opt.multistarts = cfg.tolerance_multistarts;
  tol_opt.max_descent_iters = cfg.descent_max_iters;
  tol_opt.exclusion_fraction = cfg.exclusion_fraction;

  int j = 1;
  std::uint64_t eval_counter = 0;
  while (budget_spent <= sched.total_budget && j <= sched.max_iterations) {
    // -- sampling against the current surrogate
    const auto logdens = [&](const Vector& p) {
      return log_posterior(p, model, meas, cfg.prior, LikelihoodKind::Marginal);
    };
    chain = update_chain(chain, sched.n_of(j), sched.h_of(j), logdens, cfg.prior, j,
                         derive_seed(seed, 0xc4a1, j), mcmc_opt);
    result.acceptance_rates.push_back(chain.last_acceptance_rate);

    // -- hyperparameter re-tuning, warm-started
    const TuneResult tuned =
        optimize_hyperparameters(design, model.params(), cfg.prior_mean, tune_opt, cfg.jitter);
    model = GpModel::fit(design, tuned.params, cfg.prior_mean, cfg.jitter);

    // -- candidate selection on a posterior-weighted integration set
    const auto integration =
        subsample(chain, cfg.subsample_size, derive_seed(seed, 0x5b5, j));
    const double dw = sched.dw_of(j);
    const auto candidates =
        select_candidates(model, meas, integration, sched.c_of(j), cfg.prior,
                          derive_seed(seed, 0xca4d, j), lr, cfg.error_variant, cand_opt);

    // -- tolerance assignment
    std::vector<double> new_tolerances;  // one per candidate, +inf = rejected
    std::vector<double> refined;         // per retained point
    refined.assign(design.tolerances.begin(), design.tolerances.end());
    if (strategy == StrategyKind::AdaptivePositionOnly) {
      new_tolerances.assign(candidates.size(), cfg.fixed_tolerance());
    } else {
      ToleranceProblem problem;
      problem.retained_points = design.points;
      problem.retained_tolerances.assign(design.tolerances.begin(), design.tolerances.end());
      problem.candidate_points = candidates;
      problem.delta_budget = dw;
      problem.work_exponent = lr;
      const ToleranceResult tol =
          optimize_tolerances(problem, model, meas, integration,
                              derive_seed(seed, 0x701e, j), cfg.error_variant, tol_opt);
      for (int i = 0; i < design.size(); ++i) refined[i] = tol.tolerances[i];
      for (std::size_t i = 0; i < candidates.size(); ++i)
        new_tolerances.push_back(tol.tolerances[design.size() + static_cast<int>(i)]);
    }

    // -- evaluate the forward model wherever tolerances decreased
    for (int i = 0; i < design.size(); ++i) {
      if (refined[i] < design.tolerances[i] * (1.0 - 1e-12)) {
        const Vector y = refine_evaluation(cfg.model, design.points[i], design.tolerances[i],
                                           refined[i], design.values[i],
                                           derive_seed(seed, 0xe5a1, ++eval_counter));
        design.spent_work[i] +=
            result.ledger.charge(i, design.tolerances[i], refined[i], lr);
        design.tolerances[i] = refined[i];
        design.set_value(i, y);
      }
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!std::isfinite(new_tolerances[i])) continue;  // excluded candidate
      design.add_point(candidates[i], new_tolerances[i]);
      const int idx = design.size() - 1;
      const Vector y = evaluate_noisy(cfg.model, candidates[i], new_tolerances[i],
                                      derive_seed(seed, 0xe5a1, ++eval_counter));
      design.set_value(idx, y);
      design.spent_work[idx] =
          result.ledger.charge(idx, kInf, new_tolerances[i], lr);
    }

    model = GpModel::fit(design, model.params(), cfg.prior_mean, cfg.jitter);
    budget_spent += dw;
    snapshot(j);
    ++j;
  }

  // final sampling round against the last surrogate
  const auto logdens = [&](const Vector& p) {
    return log_posterior(p, model, meas, cfg.prior, LikelihoodKind::Marginal);
  };
  chain = update_chain(chain, sched.n_of(j), 0, logdens, cfg.prior, j,
                       derive_seed(seed, 0xc4a1, j), mcmc_opt);
  result.acceptance_rates.push_back(chain.last_acceptance_rate);
  result.chain = std::move(chain);
  return result;
}

/// Non-adaptive baseline: one Latin hypercube sized to the iteration budgets
/// at the fixed default tolerance. Work-matched prefixes provide snapshots
/// comparable to the adaptive iterations, and a final sampling round draws
/// the posterior sample set.
inline RunResult run_lhs(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const MeasurementModel meas = make_measurement(cfg);
  const Schedule& sched = cfg.schedule;
  const double lr = cfg.model.work_exponent;
  const double tau = cfg.fixed_tolerance();
  const double per_point = work_of_tolerance(tau, lr);

  double points_budget = 0.0;
  for (int j = 1; j <= sched.max_iterations; ++j) points_budget += sched.dw_of(j);
  const double raw_count = points_budget / per_point;
  if (!(raw_count <= 2e6))
    throw ConfigError("run_lhs: per-point budget " + std::to_string(per_point) +
                      " asks for an unreasonable hypercube size");
  const int n_points = std::max(1, static_cast<int>(raw_count));

  RunResult result;
  result.strategy = to_string(StrategyKind::Lhs);
  result.seed = seed;

  const auto pts = latin_hypercube(n_points, cfg.prior, derive_seed(seed, 0x1457));
  TrainingDesign full;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    full.add_point(pts[i], tau);
    full.set_value(static_cast<int>(i),
                   evaluate_noisy(cfg.model, pts[i], tau, derive_seed(seed, 0xe5a1, i)));
    full.spent_work[i] =
        result.ledger.charge(static_cast<int>(i), kInf, tau, lr);
  }

  KernelParams params;
  params.length_scale =
      std::clamp(cfg.length_scale_init, cfg.length_scale_min, cfg.length_scale_max);
  params.output_scales = Vector::Constant(cfg.model.output_dim, cfg.output_scale_init);

  TuneOptions tune_opt;
  tune_opt.length_scale_min = cfg.length_scale_min;
  tune_opt.length_scale_max = cfg.length_scale_max;
  tune_opt.max_iters = cfg.tune_max_iters;

  const auto probes = detail::probe_grid(cfg.prior);
  GpModel model = GpModel::fit(TrainingDesign{}, params, cfg.prior_mean, cfg.jitter);
  double cumulative = 0.0;
  for (int j = 1; j <= sched.max_iterations; ++j) {
    cumulative += sched.dw_of(j);
    const int upto = std::min(n_points, static_cast<int>(cumulative / per_point));
    TrainingDesign prefix;
    for (int i = 0; i < upto; ++i) {
      prefix.add_point(full.points[i], full.tolerances[i]);
      prefix.set_value(i, full.values[i]);
      prefix.spent_work[i] = full.spent_work[i];
    }
    const TuneResult tuned =
        optimize_hyperparameters(prefix, params, cfg.prior_mean, tune_opt, cfg.jitter);
    params = tuned.params;
    model = GpModel::fit(prefix, params, cfg.prior_mean, cfg.jitter);

    DesignSnapshot snap;
    snap.iteration = j;
    snap.cumulative_work = cumulative;
    snap.design = prefix;
    snap.params = params;
    snap.probe_points = probes;
    for (const auto& p : probes) {
      Vector mean, var;
      model.predict(p, mean, var);
      snap.probe_mean.push_back(std::move(mean));
      snap.probe_variance.push_back(std::move(var));
    }
    result.snapshots.push_back(std::move(snap));
  }

  // final sampling round on the complete design
  SampleChain chain;
  chain.step_fraction = cfg.proposal_fraction;
  McmcOptions mcmc_opt;
  mcmc_opt.initial_step_fraction = cfg.proposal_fraction;
  const auto logdens = [&](const Vector& p) {
    return log_posterior(p, model, meas, cfg.prior, LikelihoodKind::Marginal);
  };
  chain = update_chain(chain, sched.n_of(sched.max_iterations + 1), 0, logdens, cfg.prior,
                       sched.max_iterations + 1, derive_seed(seed, 0xc4a1, 1), mcmc_opt);
  result.acceptance_rates.push_back(chain.last_acceptance_rate);
  result.chain = std::move(chain);
  return result;
}

inline RunResult run_strategy(const ExperimentConfig& cfg, StrategyKind strategy,
                              std::uint64_t seed) {
  return strategy == StrategyKind::Lhs ? run_lhs(cfg, seed) : run(cfg, strategy, seed);
}

}  // namespace gptol
