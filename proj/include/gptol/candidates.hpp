#pragma once

#include "gptol/error_metrics.hpp"
#include "gptol/models.hpp"

namespace gptol {

/// Monte Carlo utility dE/dW at a candidate point: the sensitivity of the
/// global error to work spent there. Chains the local-error variance
/// gradient, the bordered variance derivative with linearization tolerance
/// equal to the current predictive standard deviation at the candidate, and
/// the work-model factor dtau/dW. Negative values mark productive candidates.
///
/// The integration set is fixed per instance so that per-point predictions
/// and solver state are shared across the many evaluations a pattern search
/// makes.
class UtilityEvaluator {
 public:
  UtilityEvaluator(const GpModel& model, const MeasurementModel& meas,
                   std::vector<Vector> integration_points, double work_exponent,
                   ErrorVariant variant = ErrorVariant::AsPrinted)
      : model_(model),
        meas_(meas),
        points_(std::move(integration_points)),
        work_exponent_(work_exponent),
        variant_(variant) {
    require(!points_.empty(), "UtilityEvaluator: no integration points");
    const int n = static_cast<int>(points_.size());
    const int m = model.output_dim();
    const int s = model.effective_size();
    error_grad_.resize(n);
    corr_.resize(s, n);
    Vector mean, var;
    for (int i = 0; i < n; ++i) {
      model_.predict(points_[i], mean, var);
      error_grad_[i] = local_error_variance_gradient(mean, var, meas_, variant_);
      if (s > 0) corr_.col(i) = model_.correlations(points_[i]);
    }
    (void)m;
  }

  const std::vector<Vector>& integration_points() const { return points_; }

  double operator()(const Vector& p_cand) const {
    const double tau_lin = model_.rms_std(p_cand);
    if (!(tau_lin > 0.0)) return 0.0;  // exactly interpolated: nothing to gain

    const double lr = work_exponent_;
    const double work = std::pow(tau_lin, -lr);
    const double dtau_dW = -(1.0 / lr) * std::pow(work, -1.0 / lr - 1.0);

    const int n = static_cast<int>(points_.size());
    const int m = model_.output_dim();
    const int s = model_.effective_size();
    const double t2 = tau_lin * tau_lin;

    double acc = 0.0;
    if (s == 0) {
      for (int i = 0; i < n; ++i) {
        const double r_cp = correlation(p_cand, points_[i], model_.params().length_scale);
        for (int c = 0; c < m; ++c) {
          const double sc = model_.params().output_scales[c];
          const double alpha = sc * r_cp / (sc * (1.0 + model_.jitter()) + t2);
          acc += error_grad_[i][c] * 2.0 * tau_lin * alpha * alpha;
        }
      }
    } else {
      const Vector r_cand = model_.correlations(p_cand);
      Eigen::RowVectorXd cand_corr(n);  // candidate vs integration points
      for (int i = 0; i < n; ++i)
        cand_corr[i] = correlation(p_cand, points_[i], model_.params().length_scale);
      for (int c = 0; c < m; ++c) {
        const double sc = model_.params().output_scales[c];
        const Vector kc = sc * r_cand;
        const Vector u = model_.solve(c, kc);
        const double denom = sc * (1.0 + model_.jitter()) + t2 - kc.dot(u);
        if (!(denom > 0.0))
          throw NumericalError("utility: singular bordered covariance at candidate");
        // alpha_i = (k(p_cand, p_i) - u . k*(p_i)) / denom, vectorized over i
        const Eigen::RowVectorXd num = sc * (cand_corr - u.transpose() * corr_);
        for (int i = 0; i < n; ++i) {
          const double alpha = num[i] / denom;
          acc += error_grad_[i][c] * 2.0 * tau_lin * alpha * alpha;
        }
      }
    }
    return acc / static_cast<double>(n) * dtau_dW;
  }

 private:
  const GpModel& model_;
  const MeasurementModel& meas_;
  std::vector<Vector> points_;
  double work_exponent_;
  ErrorVariant variant_;
  std::vector<Vector> error_grad_;  // de/dGamma per integration point
  Matrix corr_;                     // s x n correlations training vs integration
};

struct CandidateSearchOptions {
  int starts_per_dim = 8;
  double initial_step_fraction = 0.1;   // of diam(domain)
  double contraction = 0.5;
  double termination_fraction = 1e-3;   // of diam(domain)
  double dedup_fraction = 1e-3;         // of diam(domain)
  int max_polls_per_start = 400;
};

/// Multistart coordinate-wise compass search minimizing the utility. Starts
/// are drawn from the integration points, biasing the search toward posterior
/// mass. Converged minima closer than the dedup radius collapse to the better
/// one; the best c_max survivors are returned.
inline std::vector<Vector> select_candidates(const GpModel& model, const MeasurementModel& meas,
                                             const std::vector<Vector>& integration_points,
                                             int c_max, const PriorBox& domain,
                                             std::uint64_t seed, double work_exponent,
                                             ErrorVariant variant = ErrorVariant::AsPrinted,
                                             const CandidateSearchOptions& opt = {}) {
  require(c_max >= 1, "select_candidates: candidate count must be positive");
  UtilityEvaluator utility(model, meas, integration_points, work_exponent, variant);

  const double diam = domain.diameter();
  auto rng = make_engine(seed);
  const int n_starts = std::max(1, opt.starts_per_dim * domain.dim());
  std::uniform_int_distribution<std::size_t> pick(0, integration_points.size() - 1);

  struct Minimum {
    Vector point;
    double value;
  };
  std::vector<Minimum> found;

  for (int s = 0; s < n_starts; ++s) {
    Vector x = integration_points[pick(rng)];
    double fx = utility(x);
    double step = opt.initial_step_fraction * diam;
    int polls = 0;
    while (step >= opt.termination_fraction * diam && polls < opt.max_polls_per_start) {
      int best_dir = -1;
      double best_val = fx;
      Vector best_pt;
      for (int c = 0; c < domain.dim(); ++c) {
        for (double sign : {1.0, -1.0}) {
          Vector y = x;
          y[c] += sign * step;
          if (!domain.contains(y)) continue;
          const double fy = utility(y);
          ++polls;
          if (fy < best_val) {
            best_val = fy;
            best_dir = c;
            best_pt = y;
          }
        }
      }
      if (best_dir >= 0) {
        x = std::move(best_pt);
        fx = best_val;
      } else {
        step *= opt.contraction;
      }
    }
    found.push_back({std::move(x), fx});
  }

  std::sort(found.begin(), found.end(),
            [](const Minimum& a, const Minimum& b) { return a.value < b.value; });
  std::vector<Vector> selected;
  for (const auto& cand : found) {
    bool duplicate = false;
    for (const auto& kept : selected)
      if ((cand.point - kept).norm() < opt.dedup_fraction * diam) {
        duplicate = true;
        break;
      }
    if (!duplicate) selected.push_back(cand.point);
    if (static_cast<int>(selected.size()) == c_max) break;
  }
  return selected;
}

}  // namespace gptol
