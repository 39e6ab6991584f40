#pragma once

#include "gptol/error_metrics.hpp"
#include "gptol/models.hpp"

#include <numeric>

namespace gptol {

/// Euclidean projection onto { w : w >= lower, sum(w - lower) <= cap }.
/// After shifting by the lower bounds this is the simplex-with-interior; the
/// sum-active case uses the sorted threshold construction.
inline Vector simplex_project(const Vector& w, const Vector& lower, double cap) {
  require(w.size() == lower.size(), "simplex_project: dimension mismatch");
  require(cap >= 0.0, "simplex_project: cap must be nonnegative");
  Vector v = w - lower;
  Vector clipped = v.cwiseMax(0.0);
  if (clipped.sum() <= cap) return lower + clipped;

  // Project v onto { u >= 0, sum(u) = cap }.
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0, theta = 0.0;
  int support = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double t = (running - cap) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) {
      theta = t;
      support = static_cast<int>(k + 1);
    }
  }
  if (support == 0) return lower;  // cap = 0 with no strictly positive slack
  return lower + (v.array() - theta).cwiseMax(0.0).matrix();
}

/// Incremental tolerance problem: previously evaluated points whose
/// tolerances may only tighten, plus freshly selected candidate points, under
/// an iteration work budget. Work coordinates w_i = tau_i^(-l/r) make the
/// budget constraint linear.
struct ToleranceProblem {
  std::vector<Vector> retained_points;
  std::vector<double> retained_tolerances;
  std::vector<Vector> candidate_points;
  double delta_budget = 0.0;
  double work_exponent = 1.0;  // l/r

  int size() const {
    return static_cast<int>(retained_points.size() + candidate_points.size());
  }
};

struct ToleranceOptions {
  int multistarts = 4;
  int max_descent_iters = 50;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 20;
  double exclusion_fraction = 1e-6;  // of delta_budget; below this a new point is dropped
};

struct ToleranceResult {
  Vector tolerances;               // size s_prev + n_new; +inf marks exclusion
  std::vector<bool> excluded_new;  // one flag per candidate
  double objective_start = 0.0;    // variance-only E at the best start (projected)
  double objective_final = 0.0;
  double spent = 0.0;              // sum of work increments actually allocated
};

namespace detail {

/// Variance-only global error in work coordinates. Means are frozen at the
/// current model's predictions; only the predictive variance responds to the
/// tolerances under optimization.
class ToleranceObjective {
 public:
  ToleranceObjective(const ToleranceProblem& problem, const GpModel& current,
                     const MeasurementModel& meas, std::vector<Vector> integration_points,
                     ErrorVariant variant)
      : problem_(problem),
        meas_(meas),
        points_(std::move(integration_points)),
        variant_(variant),
        params_(current.params()),
        jitter_(current.jitter()) {
    require(!points_.empty(), "optimize_tolerances: no integration points");
    all_points_ = problem.retained_points;
    all_points_.insert(all_points_.end(), problem.candidate_points.begin(),
                       problem.candidate_points.end());
    frozen_means_.reserve(points_.size());
    for (const auto& p : points_) frozen_means_.push_back(current.predict_mean(p));
    // Work floor below which a point is numerically absent from the fit.
    w_floor_ = 1e-12 * std::max(1.0, problem.delta_budget);
  }

  int size() const { return static_cast<int>(all_points_.size()); }
  double work_floor() const { return w_floor_; }

  double tau_of_w(double w) const {
    return std::pow(w, -1.0 / problem_.work_exponent);
  }

  GpModel fit(const Vector& w) const {
    std::vector<Vector> pts;
    std::vector<double> tols;
    for (int i = 0; i < size(); ++i) {
      if (w[i] <= w_floor_) continue;
      pts.push_back(all_points_[i]);
      tols.push_back(tau_of_w(w[i]));
    }
    return GpModel::fit_variance_only(std::move(pts), std::move(tols), params_, jitter_);
  }

  double value(const Vector& w) const {
    const GpModel model = fit(w);
    double acc = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
      acc += local_error(frozen_means_[i], model.predict_variance(points_[i]), meas_, variant_);
    return acc / static_cast<double>(points_.size());
  }

  /// Gradient of the variance-only objective with respect to w. Points below
  /// the work floor have vanishing influence and get a zero entry.
  Vector gradient(const Vector& w) const {
    const GpModel model = fit(w);
    std::vector<int> active;  // objective index per model column
    for (int i = 0; i < size(); ++i)
      if (w[i] > w_floor_) active.push_back(i);

    Vector grad = Vector::Zero(size());
    const double lr = problem_.work_exponent;
    for (std::size_t ip = 0; ip < points_.size(); ++ip) {
      const Vector var = model.predict_variance(points_[ip]);
      const Vector dedg =
          local_error_variance_gradient(frozen_means_[ip], var, meas_, variant_);
      const Matrix dvar_dtau = model.variance_tolerance_gradient(points_[ip]);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const int i = active[a];
        const double dtau_dw = -(1.0 / lr) * std::pow(w[i], -1.0 / lr - 1.0);
        double term = 0.0;
        for (int c = 0; c < meas_.dim(); ++c) term += dedg[c] * dvar_dtau(c, a);
        grad[i] += term * dtau_dw;
      }
    }
    return grad / static_cast<double>(points_.size());
  }

 private:
  const ToleranceProblem& problem_;
  const MeasurementModel& meas_;
  std::vector<Vector> points_;
  ErrorVariant variant_;
  KernelParams params_;
  double jitter_;
  std::vector<Vector> all_points_;
  std::vector<Vector> frozen_means_;
  double w_floor_ = 0.0;
};

}  // namespace detail

/// Budget-constrained tolerance optimization in work coordinates: multistart
/// projected gradient descent with backtracking on the variance-only global
/// error. Retained points may only gain work; new points start from random
/// feasible budget splits and are excluded when the optimizer leaves them
/// essentially no work.
inline ToleranceResult optimize_tolerances(const ToleranceProblem& problem,
                                           const GpModel& current_model,
                                           const MeasurementModel& meas,
                                           const std::vector<Vector>& integration_points,
                                           std::uint64_t seed,
                                           ErrorVariant variant = ErrorVariant::AsPrinted,
                                           const ToleranceOptions& opt = {}) {
  require(problem.delta_budget >= 0.0, "optimize_tolerances: negative budget");
  require(problem.work_exponent > 0.0, "optimize_tolerances: nonpositive work exponent");
  require(problem.retained_points.size() == problem.retained_tolerances.size(),
          "optimize_tolerances: retained points/tolerances mismatch");

  detail::ToleranceObjective objective(problem, current_model, meas, integration_points,
                                       variant);
  const int s_prev = static_cast<int>(problem.retained_points.size());
  const int s = objective.size();
  const double lr = problem.work_exponent;

  Vector lower(s);
  for (int i = 0; i < s_prev; ++i)
    lower[i] = work_of_tolerance(problem.retained_tolerances[i], lr);
  for (int i = s_prev; i < s; ++i) lower[i] = 0.0;
  const double cap = problem.delta_budget;

  auto rng = make_engine(seed);
  std::exponential_distribution<double> expo(1.0);

  Vector best_w = lower;
  double best_value = kInf;
  double best_start_value = kInf;

  const int n_starts = std::max(1, opt.multistarts);
  for (int start = 0; start < n_starts; ++start) {
    // Uniform random split of the budget over all coordinates (Dirichlet(1)).
    Vector split(s);
    double norm = 0.0;
    for (int i = 0; i < s; ++i) {
      split[i] = expo(rng);
      norm += split[i];
    }
    Vector w = cap > 0.0 && norm > 0.0 ? Vector(lower + split * (cap / norm)) : lower;
    w = simplex_project(w, lower, cap);

    double value = objective.value(w);
    const double start_value = value;
    double step = cap > 0.0 ? 0.25 * cap : 1.0;

    for (int it = 0; it < opt.max_descent_iters && cap > 0.0; ++it) {
      const Vector grad = objective.gradient(w);
      if (!grad.allFinite()) break;
      if (grad.norm() < 1e-14) break;
      bool moved = false;
      double trial = step / std::max(grad.norm(), 1e-300);
      for (int bt = 0; bt < opt.max_backtracks; ++bt) {
        const Vector w_new = simplex_project(w - trial * grad, lower, cap);
        const Vector delta = w_new - w;
        if (delta.norm() < 1e-14 * std::max(1.0, cap)) break;
        const double v_new = objective.value(w_new);
        if (std::isfinite(v_new) && v_new <= value + opt.armijo * grad.dot(delta)) {
          w = w_new;
          value = v_new;
          step = std::min(trial * std::max(grad.norm(), 1e-300) * 2.0, 4.0 * cap);
          moved = true;
          break;
        }
        trial *= opt.backtrack;
      }
      if (!moved) break;
    }

    if (value < best_value) {
      best_value = value;
      best_w = w;
      best_start_value = start_value;
    }
  }

  ToleranceResult result;
  result.objective_start = best_start_value;
  result.objective_final = best_value;
  result.tolerances.resize(s);
  result.excluded_new.assign(std::max(0, s - s_prev), false);
  const double exclusion = opt.exclusion_fraction * std::max(cap, 0.0);
  double spent = 0.0;
  for (int i = 0; i < s; ++i) {
    double w = best_w[i];
    if (i >= s_prev && w <= std::max(exclusion, objective.work_floor())) {
      result.tolerances[i] = kInf;  // excluded from the training set
      result.excluded_new[i - s_prev] = true;
      continue;
    }
    w = std::max(w, lower[i]);
    double tau = std::pow(w, -1.0 / lr);
    if (i < s_prev) tau = std::min(tau, problem.retained_tolerances[i]);
    result.tolerances[i] = tau;
    spent += std::pow(tau, -lr) - lower[i];
  }
  result.spent = spent;
  return result;
}

}  // namespace gptol
