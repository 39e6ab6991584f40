#pragma once

#include "gptol/common.hpp"

#include <functional>
#include <map>

namespace gptol {

/// Forward map abstraction: an exact (expensive in the intended application,
/// analytic here) map from parameters to predicted measurements, together
/// with the work-model exponent that prices tolerance against cost.
struct ForwardModel {
  std::string name;
  int input_dim = 0;
  int output_dim = 0;
  PriorBox domain;
  double work_exponent = 1.0;  // l/r in W(tau) = tau^(-l/r)
  std::function<Vector(const Vector&)> exact;
};

/// Work model W(tau) = tau^(-l/r); asymptotic cost of reaching tolerance tau.
inline double work_of_tolerance(double tau, double l_over_r) {
  require(tau > 0.0, "work_of_tolerance: tau must be positive");
  require(l_over_r > 0.0, "work_of_tolerance: exponent must be positive");
  return std::pow(tau, -l_over_r);
}

inline double tolerance_of_work(double work, double l_over_r) {
  require(work > 0.0, "tolerance_of_work: work must be positive");
  require(l_over_r > 0.0, "tolerance_of_work: exponent must be positive");
  return std::pow(work, -1.0 / l_over_r);
}

/// y(p) = [ p/2 + p^2/2 * exp(sin(12 p - i)/3) ]_{i=0,1} on ]0,1[.
inline Vector analytic_1d(double p) {
  Vector y(2);
  for (int i = 0; i < 2; ++i)
    y[i] = 0.5 * p + 0.5 * p * p * std::exp(std::sin(12.0 * p - i) / 3.0);
  return y;
}

/// y(p) = [ sin(10k)(p1-p2) exp(sin(8 p2)/3) + cos(10k)(p1+p2) exp(sin(8 p1)/3) ]
/// for k in {0,2,3} on ]-0.5,0.5[^2.
inline Vector analytic_2d(const Vector& p) {
  require(p.size() == 2, "analytic_2d: expects a 2-vector");
  const double e1 = std::exp(std::sin(8.0 * p[0]) / 3.0);
  const double e2 = std::exp(std::sin(8.0 * p[1]) / 3.0);
  const double a = (p[0] - p[1]) * e2;
  const double b = (p[0] + p[1]) * e1;
  Vector y(3);
  int c = 0;
  for (int k : {0, 2, 3}) {
    y[c++] = std::sin(10.0 * k) * a + std::cos(10.0 * k) * b;
  }
  return y;
}

/// Name-indexed registry so configs select forward models by string key.
inline const std::map<std::string, ForwardModel>& forward_model_registry() {
  static const std::map<std::string, ForwardModel> registry = [] {
    std::map<std::string, ForwardModel> r;
    {
      ForwardModel m;
      m.name = "analytic1d";
      m.input_dim = 1;
      m.output_dim = 2;
      m.domain = PriorBox(Vector::Zero(1), Vector::Ones(1));
      m.work_exponent = 1.0;
      m.exact = [](const Vector& p) { return analytic_1d(p[0]); };
      r[m.name] = m;
    }
    {
      ForwardModel m;
      m.name = "analytic2d";
      m.input_dim = 2;
      m.output_dim = 3;
      m.domain = PriorBox(Vector::Constant(2, -0.5), Vector::Constant(2, 0.5));
      m.work_exponent = 1.5;
      m.exact = analytic_2d;
      r[m.name] = m;
    }
    return r;
  }();
  return registry;
}

inline const ForwardModel& lookup_forward_model(const std::string& key) {
  const auto& reg = forward_model_registry();
  const auto it = reg.find(key);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown forward model '" + key + "' (known: " + known + ")");
  }
  return it->second;
}

/// Simulated tolerance-tau evaluation: exact value plus independent Gaussian
/// noise of standard deviation tau per component. Deterministic per seed.
inline Vector evaluate_noisy(const ForwardModel& fm, const Vector& p, double tau,
                             std::uint64_t seed) {
  require(fm.domain.contains(p), "evaluate_noisy: point outside model domain");
  require(tau > 0.0, "evaluate_noisy: tau must be positive");
  auto rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = fm.exact(p);
  for (int c = 0; c < y.size(); ++c) y[c] += tau * normal(rng);
  return y;
}

/// Re-evaluation at a decreased tolerance. The new draw is independent of the
/// previous observation and replaces it in the design.
inline Vector refine_evaluation(const ForwardModel& fm, const Vector& p, double tau_old,
                                double tau_new, const Vector& /*value_old*/,
                                std::uint64_t seed) {
  require(tau_new <= tau_old, "refine_evaluation: tolerance must not increase");
  return evaluate_noisy(fm, p, tau_new, seed);
}

/// Cumulative record of evaluation work. Refining a point from tau_old to
/// tau_new is charged the increment W(tau_new) - W(tau_old); fresh points pay
/// the full W(tau_new).
struct WorkLedger {
  struct Entry {
    int point_index = -1;
    double old_tolerance = kInf;  // +inf for a fresh evaluation
    double new_tolerance = 0.0;
    double charged = 0.0;
  };

  std::vector<Entry> entries;
  double total = 0.0;

  double charge(int point_index, double old_tolerance, double new_tolerance,
                double l_over_r) {
    const double before =
        std::isfinite(old_tolerance) ? work_of_tolerance(old_tolerance, l_over_r) : 0.0;
    const double amount = work_of_tolerance(new_tolerance, l_over_r) - before;
    require(amount >= 0.0, "WorkLedger: refinement must not release work");
    entries.push_back({point_index, old_tolerance, new_tolerance, amount});
    total += amount;
    return amount;
  }
};

}  // namespace gptol
