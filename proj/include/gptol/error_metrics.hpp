#pragma once

#include "gptol/bayes.hpp"

#include <span>

namespace gptol {

/// The local error formula ships in two variants. AsPrinted keeps the trace
/// factor (I - Sigma_l^-1) inside the trace term; DerivationConsistent drops
/// it, which is what the chain of bounds behind the formula actually yields.
enum class ErrorVariant { AsPrinted, DerivationConsistent };

inline const char* to_string(ErrorVariant v) {
  return v == ErrorVariant::AsPrinted ? "printed" : "derivation";
}

/// Local error at a point: approximate upper bound on the log ratio of true
/// and surrogated likelihood, evaluated as scalar sums over the diagonal:
///   1/2 ( sum log(1 + g/s) - sum (g/s)(1 - 1/s) + 2 sum |r| sqrt(g)/s ).
inline double local_error(const Vector& mean, const Vector& variance,
                          const MeasurementModel& meas,
                          ErrorVariant variant = ErrorVariant::AsPrinted) {
  double acc = 0.0;
  for (int c = 0; c < meas.dim(); ++c) {
    const double s = meas.sigma_l[c];
    const double g = std::max(0.0, variance[c]);
    const double r = std::abs(mean[c] - meas.y_meas[c]);
    const double trace_factor = variant == ErrorVariant::AsPrinted ? (1.0 - 1.0 / s) : 1.0;
    acc += std::log1p(g / s) - (g / s) * trace_factor + 2.0 * r * std::sqrt(g) / s;
  }
  return 0.5 * acc;
}

/// Derivative of the local error with respect to each predictive-variance
/// entry. The sqrt term is singular at zero variance; exactly interpolated
/// components contribute nothing and are clamped to zero there.
inline Vector local_error_variance_gradient(const Vector& mean, const Vector& variance,
                                            const MeasurementModel& meas,
                                            ErrorVariant variant = ErrorVariant::AsPrinted) {
  Vector grad(meas.dim());
  for (int c = 0; c < meas.dim(); ++c) {
    const double s = meas.sigma_l[c];
    const double g = std::max(0.0, variance[c]);
    const double r = std::abs(mean[c] - meas.y_meas[c]);
    const double trace_factor = variant == ErrorVariant::AsPrinted ? (1.0 - 1.0 / s) : 1.0;
    double d = 1.0 / (s + g) - trace_factor / s;
    if (g > 0.0) d += r / (s * std::sqrt(g));
    grad[c] = 0.5 * d;
  }
  return grad;
}

/// Monte Carlo estimate of the global error: mean of the local error over
/// integration points, with means and variances taken from the model.
inline double global_error(const GpModel& model, const MeasurementModel& meas,
                           std::span<const Vector> points,
                           ErrorVariant variant = ErrorVariant::AsPrinted) {
  require(!points.empty(), "global_error: no integration points");
  double acc = 0.0;
  Vector mean, var;
  for (const Vector& p : points) {
    model.predict(p, mean, var);
    acc += local_error(mean, var, meas, variant);
  }
  return acc / static_cast<double>(points.size());
}

}  // namespace gptol
