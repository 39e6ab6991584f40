#pragma once

#include "gptol/gp.hpp"

#include <functional>

namespace gptol {

/// Measurement y^m with independent Gaussian noise; sigma_l holds the
/// diagonal of the noise covariance (variances, output units squared).
struct MeasurementModel {
  Vector y_meas;
  Vector sigma_l;

  int dim() const { return static_cast<int>(y_meas.size()); }

  void validate() const {
    require(y_meas.size() == sigma_l.size(), "MeasurementModel: dimension mismatch");
    require(y_meas.size() > 0, "MeasurementModel: empty measurement");
    require((sigma_l.array() > 0.0).all(), "MeasurementModel: noise variances must be positive");
  }
};

/// Gaussian log likelihood with the surrogate mean plugged in for the model
/// output: -(m/2) log 2pi - 1/2 log det Sigma_l - 1/2 |y^m - mean|^2_{Sigma_l^-1}.
inline double log_plugin_likelihood(const Vector& mean, const MeasurementModel& meas) {
  const int m = meas.dim();
  double logdet = 0.0, quad = 0.0;
  for (int c = 0; c < m; ++c) {
    logdet += std::log(meas.sigma_l[c]);
    const double r = meas.y_meas[c] - mean[c];
    quad += r * r / meas.sigma_l[c];
  }
  return -0.5 * m * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * quad;
}

/// Log likelihood marginalized over surrogate realizations: the noise
/// covariance is inflated by the predictive variance, Sigma_l + Gamma(p).
inline double log_marginal_likelihood(const Vector& mean, const Vector& variance,
                                      const MeasurementModel& meas) {
  const int m = meas.dim();
  double logdet = 0.0, quad = 0.0;
  for (int c = 0; c < m; ++c) {
    const double total = meas.sigma_l[c] + variance[c];
    logdet += std::log(total);
    const double r = meas.y_meas[c] - mean[c];
    quad += r * r / total;
  }
  return -0.5 * m * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * quad;
}

enum class LikelihoodKind { Plugin, Marginal, True };

inline const char* to_string(LikelihoodKind k) {
  switch (k) {
    case LikelihoodKind::Plugin: return "plugin";
    case LikelihoodKind::Marginal: return "marginal";
    case LikelihoodKind::True: return "true";
  }
  return "?";
}

/// Unnormalized log posterior of the surrogated problem; -inf outside the
/// prior box. Normalizing constants are never computed here.
inline double log_posterior(const Vector& p, const GpModel& model, const MeasurementModel& meas,
                            const PriorBox& prior, LikelihoodKind kind) {
  const double lp = prior.log_prior(p);
  if (!std::isfinite(lp)) return -kInf;
  Vector mean, var;
  model.predict(p, mean, var);
  switch (kind) {
    case LikelihoodKind::Plugin: return lp + log_plugin_likelihood(mean, meas);
    case LikelihoodKind::Marginal: return lp + log_marginal_likelihood(mean, var, meas);
    default: throw std::invalid_argument("log_posterior: true likelihood needs the exact model");
  }
}

/// Unnormalized log posterior with the exact forward map.
inline double log_posterior_true(const Vector& p, const std::function<Vector(const Vector&)>& exact,
                                 const MeasurementModel& meas, const PriorBox& prior) {
  const double lp = prior.log_prior(p);
  if (!std::isfinite(lp)) return -kInf;
  return lp + log_plugin_likelihood(exact(p), meas);
}

}  // namespace gptol
