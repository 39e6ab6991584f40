// Independent test oracles: literal dense linear-algebra forms, finite
// differences, enumeration solvers and plain scalar recomputations. Nothing
// in here may call into the implementation paths it is used to check.
#pragma once

#include "gptol/bayes.hpp"
#include "gptol/design.hpp"
#include "gptol/kernel.hpp"

#include <random>

namespace oracle {

using gptol::Matrix;
using gptol::Vector;

/// Literal precision-form GP prediction: per output component, build the
/// joint (s+1)x(s+1) prior covariance over training points plus the test
/// point, add the small diagonal regularization, and evaluate
///   Gamma  = (K^-1 + T^-2)^-1,  Ybar = Gamma (K^-1 M0 + T^-2 Y)
/// with T^-2 carrying zero in the test slot. Returns the test-slot mean and
/// variance per component.
inline void dense_gp_predict(const std::vector<Vector>& points, const std::vector<double>& taus,
                             const std::vector<Vector>& values, const gptol::KernelParams& params,
                             const Vector& prior_mean, const Vector& test_point, double jitter,
                             Vector& mean_out, Vector& var_out) {
  const int s = static_cast<int>(points.size());
  const int m = params.output_dim();
  mean_out.resize(m);
  var_out.resize(m);
  std::vector<Vector> all = points;
  all.push_back(test_point);
  for (int c = 0; c < m; ++c) {
    Matrix K(s + 1, s + 1);
    for (int i = 0; i <= s; ++i)
      for (int j = 0; j <= s; ++j)
        K(i, j) = params.output_scales[c] *
                  gptol::correlation(all[i], all[j], params.length_scale);
    K.diagonal().array() += jitter * params.output_scales[c];
    Matrix Tinv2 = Matrix::Zero(s + 1, s + 1);
    for (int i = 0; i < s; ++i) Tinv2(i, i) = 1.0 / (taus[i] * taus[i]);
    const Matrix Kinv = K.fullPivLu().inverse();
    const Matrix Gamma = (Kinv + Tinv2).fullPivLu().inverse();
    Vector Y = Vector::Zero(s + 1);
    for (int i = 0; i < s; ++i) Y[i] = values[i][c];
    const Vector M0 = Vector::Constant(s + 1, prior_mean[c]);
    const Vector Ybar = Gamma * (Kinv * M0 + Tinv2 * Y);
    mean_out[c] = Ybar[s];
    var_out[c] = Gamma(s, s);
  }
}

/// Plain scalar recomputation of the Gaussian log likelihood, term by term.
inline double scalar_log_gaussian(const Vector& residual, const Vector& variances) {
  double out = 0.0;
  for (int c = 0; c < residual.size(); ++c) {
    out += -0.5 * std::log(2.0 * M_PI) - 0.5 * std::log(variances[c]) -
           0.5 * residual[c] * residual[c] / variances[c];
  }
  return out;
}

/// Term-by-term recomputation of the local error formula (printed variant
/// when keep_trace_factor, derivation-consistent otherwise).
inline double scalar_local_error(const Vector& mean, const Vector& variance,
                                 const Vector& y_meas, const Vector& sigma,
                                 bool keep_trace_factor) {
  double total = 0.0;
  for (int c = 0; c < mean.size(); ++c) {
    const double ratio = variance[c] / sigma[c];
    const double logdet_term = std::log(1.0 + ratio);
    const double factor = keep_trace_factor ? (1.0 - 1.0 / sigma[c]) : 1.0;
    const double trace_term = ratio * factor;
    const double v = std::sqrt(variance[c]) / sigma[c];
    const double residual_term = 2.0 * std::abs(mean[c] - y_meas[c]) * v;
    total += 0.5 * (logdet_term - trace_term + residual_term);
  }
  return total;
}

/// Brute-force projection onto { w >= lower, sum(w - lower) <= cap } by
/// enumerating KKT active sets (every zero pattern, sum constraint active or
/// not). Exact for small dimensions.
inline Vector brute_force_project(const Vector& w, const Vector& lower, double cap) {
  const int s = static_cast<int>(w.size());
  const Vector v = w - lower;
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << s); ++mask) {
    for (int sum_active = 0; sum_active <= 1; ++sum_active) {
      Vector cand = Vector::Zero(s);
      std::vector<int> free;
      for (int i = 0; i < s; ++i)
        if (!(mask & (1 << i))) free.push_back(i);
      if (sum_active) {
        if (free.empty()) {
          if (cap != 0.0) continue;
        } else {
          double sum_free = 0.0;
          for (int i : free) sum_free += v[i];
          const double shift = (sum_free - cap) / static_cast<double>(free.size());
          for (int i : free) cand[i] = v[i] - shift;
        }
      } else {
        for (int i : free) cand[i] = v[i];
      }
      // feasibility + stationarity signs
      bool ok = true;
      double sum = 0.0;
      for (int i = 0; i < s; ++i) {
        if (cand[i] < -1e-12) ok = false;
        sum += cand[i];
      }
      if (sum > cap + 1e-9) ok = false;
      if (!ok) continue;
      const double dist = (cand - v).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = cand;
      }
    }
  }
  return lower + best;
}

/// Closed-form KL between two univariate normals N(m1, v1) || N(m2, v2).
inline double gaussian_kl(double m1, double v1, double m2, double v2) {
  return 0.5 * (std::log(v2 / v1) + (v1 + (m1 - m2) * (m1 - m2)) / v2 - 1.0);
}

/// Standard error of an autocorrelated chain mean via batch means.
inline double batch_means_se(const std::vector<double>& x, int n_batches = 50) {
  const int n = static_cast<int>(x.size());
  const int batch = n / n_batches;
  std::vector<double> means;
  for (int b = 0; b + 1 <= n_batches; ++b) {
    double m = 0.0;
    for (int i = b * batch; i < (b + 1) * batch; ++i) m += x[i];
    means.push_back(m / batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(means.size() - 1);
  return std::sqrt(var / static_cast<double>(means.size()));
}

/// Random but well-separated design for linear-algebra comparisons: points in
/// the unit box with pairwise distance at least min_sep, finite tolerances.
struct RandomDesign {
  std::vector<Vector> points;
  std::vector<double> taus;
  std::vector<Vector> values;
  gptol::KernelParams params;
  Vector prior_mean;
};

inline RandomDesign random_design(std::mt19937_64& rng, int max_points, int dim, int outputs,
                                  double min_sep = 0.05) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, max_points);
  RandomDesign d;
  const int target = count(rng);
  int guard = 0;
  while (static_cast<int>(d.points.size()) < target && guard++ < 1000) {
    Vector p(dim);
    for (int c = 0; c < dim; ++c) p[c] = unit(rng);
    bool ok = true;
    for (const auto& q : d.points)
      if ((p - q).norm() < min_sep) ok = false;
    if (ok) d.points.push_back(std::move(p));
  }
  std::uniform_real_distribution<double> tau_draw(0.02, 0.5);
  std::normal_distribution<double> val(0.0, 1.0);
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    d.taus.push_back(tau_draw(rng));
    Vector y(outputs);
    for (int c = 0; c < outputs; ++c) y[c] = val(rng);
    d.values.push_back(std::move(y));
  }
  d.params.length_scale = 0.05 + 0.10 * unit(rng);
  d.params.output_scales = Vector(outputs);
  for (int c = 0; c < outputs; ++c) d.params.output_scales[c] = 0.2 + 1.5 * unit(rng);
  d.prior_mean = Vector::Zero(outputs);
  return d;
}

inline gptol::TrainingDesign to_training_design(const RandomDesign& d) {
  gptol::TrainingDesign out;
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    out.add_point(d.points[i], d.taus[i]);
    out.set_value(static_cast<int>(i), d.values[i]);
  }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace oracle
