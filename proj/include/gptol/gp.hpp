#pragma once

#include "gptol/design.hpp"
#include "gptol/kernel.hpp"

#include <optional>
#include <sstream>

namespace gptol {

/// Heteroscedastic Gaussian process regressor with independent output
/// components. Each training point carries its own noise standard deviation
/// (the evaluation tolerance), so the training covariance per output c is
///
///     C_c = s_c R + diag(tau_i^2) + jitter * s_c * I,
///
/// with R the Gaussian correlation matrix shared across outputs and s_c the
/// output scale. Prediction uses the Cholesky factor of C_c; this is
/// algebraically equivalent to the precision-form posterior covariance
/// (K^-1 + T^-2)^-1 restricted to the test point, but remains well defined
/// for tolerances approaching zero.
///
/// Models are immutable after fit; concurrent read-only prediction is safe.
class GpModel {
 public:
  static constexpr double kDefaultJitter = 1e-10;

  /// Fit from a design. Points with infinite tolerance are retained in the
  /// stored design but excluded from the regression. An empty effective
  /// design yields the prior predictor.
  static GpModel fit(TrainingDesign design, KernelParams params, Vector prior_mean,
                     double jitter = kDefaultJitter) {
    params.validate();
    require(prior_mean.size() == params.output_scales.size(),
            "GpModel: prior mean dimension must match output dimension");
    GpModel m;
    m.design_ = std::move(design);
    m.params_ = std::move(params);
    m.prior_mean_ = std::move(prior_mean);
    m.jitter_ = jitter;
    m.effective_ = m.design_.effective_indices();
    for (int i : m.effective_)
      require(m.design_.has_value(i), "GpModel: effective point lacks a value");
    m.factorize(/*with_mean=*/true);
    return m;
  }

  /// Variance-only fit: same factorization but no observed values, usable for
  /// predictive-variance queries while tolerances are being optimized.
  static GpModel fit_variance_only(std::vector<Vector> points, std::vector<double> tolerances,
                                   KernelParams params, double jitter = kDefaultJitter) {
    params.validate();
    require(points.size() == tolerances.size(), "GpModel: points/tolerances length mismatch");
    GpModel m;
    m.design_.points = std::move(points);
    m.design_.tolerances = std::move(tolerances);
    m.design_.values.resize(m.design_.points.size());
    m.design_.spent_work.assign(m.design_.points.size(), 0.0);
    m.params_ = std::move(params);
    m.prior_mean_ = Vector::Zero(m.params_.output_scales.size());
    m.jitter_ = jitter;
    m.effective_ = m.design_.effective_indices();
    m.factorize(/*with_mean=*/false);
    return m;
  }

  int input_dim() const {
    return effective_.empty() ? (design_.empty() ? 0 : static_cast<int>(design_.points[0].size()))
                              : static_cast<int>(design_.points[effective_[0]].size());
  }
  int output_dim() const { return params_.output_dim(); }
  int effective_size() const { return static_cast<int>(effective_.size()); }
  const std::vector<int>& effective_indices() const { return effective_; }
  const TrainingDesign& design() const { return design_; }
  const KernelParams& params() const { return params_; }
  const Vector& prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  bool has_mean() const { return has_mean_; }

  /// Correlations between p and the effective training points.
  Vector correlations(const Vector& p) const {
    Vector r(effective_size());
    for (int i = 0; i < effective_size(); ++i)
      r[i] = correlation(p, design_.points[effective_[i]], params_.length_scale);
    return r;
  }

  void predict(const Vector& p, Vector& mean, Vector& variance) const {
    const int m = output_dim();
    mean.resize(m);
    variance.resize(m);
    if (effective_.empty()) {
      mean = prior_mean_;
      variance = params_.output_scales;
      return;
    }
    const Vector r = correlations(p);
    for (int c = 0; c < m; ++c) {
      const double sc = params_.output_scales[c];
      const Vector kstar = sc * r;
      const Vector v = chol_[c].matrixL().solve(kstar);
      variance[c] = std::max(0.0, sc - v.squaredNorm());
      mean[c] = has_mean_ ? prior_mean_[c] + kstar.dot(alpha_[c]) : prior_mean_[c];
    }
  }

  Vector predict_mean(const Vector& p) const {
    Vector mean, var;
    predict(p, mean, var);
    return mean;
  }

  Vector predict_variance(const Vector& p) const {
    Vector mean, var;
    predict(p, mean, var);
    return var;
  }

  /// Root-mean-square predictive standard deviation across output components;
  /// the scalar linearization tolerance attached to a candidate point.
  double rms_std(const Vector& p) const {
    return std::sqrt(predict_variance(p).mean());
  }

  /// Derivative of the predictive variance at p with respect to the tolerance
  /// of a hypothetical training point at p_cand currently assumed at tau_lin.
  /// Obtained by bordering the training covariance with the candidate row:
  /// per output, d var(p) / d tau = 2 tau * alpha^2 with alpha the candidate
  /// coefficient of the bordered solve.
  Vector variance_derivative(const Vector& p, const Vector& p_cand, double tau_lin) const {
    require(tau_lin > 0.0, "variance_derivative: tau_lin must be positive");
    const int m = output_dim();
    Vector out(m);
    const double r_cp = correlation(p_cand, p, params_.length_scale);
    if (effective_.empty()) {
      for (int c = 0; c < m; ++c) {
        const double sc = params_.output_scales[c];
        const double alpha = sc * r_cp / (sc * (1.0 + jitter_) + tau_lin * tau_lin);
        out[c] = 2.0 * tau_lin * alpha * alpha;
      }
      return out;
    }
    const Vector r_cand = correlations(p_cand);
    const Vector r_p = correlations(p);
    for (int c = 0; c < m; ++c) {
      const double sc = params_.output_scales[c];
      const Vector kc = sc * r_cand;           // covariance candidate vs training
      const Vector u = chol_[c].solve(kc);     // C^-1 kc
      const double denom = sc * (1.0 + jitter_) + tau_lin * tau_lin - kc.dot(u);
      if (!(denom > 0.0)) {
        std::ostringstream os;
        os << "variance_derivative: singular augmented covariance (schur=" << denom
           << ", s=" << effective_size() << ", tau_lin=" << tau_lin << ")";
        throw NumericalError(os.str());
      }
      const Vector kp = sc * r_p;              // covariance p vs training
      const double alpha = (sc * r_cp - u.dot(kp)) / denom;
      out[c] = 2.0 * tau_lin * alpha * alpha;
    }
    return out;
  }

  /// Derivatives of the predictive variance at p with respect to the
  /// tolerances of all effective training points: entry (c, i) holds
  /// d var_c(p) / d tau_i = 2 tau_i (C_c^-1 k*_c)_i^2.
  Matrix variance_tolerance_gradient(const Vector& p) const {
    const int m = output_dim();
    Matrix g = Matrix::Zero(m, effective_size());
    if (effective_.empty()) return g;
    const Vector r = correlations(p);
    for (int c = 0; c < m; ++c) {
      const Vector kstar = params_.output_scales[c] * r;
      const Vector beta = chol_[c].solve(kstar);
      for (int i = 0; i < effective_size(); ++i) {
        const double tau = design_.tolerances[effective_[i]];
        g(c, i) = 2.0 * tau * beta[i] * beta[i];
      }
    }
    return g;
  }

  /// Log marginal likelihood of the training data (sum over outputs); the
  /// objective of hyperparameter calibration.
  double log_evidence() const {
    require(has_mean_, "log_evidence: model has no observations");
    const int n = effective_size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (int c = 0; c < output_dim(); ++c) {
      double logdet = 0.0;
      for (int i = 0; i < n; ++i) logdet += std::log(chol_[c].matrixLLT()(i, i));
      logdet *= 2.0;
      total += -0.5 * residual_[c].dot(alpha_[c]) - 0.5 * logdet -
               0.5 * n * std::log(2.0 * M_PI);
    }
    return total;
  }

  /// Solve C_c x = b on the training covariance of output c.
  Vector solve(int c, const Vector& b) const { return chol_[c].solve(b); }

 private:
  void factorize(bool with_mean) {
    const int n = effective_size();
    const int m = output_dim();
    has_mean_ = with_mean;
    chol_.resize(m);
    if (with_mean) {
      alpha_.resize(m);
      residual_.resize(m);
    }
    if (n == 0) return;

    Matrix corr(n, n);
    for (int i = 0; i < n; ++i) {
      corr(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) {
        const double r =
            correlation(design_.points[effective_[i]], design_.points[effective_[j]],
                        params_.length_scale);
        corr(i, j) = r;
        corr(j, i) = r;
      }
    }
    for (int c = 0; c < m; ++c) {
      const double sc = params_.output_scales[c];
      Matrix C = sc * corr;
      for (int i = 0; i < n; ++i)
        C(i, i) += design_.tolerances[effective_[i]] * design_.tolerances[effective_[i]] +
                   jitter_ * sc;
      chol_[c].compute(C);
      if (chol_[c].info() != Eigen::Success) {
        std::ostringstream os;
        os << "GpModel: training covariance not positive definite (output " << c
           << ", s=" << n << ", length_scale=" << params_.length_scale
           << ", output_scale=" << sc << ")";
        throw NumericalError(os.str());
      }
      if (with_mean) {
        Vector y(n);
        for (int i = 0; i < n; ++i) y[i] = design_.values[effective_[i]][c] - prior_mean_[c];
        residual_[c] = y;
        alpha_[c] = chol_[c].solve(y);
      }
    }
  }

  TrainingDesign design_;
  KernelParams params_;
  Vector prior_mean_;
  double jitter_ = kDefaultJitter;
  bool has_mean_ = false;
  std::vector<int> effective_;
  std::vector<Eigen::LLT<Matrix>> chol_;
  std::vector<Vector> alpha_;     // C^-1 (y - mu0) per output
  std::vector<Vector> residual_;  // y - mu0 per output
};

}  // namespace gptol
