#pragma once

#include "gptol/gp.hpp"

namespace gptol {

struct TuneOptions {
  double length_scale_min = 1e-3;
  double length_scale_max = 0.15;
  int max_iters = 100;
  double grad_tol = 1e-7;
  double armijo = 1e-4;
};

struct TuneResult {
  KernelParams params;
  double objective = -kInf;
  int iterations = 0;
  bool warning = false;  // optimizer hit a non-finite objective; params == init
};

namespace detail {

/// Evidence and its gradient in log-parameters (log length_scale, log s_c).
/// Standard identity: dL/dtheta = 1/2 tr((a a^T - C^-1) dC/dtheta) per output.
inline double evidence_and_gradient(const TrainingDesign& design, const KernelParams& params,
                                    const Vector& prior_mean, double jitter, Vector* grad) {
  const auto eff = design.effective_indices();
  const int n = static_cast<int>(eff.size());
  const int m = params.output_dim();
  if (grad) grad->setZero(1 + m);
  if (n == 0) return 0.0;

  Matrix corr(n, n), sqd(n, n);
  for (int i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    sqd(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(design.points[eff[i]], design.points[eff[j]]);
      sqd(i, j) = sqd(j, i) = d2;
      const double r = correlation_from_sqdist(d2, params.length_scale);
      corr(i, j) = corr(j, i) = r;
    }
  }
  const double ell = params.length_scale;
  double total = 0.0;
  for (int c = 0; c < m; ++c) {
    const double sc = params.output_scales[c];
    Matrix C = sc * corr;
    for (int i = 0; i < n; ++i)
      C(i, i) += design.tolerances[eff[i]] * design.tolerances[eff[i]] + jitter * sc;
    Eigen::LLT<Matrix> llt(C);
    if (llt.info() != Eigen::Success) return -kInf;
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = design.values[eff[i]][c] - prior_mean[c];
    const Vector a = llt.solve(y);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
    total += -0.5 * y.dot(a) - logdet - 0.5 * n * std::log(2.0 * M_PI);
    if (grad) {
      const Matrix Cinv = llt.solve(Matrix::Identity(n, n));
      // d C / d log(ell) = sc * (corr .* sqd) / ell^2
      Matrix dC_ell = sc * corr.cwiseProduct(sqd) / (ell * ell);
      // d C / d log(sc) = sc * (corr + jitter I)
      Matrix dC_sc = sc * corr;
      dC_sc.diagonal().array() += sc * jitter;
      const Matrix outer = a * a.transpose();
      (*grad)[0] += 0.5 * ((outer - Cinv).cwiseProduct(dC_ell)).sum();
      (*grad)[1 + c] += 0.5 * ((outer - Cinv).cwiseProduct(dC_sc)).sum();
    }
  }
  return total;
}

}  // namespace detail

inline double gp_log_evidence(const TrainingDesign& design, const KernelParams& params,
                              const Vector& prior_mean, double jitter = GpModel::kDefaultJitter) {
  return detail::evidence_and_gradient(design, params, prior_mean, jitter, nullptr);
}

/// Marginal-likelihood maximisation over (length_scale, output_scales) with
/// the length scale kept inside its box constraint. Projected gradient ascent
/// in log-parameters with a backtracking line search; monotone by
/// construction, so the returned evidence is never below the initial one.
inline TuneResult optimize_hyperparameters(const TrainingDesign& design, const KernelParams& init,
                                           const Vector& prior_mean, const TuneOptions& opt = {},
                                           double jitter = GpModel::kDefaultJitter) {
  const int m = init.output_dim();
  TuneResult result;
  result.params = init;
  result.params.length_scale =
      std::clamp(init.length_scale, opt.length_scale_min, opt.length_scale_max);

  if (design.effective_indices().empty()) {
    result.objective = 0.0;
    return result;
  }

  auto pack = [&](const KernelParams& p) {
    Vector th(1 + m);
    th[0] = std::log(p.length_scale);
    for (int c = 0; c < m; ++c) th[1 + c] = std::log(p.output_scales[c]);
    return th;
  };
  auto unpack = [&](Vector th) {
    th[0] = std::clamp(th[0], std::log(opt.length_scale_min), std::log(opt.length_scale_max));
    KernelParams p;
    p.length_scale = std::exp(th[0]);
    p.output_scales.resize(m);
    for (int c = 0; c < m; ++c) p.output_scales[c] = std::exp(std::clamp(th[1 + c], -40.0, 40.0));
    return p;
  };

  Vector theta = pack(result.params);
  Vector grad(1 + m);
  double value = detail::evidence_and_gradient(design, result.params, prior_mean, jitter, &grad);
  if (!std::isfinite(value)) {
    result.warning = true;
    result.params = init;
    result.objective = -kInf;
    return result;
  }
  const double init_value = value;
  double step = 0.1;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (grad.norm() < opt.grad_tol) break;
    bool moved = false;
    double trial_step = step;
    for (int bt = 0; bt < 30; ++bt) {
      const KernelParams cand = unpack(theta + trial_step * grad);
      Vector cand_grad(1 + m);
      const double cand_value =
          detail::evidence_and_gradient(design, cand, prior_mean, jitter, &cand_grad);
      if (std::isfinite(cand_value) &&
          cand_value >= value + opt.armijo * grad.dot(pack(cand) - theta)) {
        theta = pack(cand);
        value = cand_value;
        grad = cand_grad;
        step = trial_step * 1.5;
        moved = true;
        break;
      }
      trial_step *= 0.5;
    }
    result.iterations = it + 1;
    if (!moved) break;
  }

  result.params = unpack(theta);
  result.objective = value;
  if (!(value >= init_value)) {  // line search never accepts a decrease
    result.params = init;
    result.params.length_scale =
        std::clamp(init.length_scale, opt.length_scale_min, opt.length_scale_max);
    result.objective = init_value;
  }
  return result;
}

}  // namespace gptol
