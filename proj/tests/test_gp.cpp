#include "gptol/gp.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using Catch::Approx;
using namespace gptol;

TEST_CASE("kernel at zero distance returns the output scales") {
  KernelParams params;
  params.length_scale = 0.1;
  params.output_scales = Vector(2);
  params.output_scales << 0.7, 1.3;
  Vector p(2);
  p << 0.3, 0.4;
  const Vector k = kernel_eval(params, p, p);
  CHECK(k[0] == 0.7);
  CHECK(k[1] == 1.3);
}

TEST_CASE("kernel decays to zero at large distance and is symmetric") {
  KernelParams params;
  params.length_scale = 0.15;
  params.output_scales = Vector::Ones(1);
  Vector p(1), q(1);
  p << 0.0;
  q << 50.0;
  CHECK(kernel_eval(params, p, q)[0] == Approx(0.0).margin(1e-300));
  q << 0.08;
  CHECK(kernel_eval(params, p, q)[0] == kernel_eval(params, q, p)[0]);
}

TEST_CASE("kernel at distance equal to the length scale") {
  // distance 0.15 at length scale 0.15 -> exp(-1/2)
  KernelParams params;
  params.length_scale = 0.15;
  params.output_scales = Vector::Ones(1);
  Vector p(1), q(1);
  p << 0.0;
  q << 0.15;
  CHECK(kernel_eval(params, p, q)[0] == Approx(0.60653065971263342).epsilon(1e-12));
}

namespace {

GpModel fit_from(const oracle::RandomDesign& d) {
  return GpModel::fit(oracle::to_training_design(d), d.params, d.prior_mean);
}

}  // namespace

TEST_CASE("empty design predicts the prior") {
  KernelParams params;
  params.length_scale = 0.1;
  params.output_scales = Vector(2);
  params.output_scales << 0.5, 2.0;
  Vector mu0(2);
  mu0 << -1.0, 3.0;
  const GpModel model = GpModel::fit(TrainingDesign{}, params, mu0);
  Vector mean, var;
  Vector p(1);
  p << 0.4;
  model.predict(p, mean, var);
  CHECK(mean[0] == -1.0);
  CHECK(mean[1] == 3.0);
  CHECK(var[0] == 0.5);
  CHECK(var[1] == 2.0);
}

TEST_CASE("near-exact tolerance interpolates the observation") {
  TrainingDesign design;
  Vector p(1);
  p << 0.4;
  design.add_point(p, 1e-8);
  Vector y(1);
  y << 0.37;
  design.set_value(0, y);
  KernelParams params;
  params.length_scale = 0.1;
  params.output_scales = Vector::Ones(1);
  const GpModel model = GpModel::fit(design, params, Vector::Zero(1));
  Vector mean, var;
  model.predict(p, mean, var);
  CHECK(mean[0] == Approx(0.37).margin(1e-6));
  CHECK(var[0] <= 1e-12 * params.output_scales[0] + 2e-10);
}

TEST_CASE("prediction far from all training points recovers the prior variance") {
  std::mt19937_64 rng(11);
  const auto d = oracle::random_design(rng, 4, 1, 1);
  const GpModel model = fit_from(d);
  Vector far(1);
  far << 1e3;
  const Vector var = model.predict_variance(far);
  CHECK(oracle::rel_err(var[0], d.params.output_scales[0]) < 1e-6);
}

TEST_CASE("stable predictor matches the literal precision-form formulas") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int dim = 1 + trial % 2;
    const auto d = oracle::random_design(rng, 6, dim, 1 + (trial % 2));
    const GpModel model = fit_from(d);
    Vector p(dim);
    for (int c = 0; c < dim; ++c) p[c] = unit(rng);
    Vector mean, var, mean_lit, var_lit;
    model.predict(p, mean, var);
    oracle::dense_gp_predict(d.points, d.taus, d.values, d.params, d.prior_mean, p,
                             GpModel::kDefaultJitter, mean_lit, var_lit);
    for (int c = 0; c < mean.size(); ++c) {
      CHECK(oracle::rel_err(mean[c], mean_lit[c], 1e-9) < 1e-8);
      CHECK(oracle::rel_err(var[c], var_lit[c], 1e-9) < 1e-8);
    }
  }
}

TEST_CASE("literal formula agreement with a nonzero prior mean") {
  std::mt19937_64 rng(321);
  auto d = oracle::random_design(rng, 5, 1, 2);
  d.prior_mean = Vector(2);
  d.prior_mean << 0.8, -0.4;
  const GpModel model = GpModel::fit(oracle::to_training_design(d), d.params, d.prior_mean);
  Vector p(1);
  p << 0.55;
  Vector mean, var, mean_lit, var_lit;
  model.predict(p, mean, var);
  oracle::dense_gp_predict(d.points, d.taus, d.values, d.params, d.prior_mean, p,
                           GpModel::kDefaultJitter, mean_lit, var_lit);
  for (int c = 0; c < 2; ++c) {
    CHECK(oracle::rel_err(mean[c], mean_lit[c], 1e-9) < 1e-8);
    CHECK(oracle::rel_err(var[c], var_lit[c], 1e-9) < 1e-8);
  }
}

TEST_CASE("prediction is deterministic") {
  std::mt19937_64 rng(7);
  const auto d = oracle::random_design(rng, 5, 2, 2);
  const GpModel model = fit_from(d);
  Vector p(2);
  p << 0.31, 0.62;
  Vector m1, v1, m2, v2;
  model.predict(p, m1, v1);
  model.predict(p, m2, v2);
  CHECK(std::memcmp(m1.data(), m2.data(), sizeof(double) * m1.size()) == 0);
  CHECK(std::memcmp(v1.data(), v2.data(), sizeof(double) * v1.size()) == 0);
}

TEST_CASE("adding a training point never increases predictive variance") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    auto d = oracle::random_design(rng, 5, 1, 1);
    const GpModel before = fit_from(d);
    Vector extra(1);
    extra << unit(rng);
    d.points.push_back(extra);
    d.taus.push_back(0.02 + 0.4 * unit(rng));
    Vector y(1);
    y << unit(rng);
    d.values.push_back(y);
    const GpModel after = fit_from(d);
    for (int k = 0; k < 12; ++k) {
      Vector p(1);
      p << unit(rng);
      CHECK(after.predict_variance(p)[0] <= before.predict_variance(p)[0] + 1e-10);
    }
  }
}

TEST_CASE("tightening any tolerance weakly decreases predictive variance") {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    auto d = oracle::random_design(rng, 5, 1, 1);
    const GpModel before = fit_from(d);
    const std::size_t which = trial % d.points.size();
    d.taus[which] *= 0.3;
    const GpModel after = fit_from(d);
    for (int k = 0; k < 12; ++k) {
      Vector p(1);
      p << unit(rng);
      CHECK(after.predict_variance(p)[0] <= before.predict_variance(p)[0] + 1e-10);
    }
  }
}

namespace {

/// Central finite difference of the bordered predictive variance w.r.t. the
/// hypothetical point's tolerance, via explicit refits.
Vector fd_variance_derivative(const oracle::RandomDesign& d, const Vector& p,
                              const Vector& p_cand, double tau_lin) {
  const double h = 1e-4 * tau_lin;
  auto variance_with = [&](double tau) {
    auto dd = d;
    dd.points.push_back(p_cand);
    dd.taus.push_back(tau);
    dd.values.push_back(Vector::Zero(d.params.output_dim()));  // variance ignores values
    return GpModel::fit(oracle::to_training_design(dd), dd.params, dd.prior_mean)
        .predict_variance(p);
  };
  return (variance_with(tau_lin + h) - variance_with(tau_lin - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("variance derivative vanishes for an uncorrelated candidate") {
  std::mt19937_64 rng(42);
  const auto d = oracle::random_design(rng, 4, 1, 2);
  const GpModel model = fit_from(d);
  Vector p(1), cand(1);
  p << 0.4;
  cand << 1e4;  // correlation numerically zero with everything
  const Vector der = model.variance_derivative(p, cand, 0.1);
  CHECK(der.norm() == Approx(0.0).margin(1e-250));
}

TEST_CASE("variance derivative matches finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto d = oracle::random_design(rng, 5, 1, 1);
    const GpModel model = fit_from(d);
    Vector p(1), cand(1);
    p << unit(rng);
    cand << unit(rng);
    const double tau_lin = 0.05 + 0.3 * unit(rng);
    const Vector analytic = model.variance_derivative(p, cand, tau_lin);
    const Vector fd = fd_variance_derivative(d, p, cand, tau_lin);
    for (int c = 0; c < analytic.size(); ++c) {
      CHECK(analytic[c] >= 0.0);
      // relative check with an absolute floor where the FD signal drowns
      CHECK(std::abs(analytic[c] - fd[c]) <= 1e-4 * std::max(std::abs(fd[c]), 1e-7));
    }
  }
}

TEST_CASE("variance derivative at a duplicated training point matches finite differences") {
  std::mt19937_64 rng(77);
  const auto d = oracle::random_design(rng, 4, 1, 1);
  const GpModel model = fit_from(d);
  Vector p(1);
  p << 0.45;
  const Vector cand = d.points[0];
  const double tau_lin = d.taus[0];
  const Vector analytic = model.variance_derivative(p, cand, tau_lin);
  const Vector fd = fd_variance_derivative(d, p, cand, tau_lin);
  CHECK(oracle::rel_err(analytic[0], fd[0], 1e-10) < 1e-4);
}

TEST_CASE("in-design tolerance gradient matches finite differences") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = oracle::random_design(rng, 5, 1, 1);
    const GpModel model = fit_from(d);
    Vector p(1);
    p << unit(rng);
    const Matrix grad = model.variance_tolerance_gradient(p);
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      const double h = 1e-4 * d.taus[i];
      auto lo = d, hi = d;
      lo.taus[i] -= h;
      hi.taus[i] += h;
      const double fd = (GpModel::fit(oracle::to_training_design(hi), d.params, d.prior_mean)
                             .predict_variance(p)[0] -
                         GpModel::fit(oracle::to_training_design(lo), d.params, d.prior_mean)
                             .predict_variance(p)[0]) /
                        (2.0 * h);
      CHECK(std::abs(grad(0, static_cast<int>(i)) - fd) <=
            1e-4 * std::max(std::abs(fd), 1e-7));
    }
  }
}

TEST_CASE("points with infinite tolerance are kept but excluded from regression") {
  TrainingDesign design;
  Vector a(1), b(1);
  a << 0.2;
  b << 0.8;
  design.add_point(a, 0.1);
  Vector y(1);
  y << 1.0;
  design.set_value(0, y);
  design.points.push_back(b);
  design.tolerances.push_back(kInf);
  design.values.emplace_back();
  design.spent_work.push_back(0.0);

  KernelParams params;
  params.length_scale = 0.1;
  params.output_scales = Vector::Ones(1);
  const GpModel model = GpModel::fit(design, params, Vector::Zero(1));
  CHECK(model.effective_size() == 1);
  CHECK(model.design().size() == 2);
  // prediction at b sees only the prior plus the far-away point a
  CHECK(model.predict_variance(b)[0] == Approx(1.0).epsilon(1e-6));
}
