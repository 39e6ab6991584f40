#include "gptol/driver.hpp"

#include "gptol/snapshot_io.hpp"

#include <catch2/catch_amalgamated.hpp>

using Catch::Approx;
using namespace gptol;

namespace {

/// Small, fast 1D configuration exercising the full loop.
ExperimentConfig small_config(int iterations = 3, double budget = 120.0) {
  std::string text = R"(
[problem]
model = analytic1d
p_true = 0.7
measurement_seed = 42
sigma_l = 1.7777777777777777e-4, 4.444444444444444e-5

[gp]
length_scale_init = 0.1
output_scale_init = 0.1
tune_max_iters = 40

[mcmc]
subsample_size = 200

[schedule]
iterations = )" + std::to_string(iterations) +
                     R"(
budget = )" + std::to_string(budget) +
                     R"(
n = constant(160)
h = constant(60)
c = constant(2)
dw = constant(40)
initial_points = 3
initial_tolerance = 0.2
fixed_point_budget = 20
)";
  return load_config(IniFile::parse(text));
}

}  // namespace

TEST_CASE("initial design evaluates and charges the ledger") {
  const ExperimentConfig cfg = small_config();
  WorkLedger ledger;
  const TrainingDesign d0 = initial_design(cfg, ledger, 1);
  REQUIRE(d0.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(d0.tolerances[i] == 0.2);
    CHECK(d0.has_value(i));
    CHECK(cfg.prior.contains(d0.points[i]));
  }
  CHECK(ledger.total == Approx(3.0 * 5.0));  // W(0.2) = 5 at l/r = 1

  ExperimentConfig none = cfg;
  none.initial_points = 0;
  WorkLedger empty_ledger;
  CHECK(initial_design(none, empty_ledger, 1).empty());
  CHECK(empty_ledger.total == 0.0);
}

TEST_CASE("the paper's 1D configuration runs exactly 12 iterations") {
  ExperimentConfig cfg = small_config(12, 500.0);
  cfg.schedule.n = parse_formula("power(40, 160, 2)");  // scaled-down sampling
  cfg.schedule.h = parse_formula("power(20, 60, 2)");
  cfg.subsample_size = 100;
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 3);
  // snapshot 0 is the initial design; then one per iteration
  CHECK(res.snapshots.size() == 13);
  CHECK(res.snapshots.back().iteration == 12);
  // budget accumulator: D0 (15) + 12 x 40
  CHECK(res.snapshots.back().cumulative_work == Approx(15.0 + 480.0));
}

TEST_CASE("zero budget skips training and still draws the final round") {
  ExperimentConfig cfg = small_config(3, 0.0);
  // schedule sum must not exceed budget by more than one step: shrink it
  cfg.schedule.dw = parse_formula("constant(40)");
  cfg.schedule.max_iterations = 1;
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 5);
  CHECK(res.snapshots.size() == 1);  // initial design only
  CHECK(res.chain.size() == cfg.schedule.n_of(1));
  CHECK(res.ledger.total == Approx(15.0));  // D0 evaluations only
}

TEST_CASE("same config and seed reproduce the run bitwise") {
  const ExperimentConfig cfg = small_config();
  const RunResult a = run(cfg, StrategyKind::AdaptiveFull, 11);
  const RunResult b = run(cfg, StrategyKind::AdaptiveFull, 11);
  REQUIRE(a.chain.size() == b.chain.size());
  CHECK(a.chain.samples == b.chain.samples);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].design.points == b.snapshots[i].design.points);
    CHECK(a.snapshots[i].design.tolerances == b.snapshots[i].design.tolerances);
    CHECK(a.snapshots[i].design.values == b.snapshots[i].design.values);
    CHECK(a.snapshots[i].params.length_scale == b.snapshots[i].params.length_scale);
  }
}

TEST_CASE("designs refine monotonically along the run") {
  const ExperimentConfig cfg = small_config(4, 160.0);
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 7);
  for (std::size_t i = 1; i < res.snapshots.size(); ++i) {
    CHECK(res.snapshots[i].design.refines(res.snapshots[i - 1].design));
  }
  // ledger total equals the summed per-point work in the final design
  double total = 0.0;
  for (double w : res.snapshots.back().design.spent_work) total += w;
  CHECK(res.ledger.total == Approx(total));
}

TEST_CASE("budget accounting brackets the exit when the budget binds") {
  // make the iteration cap irrelevant so the loop exits on budget
  ExperimentConfig cfg = small_config(3, 120.0);
  cfg.schedule.max_iterations = 3;  // sum dw = 120 <= budget + one step
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 13);
  const double final_work = res.snapshots.back().cumulative_work;
  CHECK(final_work >= cfg.schedule.total_budget);
  CHECK(final_work <= cfg.schedule.total_budget + 40.0 + 15.0);
}

TEST_CASE("chain bookkeeping matches the schedule") {
  const ExperimentConfig cfg = small_config();
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 17);
  // 3 iterations of n=160, h=60 (h_1 = 0), plus a final n=160 round
  const int expected = 160 + (160 - 60) + (160 - 60) + 160;
  CHECK(res.chain.size() == expected);
  for (const auto& s : res.chain.samples) CHECK(cfg.prior.contains(s));
}

TEST_CASE("position-only strategy assigns the fixed tolerance to every candidate") {
  const ExperimentConfig cfg = small_config();
  const RunResult res = run(cfg, StrategyKind::AdaptivePositionOnly, 19);
  const auto& final_design = res.snapshots.back().design;
  for (int i = cfg.initial_points; i < final_design.size(); ++i)
    CHECK(final_design.tolerances[i] == Approx(cfg.fixed_tolerance()));
  // initial points are never refined by this strategy
  for (int i = 0; i < cfg.initial_points; ++i)
    CHECK(final_design.tolerances[i] == Approx(cfg.initial_tolerance));
}

TEST_CASE("lhs strategy sizes the hypercube from the points budget") {
  const ExperimentConfig cfg = small_config();  // 3 x 40 = 120 -> 6 points at W=20
  const RunResult res = run_lhs(cfg, 23);
  REQUIRE(!res.snapshots.empty());
  const auto& final_design = res.snapshots.back().design;
  CHECK(final_design.size() == 6);
  for (int i = 0; i < final_design.size(); ++i)
    CHECK(final_design.tolerances[i] == Approx(cfg.fixed_tolerance()));
  CHECK(res.snapshots.back().cumulative_work == Approx(120.0));
  CHECK(res.chain.size() == cfg.schedule.n_of(cfg.schedule.max_iterations + 1));
}

TEST_CASE("snapshot json round trip and refit consistency") {
  const ExperimentConfig cfg = small_config();
  const RunResult res = run(cfg, StrategyKind::AdaptiveFull, 29);
  const auto path = std::filesystem::temp_directory_path() / "gptol_snapshot_test.json";
  for (const auto& snap : res.snapshots) {
    write_snapshot(path, snap);
    const DesignSnapshot back = read_snapshot(path);
    CHECK(back.iteration == snap.iteration);
    CHECK(back.cumulative_work == snap.cumulative_work);
    CHECK(back.design.points == snap.design.points);
    CHECK(back.design.values == snap.design.values);
    const GpModel refit = model_from_snapshot(back, cfg);
    for (std::size_t k = 0; k < back.probe_points.size(); ++k) {
      Vector mean, var;
      refit.predict(back.probe_points[k], mean, var);
      CHECK((mean - back.probe_mean[k]).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((var - back.probe_variance[k]).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("work parity across strategies at the final checkpoint") {
  const ExperimentConfig cfg = small_config();
  const double budget = cfg.schedule.total_budget;
  const double dw = cfg.schedule.dw_of(1);
  for (auto strategy : {StrategyKind::AdaptiveFull, StrategyKind::AdaptivePositionOnly,
                        StrategyKind::Lhs}) {
    const RunResult res = run_strategy(cfg, strategy, 31);
    const double final_work = res.snapshots.back().cumulative_work;
    CHECK(std::abs(final_work - budget) <= dw + 15.0 + 1e-9);
  }
}

TEST_CASE("strategy names parse and print consistently") {
  for (auto s : {StrategyKind::AdaptiveFull, StrategyKind::AdaptivePositionOnly,
                 StrategyKind::Lhs})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("bogus"), ConfigError);
}
