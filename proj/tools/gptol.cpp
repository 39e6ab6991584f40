// Command-line harness: single runs, multi-strategy benchmarks, snapshot KL
// evaluation and the likelihood-comparison demo.

#include "gptol/bench.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace gptol;

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  // Either a count N (seeds 1..N) or an explicit comma-separated list.
  std::vector<std::uint64_t> seeds;
  if (spec.find(',') == std::string::npos) {
    const long n = std::stol(spec);
    require(n >= 1, "--seeds needs a positive count or a list");
    for (long i = 1; i <= n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
  }
  return seeds;
}

int cmd_run(const std::string& config_path, const std::string& strategy_name,
            std::uint64_t seed, const std::string& out_dir) {
  const ExperimentConfig cfg = load_config(config_path);
  const StrategyKind strategy = parse_strategy(strategy_name);
  const RunResult result = run_strategy(cfg, strategy, seed);

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "chains");
  fs::create_directories(fs::path(out_dir) / "designs");
  const std::string tag = result.strategy + "_seed" + std::to_string(seed);
  write_chain_csv(fs::path(out_dir) / "chains" / (tag + ".csv"), result.chain);
  if (cfg.write_snapshots) {
    for (const auto& snap : result.snapshots) {
      char name[160];
      std::snprintf(name, sizeof(name), "%s_iter%02d.json", tag.c_str(), snap.iteration);
      write_snapshot(fs::path(out_dir) / "designs" / name, snap);
    }
  }
  std::cout << "run " << tag << ": " << result.snapshots.size() << " snapshots, chain of "
            << result.chain.size() << " samples, evaluation work "
            << result.ledger.total << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& strategies_csv,
              const std::string& seeds_spec, const std::string& out_dir,
              const std::string& kl_method, int jobs) {
  const ExperimentConfig cfg = load_config(config_path);
  std::vector<StrategyKind> strategies;
  {
    std::stringstream ss(strategies_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) strategies.push_back(parse_strategy(tok));
  }
  const auto seeds = parse_seeds(seeds_spec);
  const BenchResult bench = run_benchmark(cfg, strategies, seeds, out_dir,
                                          parse_kl_method(kl_method), jobs);
  std::cout << bench.summary.dump(2) << "\n";
  return 0;
}

int cmd_kl(const std::string& config_path, const std::string& snapshot_path,
           const std::string& kl_method, std::uint64_t seed) {
  const ExperimentConfig cfg = load_config(config_path);
  const DesignSnapshot snap = read_snapshot(snapshot_path);
  const double kl = true_posterior_kl(snap, cfg, parse_kl_method(kl_method), seed);
  std::cout.precision(12);
  std::cout << "kl " << kl << "\n";
  return 0;
}

int cmd_demo(const std::string& out_dir, int nodes) {
  const LikelihoodDemo demo = demo_likelihoods(nodes);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "demo_likelihood.csv";
  std::ofstream os(path);
  require(os.good(), "cannot open " + path.string());
  os << "p,plugin_posterior_density,marginal_posterior_density\n";
  char buf[64];
  for (std::size_t i = 0; i < demo.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", demo.grid[i]);
    os << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", demo.plugin_density[i]);
    os << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", demo.marginal_density[i]);
    os << "," << buf << "\n";
  }
  std::cout << "demo: plugin entropy " << demo.plugin_entropy << ", marginal entropy "
            << demo.marginal_entropy << " -> " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-tolerance GP surrogate training for Bayesian inverse problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::string strategy = "adaptive_full";
  std::string strategies = "adaptive_full,adaptive_position_only,lhs";
  std::string seeds = "5";
  std::string kl_method = "grid";
  std::string snapshot_path;
  std::uint64_t seed = 1;
  int jobs = 1;
  int nodes = 2000;

  auto* run_cmd = app.add_subcommand("run", "run a single experiment");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--strategy", strategy, "adaptive_full|adaptive_position_only|lhs");
  run_cmd->add_option("--seed", seed, "run seed");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* bench_cmd = app.add_subcommand("bench", "multi-strategy, multi-seed benchmark");
  bench_cmd->add_option("--config", config_path, "config file")->required();
  bench_cmd->add_option("--strategies", strategies, "comma-separated strategy list");
  bench_cmd->add_option("--seeds", seeds, "seed count N (1..N) or comma-separated list");
  bench_cmd->add_option("--out", out_dir, "output directory");
  bench_cmd->add_option("--kl-method", kl_method, "grid|mcmc");
  bench_cmd->add_option("--jobs", jobs, "parallel runs");

  auto* kl_cmd = app.add_subcommand("kl", "evaluate the KL of a design snapshot");
  kl_cmd->add_option("--config", config_path, "config file")->required();
  kl_cmd->add_option("--snapshot", snapshot_path, "snapshot JSON")->required();
  kl_cmd->add_option("--kl-method", kl_method, "grid|mcmc");
  kl_cmd->add_option("--seed", seed, "seed for the mcmc estimator");

  auto* demo_cmd = app.add_subcommand("demo-likelihood",
                                      "plug-in vs marginal posterior densities for the 1D toy");
  demo_cmd->add_option("--out", out_dir, "output directory");
  demo_cmd->add_option("--nodes", nodes, "grid resolution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, strategy, seed, out_dir);
    if (bench_cmd->parsed()) return cmd_bench(config_path, strategies, seeds, out_dir,
                                              kl_method, jobs);
    if (kl_cmd->parsed()) return cmd_kl(config_path, snapshot_path, kl_method, seed);
    if (demo_cmd->parsed()) return cmd_demo(out_dir, nodes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
