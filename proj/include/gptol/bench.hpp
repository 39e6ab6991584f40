#pragma once

#include "gptol/kl.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace gptol {

struct KlRecord {
  std::string strategy;
  std::uint64_t seed = 0;
  int iteration = 0;
  double work = 0.0;
  double kl = 0.0;
};

inline void write_klcurve_csv(const std::filesystem::path& path,
                              const std::vector<KlRecord>& records) {
  std::ofstream os(path);
  require(os.good(), "write_klcurve_csv: cannot open " + path.string());
  os << "strategy,seed,iteration,work,kl\n";
  char buf[64];
  for (const auto& r : records) {
    os << r.strategy << "," << r.seed << "," << r.iteration;
    std::snprintf(buf, sizeof(buf), "%.17g", r.work);
    os << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", r.kl);
    os << "," << buf << "\n";
  }
}

inline std::vector<KlRecord> read_klcurve_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "read_klcurve_csv: cannot open " + path.string());
  std::vector<KlRecord> records;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> tok;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = line.find(',', pos);
      tok.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    require(tok.size() == 5, "read_klcurve_csv: malformed row");
    KlRecord r;
    r.strategy = tok[0];
    r.seed = std::stoull(tok[1]);
    r.iteration = std::stoi(tok[2]);
    r.work = std::stod(tok[3]);
    r.kl = std::stod(tok[4]);
    records.push_back(std::move(r));
  }
  return records;
}

struct BenchResult {
  std::vector<KlRecord> records;
  nlohmann::json summary;
};

/// Run every (strategy, seed) pair, score each iteration snapshot against the
/// true posterior, and emit chains, design snapshots, the KL curve and a
/// summary with per-strategy median final KL. Failed runs are recorded and do
/// not stop the remaining ones. Runs execute on a small worker pool; outputs
/// are ordered by (strategy, seed) so results do not depend on scheduling.
inline BenchResult run_benchmark(const ExperimentConfig& cfg,
                                 const std::vector<StrategyKind>& strategies,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::filesystem::path& out_dir,
                                 KlMethod method = KlMethod::Grid, int jobs = 1) {
  require(!strategies.empty(), "run_benchmark: no strategies");
  require(!seeds.empty(), "run_benchmark: no seeds");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "chains");
  fs::create_directories(out_dir / "designs");

  struct Task {
    StrategyKind strategy;
    std::uint64_t seed;
    std::vector<KlRecord> records;
    double final_kl = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  std::vector<Task> tasks;
  for (auto strategy : strategies)
    for (auto seed : seeds) tasks.push_back({strategy, seed, {}, 0.0, ""});

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      Task& task = tasks[t];
      try {
        const RunResult run = run_strategy(cfg, task.strategy, task.seed);
        const std::string tag =
            std::string(to_string(task.strategy)) + "_seed" + std::to_string(task.seed);
        {
          std::lock_guard<std::mutex> lock(io_mutex);
          write_chain_csv(out_dir / "chains" / (tag + ".csv"), run.chain);
          if (cfg.write_snapshots) {
            for (const auto& snap : run.snapshots) {
              char name[160];
              std::snprintf(name, sizeof(name), "%s_iter%02d.json", tag.c_str(),
                            snap.iteration);
              write_snapshot(out_dir / "designs" / name, snap);
            }
          }
        }
        for (const auto& snap : run.snapshots) {
          KlRecord r;
          r.strategy = to_string(task.strategy);
          r.seed = task.seed;
          r.iteration = snap.iteration;
          r.work = snap.cumulative_work;
          r.kl = true_posterior_kl(snap, cfg, method, task.seed);
          task.records.push_back(std::move(r));
        }
        if (!task.records.empty()) task.final_kl = task.records.back().kl;
      } catch (const std::exception& e) {
        task.error = e.what();
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchResult result;
  nlohmann::json summary;
  summary["strategies"] = nlohmann::json::array();
  for (auto strategy : strategies) {
    std::vector<double> finals;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& task : tasks) {
      if (task.strategy != strategy) continue;
      nlohmann::json jr;
      jr["seed"] = task.seed;
      if (!task.error.empty()) {
        jr["error"] = task.error;
      } else {
        jr["final_kl"] = task.final_kl;
        finals.push_back(task.final_kl);
      }
      runs.push_back(std::move(jr));
      for (const auto& r : task.records) result.records.push_back(r);
    }
    nlohmann::json js;
    js["name"] = to_string(strategy);
    js["runs"] = std::move(runs);
    if (!finals.empty()) js["median_final_kl"] = median(finals);
    summary["strategies"].push_back(std::move(js));
  }
  summary["kl_method"] = method == KlMethod::Grid ? "grid" : "mcmc";
  summary["model"] = cfg.model_key;
  summary["budget"] = cfg.schedule.total_budget;
  result.summary = std::move(summary);

  write_klcurve_csv(out_dir / "klcurve.csv", result.records);
  std::ofstream os(out_dir / "summary.json");
  require(os.good(), "run_benchmark: cannot write summary.json");
  os << result.summary.dump(2) << "\n";
  return result;
}

}  // namespace gptol
