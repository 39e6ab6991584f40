#pragma once

#include "gptol/common.hpp"

#include <filesystem>
#include <fstream>
#include <functional>

namespace gptol {

using LogDensity = std::function<double(const Vector&)>;

struct McmcOptions {
  double initial_step_fraction = 0.25;  // proposal std as fraction of box width
  bool adapt = true;                    // scale adaptation inside the burn-in window
  double burn_in_fraction = 0.2;        // adaptive prefix; samples are kept
  int adapt_window = 50;
  double adapt_factor = 1.35;
  double target_low = 0.15;             // acceptance band 0.25 +- 0.10
  double target_high = 0.35;
};

struct McmcResult {
  std::vector<Vector> samples;
  double acceptance_rate = 0.0;
  double final_step_fraction = 0.0;
  bool stuck = false;  // zero acceptances over the whole run
};

/// Gaussian random-walk Metropolis targeting exp(logdensity) restricted to
/// the box. Proposals leaving the box are rejected outright. The proposal
/// scale is a common multiple of the per-coordinate box widths, adapted only
/// during the initial burn-in window so the remainder of the chain uses a
/// fixed kernel. Returns exactly n states, one per step.
inline McmcResult mcmc_sample(const LogDensity& logdensity, int n, Vector init,
                              const PriorBox& domain, std::uint64_t seed,
                              const McmcOptions& opt = {}) {
  require(n >= 1, "mcmc_sample: n must be positive");
  require(domain.contains(init), "mcmc_sample: init outside the domain");
  double lp = logdensity(init);
  require(std::isfinite(lp), "mcmc_sample: logdensity(init) must be finite");

  auto rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int d = domain.dim();
  const Vector w = domain.widths();
  double frac = opt.initial_step_fraction;
  const int burn = opt.adapt ? static_cast<int>(opt.burn_in_fraction * n) : 0;

  McmcResult res;
  res.samples.reserve(n);
  Vector x = std::move(init);
  int accepted = 0, window_accepted = 0, window_count = 0;

  for (int t = 0; t < n; ++t) {
    Vector prop(d);
    for (int c = 0; c < d; ++c) prop[c] = x[c] + frac * w[c] * normal(rng);
    const double u = unit(rng);
    if (domain.contains(prop)) {
      const double lp_prop = logdensity(prop);
      if (std::isnan(lp_prop))
        throw NumericalError("mcmc_sample: logdensity returned NaN");
      if (std::log(u) < lp_prop - lp) {
        x = std::move(prop);
        lp = lp_prop;
        ++accepted;
        ++window_accepted;
      }
    }
    res.samples.push_back(x);
    if (t < burn) {
      if (++window_count == opt.adapt_window) {
        const double rate = static_cast<double>(window_accepted) / window_count;
        if (rate > opt.target_high) frac *= opt.adapt_factor;
        else if (rate < opt.target_low) frac /= opt.adapt_factor;
        window_accepted = 0;
        window_count = 0;
      }
    }
  }
  res.acceptance_rate = static_cast<double>(accepted) / n;
  res.final_step_fraction = frac;
  res.stuck = (accepted == 0);
  return res;
}

/// Posterior sample chain with append/remove bookkeeping. Oldest samples sit
/// at the front; updates are value-like and produce new chains.
struct SampleChain {
  std::vector<Vector> samples;
  std::vector<int> source_iteration;
  std::uint64_t rng_seed = 0;
  double step_fraction = 0.25;  // carried across updates as a warm start
  double last_acceptance_rate = 0.0;

  int size() const { return static_cast<int>(samples.size()); }
  bool empty() const { return samples.empty(); }
};

/// Remove the h oldest samples, then append n fresh Metropolis samples
/// started from the last retained state (box midpoint when empty). Removal is
/// clamped to the current length; h = length refreshes the chain entirely.
inline SampleChain update_chain(const SampleChain& chain, int n, int h,
                                const LogDensity& logdensity, const PriorBox& domain,
                                int iteration, std::uint64_t seed, const McmcOptions& opt = {}) {
  require(n >= 1, "update_chain: n must be positive");
  require(h >= 0, "update_chain: h must be nonnegative");
  require(h < n, "update_chain: must remove fewer samples than are drawn");

  SampleChain out;
  out.rng_seed = seed;
  const int drop = std::min(h, chain.size());
  out.samples.assign(chain.samples.begin() + drop, chain.samples.end());
  out.source_iteration.assign(chain.source_iteration.begin() + drop,
                              chain.source_iteration.end());

  Vector init = out.samples.empty() ? domain.midpoint() : out.samples.back();
  McmcOptions local = opt;
  local.initial_step_fraction = chain.step_fraction;
  McmcResult res = mcmc_sample(logdensity, n, std::move(init), domain, seed, local);
  for (auto& s : res.samples) {
    out.samples.push_back(std::move(s));
    out.source_iteration.push_back(iteration);
  }
  out.step_fraction = res.final_step_fraction;
  out.last_acceptance_rate = res.acceptance_rate;
  return out;
}

/// Uniform subset without replacement, deterministic given the seed; the
/// whole chain when size covers it.
inline std::vector<Vector> subsample(const SampleChain& chain, int size, std::uint64_t seed) {
  require(size >= 1, "subsample: size must be positive");
  require(!chain.empty(), "subsample: empty chain");
  const int n = chain.size();
  if (size >= n) return chain.samples;
  auto rng = make_engine(seed);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  // partial Fisher-Yates: the first `size` slots end up a uniform subset
  for (int i = 0; i < size; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<Vector> out(size);
  for (int i = 0; i < size; ++i) out[i] = chain.samples[idx[i]];
  return out;
}

inline void write_chain_csv(const std::filesystem::path& path, const SampleChain& chain) {
  std::ofstream os(path);
  require(os.good(), "write_chain_csv: cannot open " + path.string());
  const int d = chain.empty() ? 0 : static_cast<int>(chain.samples[0].size());
  os << "iteration_tag";
  for (int c = 1; c <= d; ++c) os << ",p_" << c;
  os << "\n";
  char buf[64];
  for (int i = 0; i < chain.size(); ++i) {
    os << chain.source_iteration[i];
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", chain.samples[i][c]);
      os << "," << buf;
    }
    os << "\n";
  }
}

inline SampleChain read_chain_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "read_chain_csv: cannot open " + path.string());
  SampleChain chain;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
      fields.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    require(fields.size() >= 2, "read_chain_csv: malformed row");
    chain.source_iteration.push_back(static_cast<int>(fields[0]));
    Vector p(static_cast<int>(fields.size()) - 1);
    for (int c = 0; c < p.size(); ++c) p[c] = fields[c + 1];
    chain.samples.push_back(std::move(p));
  }
  return chain;
}

}  // namespace gptol
