#pragma once

#include "gptol/bayes.hpp"
#include "gptol/error_metrics.hpp"
#include "gptol/models.hpp"
#include "gptol/schedule.hpp"

#include <filesystem>
#include <fstream>
#include <map>

namespace gptol {

/// Minimal INI reader: [section] headers, key = value pairs, # or ; comments.
class IniFile {
 public:
  static IniFile parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is.good()) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path.string());
  }

  static IniFile parse(const std::string& text, const std::string& origin = "<string>") {
    IniFile ini;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      ini.values_[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? values_.at(key) : fallback;
  }
  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, values_.at(key)) : fallback;
  }
  long get_int(const std::string& key) const { return std::lround(get_double(key)); }
  long get_int(const std::string& key, long fallback) const {
    return has(key) ? std::lround(get_double(key)) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = values_.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + v);
  }
  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(get_string(key));
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_double(key, trim(tok)));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not numeric: " + v);
    }
  }

  std::map<std::string, std::string> values_;
};

/// Complete experiment definition: forward model, measurement, surrogate and
/// sampler settings, design-of-experiments knobs, schedule and output policy.
struct ExperimentConfig {
  // [problem]
  std::string model_key;
  ForwardModel model;
  Vector p_true;
  std::uint64_t measurement_seed = 0;
  Vector sigma_l;  // measurement noise variances
  PriorBox prior;

  // [gp]
  double length_scale_init = 0.1;
  double length_scale_min = 1e-3;
  double length_scale_max = 0.15;
  double output_scale_init = 0.1;
  double jitter = GpModel::kDefaultJitter;
  Vector prior_mean;
  int tune_max_iters = 100;

  // [mcmc]
  double proposal_fraction = 0.25;
  int subsample_size = 500;

  // [doe]
  ErrorVariant error_variant = ErrorVariant::AsPrinted;
  int candidate_starts_per_dim = 8;
  int tolerance_multistarts = 4;
  int descent_max_iters = 50;
  double exclusion_fraction = 1e-6;

  // [schedule]
  Schedule schedule;
  int initial_points = 0;
  double initial_tolerance = 0.2;
  double fixed_point_budget = 0.0;  // per-point work for the baselines

  // [output]
  bool write_snapshots = true;
  int kl_grid_nodes = 0;       // 0 -> dimension default (2000 / 200 per axis)
  int kl_mcmc_samples = 200000;

  double fixed_tolerance() const {
    return tolerance_of_work(fixed_point_budget, model.work_exponent);
  }

  int kl_nodes_per_dim() const {
    if (kl_grid_nodes > 0) return kl_grid_nodes;
    return model.input_dim == 1 ? 2000 : 200;
  }

  void validate() const {
    require(model.input_dim == prior.dim(), "config: prior dimension mismatch");
    require(sigma_l.size() == model.output_dim, "config: sigma_l dimension mismatch");
    require((sigma_l.array() > 0.0).all(), "config: sigma_l entries must be positive");
    require(p_true.size() == model.input_dim, "config: p_true dimension mismatch");
    require(prior.contains(p_true), "config: p_true outside the prior box");
    require(prior_mean.size() == model.output_dim, "config: prior mean dimension mismatch");
    require(initial_points >= 0, "config: negative initial design size");
    require(initial_tolerance > 0.0, "config: initial tolerance must be positive");
    require(fixed_point_budget > 0.0, "config: fixed per-point budget must be positive");
    require(subsample_size >= 1, "config: subsample size must be >= 1");
    schedule.validate();
  }
};

inline MeasurementModel make_measurement(const ExperimentConfig& cfg) {
  auto rng = make_engine(derive_seed(cfg.measurement_seed, 0x6d656173));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = cfg.model.exact(cfg.p_true);
  for (int c = 0; c < y.size(); ++c) y[c] += std::sqrt(cfg.sigma_l[c]) * normal(rng);
  MeasurementModel meas{std::move(y), cfg.sigma_l};
  meas.validate();
  return meas;
}

inline ExperimentConfig load_config(const IniFile& ini) {
  ExperimentConfig cfg;
  cfg.model_key = ini.get_string("problem.model");
  cfg.model = lookup_forward_model(cfg.model_key);

  const auto ptrue = ini.get_list("problem.p_true");
  cfg.p_true = Eigen::Map<const Vector>(ptrue.data(), static_cast<int>(ptrue.size()));
  cfg.measurement_seed = static_cast<std::uint64_t>(ini.get_int("problem.measurement_seed", 0));
  const auto sl = ini.get_list("problem.sigma_l");
  cfg.sigma_l = Eigen::Map<const Vector>(sl.data(), static_cast<int>(sl.size()));
  if (ini.has("problem.work_exponent"))
    cfg.model.work_exponent = ini.get_double("problem.work_exponent");
  if (ini.has("problem.prior_lower")) {
    const auto lo = ini.get_list("problem.prior_lower");
    const auto hi = ini.get_list("problem.prior_upper");
    cfg.prior = PriorBox(Eigen::Map<const Vector>(lo.data(), static_cast<int>(lo.size())),
                         Eigen::Map<const Vector>(hi.data(), static_cast<int>(hi.size())));
  } else {
    cfg.prior = cfg.model.domain;
  }

  cfg.length_scale_init = ini.get_double("gp.length_scale_init", 0.1);
  cfg.length_scale_min = ini.get_double("gp.length_scale_min", 1e-3);
  cfg.length_scale_max = ini.get_double("gp.length_scale_max", 0.15);
  cfg.output_scale_init = ini.get_double("gp.output_scale_init", 0.1);
  cfg.jitter = ini.get_double("gp.jitter", GpModel::kDefaultJitter);
  cfg.prior_mean = Vector::Constant(cfg.model.output_dim, ini.get_double("gp.prior_mean", 0.0));
  cfg.tune_max_iters = static_cast<int>(ini.get_int("gp.tune_max_iters", 100));

  cfg.proposal_fraction = ini.get_double("mcmc.proposal_fraction", 0.25);
  cfg.subsample_size = static_cast<int>(ini.get_int("mcmc.subsample_size", 500));

  const std::string variant = ini.get_string("doe.error_variant", "printed");
  if (variant == "printed") cfg.error_variant = ErrorVariant::AsPrinted;
  else if (variant == "derivation") cfg.error_variant = ErrorVariant::DerivationConsistent;
  else throw ConfigError("doe.error_variant must be 'printed' or 'derivation'");
  cfg.candidate_starts_per_dim = static_cast<int>(ini.get_int("doe.candidate_starts_per_dim", 8));
  cfg.tolerance_multistarts = static_cast<int>(ini.get_int("doe.tolerance_multistarts", 4));
  cfg.descent_max_iters = static_cast<int>(ini.get_int("doe.descent_max_iters", 50));
  cfg.exclusion_fraction = ini.get_double("doe.exclusion_fraction", 1e-6);

  cfg.schedule.n = parse_formula(ini.get_string("schedule.n"));
  cfg.schedule.h = parse_formula(ini.get_string("schedule.h"));
  cfg.schedule.c = parse_formula(ini.get_string("schedule.c"));
  cfg.schedule.dw = parse_formula(ini.get_string("schedule.dw"));
  cfg.schedule.max_iterations = static_cast<int>(ini.get_int("schedule.iterations"));
  cfg.schedule.total_budget = ini.get_double("schedule.budget");
  cfg.initial_points = static_cast<int>(ini.get_int("schedule.initial_points", 0));
  cfg.initial_tolerance = ini.get_double("schedule.initial_tolerance", 0.2);
  cfg.fixed_point_budget = ini.get_double("schedule.fixed_point_budget");

  cfg.write_snapshots = ini.get_bool("output.snapshots", true);
  cfg.kl_grid_nodes = static_cast<int>(ini.get_int("output.kl_grid_nodes", 0));
  cfg.kl_mcmc_samples = static_cast<int>(ini.get_int("output.kl_mcmc_samples", 200000));

  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return load_config(IniFile::parse_file(path));
}

}  // namespace gptol
