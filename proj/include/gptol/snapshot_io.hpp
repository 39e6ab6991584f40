#pragma once

#include "gptol/driver.hpp"

#include <json.hpp>

#include <fstream>

namespace gptol {

namespace detail {

inline nlohmann::json vec_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vec_from_json(const nlohmann::json& a) {
  Vector v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

inline nlohmann::json vecs_to_json(const std::vector<Vector>& vs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& v : vs) a.push_back(vec_to_json(v));
  return a;
}

inline std::vector<Vector> vecs_from_json(const nlohmann::json& a) {
  std::vector<Vector> out;
  for (const auto& e : a) out.push_back(vec_from_json(e));
  return out;
}

}  // namespace detail

inline nlohmann::json snapshot_to_json(const DesignSnapshot& snap) {
  nlohmann::json j;
  j["iteration"] = snap.iteration;
  j["cumulative_work"] = snap.cumulative_work;
  j["points"] = detail::vecs_to_json(snap.design.points);
  // +inf is not representable in JSON; excluded points never reach snapshots,
  // but guard with a large sentinel string if one ever does.
  nlohmann::json tols = nlohmann::json::array();
  for (double t : snap.design.tolerances)
    tols.push_back(std::isfinite(t) ? nlohmann::json(t) : nlohmann::json("inf"));
  j["tolerances"] = tols;
  j["values"] = detail::vecs_to_json(snap.design.values);
  j["work_spent"] = snap.design.spent_work;
  j["hyperparameters"] = {
      {"length_scale", snap.params.length_scale},
      {"output_scales", detail::vec_to_json(snap.params.output_scales)}};
  j["probes"] = {{"points", detail::vecs_to_json(snap.probe_points)},
                 {"mean", detail::vecs_to_json(snap.probe_mean)},
                 {"variance", detail::vecs_to_json(snap.probe_variance)}};
  return j;
}

inline DesignSnapshot snapshot_from_json(const nlohmann::json& j) {
  DesignSnapshot snap;
  snap.iteration = j.at("iteration").get<int>();
  snap.cumulative_work = j.at("cumulative_work").get<double>();
  snap.design.points = detail::vecs_from_json(j.at("points"));
  for (const auto& t : j.at("tolerances"))
    snap.design.tolerances.push_back(t.is_string() ? kInf : t.get<double>());
  snap.design.values = detail::vecs_from_json(j.at("values"));
  snap.design.spent_work = j.at("work_spent").get<std::vector<double>>();
  snap.params.length_scale = j.at("hyperparameters").at("length_scale").get<double>();
  snap.params.output_scales =
      detail::vec_from_json(j.at("hyperparameters").at("output_scales"));
  snap.probe_points = detail::vecs_from_json(j.at("probes").at("points"));
  snap.probe_mean = detail::vecs_from_json(j.at("probes").at("mean"));
  snap.probe_variance = detail::vecs_from_json(j.at("probes").at("variance"));
  return snap;
}

inline void write_snapshot(const std::filesystem::path& path, const DesignSnapshot& snap) {
  std::ofstream os(path);
  require(os.good(), "write_snapshot: cannot open " + path.string());
  os << snapshot_to_json(snap).dump(2) << "\n";
}

inline DesignSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "read_snapshot: cannot open " + path.string());
  nlohmann::json j;
  is >> j;
  return snapshot_from_json(j);
}

/// Refit the surrogate stored in a snapshot (deterministic given the stored
/// design and hyperparameters).
inline GpModel model_from_snapshot(const DesignSnapshot& snap, const ExperimentConfig& cfg) {
  return GpModel::fit(snap.design, snap.params, cfg.prior_mean, cfg.jitter);
}

}  // namespace gptol
