#pragma once

#include "gptol/common.hpp"

namespace gptol {

/// Training design: evaluation points with per-point tolerances, observed
/// values and the work spent on each point. A tolerance of +inf marks a point
/// that has not been evaluated yet; such points carry no value and do not
/// enter the regression.
struct TrainingDesign {
  std::vector<Vector> points;
  std::vector<double> tolerances;   // noise standard deviations, +inf allowed
  std::vector<Vector> values;       // size-0 vector while unevaluated
  std::vector<double> spent_work;

  int size() const { return static_cast<int>(points.size()); }
  bool empty() const { return points.empty(); }

  bool has_value(int i) const { return values[i].size() > 0; }

  void add_point(Vector p, double tolerance) {
    require(tolerance > 0.0, "TrainingDesign: tolerance must be positive");
    points.push_back(std::move(p));
    tolerances.push_back(tolerance);
    values.emplace_back();
    spent_work.push_back(0.0);
  }

  void set_value(int i, Vector value) {
    require(i >= 0 && i < size(), "TrainingDesign: index out of range");
    values[i] = std::move(value);
  }

  /// Indices of points that take part in the regression (finite tolerance).
  std::vector<int> effective_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < size(); ++i)
      if (std::isfinite(tolerances[i])) idx.push_back(i);
    return idx;
  }

  /// Refinement partial order: this design refines `coarser` iff it contains
  /// all of coarser's points as a prefix (same coordinates) with pointwise
  /// lesser-or-equal tolerances.
  bool refines(const TrainingDesign& coarser) const {
    if (size() < coarser.size()) return false;
    for (int i = 0; i < coarser.size(); ++i) {
      if (points[i].size() != coarser.points[i].size()) return false;
      if (points[i] != coarser.points[i]) return false;
      if (!(tolerances[i] <= coarser.tolerances[i])) return false;
    }
    return true;
  }

  void check_consistent(const PriorBox& domain) const {
    const std::size_t s = points.size();
    require(tolerances.size() == s && values.size() == s && spent_work.size() == s,
            "TrainingDesign: ragged field lengths");
    for (std::size_t i = 0; i < s; ++i) {
      require(domain.contains(points[i]), "TrainingDesign: point outside domain");
      require(tolerances[i] > 0.0, "TrainingDesign: nonpositive tolerance");
      require(std::isfinite(tolerances[i]) == (values[i].size() > 0),
              "TrainingDesign: value present iff tolerance finite");
      require(spent_work[i] >= 0.0, "TrainingDesign: negative spent work");
    }
  }
};

}  // namespace gptol
