#pragma once

#include "gptol/common.hpp"

#include <sstream>

namespace gptol {

/// Per-iteration schedule quantity built from one of four families:
///   constant(v)          -> v
///   poly(a,b,c)          -> a + b j + c j^2, rounded to nearest for counts
///   poly_floor(a,b,c)    -> a + floor(b j + c j^2)
///   power(a,b,e)         -> a + b (j/J)^e, rounded to nearest for counts
struct ScheduleFormula {
  enum class Kind { Constant, Poly, PolyFloor, Power };

  Kind kind = Kind::Constant;
  double a = 0.0, b = 0.0, c = 0.0;

  // Exact power for small integral exponents so that formulas like
  // a + b (j/J)^2 hit their half-integer values exactly before rounding.
  static double exact_pow(double base, double e) {
    if (e >= 0.0 && e <= 8.0 && e == std::floor(e)) {
      double out = 1.0;
      for (int k = 0; k < static_cast<int>(e); ++k) out *= base;
      return out;
    }
    return std::pow(base, e);
  }

  double eval_real(int j, int max_iterations) const {
    switch (kind) {
      case Kind::Constant: return a;
      case Kind::Poly: return a + b * j + c * static_cast<double>(j) * j;
      case Kind::PolyFloor:
        return a + std::floor(b * j + c * static_cast<double>(j) * j);
      case Kind::Power:
        return a + b * exact_pow(static_cast<double>(j), c) /
                       exact_pow(static_cast<double>(max_iterations), c);
    }
    return 0.0;
  }

  long eval_count(int j, int max_iterations) const {
    const double v = eval_real(j, max_iterations);
    return kind == Kind::PolyFloor ? static_cast<long>(v) : std::lround(v);
  }
};

inline ScheduleFormula parse_formula(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("schedule formula must look like name(args): '" + text + "'");
  std::string name = text.substr(0, open);
  name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
  std::vector<double> args;
  std::stringstream ss(text.substr(open + 1, close - open - 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      args.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric argument in schedule formula '" + text + "'");
    }
  }
  ScheduleFormula f;
  auto want = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError("schedule formula '" + name + "' expects " + std::to_string(n) +
                        " arguments");
  };
  if (name == "constant") {
    want(1);
    f.kind = ScheduleFormula::Kind::Constant;
    f.a = args[0];
  } else if (name == "poly") {
    want(3);
    f.kind = ScheduleFormula::Kind::Poly;
    f.a = args[0]; f.b = args[1]; f.c = args[2];
  } else if (name == "poly_floor") {
    want(3);
    f.kind = ScheduleFormula::Kind::PolyFloor;
    f.a = args[0]; f.b = args[1]; f.c = args[2];
  } else if (name == "power") {
    want(3);
    f.kind = ScheduleFormula::Kind::Power;
    f.a = args[0]; f.b = args[1]; f.c = args[2];
  } else {
    throw ConfigError("unknown schedule family '" + name +
                      "' (known: constant, poly, poly_floor, power)");
  }
  return f;
}

/// Iteration schedule of the interleaved driver: sample counts, removals,
/// candidate counts and per-iteration budgets, evaluated from formula
/// families. The removal count of the first iteration is pinned to zero
/// because the chain starts empty.
struct Schedule {
  ScheduleFormula n, h, c, dw;
  int max_iterations = 0;
  double total_budget = 0.0;

  int n_of(int j) const { return static_cast<int>(n.eval_count(j, max_iterations)); }
  int h_of(int j) const {
    return j <= 1 ? 0 : static_cast<int>(h.eval_count(j, max_iterations));
  }
  int c_of(int j) const { return static_cast<int>(c.eval_count(j, max_iterations)); }
  double dw_of(int j) const { return dw.eval_real(j, max_iterations); }

  void validate() const {
    if (max_iterations < 1) throw ConfigError("schedule: max_iterations must be >= 1");
    if (!(total_budget >= 0.0)) throw ConfigError("schedule: budget must be nonnegative");
    double dw_sum = 0.0;
    for (int j = 1; j <= max_iterations + 1; ++j) {
      if (n_of(j) < 1) throw ConfigError("schedule: n_j must be >= 1");
      if (h_of(j) >= n_of(j))
        throw ConfigError("schedule: h_j must be smaller than n_j (iteration " +
                          std::to_string(j) + ")");
      if (j <= max_iterations) {
        if (!(dw_of(j) > 0.0)) throw ConfigError("schedule: iteration budgets must be positive");
        if (c_of(j) < 1)
          throw ConfigError("schedule: candidate count must be >= 1 (iteration " +
                            std::to_string(j) + ")");
        dw_sum += dw_of(j);
      }
    }
    if (dw_sum > total_budget + dw_of(max_iterations) + 1e-9)
      throw ConfigError("schedule: iteration budgets exceed the total budget by more than one step");
  }
};

}  // namespace gptol
