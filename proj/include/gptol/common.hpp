#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gptol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid user-facing configuration (bad schedule, inconsistent dimensions, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (failed factorization, singular system, non-finite objective).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Axis-aligned box that doubles as the support of a uniform prior.
class PriorBox {
 public:
  PriorBox() = default;
  PriorBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require(lower_.size() == upper_.size(), "PriorBox: dimension mismatch");
    require(lower_.size() > 0, "PriorBox: empty bounds");
    for (int i = 0; i < lower_.size(); ++i)
      require(lower_[i] < upper_[i], "PriorBox: lower must be strictly below upper");
  }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& p) const {
    if (p.size() != lower_.size()) return false;
    for (int i = 0; i < p.size(); ++i)
      if (!(p[i] >= lower_[i] && p[i] <= upper_[i])) return false;
    return true;
  }

  Vector widths() const { return upper_ - lower_; }
  Vector midpoint() const { return 0.5 * (lower_ + upper_); }
  double volume() const { return widths().prod(); }
  double diameter() const { return widths().norm(); }

  Vector clamp(Vector p) const {
    for (int i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lower_[i], upper_[i]);
    return p;
  }

  /// Log of the uniform prior density: -log(vol) inside, -inf outside.
  double log_prior(const Vector& p) const {
    return contains(p) ? -std::log(volume()) : -kInf;
  }

 private:
  Vector lower_, upper_;
};

// ---------------------------------------------------------------------------
// Seeding. All stochastic components consume explicit 64-bit seeds; substreams
// are derived with splitmix64 so that runs are reproducible bit for bit.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

// ---------------------------------------------------------------------------
// Small numeric helpers.
// ---------------------------------------------------------------------------

inline double logsumexp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double median(std::vector<double> v) {
  require(!v.empty(), "median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Latin hypercube sample of n points: per dimension a random permutation of
/// strata, one uniform draw inside each stratum.
inline std::vector<Vector> latin_hypercube(int n, const PriorBox& box, std::uint64_t seed) {
  require(n >= 1, "latin_hypercube: n must be positive");
  auto rng = make_engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = box.dim();
  std::vector<std::vector<int>> perm(d, std::vector<int>(n));
  for (int c = 0; c < d; ++c) {
    for (int i = 0; i < n; ++i) perm[c][i] = i;
    std::shuffle(perm[c].begin(), perm[c].end(), rng);
  }
  std::vector<Vector> pts(n, Vector(d));
  const Vector lo = box.lower(), w = box.widths();
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      pts[i][c] = lo[c] + w[c] * (perm[c][i] + unit(rng)) / n;
  return pts;
}

}  // namespace gptol
