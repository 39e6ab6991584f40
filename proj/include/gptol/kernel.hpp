#pragma once

#include "gptol/common.hpp"

namespace gptol {

/// Hyperparameters of the separable Gaussian kernel with diagonal output
/// structure: a single correlation length scale shared by all outputs and one
/// signal variance per output component.
struct KernelParams {
  double length_scale = 0.1;
  Vector output_scales;  // signal variances, one per output

  int output_dim() const { return static_cast<int>(output_scales.size()); }

  void validate(double length_scale_max = 0.15) const {
    require(length_scale > 0.0 && length_scale <= length_scale_max,
            "KernelParams: length_scale outside (0, max]");
    require(output_scales.size() > 0, "KernelParams: no output scales");
    require((output_scales.array() > 0.0).all(), "KernelParams: output scales must be positive");
  }
};

inline double squared_distance(const Vector& p, const Vector& q) {
  return (p - q).squaredNorm();
}

inline double correlation_from_sqdist(double sq_dist, double length_scale) {
  return std::exp(-sq_dist / (2.0 * length_scale * length_scale));
}

inline double correlation(const Vector& p, const Vector& q, double length_scale) {
  return correlation_from_sqdist(squared_distance(p, q), length_scale);
}

/// Diagonal block of the matrix-valued kernel: component c equals
/// output_scales[c] * exp(-|p-q|^2 / (2 l^2)).
inline Vector kernel_eval(const KernelParams& params, const Vector& p, const Vector& q) {
  return params.output_scales * correlation(p, q, params.length_scale);
}

}  // namespace gptol
