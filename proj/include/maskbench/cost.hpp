#pragma once

#include <cmath>

#include "maskbench/error.hpp"

namespace maskbench {

// Weights of the distortion-tradeoff cost J = d_x^alpha + rho * d_v^alpha.
// rho trades residual noise against speech distortion; alpha sets steepness.
// J is convex in the gain for alpha > 1/2.
struct CostParams {
  double rho = 1.0;
  double alpha = 1.0;

  void validate() const {
    require(std::isfinite(rho) && rho > 0.0, "cost rho must be finite and > 0");
    require(std::isfinite(alpha) && alpha > 0.5, "cost not convex: alpha must be > 1/2");
  }
};

// Expected powers of the speech-distortion and residual-noise error terms.
struct DistortionPair {
  double d_x = 0.0;
  double d_v = 0.0;
};

inline DistortionPair distortions(double h, double sigma_x2, double sigma_v2) {
  require(sigma_x2 >= 0.0 && sigma_v2 >= 0.0, "distortions: powers must be non-negative");
  return {(h - 1.0) * (h - 1.0) * sigma_x2, h * h * sigma_v2};
}

inline double cost(const DistortionPair& d, const CostParams& params) {
  return std::pow(d.d_x, params.alpha) + params.rho * std::pow(d.d_v, params.alpha);
}

inline double cost(double h, double sigma_x2, double sigma_v2, const CostParams& params) {
  return cost(distortions(h, sigma_x2, sigma_v2), params);
}

}  // namespace maskbench
