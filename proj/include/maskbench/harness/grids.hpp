#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "maskbench/mask_params.hpp"
#include "maskbench/units.hpp"

namespace maskbench::harness {

// n log-spaced values with both endpoints exact.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  if (n > 0) v.front() = lo;
  if (n > 1) v.back() = hi;
  return v;
}

inline std::vector<double> cm_gamma_axis() {
  auto g = log_spaced(0.5, 1.0, 6);
  auto upper = log_spaced(1.25, 100.0, 6);
  g.insert(g.end(), upper.begin(), upper.end());
  return g;
}

inline std::vector<double> cm_mu_db_axis() {
  std::vector<double> v;
  for (int db = -60; db <= 60; db += 5) v.push_back(db);
  return v;
}

inline std::vector<double> pw_beta_axis() {
  auto b = log_spaced(0.2, 1.0, 6);
  auto upper = log_spaced(1.25, 40.0, 4);
  b.insert(b.end(), upper.begin(), upper.end());
  return b;
}

inline std::vector<double> pw_eta_db_axis() {
  std::vector<double> v;
  for (int i = 0; i <= 24; ++i) v.push_back(-35.0 + 2.5 * i);
  return v;
}

// 12 gammas x 25 mus = 300 masks, gamma-major order.
inline std::vector<MaskParams> grid_cm() {
  std::vector<MaskParams> grid;
  for (double g : cm_gamma_axis()) {
    for (double mu_db : cm_mu_db_axis()) grid.push_back(rule::Conformable{g, db_to_linear(mu_db)});
  }
  return grid;
}

// 10 betas x 25 etas = 250 masks, beta-major order.
inline std::vector<MaskParams> grid_pw() {
  std::vector<MaskParams> grid;
  for (double b : pw_beta_axis()) {
    for (double eta_db : pw_eta_db_axis()) grid.push_back(rule::ParametricWiener{b, db_to_linear(eta_db)});
  }
  return grid;
}

}  // namespace maskbench::harness
