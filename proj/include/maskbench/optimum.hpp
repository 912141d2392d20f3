#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "maskbench/cost.hpp"
#include "maskbench/error.hpp"
#include "maskbench/golden_section.hpp"
#include "maskbench/log.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/units.hpp"

namespace maskbench {

inline constexpr double kDefaultArgminTolerance = 1e-9;

// Minimizes the cost over real gains h in [0, 1] by golden-section search.
// The cost is convex there for alpha > 1/2; gains outside [0, 1] increase both
// distortion terms. Powers are normalized by their maximum first, which leaves
// the minimizer unchanged and keeps alpha-th powers in range.
inline double argmin_numeric(double sigma_x2, double sigma_v2, const CostParams& params,
                             double tol = kDefaultArgminTolerance) {
  params.validate();
  require(tol > 0.0, "argmin_numeric: tolerance must be positive");
  if (sigma_x2 == 0.0 && sigma_v2 == 0.0) {
    log::warn("argmin_numeric: degenerate bin (both powers zero), returning h = 1");
    return 1.0;
  }
  require(sigma_x2 > 0.0 && sigma_v2 > 0.0 && std::isfinite(sigma_x2) && std::isfinite(sigma_v2),
          "argmin_numeric: powers must be finite and positive");
  const double scale = std::max(sigma_x2, sigma_v2);
  const double sx = sigma_x2 / scale;
  const double sv = sigma_v2 / scale;
  auto objective = [&](double h) { return cost(h, sx, sv, params); };
  return optim::golden_section(objective, 0.0, 1.0, tol).x;
}

struct ComplexScanResult {
  std::complex<double> h;
  double cost = 0.0;
};

// Exhaustive polar-grid scan of the cost over complex gains |h| <= radius,
// with d_x = |h - 1|^2 sigma_x2 and d_v = |h|^2 sigma_v2. Phase 0 is on the grid.
inline ComplexScanResult scan_complex(double sigma_x2, double sigma_v2, const CostParams& params,
                                      double radius = 1.5, std::size_t radial_steps = 600,
                                      std::size_t phase_steps = 360) {
  params.validate();
  require(radial_steps > 0 && phase_steps > 0, "scan_complex: empty grid");
  ComplexScanResult best{{0.0, 0.0}, HUGE_VAL};
  for (std::size_t p = 0; p < phase_steps; ++p) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(phase_steps);
    for (std::size_t r = 0; r <= radial_steps; ++r) {
      const auto h = std::polar(radius * static_cast<double>(r) / static_cast<double>(radial_steps), phase);
      const DistortionPair d{std::norm(h - 1.0) * sigma_x2, std::norm(h) * sigma_v2};
      const double c = cost(d, params);
      if (c < best.cost) best = {h, c};
    }
  }
  return best;
}

struct VerificationGrid {
  std::vector<double> xi_db;
  std::vector<double> rho;
  std::vector<double> alpha;

  // xi in -30..30 dB step 3, rho in {0.1, 1, 10}, alpha in {0.6, 1, 2, 5, 20}.
  static VerificationGrid standard() {
    VerificationGrid g;
    for (int db = -30; db <= 30; db += 3) g.xi_db.push_back(db);
    g.rho = {0.1, 1.0, 10.0};
    g.alpha = {0.6, 1.0, 2.0, 5.0, 20.0};
    return g;
  }
};

struct VerificationRow {
  double xi_db = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double h_closed = 0.0;
  double h_numeric = 0.0;
  double abs_dev = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<VerificationRow> rows;
  double max_deviation = 0.0;
  std::size_t failures = 0;

  std::string to_csv() const {
    std::string out = "xi_db,rho,alpha,h_closed,h_numeric,abs_dev,pass\n";
    for (const auto& r : rows) {
      out += fmt::format("{:.9g},{:.9g},{:.9g},{:.12g},{:.12g},{:.6e},{}\n", r.xi_db, r.rho, r.alpha,
                         r.h_closed, r.h_numeric, r.abs_dev, r.pass ? 1 : 0);
    }
    return out;
  }
};

// Compares the closed-form conformable gain against the numeric minimizer of
// the cost at every (xi, rho, alpha) tuple. Failures are reported, not thrown.
inline VerificationReport verify_optimum(const VerificationGrid& grid, double tol) {
  VerificationReport report;
  for (double a : grid.alpha) {
    for (double r : grid.rho) {
      const CostParams params{r, a};
      const auto closed_rule = cm_from_cost(params);
      for (double db : grid.xi_db) {
        const double xi = db_to_linear(db);
        VerificationRow row;
        row.xi_db = db;
        row.rho = r;
        row.alpha = a;
        row.h_closed = gain(closed_rule, xi);
        row.h_numeric = argmin_numeric(xi, 1.0, params);
        row.abs_dev = std::abs(row.h_closed - row.h_numeric);
        row.pass = row.abs_dev < tol;
        report.max_deviation = std::max(report.max_deviation, row.abs_dev);
        if (!row.pass) ++report.failures;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace maskbench
