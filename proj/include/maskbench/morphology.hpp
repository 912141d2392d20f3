#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "maskbench/error.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/nelder_mead.hpp"
#include "maskbench/parallel.hpp"
#include "maskbench/units.hpp"

namespace maskbench::morphology {

// Uniform SNR grid in dB: lo, lo + step, ..., up to hi inclusive.
struct DbGrid {
  double lo = -60.0;
  double hi = 60.0;
  double step = 0.001;

  void validate() const {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "curve range must satisfy lo < hi");
    require(std::isfinite(step) && step > 0.0, "curve step must be positive");
  }

  std::size_t size() const { return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1; }
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }

  friend bool operator==(const DbGrid&, const DbGrid&) = default;
};

// A suppression rule sampled over an SNR range. Defaults: -60..60 dB in
// 0.001 dB steps.
struct CurveSpec {
  MaskParams params = rule::Wiener{};
  DbGrid grid{};
};

namespace detail {

inline constexpr double kDbToNeper = std::numbers::ln10 / 10.0;

// SNR grid in both linear and natural-log form, shared by every curve
// evaluated on it.
struct Abscissa {
  DbGrid grid;
  std::vector<double> xi;
  std::vector<double> log_xi;

  explicit Abscissa(const DbGrid& g) : grid(g) {
    g.validate();
    const std::size_t n = g.size();
    xi.resize(n);
    log_xi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double db = g.at(i);
      xi[i] = db_to_linear(db);
      log_xi[i] = db * kDbToNeper;
    }
  }
};

inline double cm_gain_log(double gamma, double log_mu, double log_xi) {
  return maskbench::detail::logistic(gamma * (log_xi - log_mu));
}

// Curve sampling accepts any positive slope: fitted conformable curves may
// leave the cost-derived gamma >= 1/2 range.
inline void check_curve_params(const MaskParams& params) {
  if (const auto* cm = std::get_if<rule::Conformable>(&params)) {
    require(std::isfinite(cm->gamma) && cm->gamma > 0.0, "conformable curve: gamma must be > 0");
    require(std::isfinite(cm->mu) && cm->mu > 0.0, "conformable curve: mu must be > 0");
  } else {
    validate(params);
  }
}

inline std::vector<double> sample(const MaskParams& params, const Abscissa& x) {
  std::vector<double> g(x.xi.size());
  if (const auto* cm = std::get_if<rule::Conformable>(&params)) {
    const double log_mu = std::log(cm->mu);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = cm_gain_log(cm->gamma, log_mu, x.log_xi[i]);
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = gain(params, x.xi[i]);
  }
  return g;
}

// sqrt of the trapezoid integral of (a - b)^2 over the dB axis.
inline double rmse(const std::vector<double>& a, const std::vector<double>& b, double step) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double d0 = a.front() - b.front();
  const double d1 = a.back() - b.back();
  sum -= 0.5 * (d0 * d0 + d1 * d1);
  return std::sqrt(std::max(sum * step, 0.0));
}

}  // namespace detail

inline std::vector<double> sample_curve(const CurveSpec& spec) {
  detail::check_curve_params(spec.params);
  return detail::sample(spec.params, detail::Abscissa(spec.grid));
}

// Root of the integrated squared gain difference, integrated over SNR in dB
// by the trapezoid rule. Units: sqrt(dB).
inline double mask_rmse(const CurveSpec& a, const CurveSpec& b) {
  require(a.grid == b.grid, "mask_rmse: curves must share range and step");
  detail::check_curve_params(a.params);
  detail::check_curve_params(b.params);
  detail::Abscissa x(a.grid);
  return detail::rmse(detail::sample(a.params, x), detail::sample(b.params, x), a.grid.step);
}

inline double mask_rmse(const MaskParams& a, const MaskParams& b, const DbGrid& grid = {}) {
  return mask_rmse(CurveSpec{a, grid}, CurveSpec{b, grid});
}

struct CurvePoint {
  double xi_db = 0.0;
  double gain = 0.0;
};

inline std::vector<CurvePoint> curve_dump(const CurveSpec& spec, double coarse_step_db) {
  DbGrid g = spec.grid;
  g.step = coarse_step_db;
  g.validate();
  detail::check_curve_params(spec.params);
  std::vector<CurvePoint> rows;
  rows.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double db = g.at(i);
    rows.push_back({db, gain(spec.params, db_to_linear(db))});
  }
  return rows;
}

inline std::string curve_tsv(const std::vector<CurvePoint>& rows) {
  std::string out = "xi_db\tgain\n";
  for (const auto& r : rows) out += fmt::format("{:.9g}\t{:.12g}\n", r.xi_db, r.gain);
  return out;
}

// ---------------------------------------------------------------------------
// Cross-family fitting.

struct FitOptions {
  DbGrid grid{};              // grid on which the reported RMSE is computed
  double search_step_db = 0.01;  // coarser grid used for the multi-start search
  std::size_t max_iterations = 500;
  double diameter_tolerance = 1e-6;
  std::uint64_t seed = 20190101;
};

template <typename Rule>
struct FitResult {
  Rule params{};
  double rmse = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// Search coordinates are (log slope-parameter, threshold in dB).
using Coord = optim::Point<2>;

template <typename Rule, typename MakeRule>
FitResult<Rule> fit_family(const MaskParams& target, std::vector<Coord> starts, MakeRule make,
                           const FitOptions& opt) {
  DbGrid coarse = opt.grid;
  coarse.step = std::max(opt.search_step_db, opt.grid.step);
  const Abscissa coarse_x(coarse);
  const Abscissa fine_x(opt.grid);
  const auto coarse_target = sample(target, coarse_x);
  const auto fine_target = sample(target, fine_x);

  auto objective = [&](const Abscissa& x, const std::vector<double>& tgt) {
    return [&x, &tgt, &make](const Coord& z) {
      if (!std::isfinite(z[0]) || !std::isfinite(z[1]) || std::abs(z[0]) > 700.0) return HUGE_VAL;
      return rmse(sample(make(z), x), tgt, x.grid.step);
    };
  };

  optim::NelderMeadOptions<2> nm;
  nm.max_iterations = opt.max_iterations;
  nm.diameter_tolerance = opt.diameter_tolerance;
  nm.initial_step = {0.5, 5.0};

  optim::NelderMeadResult<2> best_coarse;
  best_coarse.value = HUGE_VAL;
  for (const auto& s : starts) {
    auto r = optim::nelder_mead<2>(objective(coarse_x, coarse_target), s, nm);
    if (r.value < best_coarse.value) best_coarse = r;
  }

  nm.initial_step = {0.05, 0.5};
  auto fine_objective = objective(fine_x, fine_target);
  auto polished = optim::nelder_mead<2>(fine_objective, best_coarse.x, nm);

  FitResult<Rule> out;
  Coord best = polished.x;
  double best_value = polished.value;
  out.converged = polished.converged && best_coarse.converged;
  out.iterations = best_coarse.iterations + polished.iterations;
  // Never report worse than any start point on the reporting grid.
  for (const auto& s : starts) {
    const double v = fine_objective(s);
    if (v < best_value) {
      best_value = v;
      best = s;
    }
  }
  out.params = std::get<Rule>(make(best));
  out.rmse = best_value;
  return out;
}

inline Coord random_start(std::uint64_t seed, double center_db) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_param(-1.5, 1.5);
  std::uniform_real_distribution<double> db_offset(-20.0, 20.0);
  const double a = log_param(rng);
  return {a, center_db + db_offset(rng)};
}

}  // namespace detail

// Fits a parametric Wiener rule to a conformable target by Nelder-Mead over
// (ln beta, eta_dB). Starts: the caller's init, the Wiener point (1, 0 dB),
// a half-gain/slope-matched guess and a seeded random point.
inline FitResult<rule::ParametricWiener> fit_pw_to_cm(const rule::Conformable& target,
                                                      rule::ParametricWiener init,
                                                      const FitOptions& opt = {}) {
  detail::check_curve_params(target);
  validate(init);
  const double mu_db = linear_to_db(target.mu);
  // PW reaches half gain at xi = eta / (2^(1/beta) - 1); match it to mu with beta = gamma.
  const double beta_guess = std::clamp(target.gamma, 1e-3, 1e3);
  const double eta_guess_db = mu_db + linear_to_db(std::exp2(1.0 / beta_guess) - 1.0);
  std::vector<detail::Coord> starts = {
      {std::log(init.beta), linear_to_db(init.eta)},
      {0.0, 0.0},
      {std::log(beta_guess), eta_guess_db},
      detail::random_start(opt.seed, mu_db),
  };
  auto make = [](const detail::Coord& z) -> MaskParams {
    return rule::ParametricWiener{std::exp(z[0]), db_to_linear(z[1])};
  };
  return detail::fit_family<rule::ParametricWiener>(target, std::move(starts), make, opt);
}

// Fits a conformable rule to a parametric Wiener target by Nelder-Mead over
// (ln gamma, mu_dB).
inline FitResult<rule::Conformable> fit_cm_to_pw(const rule::ParametricWiener& target,
                                                 rule::Conformable init, const FitOptions& opt = {}) {
  validate(target);
  detail::check_curve_params(init);
  // Match PW's half-gain point and its slope there (CM slope at the pivot is gamma*ln10/40).
  const double shape = std::exp2(1.0 / target.beta) - 1.0;
  const double half_db = linear_to_db(target.eta / shape);
  const double gamma_guess = 2.0 * target.beta * (1.0 - std::exp2(-1.0 / target.beta));
  std::vector<detail::Coord> starts = {
      {std::log(init.gamma), linear_to_db(init.mu)},
      {0.0, 0.0},
      {std::log(gamma_guess), half_db},
      detail::random_start(opt.seed, half_db),
  };
  // The fit is unconstrained; gamma may leave the cost-derived range (> 1/2).
  auto make = [](const detail::Coord& z) -> MaskParams {
    return rule::Conformable{std::exp(z[0]), db_to_linear(z[1])};
  };
  return detail::fit_family<rule::Conformable>(target, std::move(starts), make, opt);
}

}  // namespace maskbench::morphology
