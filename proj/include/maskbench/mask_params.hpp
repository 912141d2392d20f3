#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "maskbench/cost.hpp"
#include "maskbench/error.hpp"
#include "maskbench/units.hpp"

namespace maskbench {

// Suppression rules. All ratio-valued parameters are linear power ratios.
namespace rule {

// Hard mask: 1 where xi >= mu0, else 0.
struct Binary {
  double mu0 = 1.0;
};

// xi / (xi + 1)
struct Wiener {};

// sqrt(xi / (xi + 1))
struct ConstrainedWiener {};

// (xi / (xi + eta))^beta
struct ParametricWiener {
  double beta = 1.0;
  double eta = 1.0;
};

// xi^gamma / (xi^gamma + mu^gamma). mu sets the half-gain threshold, gamma the
// slope; gamma = 1/2 is accepted as an inclusive boundary.
struct Conformable {
  double gamma = 1.0;
  double mu = 1.0;
};

}  // namespace rule

using MaskParams = std::variant<rule::Binary, rule::Wiener, rule::ConstrainedWiener,
                                rule::ParametricWiener, rule::Conformable>;

inline bool is_hard(const MaskParams& p) { return std::holds_alternative<rule::Binary>(p); }

inline void validate(const MaskParams& params) {
  struct Visitor {
    void operator()(const rule::Binary& b) const {
      require(std::isfinite(b.mu0) && b.mu0 >= 0.0, "binary mask: mu0 must be finite and >= 0");
    }
    void operator()(const rule::Wiener&) const {}
    void operator()(const rule::ConstrainedWiener&) const {}
    void operator()(const rule::ParametricWiener& p) const {
      require(std::isfinite(p.beta) && p.beta > 0.0, "parametric Wiener: beta must be finite and > 0");
      require(std::isfinite(p.eta) && p.eta > 0.0, "parametric Wiener: eta must be finite and > 0");
    }
    void operator()(const rule::Conformable& c) const {
      require(std::isfinite(c.gamma) && c.gamma >= 0.5, "conformable mask: gamma must be finite and >= 1/2");
      require(std::isfinite(c.mu) && c.mu > 0.0, "conformable mask: mu must be finite and > 0");
    }
  };
  std::visit(Visitor{}, params);
}

namespace detail {

inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

// Scalar suppression gain for an a-priori SNR xi >= 0.
inline double gain(const rule::Binary& p, double xi) { return xi >= p.mu0 ? 1.0 : 0.0; }
inline double gain(const rule::Wiener&, double xi) { return xi / (xi + 1.0); }
inline double gain(const rule::ConstrainedWiener&, double xi) { return std::sqrt(xi / (xi + 1.0)); }

inline double gain(const rule::ParametricWiener& p, double xi) {
  if (p.beta == 1.0) return xi / (xi + p.eta);
  if (xi <= 0.0) return 0.0;
  // log1p form keeps 1 - gain accurate when eta << xi and beta is large
  return std::exp(-p.beta * std::log1p(p.eta / xi));
}

// Evaluated as logistic(gamma * (ln xi - ln mu)); no overflow for large gamma.
inline double gain(const rule::Conformable& p, double xi) {
  if (xi <= 0.0) return 0.0;
  return detail::logistic(p.gamma * (std::log(xi) - std::log(p.mu)));
}

inline double gain(const MaskParams& params, double xi) {
  return std::visit([xi](const auto& p) { return gain(p, xi); }, params);
}

// Closed-form minimizer of the conformable cost: gamma = 1/(2 - 1/alpha), mu = rho^(1/alpha).
inline rule::Conformable cm_from_cost(const CostParams& cost) {
  cost.validate();
  return {1.0 / (2.0 - 1.0 / cost.alpha), std::pow(cost.rho, 1.0 / cost.alpha)};
}

// Short identifiers used in reports and on the command line.
inline std::string mask_name(const MaskParams& params) {
  struct Visitor {
    std::string operator()(const rule::Binary&) const { return "binary"; }
    std::string operator()(const rule::Wiener&) const { return "wiener"; }
    std::string operator()(const rule::ConstrainedWiener&) const { return "cwiener"; }
    std::string operator()(const rule::ParametricWiener&) const { return "pw"; }
    std::string operator()(const rule::Conformable&) const { return "cm"; }
  };
  return std::visit(Visitor{}, params);
}

// Report columns: (gamma, mu_dB) for CM, (beta, eta_dB) for PW, (mu0_dB, -)
// for binary. Unused slots are NaN.
struct ParamColumns {
  double param1 = std::nan("");
  double param2 = std::nan("");
};

inline ParamColumns param_columns(const MaskParams& params) {
  struct Visitor {
    ParamColumns operator()(const rule::Binary& b) const { return {linear_to_db(b.mu0), std::nan("")}; }
    ParamColumns operator()(const rule::Wiener&) const { return {}; }
    ParamColumns operator()(const rule::ConstrainedWiener&) const { return {}; }
    ParamColumns operator()(const rule::ParametricWiener& p) const { return {p.beta, linear_to_db(p.eta)}; }
    ParamColumns operator()(const rule::Conformable& c) const { return {c.gamma, linear_to_db(c.mu)}; }
  };
  return std::visit(Visitor{}, params);
}

}  // namespace maskbench
