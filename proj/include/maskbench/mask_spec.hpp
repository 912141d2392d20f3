#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <string_view>

#include "maskbench/error.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/units.hpp"

namespace maskbench {

inline double parse_real(std::string_view text, const std::string& what) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error("cannot parse " + what + " '" + std::string(text) + "'");
  }
  return v;
}

// Builds a rule from its name and textual parameters. Thresholds (mu, eta,
// mu0) accept a dB suffix; slopes (gamma, beta) are plain numbers.
inline MaskParams make_mask(const std::string& kind, const std::map<std::string, std::string>& args) {
  auto get = [&](const char* key, const char* fallback) {
    auto it = args.find(key);
    return it == args.end() ? std::string(fallback) : it->second;
  };
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : args) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      require(ok, "mask '" + kind + "' has no parameter '" + k + "'");
    }
  };
  if (kind == "wiener" || kind == "wf") {
    allow({});
    return rule::Wiener{};
  }
  if (kind == "cwiener") {
    allow({});
    return rule::ConstrainedWiener{};
  }
  if (kind == "binary" || kind == "bm") {
    allow({"mu0"});
    return rule::Binary{parse_power_ratio(get("mu0", "0dB"))};
  }
  if (kind == "pw") {
    allow({"beta", "eta"});
    return rule::ParametricWiener{parse_real(get("beta", "1"), "beta"), parse_power_ratio(get("eta", "0dB"))};
  }
  if (kind == "cm") {
    allow({"gamma", "mu"});
    return rule::Conformable{parse_real(get("gamma", "1"), "gamma"), parse_power_ratio(get("mu", "0dB"))};
  }
  throw Error("unknown mask '" + kind + "' (binary|wiener|cwiener|pw|cm)");
}

// "cm:gamma=0.5,mu=5dB", "pw:beta=0.3,eta=15.9dB", "binary:mu0=0dB", "wiener".
inline MaskParams parse_mask_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  std::map<std::string, std::string> args;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      require(eq != std::string_view::npos && eq > 0, "bad mask parameter '" + std::string(item) + "' in '" +
                                                          std::string(spec) + "'");
      require(args.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))).second,
              "repeated mask parameter in '" + std::string(spec) + "'");
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  return make_mask(kind, args);
}

}  // namespace maskbench
