#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "maskbench/error.hpp"

namespace maskbench {

// Power convention throughout: every ratio (xi, mu, mu0, eta) is a power ratio.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

// Parses a power ratio literal: "5dB", "-3.5 db" or plain linear "3.162".
inline double parse_power_ratio(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  bool is_db = false;
  if (s.size() >= 2) {
    std::string tail{s.substr(s.size() - 2)};
    if (std::tolower(static_cast<unsigned char>(tail[0])) == 'd' &&
        std::tolower(static_cast<unsigned char>(tail[1])) == 'b') {
      is_db = true;
      s = trim(s.substr(0, s.size() - 2));
    }
  }
  // from_chars rejects a leading '+'
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw Error("cannot parse power ratio '" + std::string(text) + "'");
  }
  return is_db ? db_to_linear(value) : value;
}

}  // namespace maskbench
