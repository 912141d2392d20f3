#pragma once

// Minimal seeded property-test helpers.

#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Runs `body` for `cases` generated inputs; failures name the case index.
template <typename Body>
void for_all(std::uint64_t seed, int cases, Body&& body) {
  Rng rng(seed);
  for (int i = 0; i < cases; ++i) {
    SCOPED_TRACE(::testing::Message() << "case " << i << " (seed " << seed << ")");
    body(rng);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace gen
