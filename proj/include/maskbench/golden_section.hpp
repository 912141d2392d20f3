#pragma once

#include <cmath>
#include <cstddef>

#include "maskbench/error.hpp"

namespace maskbench::optim {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t iterations = 0;
};

// Golden-section search on [lo, hi] for a unimodal f, until the bracket is
// narrower than `tol`. Returns the bracket midpoint.
template <typename F>
ScalarMinimum golden_section(F&& f, double lo, double hi, double tol) {
  require(lo < hi, "golden_section: empty interval");
  require(tol > 0.0, "golden_section: tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  std::size_t it = 0;
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  const double x = 0.5 * (a + b);
  return {x, f(x), it};
}

}  // namespace maskbench::optim
