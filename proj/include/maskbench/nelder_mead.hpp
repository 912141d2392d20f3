#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace maskbench::optim {

template <std::size_t N>
using Point = std::array<double, N>;

// Coefficients follow Lagarias et al.: reflection 1, expansion 2,
// contraction 1/2, shrink 1/2.
template <std::size_t N>
struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  std::size_t max_iterations = 500;
  double diameter_tolerance = 1e-6;
  Point<N> initial_step{};  // per-coordinate offset of the initial simplex vertices
};

template <std::size_t N>
struct NelderMeadResult {
  Point<N> x{};
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

template <std::size_t N, typename F>
NelderMeadResult<N> nelder_mead(F&& f, const Point<N>& start, const NelderMeadOptions<N>& opt) {
  struct Vertex {
    Point<N> x;
    double fx;
  };
  std::size_t evals = 0;
  auto eval = [&](const Point<N>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? HUGE_VAL : v;
  };
  auto combine = [](const Point<N>& a, const Point<N>& b, double t) {
    // a + t * (b - a)
    Point<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  std::array<Vertex, N + 1> simplex;
  simplex[0] = {start, eval(start)};
  for (std::size_t i = 0; i < N; ++i) {
    Point<N> x = start;
    x[i] += opt.initial_step[i] != 0.0 ? opt.initial_step[i] : (x[i] != 0.0 ? 0.05 * x[i] : 0.00025);
    simplex[i + 1] = {x, eval(x)};
  }

  auto diameter = [&] {
    double d2 = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      for (std::size_t j = i + 1; j <= N; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < N; ++c) {
          const double t = simplex[i].x[c] - simplex[j].x[c];
          s += t * t;
        }
        d2 = std::max(d2, s);
      }
    }
    return std::sqrt(d2);
  };

  NelderMeadResult<N> result;
  std::size_t it = 0;
  for (;; ++it) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    if (diameter() < opt.diameter_tolerance) {
      result.converged = true;
      break;
    }
    if (it >= opt.max_iterations) break;

    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t c = 0; c < N; ++c) centroid[c] += simplex[i].x[c] / static_cast<double>(N);
    }
    Vertex& worst = simplex[N];
    const double f_best = simplex[0].fx;
    const double f_second = simplex[N - 1].fx;

    const Point<N> xr = combine(centroid, worst.x, -opt.reflection);
    const double fr = eval(xr);
    if (fr < f_best) {
      const Point<N> xe = combine(centroid, worst.x, -opt.reflection * opt.expansion);
      const double fe = eval(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < f_second) {
      worst = {xr, fr};
      continue;
    }
    if (fr < worst.fx) {
      const Point<N> xc = combine(centroid, xr, opt.contraction);
      const double fc = eval(xc);
      if (fc <= fr) {
        worst = {xc, fc};
        continue;
      }
    } else {
      const Point<N> xcc = combine(centroid, worst.x, opt.contraction);
      const double fcc = eval(xcc);
      if (fcc < worst.fx) {
        worst = {xcc, fcc};
        continue;
      }
    }
    for (std::size_t i = 1; i <= N; ++i) {
      simplex[i].x = combine(simplex[0].x, simplex[i].x, opt.shrink);
      simplex[i].fx = eval(simplex[i].x);
    }
  }
  result.x = simplex[0].x;
  result.value = simplex[0].fx;
  result.iterations = it;
  result.evaluations = evals;
  return result;
}

}  // namespace maskbench::optim
