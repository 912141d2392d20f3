#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench::filters {

// Direct-form II transposed second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  // H(e^{jw}) for normalized angular frequency w in [0, pi].
  std::complex<double> response(double w) const {
    const auto z1 = std::polar(1.0, -w);
    const auto z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }

  void filter(std::span<double> x) const {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + s1;
      s1 = b1 * in - a1 * out + s2;
      s2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

using Cascade = std::vector<Biquad>;

inline std::complex<double> response(const Cascade& c, double w) {
  std::complex<double> h = 1.0;
  for (const auto& s : c) h *= s.response(w);
  return h;
}

inline void filter(const Cascade& c, std::span<double> x) {
  for (const auto& s : c) s.filter(x);
}

namespace detail {

inline std::complex<double> bilinear(std::complex<double> s, double fs) {
  return (2.0 * fs + s) / (2.0 * fs - s);
}

inline double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

}  // namespace detail

// Butterworth bandpass from an order-N lowpass prototype (overall order 2N),
// designed by the bilinear transform with prewarped edges, unit gain at the
// geometric center. Returns N biquads.
inline Cascade butterworth_bandpass(int prototype_order, double f_lo, double f_hi, double fs) {
  require(prototype_order >= 1, "butterworth: order must be >= 1");
  require(0.0 < f_lo && f_lo < f_hi && f_hi < fs / 2.0, "butterworth: need 0 < f_lo < f_hi < fs/2");
  const double w1 = detail::prewarp(f_lo, fs);
  const double w2 = detail::prewarp(f_hi, fs);
  const double w0_sq = w1 * w2;
  const double bw = w2 - w1;

  std::vector<std::complex<double>> upper_poles;
  for (int k = 0; k < prototype_order; ++k) {
    const auto p = std::polar(1.0, std::numbers::pi * (2.0 * k + prototype_order + 1) / (2.0 * prototype_order));
    // s^2 - p*bw*s + w0^2 = 0
    const auto disc = std::sqrt(p * p * bw * bw - 4.0 * w0_sq);
    for (auto s : {(p * bw + disc) / 2.0, (p * bw - disc) / 2.0}) {
      const auto z = detail::bilinear(s, fs);
      if (z.imag() > 0.0) upper_poles.push_back(z);
    }
  }
  require(static_cast<int>(upper_poles.size()) == prototype_order, "butterworth: pole pairing failed");

  Cascade cascade;
  for (const auto& z : upper_poles) {
    // zeros at z = 1 and z = -1
    cascade.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  }
  const double center = 2.0 * std::atan(std::sqrt(w0_sq) / (2.0 * fs));
  const double g = std::pow(1.0 / std::abs(response(cascade, center)), 1.0 / prototype_order);
  for (auto& s : cascade) {
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return cascade;
}

// Second-order Butterworth lowpass, unit DC gain.
inline Biquad butterworth_lowpass(double fc, double fs) {
  require(0.0 < fc && fc < fs / 2.0, "butterworth lowpass: need 0 < fc < fs/2");
  const double k = std::tan(std::numbers::pi * fc / fs);
  const double q = std::numbers::sqrt2 / 2.0;
  const double norm = 1.0 / (1.0 + k / q + k * k);
  Biquad b;
  b.b0 = k * k * norm;
  b.b1 = 2.0 * b.b0;
  b.b2 = b.b0;
  b.a1 = 2.0 * (k * k - 1.0) * norm;
  b.a2 = (1.0 - k / q + k * k) * norm;
  return b;
}

}  // namespace maskbench::filters
