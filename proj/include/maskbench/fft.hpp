#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench::fft {

using Complex = std::complex<double>;

namespace detail {

enum class Kind { kR2C, kC2R, kForward, kBackward };

// FFTW planning is not thread-safe, execution with the new-array API is.
// Plans are created once per (kind, size) and kept for the process lifetime.
inline fftw_plan plan_for(Kind kind, int n) {
  static std::mutex mutex;
  static std::map<std::pair<Kind, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(kind, n);
  if (auto it = plans.find(key); it != plans.end()) return it->second;

  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto* real = fftw_alloc_real(static_cast<std::size_t>(n));
  auto* cplx = fftw_alloc_complex(static_cast<std::size_t>(n));
  auto* cplx2 = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan p = nullptr;
  switch (kind) {
    case Kind::kR2C: p = fftw_plan_dft_r2c_1d(n, real, cplx, flags); break;
    case Kind::kC2R: p = fftw_plan_dft_c2r_1d(n, cplx, real, flags); break;
    case Kind::kForward: p = fftw_plan_dft_1d(n, cplx, cplx2, FFTW_FORWARD, flags); break;
    case Kind::kBackward: p = fftw_plan_dft_1d(n, cplx, cplx2, FFTW_BACKWARD, flags); break;
  }
  fftw_free(real);
  fftw_free(cplx);
  fftw_free(cplx2);
  require(p != nullptr, "FFTW planning failed");
  plans.emplace(key, p);
  return p;
}

inline fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

// Unnormalized forward real DFT: returns n/2 + 1 bins.
inline std::vector<Complex> forward_real(std::span<const double> input) {
  const int n = static_cast<int>(input.size());
  require(n > 0, "empty FFT input");
  std::vector<double> in(input.begin(), input.end());
  std::vector<Complex> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_execute_dft_r2c(detail::plan_for(detail::Kind::kR2C, n), in.data(),
                       detail::as_fftw(out.data()));
  return out;
}

// Inverse of forward_real including the 1/n scaling.
inline std::vector<double> inverse_real(std::span<const Complex> bins, std::size_t n) {
  require(bins.size() == n / 2 + 1, "inverse_real: bin count does not match size");
  std::vector<Complex> in(bins.begin(), bins.end());  // c2r clobbers its input
  std::vector<double> out(n);
  fftw_execute_dft_c2r(detail::plan_for(detail::Kind::kC2R, static_cast<int>(n)),
                       detail::as_fftw(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

inline std::vector<Complex> forward(std::span<const Complex> input) {
  std::vector<Complex> in(input.begin(), input.end());
  std::vector<Complex> out(input.size());
  fftw_execute_dft(detail::plan_for(detail::Kind::kForward, static_cast<int>(in.size())),
                   detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  return out;
}

// Inverse complex DFT including the 1/n scaling.
inline std::vector<Complex> inverse(std::span<const Complex> input) {
  std::vector<Complex> in(input.begin(), input.end());
  std::vector<Complex> out(input.size());
  fftw_execute_dft(detail::plan_for(detail::Kind::kBackward, static_cast<int>(in.size())),
                   detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
  return out;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace maskbench::fft
