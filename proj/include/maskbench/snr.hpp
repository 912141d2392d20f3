#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "maskbench/error.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/stft.hpp"
#include "maskbench/tf_matrix.hpp"

namespace maskbench {

inline constexpr double kDefaultSnrFloor = 1e-12;
// Denominator guard for oracle SNR, relative to the frame's peak bin power.
inline constexpr double kRelativeDenominatorGuard = 1e-20;

// Per-bin a-priori SNR, floored at construction so every entry is finite and > 0.
class SnrField {
 public:
  SnrField() = default;
  explicit SnrField(TfMatrix<double> xi, double floor = kDefaultSnrFloor) : xi_(std::move(xi)), floor_(floor) {
    require(std::isfinite(floor_) && floor_ > 0.0, "SNR floor must be finite and > 0");
    for (double& v : xi_.values()) {
      require(!std::isnan(v), "SNR field contains NaN");
      v = std::min(std::max(v, floor_), std::numeric_limits<double>::max());
    }
  }

  std::size_t num_bins() const { return xi_.num_bins(); }
  std::size_t num_frames() const { return xi_.num_frames(); }
  double at(std::size_t k, std::size_t frame) const { return xi_.at(k, frame); }
  std::span<const double> values() const { return xi_.values(); }
  double floor() const { return floor_; }

 private:
  TfMatrix<double> xi_;
  double floor_ = kDefaultSnrFloor;
};

// Ideal SNR from separately available clean and noise spectrograms, using
// single-frame periodograms for the spectral densities.
inline SnrField oracle_snr(const Spectrogram& clean, const Spectrogram& noise,
                           double floor = kDefaultSnrFloor) {
  require(clean.same_shape(noise), "oracle_snr: clean and noise spectrogram shapes differ");
  TfMatrix<double> xi(clean.num_bins(), clean.num_frames());
  for (std::size_t l = 0; l < clean.num_frames(); ++l) {
    double peak = 0.0;
    for (std::size_t k = 0; k < clean.num_bins(); ++k) {
      peak = std::max({peak, std::norm(clean.at(k, l)), std::norm(noise.at(k, l))});
    }
    const double guard = std::max(kRelativeDenominatorGuard * peak, std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < clean.num_bins(); ++k) {
      xi.at(k, l) = std::norm(clean.at(k, l)) / std::max(std::norm(noise.at(k, l)), guard);
    }
  }
  return SnrField(std::move(xi), floor);
}

// Mean periodogram of the first `frames` frames; a stand-in noise PSD when
// the recording starts with speech-free noise.
inline std::vector<double> leading_noise_psd(const Spectrogram& noisy, std::size_t frames) {
  require(noisy.num_frames() > 0, "noise PSD estimate needs at least one frame");
  frames = std::clamp<std::size_t>(frames, 1, noisy.num_frames());
  std::vector<double> psd(noisy.num_bins(), 0.0);
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t k = 0; k < noisy.num_bins(); ++k) psd[k] += std::norm(noisy.at(k, l));
  }
  for (double& v : psd) v = std::max(v / static_cast<double>(frames), std::numeric_limits<double>::min());
  return psd;
}

// Decision-directed a-priori SNR estimate:
//   xi(k,l) = a * |Xhat(k,l-1)|^2 / N(k) + (1 - a) * max(|Y(k,l)|^2 / N(k) - 1, 0)
// where Xhat(l-1) is the previous frame filtered by the Wiener gain of its own
// estimate. The first frame uses the second term only.
inline SnrField dd_snr(const Spectrogram& noisy, std::span<const double> noise_psd, double smoothing,
                       double floor = kDefaultSnrFloor) {
  require(noise_psd.size() == noisy.num_bins(), "dd_snr: noise PSD length must equal bin count");
  for (double n : noise_psd) require(std::isfinite(n) && n > 0.0, "dd_snr: noise PSD must be positive");
  require(smoothing >= 0.0 && smoothing < 1.0, "dd_snr: smoothing must lie in [0, 1)");
  require(std::isfinite(floor) && floor > 0.0, "SNR floor must be finite and > 0");

  TfMatrix<double> xi(noisy.num_bins(), noisy.num_frames());
  for (std::size_t l = 0; l < noisy.num_frames(); ++l) {
    for (std::size_t k = 0; k < noisy.num_bins(); ++k) {
      const double posterior = std::norm(noisy.at(k, l)) / noise_psd[k];
      double estimate = std::max(posterior - 1.0, 0.0);
      if (l > 0) {
        const double prev_xi = xi.at(k, l - 1);
        const double g = gain(rule::Wiener{}, prev_xi);
        const double prev_clean = g * g * std::norm(noisy.at(k, l - 1)) / noise_psd[k];
        estimate = smoothing * prev_clean + (1.0 - smoothing) * estimate;
      }
      xi.at(k, l) = std::max(estimate, floor);
    }
  }
  return SnrField(std::move(xi), floor);
}

}  // namespace maskbench
