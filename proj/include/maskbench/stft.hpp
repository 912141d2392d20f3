#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"
#include "maskbench/fft.hpp"

namespace maskbench {

using Complex = std::complex<double>;

enum class WindowShape { kHann, kHamming };

// Defaults: 20 ms periodic Hann at 16 kHz, 512-point DFT, 50% overlap.
struct StftConfig {
  std::size_t window_len = 320;
  std::size_t fft_size = 512;
  std::size_t hop = 160;
  WindowShape window = WindowShape::kHann;

  std::size_t num_bins() const { return fft_size / 2 + 1; }

  bool valid() const {
    return hop > 0 && hop <= window_len && window_len <= fft_size && window_len % hop == 0;
  }

  void validate() const {
    require(valid(), "bad STFT config: need 0 < hop <= window_len <= fft_size and hop | window_len");
  }

  // Trailing partial windows are dropped.
  std::size_t frame_count(std::size_t length) const {
    if (length < window_len) return 0;
    return (length - window_len) / hop + 1;
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

namespace detail {

inline std::vector<double> taper(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_len);
  const double n = static_cast<double>(cfg.window_len);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    w[i] = cfg.window == WindowShape::kHann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
  }
  return w;
}

}  // namespace detail

// Square-root taper; used for both analysis and synthesis so their product
// is the periodic taper, whose hop-shifted copies sum to a constant.
inline std::vector<double> sqrt_window(const StftConfig& cfg) {
  auto w = detail::taper(cfg);
  for (double& v : w) v = std::sqrt(v);
  return w;
}

// Complex time-frequency matrix holding the non-negative frequency half.
// Storage is frame-major: frame(l) is a contiguous run of num_bins() values.
class Spectrogram {
 public:
  Spectrogram() = default;

  Spectrogram(StftConfig config, std::size_t origin_length, std::vector<Complex> bins,
              int sample_rate = 16000)
      : config_(config), origin_length_(origin_length), sample_rate_(sample_rate), bins_(std::move(bins)) {
    require(sample_rate_ > 0, "sample rate must be positive");
    config_.validate();
    frames_ = config_.frame_count(origin_length_);
    require(bins_.size() == frames_ * config_.num_bins(),
            "spectrogram dimensions inconsistent with origin length and STFT config");
    for (const auto& c : bins_) {
      require(std::isfinite(c.real()) && std::isfinite(c.imag()), "spectrogram has non-finite bins");
    }
  }

  static Spectrogram zeros(StftConfig config, std::size_t origin_length, int sample_rate = 16000) {
    return Spectrogram(config, origin_length,
                       std::vector<Complex>(config.frame_count(origin_length) * config.num_bins()),
                       sample_rate);
  }

  const StftConfig& config() const { return config_; }
  std::size_t origin_length() const { return origin_length_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t num_bins() const { return config_.num_bins(); }
  std::size_t num_frames() const { return frames_; }

  const Complex& at(std::size_t k, std::size_t frame) const { return bins_[frame * num_bins() + k]; }
  Complex& at(std::size_t k, std::size_t frame) { return bins_[frame * num_bins() + k]; }

  std::span<const Complex> frame(std::size_t l) const {
    return std::span<const Complex>(bins_).subspan(l * num_bins(), num_bins());
  }
  std::span<const Complex> bins() const { return bins_; }
  std::span<Complex> bins() { return bins_; }

  bool same_shape(const Spectrogram& other) const {
    return config_ == other.config_ && origin_length_ == other.origin_length_ &&
           sample_rate_ == other.sample_rate_;
  }

 private:
  StftConfig config_{};
  std::size_t origin_length_ = 0;
  int sample_rate_ = 16000;
  std::size_t frames_ = 0;
  std::vector<Complex> bins_;
};

inline Spectrogram analyze(const AudioBuffer& audio, const StftConfig& config) {
  config.validate();
  require(audio.size() >= config.window_len,
          "insufficient samples: audio has " + std::to_string(audio.size()) +
              ", one window needs " + std::to_string(config.window_len));
  const auto window = sqrt_window(config);
  const std::size_t frames = config.frame_count(audio.size());
  const std::size_t nbins = config.num_bins();
  auto x = audio.samples();

  std::vector<Complex> bins(frames * nbins);
  std::vector<double> segment(config.fft_size);
  for (std::size_t l = 0; l < frames; ++l) {
    std::fill(segment.begin(), segment.end(), 0.0);
    const std::size_t start = l * config.hop;
    for (std::size_t n = 0; n < config.window_len; ++n) segment[n] = x[start + n] * window[n];
    auto spectrum = fft::forward_real(segment);
    std::copy(spectrum.begin(), spectrum.end(), bins.begin() + static_cast<std::ptrdiff_t>(l * nbins));
  }
  return Spectrogram(config, audio.size(), std::move(bins), audio.sample_rate());
}

// Weighted overlap-add. Each output sample is divided by the overlapped
// analysis*synthesis window sum at that position, floored at half its peak so
// the sparsely covered first/last half-window is attenuated rather than
// amplified. Samples no frame covers (the dropped tail) are zero.
inline AudioBuffer synthesize(const Spectrogram& spec) {
  const auto& config = spec.config();
  const auto window = sqrt_window(config);
  std::vector<double> out(spec.origin_length(), 0.0);
  std::vector<double> norm(spec.origin_length(), 0.0);
  for (std::size_t l = 0; l < spec.num_frames(); ++l) {
    auto frame = fft::inverse_real(spec.frame(l), config.fft_size);
    const std::size_t start = l * config.hop;
    for (std::size_t n = 0; n < config.window_len; ++n) {
      out[start + n] += frame[n] * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  const double peak = norm.empty() ? 0.0 : *std::max_element(norm.begin(), norm.end());
  const double floor = 0.5 * peak;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = norm[i] > 0.0 ? out[i] / std::max(norm[i], floor) : 0.0;
  }
  return AudioBuffer(std::move(out), spec.sample_rate());
}

}  // namespace maskbench
