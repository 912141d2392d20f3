#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"

namespace maskbench::harness {

struct MixResult {
  AudioBuffer noisy;
  AudioBuffer scaled_noise;  // kept for oracle masks
  std::size_t noise_offset = 0;
  double noise_gain = 0.0;
};

// Adds a noise segment taken at a seeded random offset, scaled so that the
// full-utterance mean-square power ratio speech/noise equals snr_db.
inline MixResult mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, double snr_db,
                            std::uint64_t seed) {
  require(speech.sample_rate() == noise.sample_rate(), "mix_at_snr: sample rates differ");
  require(noise.size() >= speech.size(), "mix_at_snr: noise shorter than speech");
  require(std::isfinite(snr_db), "mix_at_snr: SNR must be finite");
  const double speech_power = mean_square(speech.samples());
  require(speech_power > 0.0, "mix_at_snr: speech is silent (zero power)");

  std::mt19937_64 rng(seed);
  // plain modulo keeps the offset identical across standard libraries
  const std::size_t offset = static_cast<std::size_t>(rng() % (noise.size() - speech.size() + 1));
  auto segment = noise.samples().subspan(offset, speech.size());
  const double noise_power = mean_square(segment);
  require(noise_power > 0.0, "mix_at_snr: noise segment is silent (zero power)");

  const double g = std::sqrt(speech_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> scaled(speech.size()), noisy(speech.size());
  auto x = speech.samples();
  for (std::size_t i = 0; i < speech.size(); ++i) {
    scaled[i] = g * segment[i];
    noisy[i] = x[i] + scaled[i];
  }
  return {AudioBuffer(std::move(noisy), speech.sample_rate()),
          AudioBuffer(std::move(scaled), speech.sample_rate()), offset, g};
}

// splitmix64 step; used to derive independent per-trial seeds from the plan seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace maskbench::harness
