#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"
#include "maskbench/fft.hpp"
#include "maskbench/filters.hpp"
#include "maskbench/io.hpp"
#include "maskbench/log.hpp"

namespace maskbench::metrics {

// Normalized Covariance Metric configuration. Channels are Butterworth
// bandpass filters whose centers are equally spaced on the ERB-rate scale;
// adjacent channels share edges at the ERB-rate midpoints.
struct NcmConfig {
  int num_bands = 20;
  double lowest_center_hz = 300.0;
  double highest_center_hz = 6000.0;
  int prototype_order = 2;  // bandpass order is twice this
  double envelope_cutoff_hz = 25.0;
  double envelope_rate_hz = 100.0;
  std::vector<double> weights;  // empty means equal weights
};

inline double hz_to_erb_rate(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }
inline double erb_rate_to_hz(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

struct Band {
  double center_hz = 0.0;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

inline std::vector<Band> ncm_bands(const NcmConfig& cfg) {
  require(cfg.num_bands >= 1, "NCM needs at least one band");
  require(0.0 < cfg.lowest_center_hz && cfg.lowest_center_hz < cfg.highest_center_hz,
          "NCM band centers must be increasing and positive");
  const double e_lo = hz_to_erb_rate(cfg.lowest_center_hz);
  const double e_hi = hz_to_erb_rate(cfg.highest_center_hz);
  const double step = cfg.num_bands > 1 ? (e_hi - e_lo) / (cfg.num_bands - 1) : 1.0;
  std::vector<Band> bands;
  for (int i = 0; i < cfg.num_bands; ++i) {
    const double e = e_lo + step * i;
    bands.push_back({erb_rate_to_hz(e), erb_rate_to_hz(e - step / 2), erb_rate_to_hz(e + step / 2)});
  }
  return bands;
}

// Clean-signal envelopes, computed once and reused for every processed
// version of the same utterance.
struct NcmReference {
  std::vector<std::vector<double>> envelopes;
  std::vector<bool> active;  // false for silent (zero-variance) channels
};

// Precomputes channel responses for a fixed (sample rate, signal length).
class NcmAnalyzer {
 public:
  NcmAnalyzer(int sample_rate, std::size_t length, NcmConfig cfg = {})
      : cfg_(std::move(cfg)), sample_rate_(sample_rate), length_(length) {
    require(sample_rate_ > 0, "NCM: sample rate must be positive");
    require(length_ > 0, "NCM: empty signal");
    require(cfg_.weights.empty() || cfg_.weights.size() == static_cast<std::size_t>(cfg_.num_bands),
            "NCM: weight count must equal band count");
    const double fs = sample_rate_;
    bands_ = ncm_bands(cfg_);
    require(bands_.back().hi_hz < fs / 2.0,
            "NCM: sample rate too low for the band layout (top edge " +
                std::to_string(bands_.back().hi_hz) + " Hz)");
    // zero padding absorbs the filter tails so circular filtering matches linear filtering
    fft_len_ = fft::next_pow2(length_ + static_cast<std::size_t>(fs / 10.0));
    decimation_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fs / cfg_.envelope_rate_hz)));
    envelope_lp_ = filters::butterworth_lowpass(cfg_.envelope_cutoff_hz, fs);

    const std::size_t half = fft_len_ / 2;
    for (const auto& band : bands_) {
      const auto cascade = filters::butterworth_bandpass(cfg_.prototype_order, band.lo_hz, band.hi_hz, fs);
      std::vector<std::complex<double>> h(half + 1);
      for (std::size_t k = 0; k <= half; ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(fft_len_);
        // analytic-signal weighting: positive frequencies doubled, DC/Nyquist kept once
        const double scale = (k == 0 || k == half) ? 1.0 : 2.0;
        h[k] = scale * filters::response(cascade, w);
      }
      responses_.push_back(std::move(h));
    }
  }

  const std::vector<Band>& bands() const { return bands_; }

  // Per channel: |analytic signal of the band-filtered input|, lowpassed and decimated.
  std::vector<std::vector<double>> envelopes(const AudioBuffer& x) const {
    require(x.size() == length_ && x.sample_rate() == sample_rate_,
            "NCM: signal length or sample rate differs from analyzer setup");
    std::vector<double> padded(fft_len_, 0.0);
    std::copy(x.samples().begin(), x.samples().end(), padded.begin());
    const auto spectrum = fft::forward_real(padded);

    std::vector<std::vector<double>> out;
    out.reserve(responses_.size());
    std::vector<std::complex<double>> analytic_spec(fft_len_);
    for (const auto& h : responses_) {
      std::fill(analytic_spec.begin(), analytic_spec.end(), std::complex<double>{});
      for (std::size_t k = 0; k < h.size(); ++k) analytic_spec[k] = h[k] * spectrum[k];
      const auto analytic = fft::inverse(analytic_spec);
      std::vector<double> env(length_);
      for (std::size_t n = 0; n < length_; ++n) env[n] = std::abs(analytic[n]);
      envelope_lp_.filter(env);
      std::vector<double> decimated;
      decimated.reserve(length_ / decimation_ + 1);
      for (std::size_t n = 0; n < length_; n += decimation_) decimated.push_back(env[n]);
      out.push_back(std::move(decimated));
    }
    return out;
  }

  NcmReference reference(const AudioBuffer& clean) const {
    NcmReference ref;
    ref.envelopes = envelopes(clean);
    std::vector<double> var;
    for (const auto& e : ref.envelopes) var.push_back(variance(e));
    const double max_var = *std::max_element(var.begin(), var.end());
    for (std::size_t i = 0; i < var.size(); ++i) {
      const bool silent = var[i] <= 1e-24 * max_var || var[i] == 0.0;
      if (silent) log::warn("NCM: clean channel {} has a zero-variance envelope; excluded", i);
      ref.active.push_back(!silent);
    }
    require(std::any_of(ref.active.begin(), ref.active.end(), [](bool a) { return a; }),
            "NCM: clean signal is silent in every channel");
    return ref;
  }

  // Channel transmission index T_i = (clip(10 log10(r^2 / (1 - r^2)), -15, 15) + 15) / 30,
  // averaged with the configured weights over active channels.
  double score(const NcmReference& ref, const AudioBuffer& processed) const {
    const auto proc = envelopes(processed);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < proc.size(); ++i) {
      if (!ref.active[i]) continue;
      const double r = correlation(ref.envelopes[i], proc[i]);
      const double r2 = r * r;
      double snr = r2 >= 1.0 ? 15.0 : 10.0 * std::log10(r2 / (1.0 - r2));
      snr = std::clamp(snr, -15.0, 15.0);
      const double w = cfg_.weights.empty() ? 1.0 : cfg_.weights[i];
      num += w * (snr + 15.0) / 30.0;
      den += w;
    }
    require(den > 0.0, "NCM: no channel with positive weight is active");
    return std::clamp(num / den, 0.0, 1.0);
  }

 private:
  static double variance(const std::vector<double>& e) {
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double s = 0.0;
    for (double v : e) s += (v - mean) * (v - mean);
    return s / static_cast<double>(e.size());
  }

  // Normalized covariance of the zero-meaned envelopes; 0 when the processed
  // envelope is constant.
  static double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double da = a[i] - ma, db = b[i] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
  }

  NcmConfig cfg_;
  int sample_rate_;
  std::size_t length_;
  std::vector<Band> bands_;
  std::size_t fft_len_ = 0;
  std::size_t decimation_ = 1;
  filters::Biquad envelope_lp_;
  std::vector<std::vector<std::complex<double>>> responses_;
};

inline double ncm(const AudioBuffer& clean, const AudioBuffer& processed, const NcmConfig& cfg = {}) {
  require(clean.size() == processed.size(), "NCM: clean and processed lengths differ");
  require(clean.sample_rate() == processed.sample_rate(), "NCM: sample rates differ");
  NcmAnalyzer analyzer(clean.sample_rate(), clean.size(), cfg);
  return analyzer.score(analyzer.reference(clean), processed);
}

// Quadratic distance combining intelligibility (NCM in [0, 1]) and quality on
// the PESQ-like [0, 5] scale.
inline double composite_dp(double ncm_score, double quality) {
  require(ncm_score >= 0.0 && ncm_score <= 1.0, "composite_dp: NCM must lie in [0, 1]");
  require(quality >= 0.0 && quality <= 5.0, "composite_dp: quality must lie in [0, 5]");
  const double q = quality / 5.0;
  return ncm_score * ncm_score + q * q;
}

struct MetricScore {
  double ncm = 0.0;
  std::optional<double> quality;
  std::optional<double> d_p;  // present iff quality is

  static MetricScore make(double ncm_score, std::optional<double> quality = std::nullopt) {
    MetricScore s;
    s.ncm = ncm_score;
    s.quality = quality;
    if (quality) s.d_p = composite_dp(ncm_score, *quality);
    return s;
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace detail

// Reads externally computed quality scores from a CSV with header `id,score`.
inline std::map<std::string, double> parse_external_quality(const std::string& text,
                                                            const std::string& source = "quality CSV") {
  std::map<std::string, double> scores;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      std::string header;
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) header += c;
      }
      require(header == "id,score", source + ":" + std::to_string(line_no) + ": expected header 'id,score'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    require(comma != std::string::npos && line.find(',', comma + 1) == std::string::npos,
            where + "expected exactly two fields");
    const std::string id = detail::trim(line.substr(0, comma));
    const std::string value = detail::trim(line.substr(comma + 1));
    require(!id.empty(), where + "empty id");
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(value, &used);
      require(used == value.size(), "");
    } catch (const std::exception&) {
      throw Error(where + "malformed score '" + value + "'");
    }
    require(std::isfinite(score) && score >= 0.0 && score <= 5.0,
            where + "score " + value + " outside [0, 5]");
    require(scores.emplace(id, score).second, where + "duplicate id '" + id + "'");
    if (end == text.size()) break;
  }
  require(header_seen, source + ": missing header 'id,score'");
  if (scores.empty()) log::warn("{}: no scores (header only)", source);
  return scores;
}

inline std::map<std::string, double> ingest_external_quality(const std::filesystem::path& csv_path) {
  return parse_external_quality(read_file(csv_path), csv_path.string());
}

}  // namespace maskbench::metrics
