#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"
#include "maskbench/harness/corpus.hpp"
#include "maskbench/harness/mixing.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/metrics.hpp"
#include "maskbench/snr.hpp"
#include "maskbench/stft.hpp"
#include "maskbench/units.hpp"

namespace maskbench::harness {

// One utterance mixed at one SNR, with everything an oracle mask needs.
struct Trial {
  std::string id;
  std::string noise;
  double snr_db = 0.0;
  AudioBuffer clean;
  AudioBuffer noisy;
  Spectrogram noisy_spec;
  SnrField oracle;
  std::shared_ptr<const metrics::NcmAnalyzer> analyzer;
  metrics::NcmReference reference;
};

inline Trial prepare_trial(std::string id, std::string noise_name, double snr_db, const AudioBuffer& speech,
                           const AudioBuffer& noise, std::uint64_t seed, const StftConfig& cfg = {},
                           double snr_floor = kDefaultSnrFloor) {
  auto mix = mix_at_snr(speech, noise, snr_db, seed);
  auto clean_spec = analyze(speech, cfg);
  auto noise_spec = analyze(mix.scaled_noise, cfg);
  auto noisy_spec = analyze(mix.noisy, cfg);
  auto oracle = oracle_snr(clean_spec, noise_spec, snr_floor);
  auto analyzer = std::make_shared<const metrics::NcmAnalyzer>(speech.sample_rate(), speech.size());
  auto ref = analyzer->reference(speech);
  return {std::move(id),        std::move(noise_name), snr_db,           speech,  std::move(mix.noisy),
          std::move(noisy_spec), std::move(oracle),    std::move(analyzer), std::move(ref)};
}

inline std::string format_param(double v) { return std::isnan(v) ? std::string() : fmt::format("{:.9g}", v); }

// Key used to look up externally computed quality scores, e.g.
// "s01|babble|-10|cm|0.5|5".
inline std::string trial_key(const std::string& id, const std::string& noise, double snr_db,
                             const std::string& mask, const ParamColumns& cols) {
  return fmt::format("{}|{}|{:.9g}|{}|{}|{}", id, noise, snr_db, mask, format_param(cols.param1),
                     format_param(cols.param2));
}

inline std::string trial_key(const Trial& t, const MaskParams& params) {
  return trial_key(t.id, t.noise, t.snr_db, mask_name(params), param_columns(params));
}

// Returns a quality score for a processed signal, or nullopt when unknown.
using QualityFn = std::function<std::optional<double>(const std::string& key, const AudioBuffer& processed)>;

inline QualityFn quality_from_table(std::map<std::string, double> table) {
  return [table = std::move(table)](const std::string& key, const AudioBuffer&) -> std::optional<double> {
    auto it = table.find(key);
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
}

inline AudioBuffer enhance_oracle(const Trial& t, const MaskParams& params) {
  return synthesize(apply_mask(build_mask(params, t.oracle), t.noisy_spec));
}

inline metrics::MetricScore score_signal(const Trial& t, const std::string& key, const AudioBuffer& processed,
                                         const QualityFn& quality) {
  const double n = t.analyzer->score(t.reference, processed);
  std::optional<double> q;
  if (quality) q = quality(key, processed);
  return metrics::MetricScore::make(n, q);
}

inline metrics::MetricScore evaluate(const Trial& t, const MaskParams& params, const QualityFn& quality = {}) {
  return score_signal(t, trial_key(t, params), enhance_oracle(t, params), quality);
}

inline double criterion_value(const metrics::MetricScore& s, Criterion c, const std::string& key) {
  switch (c) {
    case Criterion::kIntelligibility: return s.ncm;
    case Criterion::kQuality:
      require(s.quality.has_value(), "no quality score for trial '" + key + "'");
      return *s.quality;
    case Criterion::kComposite:
      require(s.d_p.has_value(), "no quality score for trial '" + key + "'");
      return *s.d_p;
  }
  return s.ncm;
}

struct BestParams {
  std::size_t index = 0;
  MaskParams params;
  metrics::MetricScore score;
  double value = 0.0;
};

// Exhaustive search; the first grid point wins ties.
inline BestParams best_params_per_signal(const Trial& t, const std::vector<MaskParams>& grid, Criterion c,
                                         const QualityFn& quality = {}) {
  require(!grid.empty(), "best_params_per_signal: empty grid");
  std::optional<BestParams> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto key = trial_key(t, grid[i]);
    const auto s = score_signal(t, key, enhance_oracle(t, grid[i]), quality);
    const double v = criterion_value(s, c, key);
    if (!best || v > best->value) best = BestParams{i, grid[i], s, v};
  }
  return *best;
}

namespace detail {

// Coordinates on the search scale: log for slopes, dB for thresholds.
inline std::vector<double> search_coords(const MaskParams& p) {
  if (const auto* cm = std::get_if<rule::Conformable>(&p)) return {std::log(cm->gamma), linear_to_db(cm->mu)};
  if (const auto* pw = std::get_if<rule::ParametricWiener>(&p)) return {std::log(pw->beta), linear_to_db(pw->eta)};
  if (const auto* b = std::get_if<rule::Binary>(&p)) return {linear_to_db(b->mu0)};
  return {};
}

// Lower median.
inline double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace detail

// Per-parameter lower median on the search scale, each snapped to the
// nearest grid value on that scale (ties to the smaller value).
inline MaskParams median_map(const std::vector<MaskParams>& best_sets, const std::vector<MaskParams>& grid) {
  require(!best_sets.empty(), "median_map: empty list");
  require(!grid.empty(), "median_map: empty grid");
  const auto kind = best_sets.front().index();
  for (const auto& p : best_sets) require(p.index() == kind, "median_map: mixed mask families");

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].index() == kind) members.push_back(i);
  }
  require(!members.empty(), "median_map: grid has no mask of family '" + mask_name(best_sets.front()) + "'");

  const std::size_t dims = detail::search_coords(best_sets.front()).size();
  if (dims == 0) return grid[members.front()];

  std::vector<double> target(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> values, axis;
    for (const auto& p : best_sets) values.push_back(detail::search_coords(p)[d]);
    for (auto i : members) axis.push_back(detail::search_coords(grid[i])[d]);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
    const double m = detail::lower_median(values);
    double snapped = axis.front();
    for (double a : axis) {
      if (std::abs(a - m) < std::abs(snapped - m)) snapped = a;  // ascending scan keeps the smaller on ties
    }
    target[d] = snapped;
  }

  // Cartesian grids contain the snapped pair exactly; otherwise take the closest member.
  std::size_t best = members.front();
  double best_dist = HUGE_VAL;
  for (auto i : members) {
    const auto c = detail::search_coords(grid[i]);
    double dist = 0.0;
    for (std::size_t d = 0; d < dims; ++d) dist += (c[d] - target[d]) * (c[d] - target[d]);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return grid[best];
}

}  // namespace maskbench::harness
