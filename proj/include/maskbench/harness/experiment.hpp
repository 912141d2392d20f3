#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maskbench/error.hpp"
#include "maskbench/harness/corpus.hpp"
#include "maskbench/harness/grids.hpp"
#include "maskbench/harness/mixing.hpp"
#include "maskbench/harness/search.hpp"
#include "maskbench/io.hpp"
#include "maskbench/log.hpp"
#include "maskbench/parallel.hpp"
#include "maskbench/wav.hpp"

namespace maskbench::harness {

struct ExperimentOptions {
  std::size_t jobs = 1;
  QualityFn quality;  // optional external scores keyed by trial_key()
};

struct TrialRow {
  std::string set;  // train | test | load
  std::string id;
  std::string noise;
  double snr_db = 0.0;
  std::string mask;
  ParamColumns params;
  std::optional<metrics::MetricScore> score;
  std::string error;
};

struct ParamRow {
  std::string noise;
  double snr_db = 0.0;
  std::string mask;
  ParamColumns params;
  std::size_t n_train = 0;
};

struct Summary {
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ScoreRow {
  std::string noise;
  double snr_db = 0.0;
  std::string mask;
  ParamColumns params;
  Summary ncm;
  std::optional<Summary> quality;
  std::size_t n = 0;
};

struct SplitRow {
  std::string noise;
  double snr_db = 0.0;
  std::string set;
  std::string id;
};

struct ExperimentReport {
  std::vector<ParamRow> params;
  std::vector<ScoreRow> scores;
  std::vector<TrialRow> trials;
  std::vector<SplitRow> split;
  nlohmann::json run_info;
};

// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  require(!v.empty(), "quantile of empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

namespace detail {

// Fisher-Yates driven by raw mt19937_64 output, so the order does not depend
// on the standard library's distribution implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

inline std::string fmt_num(double v) { return fmt::format("{:.9g}", v); }
inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

struct Loaded {
  std::string id;
  std::optional<AudioBuffer> audio;
  std::string error;
};

}  // namespace detail

// Train/test protocol per (noise, SNR) subgroup: exhaustive search on the
// training utterances, median mapping, then scoring of the baselines and the
// mapped masks on the test utterances.
inline ExperimentReport run_experiment(const ExperimentPlan& plan, const CorpusManifest& manifest,
                                       const ExperimentOptions& opt = {}) {
  ExperimentReport report;
  const bool needs_quality = plan.criterion != Criterion::kIntelligibility;
  require(!needs_quality || static_cast<bool>(opt.quality),
          "criterion '" + criterion_name(plan.criterion) + "' needs external quality scores");

  std::vector<std::string> noises = plan.noises;
  if (noises.empty()) {
    for (const auto& p : manifest.noise_profiles) noises.push_back(p.name);
  }
  require(!noises.empty(), "experiment: no noise profiles");

  // Load every utterance once; failures become error rows.
  std::vector<detail::Loaded> loaded(manifest.entries.size());
  parallel_for(manifest.entries.size(), opt.jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    loaded[i].id = e.id;
    try {
      auto a = wav::read(e.speech_path);
      require(a.sample_rate() == manifest.sample_rate,
              fmt::format("sample rate {} differs from manifest rate {}", a.sample_rate(), manifest.sample_rate));
      require(mean_square(a.samples()) > 0.0, "speech is silent");
      loaded[i].audio = std::move(a);
    } catch (const std::exception& ex) {
      loaded[i].error = ex.what();
    }
  });
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].audio) {
      usable.push_back(i);
    } else {
      log::warn("skipping entry '{}': {}", loaded[i].id, loaded[i].error);
      report.trials.push_back({"load", loaded[i].id, "", NAN, "", {}, std::nullopt, loaded[i].error});
    }
  }

  std::vector<MaskParams> cm_grid, pw_grid;
  if (plan.search_cm) cm_grid = grid_cm();
  if (plan.search_pw) pw_grid = grid_pw();

  for (const auto& noise_name : noises) {
    const auto& profile = manifest.profile(noise_name);
    AudioBuffer noise = [&] {
      try {
        return wav::read(profile.noise_path);
      } catch (const std::exception& ex) {
        throw Error("noise profile '" + noise_name + "': " + ex.what());
      }
    }();
    require(noise.sample_rate() == manifest.sample_rate,
            "noise profile '" + noise_name + "': sample rate differs from the manifest");

    for (double snr : plan.snr_levels_db) {
      const std::string group = fmt::format("{}|{:.9g}", noise_name, snr);
      auto order = usable;
      detail::seeded_shuffle(order, mix_seed(plan.seed, stable_hash(group)));
      const std::size_t n_train = std::min(plan.train_count, order.size());
      const std::size_t n_test = std::min(plan.test_count.value_or(order.size()), order.size() - n_train);
      require(n_train > 0 && n_test > 0,
              fmt::format("subgroup {} dB / {}: not enough usable utterances ({}) for a train/test split", snr,
                          noise_name, order.size()));
      std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
      std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
      for (auto i : train) report.split.push_back({noise_name, snr, "train", loaded[i].id});
      for (auto i : test) report.split.push_back({noise_name, snr, "test", loaded[i].id});

      auto make_trial = [&](std::size_t i) {
        const auto seed = mix_seed(plan.seed, stable_hash(loaded[i].id + "|" + group));
        return prepare_trial(loaded[i].id, noise_name, snr, *loaded[i].audio, noise, seed, plan.stft,
                             plan.snr_floor);
      };

      // Training: best grid point per utterance and family.
      struct TrainOut {
        std::optional<BestParams> cm, pw;
        std::string error;
      };
      std::vector<TrainOut> trained(train.size());
      parallel_for(train.size(), opt.jobs, [&](std::size_t t) {
        try {
          const auto trial = make_trial(train[t]);
          if (plan.search_cm) trained[t].cm = best_params_per_signal(trial, cm_grid, plan.criterion, opt.quality);
          if (plan.search_pw) trained[t].pw = best_params_per_signal(trial, pw_grid, plan.criterion, opt.quality);
        } catch (const std::exception& ex) {
          trained[t].error = ex.what();
        }
      });
      std::vector<MaskParams> cm_best, pw_best;
      for (std::size_t t = 0; t < train.size(); ++t) {
        const auto& id = loaded[train[t]].id;
        const auto& out = trained[t];
        if (!out.error.empty()) {
          report.trials.push_back({"train", id, noise_name, snr, "", {}, std::nullopt, out.error});
          continue;
        }
        for (const auto* b : {&out.cm, &out.pw}) {
          if (!*b) continue;
          report.trials.push_back(
              {"train", id, noise_name, snr, mask_name((*b)->params), param_columns((*b)->params), (*b)->score, ""});
          (b == &out.cm ? cm_best : pw_best).push_back((*b)->params);
        }
      }
      require(!(plan.search_cm && cm_best.empty()) && !(plan.search_pw && pw_best.empty()),
              fmt::format("subgroup {} dB / {}: every training utterance failed", snr, noise_name));

      std::vector<MaskParams> masks = {rule::Wiener{}, rule::Binary{1.0}};
      if (plan.search_cm) {
        masks.push_back(median_map(cm_best, cm_grid));
        report.params.push_back({noise_name, snr, "cm", param_columns(masks.back()), cm_best.size()});
      }
      if (plan.search_pw) {
        masks.push_back(median_map(pw_best, pw_grid));
        report.params.push_back({noise_name, snr, "pw", param_columns(masks.back()), pw_best.size()});
      }

      // Testing: unprocessed mixture plus every mask, on each test utterance.
      struct TestOut {
        std::vector<metrics::MetricScore> scores;  // [0] = noisy, then masks
        std::string error;
      };
      std::vector<TestOut> tested(test.size());
      parallel_for(test.size(), opt.jobs, [&](std::size_t t) {
        try {
          const auto trial = make_trial(test[t]);
          const auto key = trial_key(trial.id, noise_name, snr, "noisy", {});
          tested[t].scores.push_back(score_signal(trial, key, trial.noisy, opt.quality));
          for (const auto& m : masks) tested[t].scores.push_back(evaluate(trial, m, opt.quality));
        } catch (const std::exception& ex) {
          tested[t].error = ex.what();
        }
      });

      const std::size_t columns = masks.size() + 1;
      std::vector<std::vector<double>> ncm(columns), quality(columns);
      std::vector<bool> all_quality(columns, true);
      auto name_of = [&](std::size_t c) { return c == 0 ? std::string("noisy") : mask_name(masks[c - 1]); };
      auto cols_of = [&](std::size_t c) { return c == 0 ? ParamColumns{} : param_columns(masks[c - 1]); };
      for (std::size_t t = 0; t < test.size(); ++t) {
        const auto& id = loaded[test[t]].id;
        if (!tested[t].error.empty()) {
          report.trials.push_back({"test", id, noise_name, snr, "", {}, std::nullopt, tested[t].error});
          continue;
        }
        for (std::size_t c = 0; c < columns; ++c) {
          const auto& s = tested[t].scores[c];
          report.trials.push_back({"test", id, noise_name, snr, name_of(c), cols_of(c), s, ""});
          ncm[c].push_back(s.ncm);
          if (s.quality) quality[c].push_back(*s.quality);
          else all_quality[c] = false;
        }
      }
      require(!ncm[0].empty(), fmt::format("subgroup {} dB / {}: every test utterance failed", snr, noise_name));
      for (std::size_t c = 0; c < columns; ++c) {
        ScoreRow row{noise_name, snr, name_of(c), cols_of(c), summarize(ncm[c]), std::nullopt, ncm[c].size()};
        if (all_quality[c]) row.quality = summarize(quality[c]);
        report.scores.push_back(std::move(row));
      }
    }
  }

  const auto& stft = plan.stft;
  report.run_info = {
      {"seed", plan.seed},
      {"criterion", criterion_name(plan.criterion)},
      {"snr_levels_db", plan.snr_levels_db},
      {"noises", noises},
      {"mixture_snr", "10*log10(P_speech/P_noise), P = mean square over the full utterance; "
                      "noise taken from a seeded random offset of one file per profile"},
      {"snr_floor", plan.snr_floor},
      {"stft", {{"window", "sqrt-periodic-hann"}, {"window_len", stft.window_len}, {"fft_size", stft.fft_size},
                {"hop", stft.hop}}},
      {"oracle_snr", "single-frame periodograms of clean and scaled noise"},
      {"grid_cm_size", cm_grid.size()},
      {"grid_pw_size", pw_grid.size()},
      {"median_map", "per-parameter lower median on log/dB scale, snapped to nearest grid value"},
      {"baselines", {"noisy", "wiener", "binary (mu0 = 0 dB)"}},
      {"split", {{"train_count", plan.train_count},
                 {"test_count", plan.test_count ? nlohmann::json(*plan.test_count) : nlohmann::json("rest")}}},
  };
  return report;
}

// ---------------------------------------------------------------------------
// Report files.

inline std::string params_csv(const ExperimentReport& r) {
  std::string out = "noise,snr_db,mask,param1,param2,n_train\n";
  for (const auto& p : r.params) {
    out += fmt::format("{},{},{},{},{},{}\n", p.noise, detail::fmt_num(p.snr_db), p.mask,
                       format_param(p.params.param1), format_param(p.params.param2), p.n_train);
  }
  return out;
}

inline std::string scores_csv(const ExperimentReport& r) {
  std::string out = "noise,snr_db,mask,param1,param2,mean_ncm,mean_quality,median_ncm,q1,q3,n\n";
  for (const auto& s : r.scores) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.noise, detail::fmt_num(s.snr_db), s.mask,
                       format_param(s.params.param1), format_param(s.params.param2), detail::fmt_num(s.ncm.mean),
                       s.quality ? detail::fmt_num(s.quality->mean) : "", detail::fmt_num(s.ncm.median),
                       detail::fmt_num(s.ncm.q1), detail::fmt_num(s.ncm.q3), s.n);
  }
  return out;
}

inline std::string trials_csv(const ExperimentReport& r) {
  std::string out = "set,id,noise,snr_db,mask,param1,param2,ncm,quality,d_p,error\n";
  for (const auto& t : r.trials) {
    std::string err = t.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", t.set, t.id, t.noise,
                       std::isnan(t.snr_db) ? "" : detail::fmt_num(t.snr_db), t.mask, format_param(t.params.param1),
                       format_param(t.params.param2), t.score ? detail::fmt_num(t.score->ncm) : "",
                       t.score ? detail::fmt_opt(t.score->quality) : "", t.score ? detail::fmt_opt(t.score->d_p) : "",
                       err.empty() ? "" : "\"" + err + "\"");
  }
  return out;
}

inline std::string split_csv(const ExperimentReport& r) {
  std::string out = "noise,snr_db,set,id\n";
  for (const auto& s : r.split) out += fmt::format("{},{},{},{}\n", s.noise, detail::fmt_num(s.snr_db), s.set, s.id);
  return out;
}

inline std::string boxplot_file_name(const std::string& noise, double snr_db) {
  return fmt::format("{}_snr{:g}.tsv", noise, snr_db);
}

inline std::map<std::string, std::string> boxplot_tsvs(const ExperimentReport& r) {
  std::map<std::string, std::string> files;
  for (const auto& s : r.scores) {
    auto& text = files[boxplot_file_name(s.noise, s.snr_db)];
    if (text.empty()) {
      text = "mask\tmin\tq1\tmedian\tq3\tmax\tquality_q1\tquality_median\tquality_q3\tn\n";
    }
    const auto& q = s.quality;
    text += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", s.mask, detail::fmt_num(s.ncm.min),
                        detail::fmt_num(s.ncm.q1), detail::fmt_num(s.ncm.median), detail::fmt_num(s.ncm.q3),
                        detail::fmt_num(s.ncm.max), q ? detail::fmt_num(q->q1) : "",
                        q ? detail::fmt_num(q->median) : "", q ? detail::fmt_num(q->q3) : "", s.n);
  }
  return files;
}

inline void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  write_file_atomic(dir / "params.csv", params_csv(r));
  write_file_atomic(dir / "scores.csv", scores_csv(r));
  write_file_atomic(dir / "trials.csv", trials_csv(r));
  write_file_atomic(dir / "split.csv", split_csv(r));
  for (const auto& [name, text] : boxplot_tsvs(r)) write_file_atomic(dir / "boxplot" / name, text);
  write_file_atomic(dir / "run_info.json", r.run_info.dump(2) + "\n");
}

}  // namespace maskbench::harness
