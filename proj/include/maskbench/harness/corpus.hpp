#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/error.hpp"
#include "maskbench/io.hpp"
#include "maskbench/snr.hpp"
#include "maskbench/stft.hpp"

namespace maskbench::harness {

struct CorpusEntry {
  std::string id;
  std::filesystem::path speech_path;
};

struct NoiseProfile {
  std::string name;
  std::filesystem::path noise_path;
};

struct CorpusManifest {
  int sample_rate = 16000;
  std::vector<CorpusEntry> entries;
  std::vector<NoiseProfile> noise_profiles;

  const NoiseProfile& profile(const std::string& name) const {
    for (const auto& p : noise_profiles) {
      if (p.name == name) return p;
    }
    throw Error("unknown noise profile '" + name + "'");
  }
};

namespace detail {

inline nlohmann::json parse_json(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(source + ": invalid JSON: " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  require(j.is_object() && j.contains(key), where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// Relative paths are resolved against `base_dir`. File existence is not
// checked here; unreadable entries become error rows when the run uses them.
inline CorpusManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                                     const std::string& source = "manifest") {
  const auto j = detail::parse_json(text, source);
  CorpusManifest m;
  if (j.contains("sample_rate")) m.sample_rate = detail::field<int>(j, "sample_rate", source);
  require(m.sample_rate > 0, source + ": sample_rate must be positive");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };

  std::set<std::string> ids;
  for (const auto& e : detail::field<nlohmann::json>(j, "entries", source)) {
    CorpusEntry entry{detail::field<std::string>(e, "id", source + " entry"),
                      resolve(detail::field<std::string>(e, "speech_path", source + " entry"))};
    require(!entry.id.empty(), source + ": empty entry id");
    require(ids.insert(entry.id).second, source + ": duplicate entry id '" + entry.id + "'");
    m.entries.push_back(std::move(entry));
  }
  std::set<std::string> names;
  if (j.contains("noise_profiles")) {
    for (const auto& n : j.at("noise_profiles")) {
      NoiseProfile p{detail::field<std::string>(n, "name", source + " noise profile"),
                     resolve(detail::field<std::string>(n, "noise_path", source + " noise profile"))};
      require(names.insert(p.name).second, source + ": duplicate noise profile '" + p.name + "'");
      m.noise_profiles.push_back(std::move(p));
    }
  }
  return m;
}

inline CorpusManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path(), path.string());
}

enum class Criterion { kQuality, kIntelligibility, kComposite };

inline Criterion parse_criterion(const std::string& s) {
  if (s == "quality") return Criterion::kQuality;
  if (s == "intelligibility") return Criterion::kIntelligibility;
  if (s == "composite") return Criterion::kComposite;
  throw Error("unknown criterion '" + s + "' (quality|intelligibility|composite)");
}

inline std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kQuality: return "quality";
    case Criterion::kIntelligibility: return "intelligibility";
    case Criterion::kComposite: return "composite";
  }
  return "?";
}

struct ExperimentPlan {
  std::vector<double> snr_levels_db{-10.0, 0.0, 5.0};
  std::vector<std::string> noises;  // empty: every profile in the manifest
  bool search_cm = true;
  bool search_pw = true;
  Criterion criterion = Criterion::kIntelligibility;
  std::size_t train_count = 100;
  std::optional<std::size_t> test_count;  // unset: all remaining entries
  std::uint64_t seed = 1;
  double snr_floor = kDefaultSnrFloor;
  StftConfig stft{};
};

inline ExperimentPlan parse_plan(const std::string& text, const std::string& source = "plan") {
  const auto j = detail::parse_json(text, source);
  require(j.is_object(), source + ": plan must be a JSON object");
  ExperimentPlan plan;
  if (j.contains("snr_levels_db")) plan.snr_levels_db = detail::field<std::vector<double>>(j, "snr_levels_db", source);
  require(!plan.snr_levels_db.empty(), source + ": snr_levels_db is empty");
  if (j.contains("noises")) plan.noises = detail::field<std::vector<std::string>>(j, "noises", source);
  if (j.contains("mask_family")) {
    std::vector<std::string> fams;
    if (j.at("mask_family").is_array()) {
      fams = detail::field<std::vector<std::string>>(j, "mask_family", source);
    } else {
      fams.push_back(detail::field<std::string>(j, "mask_family", source));
    }
    plan.search_cm = plan.search_pw = false;
    for (const auto& f : fams) {
      if (f == "cm") plan.search_cm = true;
      else if (f == "pw") plan.search_pw = true;
      else if (f == "both") plan.search_cm = plan.search_pw = true;
      else throw Error(source + ": unknown mask_family '" + f + "' (cm|pw|both)");
    }
  }
  if (j.contains("criterion")) plan.criterion = parse_criterion(detail::field<std::string>(j, "criterion", source));
  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (s.contains("train_count")) plan.train_count = detail::field<std::size_t>(s, "train_count", source + " split");
    if (s.contains("test_count")) plan.test_count = detail::field<std::size_t>(s, "test_count", source + " split");
  }
  require(plan.train_count > 0, source + ": train_count must be positive");
  require(!plan.test_count || *plan.test_count > 0, source + ": test_count must be positive");
  if (j.contains("seed")) plan.seed = detail::field<std::uint64_t>(j, "seed", source);
  if (j.contains("snr_floor")) plan.snr_floor = detail::field<double>(j, "snr_floor", source);
  require(plan.snr_floor > 0.0, source + ": snr_floor must be > 0");
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    if (s.contains("window_len")) plan.stft.window_len = detail::field<std::size_t>(s, "window_len", source);
    if (s.contains("fft_size")) plan.stft.fft_size = detail::field<std::size_t>(s, "fft_size", source);
    if (s.contains("hop")) plan.stft.hop = detail::field<std::size_t>(s, "hop", source);
    plan.stft.validate();
  }
  return plan;
}

inline ExperimentPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_file(path), path.string());
}

}  // namespace maskbench::harness
