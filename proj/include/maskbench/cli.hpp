#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"
#include "maskbench/harness/corpus.hpp"
#include "maskbench/harness/experiment.hpp"
#include "maskbench/harness/grids.hpp"
#include "maskbench/harness/mixing.hpp"
#include "maskbench/io.hpp"
#include "maskbench/log.hpp"
#include "maskbench/mask_spec.hpp"
#include "maskbench/masks.hpp"
#include "maskbench/metrics.hpp"
#include "maskbench/morphology.hpp"
#include "maskbench/optimum.hpp"
#include "maskbench/parallel.hpp"
#include "maskbench/snr.hpp"
#include "maskbench/stft.hpp"
#include "maskbench/wav.hpp"

namespace maskbench::cli {

namespace detail {

namespace fs = std::filesystem;

struct MaskFlags {
  std::string mask = "wiener";
  std::optional<std::string> mu, gamma, beta, eta, mu0;

  void add(CLI::App& app) {
    app.add_option("--mask", mask, "binary|wiener|cwiener|pw|cm")
        ->check(CLI::IsMember({"binary", "wiener", "cwiener", "pw", "cm"}));
    app.add_option("--mu", mu, "CM threshold (linear or e.g. 5dB)");
    app.add_option("--gamma", gamma, "CM slope");
    app.add_option("--beta", beta, "PW exponent");
    app.add_option("--eta", eta, "PW threshold (linear or dB)");
    app.add_option("--mu0", mu0, "BM threshold (linear or dB)");
  }

  MaskParams params() const {
    std::map<std::string, std::string> args;
    auto put = [&](const char* key, const std::optional<std::string>& v) {
      if (v) args[key] = *v;
    };
    put("mu", mu);
    put("gamma", gamma);
    put("beta", beta);
    put("eta", eta);
    put("mu0", mu0);
    return make_mask(mask, args);
  }
};

struct StftFlags {
  StftConfig cfg;
  void add(CLI::App& app) {
    app.add_option("--window-len", cfg.window_len, "analysis window length (samples)");
    app.add_option("--fft-size", cfg.fft_size, "FFT size");
    app.add_option("--hop", cfg.hop, "hop size (samples)");
  }
};

inline morphology::DbGrid parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  require(b != std::string::npos, "range must be lo:hi:step, got '" + text + "'");
  morphology::DbGrid g{parse_real(text.substr(0, a), "range lo"), parse_real(text.substr(a + 1, b - a - 1), "range hi"),
                       parse_real(text.substr(b + 1), "range step")};
  g.validate();
  return g;
}

inline AudioBuffer read_audio(const fs::path& p) {
  auto a = wav::read(p);
  if (a.sample_rate() != 16000) log::warn("{}: sample rate {} Hz (defaults are tuned for 16 kHz)", p.string(), a.sample_rate());
  return a;
}

inline wav::SampleFormat sample_format(const std::string& s) {
  return s == "pcm16" ? wav::SampleFormat::kPcm16 : wav::SampleFormat::kFloat32;
}

inline void emit(const std::optional<fs::path>& path, const std::string& text, std::ostream& out) {
  if (path) write_file_atomic(*path, text);
  else out << text;
}

inline std::string num(double v) { return fmt::format("{:.9g}", v); }

inline std::string params_text(const MaskParams& p) {
  const auto c = param_columns(p);
  return fmt::format("{},{},{}", mask_name(p), harness::format_param(c.param1), harness::format_param(c.param2));
}

}  // namespace detail

// Entry point shared by the executable and the tests. `args` excludes the
// program name. Returns 0 on success, 2 on usage errors, 1 on pipeline errors.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  using detail::num;

  CLI::App app{"Time-frequency mask toolkit: conformable, Wiener, binary and parametric Wiener masks", "maskbench"};
  app.require_subcommand(1);

  // enhance
  auto* enhance = app.add_subcommand("enhance", "apply a mask to a noisy recording");
  fs::path en_in, en_out;
  std::optional<fs::path> en_clean, en_noise, en_mask_out;
  double en_smoothing = 0.98;
  std::size_t en_noise_frames = 10;
  std::string en_floor = "-120dB", en_format = "float32";
  detail::MaskFlags en_mask;
  detail::StftFlags en_stft;
  enhance->add_option("--in", en_in, "noisy WAV")->required();
  enhance->add_option("--out", en_out, "enhanced WAV")->required();
  enhance->add_option("--clean", en_clean, "clean WAV (oracle SNR; needs --noise)");
  enhance->add_option("--noise", en_noise, "noise WAV (oracle SNR; needs --clean)");
  enhance->add_option("--smoothing", en_smoothing, "decision-directed smoothing factor");
  enhance->add_option("--noise-frames", en_noise_frames, "leading frames used for the noise PSD");
  enhance->add_option("--floor", en_floor, "SNR floor (linear or dB)");
  enhance->add_option("--mask-out", en_mask_out, "write the gain matrix as TSV");
  enhance->add_option("--format", en_format)->check(CLI::IsMember({"pcm16", "float32"}));
  en_mask.add(*enhance);
  en_stft.add(*enhance);

  // mix
  auto* mix = app.add_subcommand("mix", "mix speech and noise at a target SNR");
  fs::path mx_speech, mx_noise, mx_out;
  std::optional<fs::path> mx_noise_out;
  double mx_snr = 0.0;
  std::uint64_t mx_seed = 0;
  std::string mx_format = "float32";
  mix->add_option("--speech", mx_speech)->required();
  mix->add_option("--noise", mx_noise)->required();
  mix->add_option("--snr", mx_snr, "mixture SNR in dB")->required();
  mix->add_option("--seed", mx_seed, "noise offset seed");
  mix->add_option("--out", mx_out, "noisy WAV")->required();
  mix->add_option("--noise-out", mx_noise_out, "scaled noise WAV");
  mix->add_option("--format", mx_format)->check(CLI::IsMember({"pcm16", "float32"}));

  // mask-curve
  auto* curve = app.add_subcommand("mask-curve", "gain versus SNR as TSV");
  detail::MaskFlags cv_mask;
  std::string cv_range = "-60:60:1";
  std::optional<fs::path> cv_out;
  cv_mask.add(*curve);
  curve->add_option("--range", cv_range, "lo:hi:step in dB");
  curve->add_option("--out", cv_out);

  // morphology
  auto* morph = app.add_subcommand("morphology", "curve distances and cross-family fits");
  morph->require_subcommand(1);
  auto* mo_rmse = morph->add_subcommand("rmse", "RMSE between two gain curves");
  std::string mo_a, mo_b, mo_range = "-60:60:0.001";
  mo_rmse->add_option("--a", mo_a, "mask spec, e.g. cm:gamma=100,mu=0dB")->required();
  mo_rmse->add_option("--b", mo_b, "mask spec, e.g. binary:mu0=0dB")->required();
  mo_rmse->add_option("--range", mo_range, "lo:hi:step in dB");
  auto* mo_fit = morph->add_subcommand("fit", "fit the other family to a CM or PW target");
  std::string mo_target, mo_fit_range = "-60:60:0.001";
  std::optional<std::string> mo_init;
  std::uint64_t mo_seed = morphology::FitOptions{}.seed;
  mo_fit->add_option("--target", mo_target, "cm:... (fits PW) or pw:... (fits CM)")->required();
  mo_fit->add_option("--init", mo_init, "starting point spec of the fitted family");
  mo_fit->add_option("--range", mo_fit_range, "lo:hi:step in dB");
  mo_fit->add_option("--seed", mo_seed, "seed of the random start");
  auto* mo_curves = morph->add_subcommand("curves", "several gain curves side by side as TSV");
  std::vector<std::string> mo_specs;
  std::string mo_curve_range = "-60:60:0.5";
  std::optional<fs::path> mo_out;
  mo_curves->add_option("--spec", mo_specs, "mask spec (repeatable)")->required();
  mo_curves->add_option("--range", mo_curve_range, "lo:hi:step in dB");
  mo_curves->add_option("--out", mo_out);

  // verify-optimum
  auto* verify = app.add_subcommand("verify-optimum", "closed-form gain against the numeric cost minimizer");
  double vo_tol = 1e-6;
  std::optional<fs::path> vo_out;
  verify->add_option("--tol", vo_tol, "absolute gain tolerance");
  verify->add_option("--out", vo_out, "CSV file (default: stdout)");

  // metrics
  auto* met = app.add_subcommand("metrics", "NCM intelligibility and composite scores");
  met->require_subcommand(1);
  auto* me_ncm = met->add_subcommand("ncm", "NCM of one processed signal");
  fs::path me_clean, me_proc;
  std::optional<double> me_quality;
  me_ncm->add_option("--clean", me_clean)->required();
  me_ncm->add_option("--proc,--processed", me_proc)->required();
  me_ncm->add_option("--quality", me_quality, "external quality score in [0, 5]");
  auto* me_batch = met->add_subcommand("batch", "NCM for every entry of a JSON list");
  fs::path me_manifest;
  std::optional<fs::path> me_qcsv, me_out;
  me_batch->add_option("--manifest", me_manifest, "JSON: {entries: [{id, clean_path, processed_path}]}")->required();
  me_batch->add_option("--quality-csv", me_qcsv, "CSV with header id,score");
  me_batch->add_option("--out", me_out);
  std::size_t me_jobs = 1;
  me_batch->add_option("--jobs", me_jobs)->check(CLI::PositiveNumber);

  // grid
  auto* grid = app.add_subcommand("grid", "list the search grids; optionally fit CM to every PW point");
  std::string gr_family = "cm";
  bool gr_fit = false;
  std::size_t gr_jobs = default_jobs();
  std::optional<fs::path> gr_out;
  grid->add_option("--family", gr_family)->check(CLI::IsMember({"cm", "pw"}));
  grid->add_flag("--fit-cm", gr_fit, "fit CM to each PW grid point and report the achieved RMSE");
  grid->add_option("--jobs", gr_jobs)->check(CLI::PositiveNumber);
  grid->add_option("--out", gr_out);

  // experiment
  auto* exp = app.add_subcommand("experiment", "train/test mask selection over a corpus");
  fs::path ex_plan, ex_manifest, ex_out;
  std::optional<fs::path> ex_qcsv;
  std::optional<std::uint64_t> ex_seed;
  std::size_t ex_jobs = default_jobs();
  exp->add_option("--plan", ex_plan, "plan JSON")->required();
  exp->add_option("--manifest", ex_manifest, "corpus JSON")->required();
  exp->add_option("--out", ex_out, "report directory")->required();
  exp->add_option("--quality-csv", ex_qcsv, "external quality scores keyed by trial key");
  exp->add_option("--seed", ex_seed, "overrides the plan seed");
  exp->add_option("--jobs", ex_jobs)->check(CLI::PositiveNumber);

  // stft-check
  auto* sc = app.add_subcommand("stft-check", "analysis/synthesis round-trip SNR");
  std::optional<fs::path> sc_in;
  double sc_seconds = 2.0, sc_min = 60.0;
  std::uint64_t sc_seed = 0;
  detail::StftFlags sc_stft;
  sc->add_option("--in", sc_in, "WAV file (default: seeded white noise)");
  sc->add_option("--seconds", sc_seconds, "length of the generated noise");
  sc->add_option("--seed", sc_seed);
  sc->add_option("--min-snr", sc_min, "pass threshold in dB");
  sc_stft.add(*sc);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*enhance) {
      const auto noisy = detail::read_audio(en_in);
      require(en_clean.has_value() == en_noise.has_value(), "--clean and --noise must be given together");
      const auto params = en_mask.params();
      validate(params);
      const double floor = parse_power_ratio(en_floor);
      const auto noisy_spec = analyze(noisy, en_stft.cfg);
      std::optional<SnrField> snr;
      if (en_clean) {
        const auto clean = detail::read_audio(*en_clean);
        const auto noise = detail::read_audio(*en_noise);
        require(clean.size() == noisy.size() && noise.size() == noisy.size(),
                "clean, noise and noisy recordings must have equal length");
        snr = oracle_snr(analyze(clean, en_stft.cfg), analyze(noise, en_stft.cfg), floor);
      } else {
        const auto psd = leading_noise_psd(noisy_spec, en_noise_frames);
        snr = dd_snr(noisy_spec, psd, en_smoothing, floor);
      }
      const auto mask = build_mask(params, *snr);
      const auto enhanced = synthesize(apply_mask(mask, noisy_spec));
      wav::write(en_out, enhanced, detail::sample_format(en_format));
      if (en_mask_out) write_file_atomic(*en_mask_out, mask_to_tsv(mask));
      log::info("enhance: {} samples written to {}", enhanced.size(), en_out.string());
    } else if (*mix) {
      const auto speech = detail::read_audio(mx_speech);
      const auto noise = detail::read_audio(mx_noise);
      const auto r = harness::mix_at_snr(speech, noise, mx_snr, mx_seed);
      wav::write(mx_out, r.noisy, detail::sample_format(mx_format));
      if (mx_noise_out) wav::write(*mx_noise_out, r.scaled_noise, detail::sample_format(mx_format));
      out << fmt::format("offset={} gain={}\n", r.noise_offset, num(r.noise_gain));
    } else if (*curve) {
      const auto params = cv_mask.params();
      const auto g = detail::parse_range(cv_range);
      const auto rows = morphology::curve_dump({params, g}, g.step);
      detail::emit(cv_out, morphology::curve_tsv(rows), out);
    } else if (*morph) {
      if (*mo_rmse) {
        const double r = morphology::mask_rmse(parse_mask_spec(mo_a), parse_mask_spec(mo_b), detail::parse_range(mo_range));
        out << num(r) << "\n";
      } else if (*mo_fit) {
        morphology::FitOptions opt;
        opt.grid = detail::parse_range(mo_fit_range);
        opt.seed = mo_seed;
        const auto target = parse_mask_spec(mo_target);
        out << "target_mask,target_param1,target_param2,fit_mask,fit_param1,fit_param2,rmse,converged\n";
        if (const auto* cm = std::get_if<rule::Conformable>(&target)) {
          rule::ParametricWiener init{};
          if (mo_init) init = std::get<rule::ParametricWiener>(parse_mask_spec(*mo_init));
          const auto r = morphology::fit_pw_to_cm(*cm, init, opt);
          out << fmt::format("{},{},{},{}\n", detail::params_text(target), detail::params_text(r.params), num(r.rmse),
                             r.converged ? 1 : 0);
        } else if (const auto* pw = std::get_if<rule::ParametricWiener>(&target)) {
          rule::Conformable init{};
          if (mo_init) init = std::get<rule::Conformable>(parse_mask_spec(*mo_init));
          const auto r = morphology::fit_cm_to_pw(*pw, init, opt);
          out << fmt::format("{},{},{},{}\n", detail::params_text(target), detail::params_text(r.params), num(r.rmse),
                             r.converged ? 1 : 0);
        } else {
          throw Error("fit target must be a cm or pw spec");
        }
      } else if (*mo_curves) {
        const auto g = detail::parse_range(mo_curve_range);
        std::vector<std::vector<morphology::CurvePoint>> cols;
        std::string text = "xi_db";
        for (const auto& s : mo_specs) {
          cols.push_back(morphology::curve_dump({parse_mask_spec(s), g}, g.step));
          text += "\t" + s;
        }
        text += "\n";
        for (std::size_t i = 0; i < cols.front().size(); ++i) {
          text += num(cols.front()[i].xi_db);
          for (const auto& c : cols) text += "\t" + fmt::format("{:.12g}", c[i].gain);
          text += "\n";
        }
        detail::emit(mo_out, text, out);
      }
    } else if (*verify) {
      require(vo_tol > 0.0, "--tol must be positive");
      const auto report = verify_optimum(VerificationGrid::standard(), vo_tol);
      detail::emit(vo_out, report.to_csv(), out);
      err << fmt::format("verify-optimum: {} tuples, {} failures, max deviation {:.3e}\n", report.rows.size(),
                         report.failures, report.max_deviation);
      return report.failures == 0 ? 0 : 1;
    } else if (*met) {
      if (*me_ncm) {
        const auto clean = detail::read_audio(me_clean);
        const auto proc = detail::read_audio(me_proc);
        const auto s = metrics::MetricScore::make(metrics::ncm(clean, proc), me_quality);
        if (s.d_p) out << num(s.ncm) << "," << num(*s.quality) << "," << num(*s.d_p) << "\n";
        else out << num(s.ncm) << "\n";
      } else if (*me_batch) {
        const auto j = harness::detail::parse_json(read_file(me_manifest), me_manifest.string());
        const auto base = me_manifest.parent_path();
        std::map<std::string, double> quality;
        if (me_qcsv) quality = metrics::ingest_external_quality(*me_qcsv);
        const bool with_quality = me_qcsv.has_value();
        std::string text = with_quality ? "id,ncm,quality,d_p\n" : "id,ncm\n";
        const auto entries = harness::detail::field<nlohmann::json>(j, "entries", me_manifest.string());
        std::vector<std::string> rows(entries.size());
        parallel_for(entries.size(), me_jobs, [&](std::size_t i) {
          const auto& e = entries[i];
          const auto id = harness::detail::field<std::string>(e, "id", "entry");
          auto resolve = [&](const char* key) {
            fs::path p = harness::detail::field<std::string>(e, key, "entry " + id);
            return p.is_absolute() ? p : base / p;
          };
          try {
            const double n = metrics::ncm(detail::read_audio(resolve("clean_path")), detail::read_audio(resolve("processed_path")));
            if (!with_quality) {
              rows[i] = fmt::format("{},{}\n", id, num(n));
              return;
            }
            std::optional<double> q;
            if (auto it = quality.find(id); it != quality.end()) q = it->second;
            const auto s = metrics::MetricScore::make(n, q);
            rows[i] = fmt::format("{},{},{},{}\n", id, num(n), q ? num(*q) : "", s.d_p ? num(*s.d_p) : "");
          } catch (const Error& ex) {
            throw Error("entry '" + id + "': " + ex.what());
          }
        });
        for (const auto& r : rows) text += r;
        detail::emit(me_out, text, out);
      }
    } else if (*grid) {
      std::string text;
      if (gr_fit) {
        require(gr_family == "pw", "--fit-cm needs --family pw");
        const auto pts = harness::grid_pw();
        std::vector<morphology::FitResult<rule::Conformable>> fits(pts.size());
        parallel_for(pts.size(), gr_jobs, [&](std::size_t i) {
          fits[i] = morphology::fit_cm_to_pw(std::get<rule::ParametricWiener>(pts[i]), rule::Conformable{});
        });
        text = "beta,eta_db,gamma,mu_db,rmse,converged\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const auto t = param_columns(pts[i]);
          const auto f = param_columns(fits[i].params);
          text += fmt::format("{},{},{},{},{},{}\n", num(t.param1), num(t.param2), num(f.param1), num(f.param2),
                              num(fits[i].rmse), fits[i].converged ? 1 : 0);
          worst = std::max(worst, fits[i].rmse);
        }
        err << "max rmse " << num(worst) << "\n";
      } else {
        const auto pts = gr_family == "cm" ? harness::grid_cm() : harness::grid_pw();
        text = gr_family == "cm" ? "gamma,mu_db\n" : "beta,eta_db\n";
        for (const auto& p : pts) {
          const auto c = param_columns(p);
          text += num(c.param1) + "," + num(c.param2) + "\n";
        }
      }
      detail::emit(gr_out, text, out);
    } else if (*exp) {
      auto plan = harness::load_plan(ex_plan);
      if (ex_seed) plan.seed = *ex_seed;
      const auto manifest = harness::load_manifest(ex_manifest);
      if (manifest.sample_rate != 16000) log::warn("manifest sample rate {} Hz (defaults are tuned for 16 kHz)", manifest.sample_rate);
      harness::ExperimentOptions opt;
      opt.jobs = ex_jobs;
      if (ex_qcsv) opt.quality = harness::quality_from_table(metrics::ingest_external_quality(*ex_qcsv));
      const auto report = harness::run_experiment(plan, manifest, opt);
      harness::write_report(report, ex_out);
      out << harness::scores_csv(report);
    } else if (*sc) {
      const auto& cfg = sc_stft.cfg;
      cfg.validate();
      AudioBuffer x = [&] {
        if (sc_in) return detail::read_audio(*sc_in);
        require(sc_seconds > 0.0, "--seconds must be positive");
        std::mt19937_64 rng(sc_seed);
        std::normal_distribution<double> gauss;
        std::vector<double> v(static_cast<std::size_t>(sc_seconds * 16000.0));
        for (double& s : v) s = gauss(rng);
        return AudioBuffer(std::move(v), 16000);
      }();
      const auto y = synthesize(analyze(x, cfg));
      // interior: samples covered by a full set of overlapping frames
      const std::size_t frames = cfg.frame_count(x.size());
      const std::size_t lo = cfg.window_len, hi = (frames - 1) * cfg.hop;
      require(hi > lo, "stft-check: signal too short for an interior region");
      double sig = 0.0, e = 0.0;
      for (std::size_t n = lo; n < hi; ++n) {
        sig += x.data()[n] * x.data()[n];
        e += (x.data()[n] - y.data()[n]) * (x.data()[n] - y.data()[n]);
      }
      const double snr = e == 0.0 ? INFINITY : 10.0 * std::log10(sig / e);
      out << "snr_db=" << num(snr) << "\n";
      return snr >= sc_min ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace maskbench::cli
