#pragma once

#include <cstddef>
#include <string>

#include <fmt/format.h>

#include "maskbench/error.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/snr.hpp"
#include "maskbench/stft.hpp"
#include "maskbench/tf_matrix.hpp"

namespace maskbench {

enum class MaskKind { kSoft, kHard };

// Per-bin gains. Soft gains lie in [0, 1]; hard gains are exactly 0 or 1.
struct GainMask {
  TfMatrix<double> gains;
  MaskKind kind = MaskKind::kSoft;

  static GainMask constant(std::size_t bins, std::size_t frames, double value, MaskKind kind) {
    return {TfMatrix<double>(bins, frames, value), kind};
  }
};

inline GainMask build_mask(const MaskParams& params, const SnrField& snr) {
  validate(params);
  GainMask mask{TfMatrix<double>(snr.num_bins(), snr.num_frames()),
                is_hard(params) ? MaskKind::kHard : MaskKind::kSoft};
  std::visit(
      [&](const auto& rule) {
        auto out = mask.gains.values();
        auto xi = snr.values();
        for (std::size_t i = 0; i < xi.size(); ++i) out[i] = gain(rule, xi[i]);
      },
      params);
  return mask;
}

// Element-wise complex scaling; the noisy phase is kept.
inline Spectrogram apply_mask(const GainMask& mask, const Spectrogram& noisy) {
  require(mask.gains.same_shape(noisy.num_bins(), noisy.num_frames()),
          "apply_mask: mask and spectrogram shapes differ");
  Spectrogram out = noisy;
  auto bins = out.bins();
  auto g = mask.gains.values();
  for (std::size_t i = 0; i < bins.size(); ++i) bins[i] *= g[i];
  return out;
}

// Rows are frequency bins, columns are frames.
inline std::string mask_to_tsv(const GainMask& mask) {
  std::string out;
  for (std::size_t k = 0; k < mask.gains.num_bins(); ++k) {
    for (std::size_t l = 0; l < mask.gains.num_frames(); ++l) {
      if (l) out += '\t';
      out += fmt::format("{:.9g}", mask.gains.at(k, l));
    }
    out += '\n';
  }
  return out;
}

}  // namespace maskbench
