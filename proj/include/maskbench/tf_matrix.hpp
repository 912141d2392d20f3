#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maskbench/error.hpp"

namespace maskbench {

// Dense (bin, frame) matrix with the same frame-major layout as Spectrogram.
template <typename T>
class TfMatrix {
 public:
  TfMatrix() = default;
  TfMatrix(std::size_t num_bins, std::size_t num_frames, T fill = T{})
      : bins_(num_bins), frames_(num_frames), data_(num_bins * num_frames, fill) {}

  std::size_t num_bins() const { return bins_; }
  std::size_t num_frames() const { return frames_; }
  std::size_t size() const { return data_.size(); }

  T& at(std::size_t k, std::size_t frame) { return data_[frame * bins_ + k]; }
  const T& at(std::size_t k, std::size_t frame) const { return data_[frame * bins_ + k]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(std::size_t num_bins, std::size_t num_frames) const {
    return bins_ == num_bins && frames_ == num_frames;
  }

 private:
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  std::vector<T> data_;
};

}  // namespace maskbench
