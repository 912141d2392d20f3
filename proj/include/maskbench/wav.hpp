#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "maskbench/audio.hpp"
#include "maskbench/error.hpp"
#include "maskbench/io.hpp"

namespace maskbench::wav {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes a little-endian host");

enum class SampleFormat { kPcm16, kFloat32 };

namespace detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(std::string_view bytes, std::size_t offset) {
  require(offset + sizeof(T) <= bytes.size(), "truncated WAV header");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace detail

// Decodes a mono RIFF/WAVE image (PCM 16-bit or IEEE float 32-bit).
inline AudioBuffer decode(std::string_view bytes) {
  using detail::load;
  require(bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE",
          "not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view payload;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string_view id = bytes.substr(pos, 4);
    auto size = load<std::uint32_t>(bytes, pos + 4);
    std::size_t body = pos + 8;
    std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (id == "fmt ") {
      require(size >= 16, "malformed fmt chunk");
      format = load<std::uint16_t>(bytes, body);
      channels = load<std::uint16_t>(bytes, body + 2);
      rate = load<std::uint32_t>(bytes, body + 4);
      bits = load<std::uint16_t>(bytes, body + 14);
      if (format == detail::kFormatExtensible) {
        require(size >= 40, "malformed WAVE_FORMAT_EXTENSIBLE chunk");
        // first two bytes of the subformat GUID carry the base format tag
        format = load<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      payload = bytes.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  require(have_fmt, "WAV file has no fmt chunk");
  require(have_data, "WAV file has no data chunk");
  require(channels == 1, "multichannel WAV input is not supported (" + std::to_string(channels) +
                             " channels); downmix to mono first");
  require(rate > 0, "WAV sample rate is zero");

  std::vector<double> samples;
  if (format == detail::kFormatPcm && bits == 16) {
    samples.resize(payload.size() / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = load<std::int16_t>(payload, 2 * i) / 32768.0;
    }
  } else if (format == detail::kFormatFloat && bits == 32) {
    samples.resize(payload.size() / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = load<float>(payload, 4 * i);
    }
  } else {
    throw Error("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                std::to_string(bits) + " bits); expected PCM16 or float32");
  }
  return AudioBuffer(std::move(samples), static_cast<int>(rate));
}

inline std::string encode(const AudioBuffer& audio, SampleFormat fmt = SampleFormat::kFloat32) {
  using detail::store;
  const bool pcm = fmt == SampleFormat::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(audio.size() * block);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  store<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  store<std::uint32_t>(out, 16);
  store<std::uint16_t>(out, pcm ? detail::kFormatPcm : detail::kFormatFloat);
  store<std::uint16_t>(out, 1);
  store<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate()));
  store<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate()) * block);
  store<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  store<std::uint16_t>(out, bits);
  out += "data";
  store<std::uint32_t>(out, data_size);
  for (double s : audio.samples()) {
    if (pcm) {
      double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32767.0);
      store<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      store<float>(out, static_cast<float>(s));
    }
  }
  return out;
}

inline AudioBuffer read(const std::filesystem::path& path) {
  try {
    return decode(read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline void write(const std::filesystem::path& path, const AudioBuffer& audio,
                  SampleFormat fmt = SampleFormat::kFloat32) {
  write_file_atomic(path, encode(audio, fmt));
}

}  // namespace maskbench::wav
