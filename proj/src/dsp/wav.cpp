// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

template <typename T>
void put(std::vector<char>& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& in, std::size_t offset) {
  if (offset + sizeof(T) > in.size()) throw IoError("truncated WAV file");
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

}  // namespace

void write_wav(const std::string& path, const Waveform& x, WavFormat format) {
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto rate = static_cast<std::uint32_t>(std::lround(x.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * block_align);

  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put<std::uint32_t>(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * block_align);
  put<std::uint16_t>(out, block_align);
  put<std::uint16_t>(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put<std::uint32_t>(out, data_bytes);
  for (double v : x.samples) {
    if (format == WavFormat::kPcm16) {
      const double clipped = std::clamp(v, -1.0, 1.0);
      put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clipped * 32767.0)));
    } else {
      put<float>(out, static_cast<float>(v));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing '" + path + "'");
}

Waveform read_wav(const std::string& path, std::optional<double> expected_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::vector<char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 12 || std::memcmp(in.data(), "RIFF", 4) != 0 || std::memcmp(in.data() + 8, "WAVE", 4) != 0) {
    throw IoError("'" + path + "' is not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= in.size()) {
    const std::string id(in.data() + pos, 4);
    const auto size = get<std::uint32_t>(in, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > in.size()) throw IoError("truncated chunk in '" + path + "'");
    if (id == "fmt ") {
      format = get<std::uint16_t>(in, body);
      channels = get<std::uint16_t>(in, body + 2);
      rate = get<std::uint32_t>(in, body + 4);
      bits = get<std::uint16_t>(in, body + 14);
      if (format == 0xFFFE && size >= 26) format = get<std::uint16_t>(in, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("data chunk before fmt chunk in '" + path + "'");
      if (channels != 1) throw IoError("only mono WAV files are supported");
      if (expected_rate && std::abs(*expected_rate - rate) > 1e-9) {
        throw IoError("sample rate " + std::to_string(rate) + " Hz of '" + path + "' does not match configured " +
                      std::to_string(static_cast<long>(*expected_rate)) + " Hz");
      }
      Waveform x;
      x.sample_rate = rate;
      if (format == kFormatPcm && bits == 16) {
        x.samples.resize(size / 2);
        for (std::size_t i = 0; i < x.samples.size(); ++i) {
          x.samples[i] = get<std::int16_t>(in, body + 2 * i) / 32767.0;
        }
      } else if (format == kFormatFloat && bits == 32) {
        x.samples.resize(size / 4);
        for (std::size_t i = 0; i < x.samples.size(); ++i) x.samples[i] = get<float>(in, body + 4 * i);
      } else {
        throw IoError("unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
      }
      return x;
    }
    pos = body + size + (size & 1U);
  }
  throw IoError("no data chunk in '" + path + "'");
}

}  // namespace fpvoc::dsp
