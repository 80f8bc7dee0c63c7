// Copyright 2026 The soundscene authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "soundscene/audio/clip.hpp"

namespace soundscene::audio {

enum class WavFormat { pcm16, float32 };

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>((v >> 16) & 0xFF));
  s.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

/// Write a mono WAV file, PCM16 or IEEE float32.
inline void write_wav(const std::string& path, const AudioClip& clip,
                      WavFormat format = WavFormat::float32) {
  check(!clip.samples.empty(), "empty audio");
  const std::uint16_t channels = 1;
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t fmt_tag = format == WavFormat::pcm16 ? 1 : 3;
  const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate);
  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size()) * bytes_per_sample;
  const bool has_fact = format == WavFormat::float32;

  std::string out;
  out.reserve(data_size + 64);
  out += "RIFF";
  detail::put_u32(out, 4 + 8 + 16 + (has_fact ? 12 : 0) + 8 + data_size);
  out += "WAVE";
  out += "fmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, fmt_tag);
  detail::put_u16(out, channels);
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * channels * bytes_per_sample);
  detail::put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  detail::put_u16(out, bits);
  if (has_fact) {
    out += "fact";
    detail::put_u32(out, 4);
    detail::put_u32(out, static_cast<std::uint32_t>(clip.samples.size()));
  }
  out += "data";
  detail::put_u32(out, data_size);

  if (format == WavFormat::pcm16) {
    for (double s : clip.samples) {
      const long v = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
      const auto q = static_cast<std::int16_t>(std::clamp<long>(v, -32768, 32767));
      detail::put_u16(out, static_cast<std::uint16_t>(q));
    }
  } else {
    for (double s : clip.samples) {
      const float f = static_cast<float>(s);
      std::uint32_t bitsle;
      std::memcpy(&bitsle, &f, 4);
      detail::put_u32(out, bitsle);
    }
  }

  std::ofstream file(path, std::ios::binary);
  check(file.good(), "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  check(file.good(), "write failed: " + path);
}

/// Read a mono WAV file (PCM16 or IEEE float32). Unknown chunks are skipped.
inline AudioClip read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  check(file.good(), "cannot open: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  check(bytes.size() >= 44, "not a WAV file (too short): " + path);
  check(std::memcmp(bytes.data(), "RIFF", 4) == 0 && std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
        "not a WAV file: " + path);

  std::uint16_t fmt_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = detail::get_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) fail("truncated WAV chunk: " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      check(size >= 16, "malformed fmt chunk: " + path);
      fmt_tag = detail::get_u16(bytes.data() + body);
      channels = detail::get_u16(bytes.data() + body + 2);
      rate = detail::get_u32(bytes.data() + body + 4);
      bits = detail::get_u16(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word aligned
  }

  check(fmt_tag == 1 || fmt_tag == 3, "unsupported WAV format tag: " + path);
  check(channels == 1, "expected mono WAV: " + path);
  check(data != nullptr, "WAV has no data chunk: " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  if (fmt_tag == 1) {
    check(bits == 16, "only 16-bit PCM supported: " + path);
    const std::size_t n = data_size / 2;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(detail::get_u16(data + 2 * i));
      clip.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else {
    check(bits == 32, "only 32-bit float supported: " + path);
    const std::size_t n = data_size / 4;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = detail::get_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      clip.samples[i] = static_cast<double>(f);
    }
  }
  check(!clip.samples.empty(), "empty audio");
  check(clip.sample_rate > 0, "invalid sample rate in WAV: " + path);
  return clip;
}

}  // namespace soundscene::audio
