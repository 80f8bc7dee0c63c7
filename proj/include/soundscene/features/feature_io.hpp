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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "soundscene/features/labels.hpp"
#include "soundscene/features/tensor.hpp"

namespace soundscene::features {

// Binary containers: a fixed little-endian header (magic, version, dims,
// dtype, hop, sample rate) followed by the payload. Feature payloads are
// float32, label payloads are single bytes.

namespace detail_io {

template <typename T>
inline void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
inline T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace detail_io

inline void write_feature_file(const std::string& path, const FeatureTensor& t) {
  std::ofstream f(path, std::ios::binary);
  check(f.good(), "cannot open for writing: " + path);
  f.write("SSFT", 4);
  detail_io::put<std::uint32_t>(f, 1);  // version
  detail_io::put<std::uint32_t>(f, 1);  // dtype: float32
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(t.frames()));
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(t.bands()));
  detail_io::put<std::uint32_t>(f, 2);  // channels
  detail_io::put<double>(f, t.frame_hop_s);
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(t.sample_rate));
  for (int c = 0; c < 2; ++c) {
    for (Eigen::Index r = 0; r < t.frames(); ++r) {
      for (Eigen::Index b = 0; b < t.bands(); ++b) {
        detail_io::put<float>(f, static_cast<float>(t.channels[c](r, b)));
      }
    }
  }
  check(f.good(), "write failed: " + path);
}

inline FeatureTensor read_feature_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  check(f.good() && std::memcmp(magic, "SSFT", 4) == 0, "not a feature file: " + path);
  const auto version = detail_io::get<std::uint32_t>(f);
  check(version == 1, "unsupported feature file version: " + path);
  const auto dtype = detail_io::get<std::uint32_t>(f);
  check(dtype == 1, "unsupported feature dtype: " + path);
  const auto frames = detail_io::get<std::uint32_t>(f);
  const auto bands = detail_io::get<std::uint32_t>(f);
  const auto channels = detail_io::get<std::uint32_t>(f);
  check(channels == 2, "expected a two-channel feature file: " + path);
  FeatureTensor t;
  t.frame_hop_s = detail_io::get<double>(f);
  t.sample_rate = static_cast<int>(detail_io::get<std::uint32_t>(f));
  for (int c = 0; c < 2; ++c) {
    t.channels[c].resize(frames, bands);
    for (std::uint32_t r = 0; r < frames; ++r) {
      for (std::uint32_t b = 0; b < bands; ++b) {
        t.channels[c](r, b) = static_cast<double>(detail_io::get<float>(f));
      }
    }
  }
  check(f.good(), "truncated feature file: " + path);
  return t;
}

inline void write_label_file(const std::string& path, const LabelMatrix& labels) {
  std::ofstream f(path, std::ios::binary);
  check(f.good(), "cannot open for writing: " + path);
  f.write("SSLB", 4);
  detail_io::put<std::uint32_t>(f, 1);  // version
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(labels.frames()));
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(labels.cols()));
  detail_io::put<std::uint32_t>(f, static_cast<std::uint32_t>(labels.n_scenes));
  detail_io::put<double>(f, labels.frame_hop_s);
  for (Eigen::Index r = 0; r < labels.frames(); ++r)
    for (Eigen::Index c = 0; c < labels.cols(); ++c)
      detail_io::put<std::uint8_t>(f, labels.values(r, c));
  check(f.good(), "write failed: " + path);
}

inline LabelMatrix read_label_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  check(f.good() && std::memcmp(magic, "SSLB", 4) == 0, "not a label file: " + path);
  const auto version = detail_io::get<std::uint32_t>(f);
  check(version == 1, "unsupported label file version: " + path);
  const auto frames = detail_io::get<std::uint32_t>(f);
  const auto cols = detail_io::get<std::uint32_t>(f);
  LabelMatrix out;
  out.n_scenes = static_cast<int>(detail_io::get<std::uint32_t>(f));
  out.frame_hop_s = detail_io::get<double>(f);
  out.values.resize(frames, cols);
  for (std::uint32_t r = 0; r < frames; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) out.values(r, c) = detail_io::get<std::uint8_t>(f);
  check(f.good(), "truncated label file: " + path);
  return out;
}

}  // namespace soundscene::features
