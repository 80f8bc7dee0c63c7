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

#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "soundscene/nn/network.hpp"

namespace soundscene::nn {

// Checkpoint container: magic, version, a JSON header (network config, seed,
// epoch, losses, config hash), then every parameter tensor and batch-norm
// running statistic by name.

namespace detail_ckpt {

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

template <typename S>
inline void put_tensor(std::ofstream& f, const std::string& name, const Matrix<S>& m) {
  put<std::uint32_t>(f, static_cast<std::uint32_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint8_t>(f, static_cast<std::uint8_t>(sizeof(S)));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(m.cols()));
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(m.size())));
}

}  // namespace detail_ckpt

template <typename S>
inline void save_checkpoint(Crnn<S>& net, const std::string& path,
                            const nlohmann::json& extra = {}) {
  nlohmann::json header = extra;
  header["network"] = net.config().to_json();
  header["scalar_bytes"] = sizeof(S);
  const std::string header_str = header.dump();

  std::ofstream f(path, std::ios::binary);
  check(f.good(), "cannot open for writing: " + path);
  f.write("SSCP", 4);
  detail_ckpt::put<std::uint32_t>(f, 1);
  detail_ckpt::put<std::uint32_t>(f, static_cast<std::uint32_t>(header_str.size()));
  f.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  auto params = net.params();
  const auto bns = net.batchnorms();
  detail_ckpt::put<std::uint32_t>(f, static_cast<std::uint32_t>(params.size() + 2 * bns.size()));
  for (const auto* p : params) detail_ckpt::put_tensor<S>(f, p->name, p->value);
  for (const auto& [name, bn] : bns) {
    detail_ckpt::put_tensor<S>(f, name + ".running_mean", bn->running_mean());
    detail_ckpt::put_tensor<S>(f, name + ".running_var", bn->running_var());
  }
  check(f.good(), "write failed: " + path);
}

inline nlohmann::json read_checkpoint_header(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  check(f.good() && std::memcmp(magic, "SSCP", 4) == 0, "not a checkpoint file: " + path);
  const auto version = detail_ckpt::get<std::uint32_t>(f);
  check(version == 1, "unsupported checkpoint version: " + path);
  const auto header_len = detail_ckpt::get<std::uint32_t>(f);
  std::string header_str(header_len, '\0');
  f.read(header_str.data(), header_len);
  check(f.good(), "truncated checkpoint header: " + path);
  return nlohmann::json::parse(header_str);
}

/// Load a checkpoint into a network with a matching configuration. Tensor
/// scalar width must match the network's (float training builds and double
/// verification builds write distinct files).
template <typename S>
inline nlohmann::json load_checkpoint(Crnn<S>& net, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "cannot open checkpoint: " + path);
  char magic[4];
  f.read(magic, 4);
  check(f.good() && std::memcmp(magic, "SSCP", 4) == 0, "not a checkpoint file: " + path);
  const auto version = detail_ckpt::get<std::uint32_t>(f);
  check(version == 1, "unsupported checkpoint version: " + path);
  const auto header_len = detail_ckpt::get<std::uint32_t>(f);
  std::string header_str(header_len, '\0');
  f.read(header_str.data(), header_len);
  const auto header = nlohmann::json::parse(header_str);
  check(header.at("network").dump() == net.config().to_json().dump(),
        "checkpoint network configuration does not match: " + path);

  std::map<std::string, Matrix<S>> tensors;
  const auto n = detail_ckpt::get<std::uint32_t>(f);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto name_len = detail_ckpt::get<std::uint32_t>(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const auto scalar = detail_ckpt::get<std::uint8_t>(f);
    check(scalar == sizeof(S), "checkpoint scalar width mismatch: " + path);
    const auto rows = detail_ckpt::get<std::uint64_t>(f);
    const auto cols = detail_ckpt::get<std::uint64_t>(f);
    Matrix<S> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    f.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(sizeof(S) * rows * cols));
    tensors[name] = std::move(m);
  }
  check(f.good(), "truncated checkpoint: " + path);

  for (auto* p : net.params()) {
    const auto it = tensors.find(p->name);
    check(it != tensors.end(), "checkpoint is missing tensor: " + p->name);
    check(it->second.rows() == p->value.rows() && it->second.cols() == p->value.cols(),
          "checkpoint tensor shape mismatch: " + p->name);
    p->value = it->second;
  }
  for (auto& [name, bn] : net.batchnorms_mutable()) {
    const auto mean_it = tensors.find(name + ".running_mean");
    const auto var_it = tensors.find(name + ".running_var");
    check(mean_it != tensors.end() && var_it != tensors.end(),
          "checkpoint is missing batch-norm statistics: " + name);
    bn->set_running(mean_it->second, var_it->second);
  }
  return header;
}

}  // namespace soundscene::nn
