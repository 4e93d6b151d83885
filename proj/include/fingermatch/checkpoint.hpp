// Copyright 2026 The fingermatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef FINGERMATCH_CHECKPOINT_HPP
#define FINGERMATCH_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fingermatch/errors.hpp"
#include "fingermatch/network.hpp"

namespace fingermatch {

// Checkpoint container layout (all integers little-endian):
//   magic "FMCK" | uint32 version | uint64 json_len | config JSON bytes |
//   uint32 tensor_count | per tensor:
//     uint32 name_len | name bytes | uint32 ndim | uint32 dims[ndim] |
//     float32 data (row-major, little-endian)
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void to_json(nlohmann::json& j, const KernelShape& k) {
  j = nlohmann::json{{"rows", k.rows}, {"cols", k.cols}};
}
inline void from_json(const nlohmann::json& j, KernelShape& k) {
  j.at("rows").get_to(k.rows);
  j.at("cols").get_to(k.cols);
}
inline void to_json(nlohmann::json& j, const PoolShape& p) {
  j = nlohmann::json{{"rows", p.rows}, {"cols", p.cols}};
}
inline void from_json(const nlohmann::json& j, PoolShape& p) {
  j.at("rows").get_to(p.rows);
  j.at("cols").get_to(p.cols);
}
inline void to_json(nlohmann::json& j, const DualBlockConfig& b) {
  j = nlohmann::json{{"h_kernel", b.h_kernel},
                     {"v_kernel", b.v_kernel},
                     {"channels_per_branch", b.channels_per_branch},
                     {"pool", b.pool}};
}
inline void from_json(const nlohmann::json& j, DualBlockConfig& b) {
  j.at("h_kernel").get_to(b.h_kernel);
  j.at("v_kernel").get_to(b.v_kernel);
  j.at("channels_per_branch").get_to(b.channels_per_branch);
  j.at("pool").get_to(b.pool);
}
inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"input_height", c.input_height},
                     {"input_width", c.input_width},
                     {"blocks", c.blocks},
                     {"tail_conv_channels", c.tail_conv_channels},
                     {"tail_pool", c.tail_pool},
                     {"embedding_dim", c.embedding_dim}};
}
inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
  j.at("input_height").get_to(c.input_height);
  j.at("input_width").get_to(c.input_width);
  j.at("blocks").get_to(c.blocks);
  j.at("tail_conv_channels").get_to(c.tail_conv_channels);
  j.at("tail_pool").get_to(c.tail_pool);
  j.at("embedding_dim").get_to(c.embedding_dim);
}

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw LoadError("truncated checkpoint");
  return v;
}

}  // namespace detail

inline void save_checkpoint(const NetworkParams<float>& params,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write("FMCK", 4);
  detail::write_pod(os, kCheckpointVersion);
  const std::string json = nlohmann::json(params.config).dump();
  detail::write_pod(os, static_cast<std::uint64_t>(json.size()));
  os.write(json.data(), static_cast<std::streamsize>(json.size()));
  detail::write_pod(os, static_cast<std::uint32_t>(params.tensors.size()));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const std::string& name = params.names[i];
    detail::write_pod(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const Tensor<float>& t = params.tensors[i];
    detail::write_pod(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::write_pod(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  if (!os) throw IoError("write failed: " + path);
}

inline NetworkParams<float> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FMCK", 4) != 0)
    throw LoadError("bad checkpoint magic in " + path);
  const auto version = detail::read_pod<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw LoadError("unsupported checkpoint version " + std::to_string(version));
  const auto json_len = detail::read_pod<std::uint64_t>(is);
  std::string json(json_len, '\0');
  is.read(json.data(), static_cast<std::streamsize>(json_len));
  if (!is) throw LoadError("truncated checkpoint config");
  NetworkParams<float> params;
  try {
    params.config = nlohmann::json::parse(json).get<NetworkConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad checkpoint config JSON: ") + e.what());
  }
  const auto count = detail::read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_pod<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = detail::read_pod<std::uint32_t>(is);
    std::vector<int> shape(ndim);
    for (auto& d : shape)
      d = static_cast<int>(detail::read_pod<std::uint32_t>(is));
    Tensor<float> t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is) throw LoadError("truncated tensor " + name + " in " + path);
    params.names.push_back(std::move(name));
    params.tensors.push_back(std::move(t));
  }
  validate_config(params.config);
  return params;
}

}  // namespace fingermatch

#endif  // FINGERMATCH_CHECKPOINT_HPP
