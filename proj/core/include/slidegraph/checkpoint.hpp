// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "slidegraph/optim.hpp"
#include "slidegraph/params.hpp"

namespace slidegraph {

/// Named parameter tensors plus optional optimizer state and free-form
/// string metadata (model configuration, provenance).
///
/// On disk (all integers little-endian, doubles as IEEE-754 binary64):
///
///   magic "SGCKPT\0\0" | u32 version (=1) | u64 config_hash
///   u32 meta_count   { str key | str value }*
///   u32 tensor_count { str name | u32 rank | u64 extent* | f64 payload* }*
///   u8 has_adam [ f64 beta1 | f64 beta2 | f64 eps | f64 decay | u64 step
///                 { tensor first_moment | tensor second_moment }* per param ]
///
/// where str is u32 length followed by raw bytes.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t config_hash = 0;
  std::map<std::string, std::string> meta;
  ParameterSet params;
  std::optional<AdamState> adam;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace slidegraph
