// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/checkpoint.hpp"

#include "slidegraph/binary_io.hpp"
#include "slidegraph/error.hpp"

namespace slidegraph {
namespace {
constexpr std::string_view kMagic{"SGCKPT\0\0", 8};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::Writer w;
  w.raw(kMagic);
  w.u32(Checkpoint::kVersion);
  w.u64(ckpt.config_hash);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& e : ckpt.params.entries()) {
    w.str(e.name);
    w.tensor(e.value);
  }
  w.u8(ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    const AdamState& a = *ckpt.adam;
    require(a.first_moment.size() == ckpt.params.size() && a.second_moment.size() == ckpt.params.size(),
            "checkpoint optimizer state does not match parameter count");
    w.f64(a.config.beta1);
    w.f64(a.config.beta2);
    w.f64(a.config.eps);
    w.f64(a.config.weight_decay);
    w.u64(a.step);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      w.tensor(a.first_moment[i]);
      w.tensor(a.second_moment[i]);
    }
  }
  w.save(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  io::Reader r = io::Reader::open(path);
  r.expect_magic(kMagic);
  r.expect_version(Checkpoint::kVersion, "checkpoint");
  Checkpoint ckpt;
  ckpt.config_hash = r.u64();
  const std::uint32_t meta = r.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.str();
    ckpt.meta[k] = r.str();
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    ckpt.params.add(std::move(name), r.tensor());
  }
  if (r.u8() != 0) {
    AdamState a;
    a.config.beta1 = r.f64();
    a.config.beta2 = r.f64();
    a.config.eps = r.f64();
    a.config.weight_decay = r.f64();
    a.step = r.u64();
    for (std::uint32_t i = 0; i < count; ++i) {
      a.first_moment.push_back(r.tensor());
      a.second_moment.push_back(r.tensor());
    }
    ckpt.adam = std::move(a);
  }
  r.expect_end();
  return ckpt;
}

}  // namespace slidegraph
