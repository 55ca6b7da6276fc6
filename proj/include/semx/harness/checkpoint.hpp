#pragma once

// SQM1 checkpoint format (little-endian):
//   "SQM1" | u32 version = 1 | u32 tensor count
//   per tensor: u16 name length | name | u32 rank | u32 dims[rank] | f64 values
// Update index and config digest travel as the tensors "meta.update_index"
// (shape [1]) and "meta.config_digest" (shape [2], high and low 32-bit halves).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/harness/binary_io.hpp"
#include "semx/nn/tensor.hpp"

namespace semx::harness {

inline constexpr std::string_view kCheckpointMagic = "SQM1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMetadata {
  std::uint64_t update_index = 0;
  std::uint64_t config_digest = 0;
  bool operator==(const CheckpointMetadata&) const = default;
};

struct Checkpoint {
  std::vector<nn::ParamTensor> tensors;  // without the meta.* entries
  CheckpointMetadata metadata;
};

inline std::vector<char> encode_checkpoint(const std::vector<nn::ParamTensor>& tensors, const CheckpointMetadata& meta) {
  std::vector<nn::ParamTensor> all = tensors;
  all.push_back({"meta.update_index", {1}, {static_cast<double>(meta.update_index)}});
  all.push_back({"meta.config_digest", {2},
                 {static_cast<double>(meta.config_digest >> 32), static_cast<double>(meta.config_digest & 0xFFFFFFFFULL)}});
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(all.size()));
  for (const auto& t : all) {
    if (t.name.size() > 0xFFFF) throw FormatError("tensor name too long: " + t.name.substr(0, 32) + "...");
    if (t.values.size() != t.element_count()) throw ShapeError("tensor '" + t.name + "' value count does not match its shape");
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u32(d);
    for (double v : t.values) w.f64(v);
  }
  return w.data();
}

inline Checkpoint decode_checkpoint(const std::vector<char>& bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kCheckpointMagic) throw FormatError("not an SQM1 checkpoint (bad magic)");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto count = r.u32("tensor count");
  Checkpoint ck;
  bool have_update = false, have_digest = false;
  for (std::uint32_t k = 0; k < count; ++k) {
    nn::ParamTensor t;
    t.name = r.bytes(r.u16("name length"), "tensor name");
    const std::size_t rank_offset = r.offset();
    const auto rank = r.u32("rank");
    if (rank > 8) throw IntegrityError("implausible tensor rank " + std::to_string(rank), rank_offset);
    std::uint64_t elements = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(r.u32("dimension"));
      elements *= t.shape.back();
    }
    if (elements * 8 > r.remaining()) throw IntegrityError("truncated values of tensor '" + t.name + "'", r.offset());
    t.values.resize(static_cast<std::size_t>(elements));
    for (auto& v : t.values) v = r.f64("tensor value");
    if (t.name == "meta.update_index" && t.values.size() == 1) {
      ck.metadata.update_index = static_cast<std::uint64_t>(t.values[0]);
      have_update = true;
    } else if (t.name == "meta.config_digest" && t.values.size() == 2) {
      ck.metadata.config_digest =
          (static_cast<std::uint64_t>(t.values[0]) << 32) | static_cast<std::uint64_t>(t.values[1]);
      have_digest = true;
    } else {
      ck.tensors.push_back(std::move(t));
    }
  }
  if (r.remaining() != 0) throw IntegrityError("trailing bytes after the last tensor", r.offset());
  if (!have_update || !have_digest) throw FormatError("checkpoint lacks meta.update_index or meta.config_digest");
  return ck;
}

inline void save_checkpoint(const std::string& path, const std::vector<nn::ParamTensor>& tensors,
                            const CheckpointMetadata& meta) {
  write_file(path, encode_checkpoint(tensors, meta));
}

inline Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace semx::harness
