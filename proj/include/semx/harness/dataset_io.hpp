#pragma once

// SQD1 dataset format (little-endian):
//   "SQD1" | u32 version = 1 | u32 num_samples | u32 state_dim | u32 num_questions
//   per sample: f64 features[state_dim] | u8 labels[num_questions] (0 or 1)

#include <cstdint>
#include <string>
#include <vector>

#include "semx/classifier/dataset.hpp"
#include "semx/error.hpp"
#include "semx/harness/binary_io.hpp"

namespace semx::harness {

inline constexpr std::string_view kDatasetMagic = "SQD1";
inline constexpr std::uint32_t kDatasetVersion = 1;

inline std::vector<char> encode_dataset(const classifier::Dataset& ds) {
  ByteWriter w;
  w.bytes(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(ds.state_dim()));
  w.u32(static_cast<std::uint32_t>(ds.metadata.num_questions));
  for (const auto& s : ds.samples) {
    if (s.state_features.size() != ds.state_dim() || s.labels.size() != ds.metadata.num_questions)
      throw ShapeError("dataset sample dimensions disagree with the metadata");
    for (double v : s.state_features) w.f64(v);
    for (auto b : s.labels) w.u8(b);
  }
  return w.data();
}

/// The file carries no generation seed or arena digest; those come back as 0.
inline classifier::Dataset decode_dataset(const std::vector<char>& bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kDatasetMagic) throw FormatError("not an SQD1 dataset (bad magic)");
  const auto version = r.u32("version");
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version));
  const auto n = r.u32("num_samples");
  const auto state_dim = r.u32("state_dim");
  const auto num_questions = r.u32("num_questions");
  if (state_dim % 2 != 0) throw FormatError("state_dim must be even (two coordinates per ball)");
  if (static_cast<std::uint64_t>(n) * (8ULL * state_dim + num_questions) > r.remaining())
    throw IntegrityError("dataset body shorter than its header declares", r.offset());
  classifier::Dataset ds;
  ds.metadata.num_objects = state_dim / 2;
  ds.metadata.num_questions = num_questions;
  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.state_features.resize(state_dim);
    for (auto& v : s.state_features) v = r.f64("feature");
    s.labels.resize(num_questions);
    for (auto& b : s.labels) {
      const std::size_t at = r.offset();
      b = r.u8("label");
      if (b > 1) throw IntegrityError("label byte is neither 0 nor 1", at);
    }
  }
  if (r.remaining() != 0) throw IntegrityError("trailing bytes after the last sample", r.offset());
  return ds;
}

inline void save_dataset(const std::string& path, const classifier::Dataset& ds) { write_file(path, encode_dataset(ds)); }
inline classifier::Dataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

}  // namespace semx::harness
