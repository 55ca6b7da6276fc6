#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace semx {

/// splitmix64 generator. Every stochastic choice in the library draws from
/// this stream so results are reproducible bit-for-bit on any platform.
///
/// State advance: state += 0x9E3779B97F4A7C15, then the standard finalizer.
/// Doubles take the top 53 bits: (next() >> 11) * 2^-53, giving [0, 1).
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  constexpr double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // floor(u * n), with u from uniform(); n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const auto i = static_cast<std::size_t>(std::floor(uniform() * static_cast<double>(n)));
    return std::min(i, n - 1);
  }

  // Fisher-Yates from the back.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// i-th output (0-based) of the stream seeded with `base`. Used for
/// per-sample and per-episode seeds.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return SplitMix64::mix(base + (index + 1) * SplitMix64::kGamma);
}

/// First output of the stream seeded with (master XOR tag). Each subsystem
/// owns a fixed tag, so adding a subsystem never shifts another one's stream.
constexpr std::uint64_t subsystem_seed(std::uint64_t master, std::uint64_t tag) {
  return derive_seed(master ^ tag, 0);
}

namespace seed_tags {
inline constexpr std::uint64_t kDataset = 0x5345'4D58'4441'5441ULL;    // "SEMXDATA"
inline constexpr std::uint64_t kSplit = 0x5345'4D58'5350'4C54ULL;      // "SEMXSPLT"
inline constexpr std::uint64_t kClassifier = 0x5345'4D58'434C'5346ULL; // "SEMXCLSF"
inline constexpr std::uint64_t kPolicyInit = 0x5345'4D58'504F'4C49ULL; // "SEMXPOLI"
inline constexpr std::uint64_t kValueInit = 0x5345'4D58'5641'4C55ULL;  // "SEMXVALU"
inline constexpr std::uint64_t kEnvironment = 0x5345'4D58'454E'5653ULL; // "SEMXENVS"
inline constexpr std::uint64_t kActions = 0x5345'4D58'4143'5453ULL;    // "SEMXACTS"
inline constexpr std::uint64_t kUpdates = 0x5345'4D58'5550'4454ULL;    // "SEMXUPDT"
inline constexpr std::uint64_t kEvaluation = 0x5345'4D58'4556'414CULL; // "SEMXEVAL"
inline constexpr std::uint64_t kQuestions = 0x5345'4D58'5155'4553ULL;  // "SEMXQUES"
}  // namespace seed_tags

}  // namespace semx
