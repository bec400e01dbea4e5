#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace coalsisr {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 finalizer. Used to derive independent substream seeds from a
/// root seed and a path of integer tags (locus, design point, particle, ...).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(root);
  for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags, so that e.g. particle j of a SIS run and particle j of a SISR
// run at the same seed draw from the same substream.
namespace stream_tag {
inline constexpr std::uint64_t particle = 1;
inline constexpr std::uint64_t resample = 2;
inline constexpr std::uint64_t locus = 3;
inline constexpr std::uint64_t design = 4;
inline constexpr std::uint64_t dataset = 5;
inline constexpr std::uint64_t replicate = 6;
inline constexpr std::uint64_t point = 7;
inline constexpr std::uint64_t duplicate = 8;
}  // namespace stream_tag

/// One named random stream. Conversions to doubles are done here rather than
/// through <random> distributions so that output is identical across standard
/// library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t root, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(root, path)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    // Lemire's nearly-divisionless method
    uint128 m = static_cast<uint128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<uint128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coalsisr
