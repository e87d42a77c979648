#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lrp {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// 64-bit finalizer used to fold several identifiers into one stream id.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_id(std::uint64_t a, std::uint64_t b = 0,
                                  std::uint64_t c = 0) {
  return mix64(mix64(mix64(a) ^ b) ^ c);
}

/// Counter-based random stream.
///
/// The key is the master seed; the upper half of the counter is the stream
/// id and the lower half is the position inside the stream. Two streams with
/// different ids never overlap, and the output at a given position does not
/// depend on how many draws other streams have made. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in the open interval (0, 1).
  double uniform();
  /// Standard exponential variate.
  double exponential();
  /// Poisson variate by sequential inversion; intended for small means.
  std::uint64_t poisson(double mean);

  /// Philox blocks generated so far; each block serves two draws.
  std::uint64_t position() const { return position_; }

 private:
  PhiloxKey key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t position_ = 0;
  PhiloxCounter block_{};
  int used_ = 2;
};

}  // namespace lrp
