#include "lrp/rng.hpp"

#include <cmath>

namespace lrp {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_lo_(static_cast<std::uint32_t>(stream)),
      stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

CounterRng::result_type CounterRng::operator()() {
  if (used_ == 2) {
    block_ = philox4x32_10({static_cast<std::uint32_t>(position_),
                            static_cast<std::uint32_t>(position_ >> 32),
                            stream_lo_, stream_hi_},
                           key_);
    ++position_;
    used_ = 0;
  }
  const int i = 2 * used_++;
  return (static_cast<std::uint64_t>(block_[i]) << 32) | block_[i + 1];
}

double CounterRng::uniform() {
  // 53 random bits shifted by half an ulp keeps the result away from 0 and 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential() { return -std::log(uniform()); }

std::uint64_t CounterRng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  const double u = uniform();
  double term = std::exp(-mean);
  double cdf = term;
  std::uint64_t k = 0;
  while (u > cdf && term > 0.0) {
    ++k;
    term *= mean / static_cast<double>(k);
    cdf += term;
  }
  return k;
}

}  // namespace lrp
