#include "edgeseg/rng.hpp"

#include <cassert>

namespace edgeseg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
  inc_ = (stream << 1u) | 1u;
  state_ = 0;
  next_u32();
  state_ += mix64(seed);
  next_u32();
}

std::uint32_t Pcg32::next_u32() {
  std::uint64_t old = state_;
  state_ = old * 6364136223846793005ULL + inc_;
  std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((0u - rot) & 31u));
}

std::uint64_t Pcg32::next_u64() {
  std::uint64_t hi = next_u32();
  std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Pcg32::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint32_t Pcg32::uniform_below(std::uint32_t bound) {
  assert(bound > 0);
  // Lemire's multiply-shift with rejection of the biased low range.
  std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * bound;
  std::uint32_t low = static_cast<std::uint32_t>(m);
  if (low < bound) {
    std::uint32_t threshold = (0u - bound) % bound;
    while (low < threshold) {
      m = static_cast<std::uint64_t>(next_u32()) * bound;
      low = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

int Pcg32::uniform_int(int lo, int hi) {
  assert(lo <= hi);
  return lo + static_cast<int>(uniform_below(static_cast<std::uint32_t>(hi - lo + 1)));
}

double Pcg32::uniform_real(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

bool Pcg32::bernoulli(double p) { return next_double() < p; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

}  // namespace edgeseg
