#pragma once

#include <cstdint>

namespace edgeseg {

// splitmix64 finalizer; also used to spread raw seeds before feeding PCG.
std::uint64_t mix64(std::uint64_t x);

// PCG32 (XSH-RR). Same seed -> same stream on every platform, including the
// uniform helpers below (no std:: distributions anywhere).
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // [0,1), 53-bit resolution.
  double next_double();

  // Unbiased integer in [0, bound); bound must be > 0.
  std::uint32_t uniform_below(std::uint32_t bound);

  // Inclusive range.
  int uniform_int(int lo, int hi);

  double uniform_real(double lo, double hi);

  bool bernoulli(double p);

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Per-item seed derivation for parallel corpora: deterministic, decorrelated,
// independent of processing order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace edgeseg
