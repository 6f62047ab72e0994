#pragma once

#include <cstdint>
#include <random>

namespace topohd {

// SplitMix64 finalizer. Used to derive independent stream seeds from
// (base seed, tag) pairs so that streams do not depend on iteration order.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept;

// Seeded generator with library-independent conversions.
// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so uniform/normal are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller (the second variate is cached).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace topohd
