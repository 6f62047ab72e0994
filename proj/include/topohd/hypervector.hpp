#pragma once

// Dense bipolar hypervectors and the integer accumulators that hold class
// prototypes. Elements are stored as int8 in {-1, +1}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace topohd {

inline constexpr std::size_t kDefaultDim = 10000;

class Hypervector {
 public:
  Hypervector() = default;
  // All +1 (the binding identity).
  explicit Hypervector(std::size_t dim) : bits_(dim, 1) {}

  // Throws std::invalid_argument if any value is not exactly -1 or +1.
  static Hypervector from_values(std::vector<std::int8_t> values);
  // Each element is +1 or -1 with probability 1/2, drawn from `seed`.
  static Hypervector random(std::size_t dim, std::uint64_t seed);

  // sign(x) elementwise with sign(0) = +1.
  template <typename T>
  static Hypervector sign_of(std::span<const T> sums) {
    Hypervector h;
    h.bits_.resize(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) h.bits_[i] = sums[i] < T{0} ? -1 : 1;
    return h;
  }
  template <typename T>
  static Hypervector sign_of(const std::vector<T>& sums) {
    return sign_of(std::span<const T>(sums));
  }

  std::size_t dim() const noexcept { return bits_.size(); }
  std::int8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
  std::span<const std::int8_t> values() const noexcept { return bits_; }
  const std::int8_t* data() const noexcept { return bits_.data(); }

  bool operator==(const Hypervector&) const = default;

 private:
  std::vector<std::int8_t> bits_;
};

struct WeightedHypervector {
  const Hypervector* vector;
  double weight;
};

// Elementwise product. Self-inverse: bind(bind(a, b), b) == a.
Hypervector bind(const Hypervector& a, const Hypervector& b);

// sign(sum_i w_i h_i), ties to +1. The result does not depend on the order of
// `items`. Throws on an empty list, negative weights, all-zero weights or a
// dimension mismatch.
Hypervector bundle(std::span<const WeightedHypervector> items);
Hypervector bundle(std::span<const Hypervector> items);

// Number of positions where a and b differ.
std::size_t hamming(const Hypervector& a, const Hypervector& b);

// <a, b> / D for two hypervectors.
double similarity(const Hypervector& a, const Hypervector& b);

// Signed integer accumulator in Z^D. The squared L2 norm is tracked exactly
// as elements change.
class Accumulator {
 public:
  Accumulator() = default;
  explicit Accumulator(std::size_t dim) : counts_(dim, 0) {}
  static Accumulator from_counts(std::vector<std::int32_t> counts);

  std::size_t dim() const noexcept { return counts_.size(); }
  std::span<const std::int32_t> counts() const noexcept { return counts_; }
  std::int32_t operator[](std::size_t i) const noexcept { return counts_[i]; }

  // counts += weight * h
  void add(const Hypervector& h, std::int32_t weight = 1);
  void add(const Accumulator& other);

  std::int64_t dot(const Hypervector& h) const;
  std::int64_t squared_norm() const noexcept { return squared_norm_; }

  bool operator==(const Accumulator& other) const { return counts_ == other.counts_; }

 private:
  std::vector<std::int32_t> counts_;
  std::int64_t squared_norm_ = 0;
};

inline constexpr double kCosineEpsilon = 1e-8;

// <h, p> / (|h| |p| + eps). A zero prototype scores 0.
double cosine(const Hypervector& h, const Accumulator& p);
// Same, with the dot product already known.
double cosine_from_dot(std::int64_t dot, std::size_t dim, std::int64_t squared_norm);

}  // namespace topohd
