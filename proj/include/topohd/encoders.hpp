#pragma once

// Continuous-to-hypervector encoders: random-hyperplane projections for
// dense descriptors, and a level/position scheme for hole sets.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "topohd/hypervector.hpp"

namespace topohd {

// Row-major n x k matrix of float features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n, std::size_t k) : rows(n), cols(k), values(n * k, 0.0f) {}

  std::span<float> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

enum class Role : std::uint8_t { outer_hog = 0, outer_zernike = 1, holes = 2 };

std::string_view role_name(Role role);

struct RoleVector {
  Role role;
  std::uint64_t seed;
  Hypervector vector;

  static RoleVector make(Role role, std::uint64_t seed, std::size_t dim) {
    return {role, seed, Hypervector::random(dim, seed)};
  }
};

// sign(W (x - mean) / scale) with W a D x k matrix of i.i.d. N(0, 1) entries.
class ProjectionEncoder {
 public:
  ProjectionEncoder() = default;
  // W regenerated from `seed`.
  ProjectionEncoder(std::size_t dim, std::uint64_t seed, std::vector<double> mean, std::vector<double> scale);
  // Explicit W (row-major, dim x k).
  ProjectionEncoder(std::size_t dim, std::vector<float> weights, std::vector<double> mean,
                    std::vector<double> scale);

  // Per-column mean and (population) standard deviation of `train`; columns
  // with deviation < 1e-8 get scale 1. Needs at least two rows.
  static ProjectionEncoder fit(const FeatureMatrix& train, std::size_t dim, std::uint64_t seed);

  Hypervector encode(std::span<const float> x) const;
  // Identical to calling encode() per row, for any worker count.
  std::vector<Hypervector> encode_batch(const FeatureMatrix& x, unsigned workers = 1) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t input_dim() const noexcept { return mean_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }
  const std::vector<float>& weights() const noexcept { return weights_; }

 private:
  void check_stats() const;
  // Encodes four standardized inputs at once (unused slots may repeat).
  void project4(const float* const z[4], std::int8_t* const out[4]) const;

  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<float> weights_;
  std::vector<double> mean_;
  std::vector<double> scale_;
};

// Q level hypervectors for scalars in a bounded range. Level 0 is random;
// level q flips the first floor(q D / (Q-1)) entries of a seeded permutation,
// so adjacent levels differ in floor or ceil of D/(Q-1) positions and
// similarity decreases monotonically with level distance. The top level is
// the negation of level 0.
class LevelTable {
 public:
  LevelTable() = default;
  LevelTable(std::size_t dim, std::size_t levels, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t levels() const noexcept { return levels_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const Hypervector& level(std::size_t q) const { return levels_.at(q); }

  // Clamps v into [lo, hi] and rounds to the nearest level. A degenerate
  // range (hi <= lo) maps everything to level 0.
  std::size_t quantize(double v, double lo, double hi) const;

 private:
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Hypervector> levels_;
};

// Encodes a variable-size set of fixed-length hole descriptors. Each hole is
// the bundle over features j of level(quantize(f_j)) bound to a per-feature
// position role; valid holes are then bundled with unit weight. An empty set
// maps to a reserved seeded "no-hole" hypervector.
class HoleSetEncoder {
 public:
  HoleSetEncoder() = default;
  HoleSetEncoder(std::size_t dim, std::size_t levels, std::size_t width, std::uint64_t seed,
                 std::vector<double> lower, std::vector<double> upper);

  // Bounds are the per-feature min/max over `rows` (n x width, flattened).
  // With no rows, every feature gets the range [0, 1].
  static HoleSetEncoder fit(std::span<const double> rows, std::size_t width, std::size_t dim,
                            std::size_t levels, std::uint64_t seed);

  // `rows` holds valid.size() descriptors of `width` values each; entries
  // with valid[i] == 0 are padding. Throws if the sizes disagree.
  Hypervector encode(std::span<const double> rows, std::span<const std::uint8_t> valid) const;
  Hypervector encode_hole(std::span<const double> descriptor) const;

  std::size_t dim() const noexcept { return table_.dim(); }
  std::size_t width() const noexcept { return lower_.size(); }
  std::size_t levels() const noexcept { return table_.levels(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const LevelTable& table() const noexcept { return table_; }
  const Hypervector& feature_role(std::size_t j) const { return roles_.at(j); }
  const Hypervector& no_hole() const noexcept { return no_hole_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  // Seed derivation tags, exposed so tests can rebuild the vectors.
  static constexpr std::uint64_t kLevelTag = 1;
  static constexpr std::uint64_t kRoleTagBase = 100;
  static constexpr std::uint64_t kNoHoleTag = 0x4e4f484f4c45ULL;  // "NOHOLE"

 private:
  void accumulate_hole(std::span<const double> descriptor, std::vector<std::int32_t>& sums) const;

  std::uint64_t seed_ = 0;
  LevelTable table_;
  std::vector<Hypervector> roles_;
  Hypervector no_hole_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

}  // namespace topohd
