#pragma once

// Seeded test-time corruptions. Each image draws its randomness from
// derive_seed(spec.seed, index), so results do not depend on evaluation order.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "topohd/image.hpp"

namespace topohd {

enum class CorruptionKind : std::uint8_t { none, rotation, gaussian, salt_pepper, cutout, zoom };

std::string_view corruption_kind_name(CorruptionKind kind);
CorruptionKind parse_corruption_kind(std::string_view name);

class CorruptionSpec {
 public:
  CorruptionSpec() = default;
  // Throws std::invalid_argument for a parameter outside the legal range:
  // rotation [0, 180] degrees, gaussian sigma >= 0, salt_pepper p in [0, 1],
  // cutout size >= 0 (integral), zoom scale > 0.
  CorruptionSpec(CorruptionKind kind, double param, std::uint64_t seed = 0);

  // "kind=rotation,param=20,seed=7"; param and seed are optional.
  static CorruptionSpec parse(std::string_view text);

  CorruptionKind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Canonical flag form, round-trips through parse().
  std::string to_string() const;
  // Short setting name for reports, e.g. "clean", "rotation-20", "gaussian-0.1".
  std::string label() const;

  bool operator==(const CorruptionSpec&) const = default;

 private:
  CorruptionKind kind_ = CorruptionKind::none;
  double param_ = 0.0;
  std::uint64_t seed_ = 0;
};

// Cutout also requires size <= min(H, W); checked here.
GrayImage apply(const CorruptionSpec& spec, const GrayImage& img, std::uint64_t index);

}  // namespace topohd
