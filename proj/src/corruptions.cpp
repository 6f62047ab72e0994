#include "topohd/corruptions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "topohd/rng.hpp"

namespace topohd {

namespace {

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// out(p) = in(c + A (p - c)) with A the 2x2 row-major matrix.
GrayImage warp_about_center(const GrayImage& img, double a00, double a01, double a10, double a11) {
  GrayImage out(img.height, img.width);
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double dx = static_cast<double>(c) - cx, dy = static_cast<double>(r) - cy;
      out.at(r, c) = img.sample(cx + a00 * dx + a01 * dy, cy + a10 * dx + a11 * dy);
    }
  }
  out.clip();
  return out;
}

}  // namespace

std::string_view corruption_kind_name(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::none: return "none";
    case CorruptionKind::rotation: return "rotation";
    case CorruptionKind::gaussian: return "gaussian";
    case CorruptionKind::salt_pepper: return "salt_pepper";
    case CorruptionKind::cutout: return "cutout";
    case CorruptionKind::zoom: return "zoom";
  }
  return "?";
}

CorruptionKind parse_corruption_kind(std::string_view name) {
  for (auto k : {CorruptionKind::none, CorruptionKind::rotation, CorruptionKind::gaussian,
                 CorruptionKind::salt_pepper, CorruptionKind::cutout, CorruptionKind::zoom}) {
    if (corruption_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown corruption kind '" + std::string(name) + "'");
}

CorruptionSpec::CorruptionSpec(CorruptionKind kind, double param, std::uint64_t seed)
    : kind_(kind), param_(param), seed_(seed) {
  auto fail = [&](const char* what) {
    throw std::invalid_argument(std::string(corruption_kind_name(kind)) + ": " + what + " (got " +
                                format_number(param) + ")");
  };
  if (!std::isfinite(param)) fail("parameter must be finite");
  switch (kind) {
    case CorruptionKind::none: break;
    case CorruptionKind::rotation:
      if (param < 0.0 || param > 180.0) fail("max angle must lie in [0, 180] degrees");
      break;
    case CorruptionKind::gaussian:
      if (param < 0.0) fail("sigma must be nonnegative");
      break;
    case CorruptionKind::salt_pepper:
      if (param < 0.0 || param > 1.0) fail("flip probability must lie in [0, 1]");
      break;
    case CorruptionKind::cutout:
      if (param < 0.0 || param != std::floor(param)) fail("size must be a nonnegative integer");
      break;
    case CorruptionKind::zoom:
      if (param <= 0.0) fail("scale must be positive");
      break;
  }
}

CorruptionSpec CorruptionSpec::parse(std::string_view text) {
  CorruptionKind kind = CorruptionKind::none;
  double param = 0.0;
  std::uint64_t seed = 0;
  bool have_kind = false;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("corruption: expected key=value, got '" + std::string(item) + "'");
    const std::string_view key = trim(item.substr(0, eq));
    const std::string_view value = trim(item.substr(eq + 1));
    if (key == "kind") {
      kind = parse_corruption_kind(value);
      have_kind = true;
    } else if (key == "param") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), param);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw std::invalid_argument("corruption: bad param '" + std::string(value) + "'");
      }
    } else if (key == "seed") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw std::invalid_argument("corruption: bad seed '" + std::string(value) + "'");
      }
    } else {
      throw std::invalid_argument("corruption: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_kind) throw std::invalid_argument("corruption: missing kind");
  return CorruptionSpec(kind, param, seed);
}

std::string CorruptionSpec::to_string() const {
  return "kind=" + std::string(corruption_kind_name(kind_)) + ",param=" + format_number(param_) +
         ",seed=" + std::to_string(seed_);
}

std::string CorruptionSpec::label() const {
  if (kind_ == CorruptionKind::none) return "clean";
  return std::string(corruption_kind_name(kind_)) + "-" + format_number(param_);
}

GrayImage apply(const CorruptionSpec& spec, const GrayImage& img, std::uint64_t index) {
  Rng rng(derive_seed(spec.seed(), index));
  const double p = spec.param();
  switch (spec.kind()) {
    case CorruptionKind::none: return img;
    case CorruptionKind::rotation: {
      const double angle = rng.uniform(-p, p) * std::numbers::pi / 180.0;
      // Output pixel p samples the input at c + R(-angle)(p - c).
      const double cs = std::cos(angle), sn = std::sin(angle);
      return warp_about_center(img, cs, sn, -sn, cs);
    }
    case CorruptionKind::gaussian: {
      GrayImage out = img;
      for (float& v : out.pixels) v = static_cast<float>(v + p * rng.normal());
      out.clip();
      return out;
    }
    case CorruptionKind::salt_pepper: {
      GrayImage out = img;
      for (float& v : out.pixels) {
        const bool flip = rng.uniform() < p;
        const bool salt = rng.uniform() < 0.5;
        if (flip) v = salt ? 1.0f : 0.0f;
      }
      return out;
    }
    case CorruptionKind::cutout: {
      const auto size = static_cast<std::size_t>(p);
      if (size > std::min(img.height, img.width)) {
        throw std::invalid_argument("cutout: size " + std::to_string(size) + " exceeds the canvas");
      }
      GrayImage out = img;
      if (size == 0) return out;
      const std::size_t top = rng.below(img.height - size + 1);
      const std::size_t left = rng.below(img.width - size + 1);
      for (std::size_t r = top; r < top + size; ++r) {
        for (std::size_t c = left; c < left + size; ++c) out.at(r, c) = 0.0f;
      }
      return out;
    }
    case CorruptionKind::zoom:
      return warp_about_center(img, 1.0 / p, 0.0, 0.0, 1.0 / p);
  }
  return img;
}

}  // namespace topohd
