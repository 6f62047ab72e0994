#include "topohd/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topohd {

// ---------------------------------------------------------------------------
// Zernike

std::vector<std::pair<int, int>> ZernikeConfig::indices() const {
  std::vector<std::pair<int, int>> out;
  for (int n = 0; n <= order; ++n) {
    for (int m = n % 2; m <= n; m += 2) out.emplace_back(n, m);
  }
  return out;
}

void ZernikeConfig::validate() const {
  if (order < 0) throw std::invalid_argument("zernike order must be nonnegative");
  if (patch == 0 || patch % 2 != 0) throw std::invalid_argument("zernike patch size must be even and positive");
  if (grid_y == 0 || grid_x == 0 || patch % grid_y != 0 || patch % grid_x != 0) {
    throw std::invalid_argument("zernike grid must divide the patch size");
  }
  if (!(radius0 > 0.0) || !(radius1 > 0.0)) throw std::invalid_argument("zernike radii must be positive");
}

double zernike_radial(int n, int m, double rho) {
  m = std::abs(m);
  if (m > n || (n - m) % 2 != 0) return 0.0;
  double sum = 0.0;
  for (int s = 0; s <= (n - m) / 2; ++s) {
    const double num = std::tgamma(n - s + 1.0);
    const double den = std::tgamma(s + 1.0) * std::tgamma((n + m) / 2 - s + 1.0) * std::tgamma((n - m) / 2 - s + 1.0);
    sum += (s % 2 ? -1.0 : 1.0) * num / den * std::pow(rho, n - 2 * s);
  }
  return sum;
}

ZernikeBasis::ZernikeBasis(const ZernikeConfig& config, double radius)
    : patch_(config.patch), radius_(radius), indices_(config.indices()) {
  config.validate();
  const double half = static_cast<double>(patch_) / 2.0;
  const double area = 1.0 / (radius * radius);
  std::vector<double> rho, theta;
  for (std::size_t i = 0; i < patch_; ++i) {
    for (std::size_t j = 0; j < patch_; ++j) {
      const double x = (static_cast<double>(j) + 0.5 - half) / radius;
      const double y = (half - static_cast<double>(i) - 0.5) / radius;
      const double r = std::hypot(x, y);
      if (r > 1.0) continue;
      pixels_.push_back(i * patch_ + j);
      rho.push_back(r);
      theta.push_back(std::atan2(y, x));
    }
  }
  rows_.reserve(indices_.size());
  for (const auto& [n, m] : indices_) {
    std::vector<std::complex<double>> row(pixels_.size());
    const double norm = (n + 1.0) / std::numbers::pi * area;
    for (std::size_t p = 0; p < pixels_.size(); ++p) {
      row[p] = norm * zernike_radial(n, m, rho[p]) * std::polar(1.0, -m * theta[p]);
    }
    rows_.push_back(std::move(row));
  }
}

std::vector<std::complex<double>> ZernikeBasis::moments(const GrayImage& patch) const {
  if (patch.height != patch_ || patch.width != patch_) throw std::invalid_argument("zernike: patch size mismatch");
  std::vector<std::complex<double>> out(rows_.size());
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t p = 0; p < pixels_.size(); ++p) acc += static_cast<double>(patch.pixels[pixels_[p]]) * rows_[k][p];
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> zernike_moments(const GrayImage& patch, const ZernikeConfig& config, double radius) {
  if (patch.height != patch.width) throw std::invalid_argument("zernike: patch must be square");
  ZernikeConfig c = config;
  c.patch = patch.height;
  return ZernikeBasis(c, radius).moments(patch);
}

GrayImage resample_square(const GrayImage& img, double top, double left, double side, std::size_t size) {
  GrayImage out(size, size);
  const double step = side / static_cast<double>(size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double y = top - 0.5 + (static_cast<double>(i) + 0.5) * step;
      const double x = left - 0.5 + (static_cast<double>(j) + 0.5) * step;
      out.at(i, j) = img.sample(x, y);
    }
  }
  return out;
}

SpzExtractor::SpzExtractor(const ZernikeConfig& config)
    : config_(config), level0_(config, config.radius0), level1_(config, config.radius1) {}

std::vector<double> SpzExtractor::descriptor(const GrayImage& patch) const {
  const std::size_t p = config_.patch;
  if (patch.height != p || patch.width != p) throw std::invalid_argument("spz: patch size mismatch");
  std::vector<double> out;
  out.reserve(config_.descriptor_size());
  for (const auto& z : level0_.moments(patch)) out.push_back(std::abs(z));

  const std::size_t ch = p / config_.grid_y, cw = p / config_.grid_x;
  const std::size_t side = std::max(ch, cw);
  for (std::size_t gy = 0; gy < config_.grid_y; ++gy) {
    for (std::size_t gx = 0; gx < config_.grid_x; ++gx) {
      // Cell embedded centered in a zero square of the larger side.
      GrayImage cell(side, side);
      const std::size_t off_r = (side - ch) / 2, off_c = (side - cw) / 2;
      for (std::size_t r = 0; r < ch; ++r) {
        for (std::size_t c = 0; c < cw; ++c) cell.at(off_r + r, off_c + c) = patch.at(gy * ch + r, gx * cw + c);
      }
      const GrayImage resized = resample_square(cell, 0.0, 0.0, static_cast<double>(side), p);
      for (const auto& z : level1_.moments(resized)) out.push_back(std::abs(z));
    }
  }
  return out;
}

std::vector<double> spz_descriptor(const GrayImage& patch, const ZernikeConfig& config) {
  return SpzExtractor(config).descriptor(patch);
}

// ---------------------------------------------------------------------------
// HOG

std::size_t HogConfig::descriptor_size(std::size_t height, std::size_t width) const {
  const std::size_t cy = height / cell, cx = width / cell;
  if (cy < block || cx < block) return 0;
  return (cy - block + 1) * (cx - block + 1) * block * block * orientations;
}

std::vector<double> hog_descriptor(const GrayImage& patch, const HogConfig& config) {
  const std::size_t h = patch.height, w = patch.width;
  if (config.cell == 0 || h % config.cell != 0 || w % config.cell != 0) {
    throw std::invalid_argument("hog: image size must be a multiple of the cell size");
  }
  const std::size_t bins = config.orientations;
  const std::size_t cells_y = h / config.cell, cells_x = w / config.cell;
  std::vector<double> hist(cells_y * cells_x * bins, 0.0);
  auto px = [&](long r, long c) {
    r = std::clamp<long>(r, 0, static_cast<long>(h) - 1);
    c = std::clamp<long>(c, 0, static_cast<long>(w) - 1);
    return static_cast<double>(patch.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
  };
  const double bin_width = std::numbers::pi / static_cast<double>(bins);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const long lr = static_cast<long>(r), lc = static_cast<long>(c);
      const double gx = px(lr, lc + 1) - px(lr, lc - 1);
      const double gy = px(lr + 1, lc) - px(lr - 1, lc);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += std::numbers::pi;
      if (angle >= std::numbers::pi) angle -= std::numbers::pi;
      const double pos = angle / bin_width;
      const auto lower = static_cast<std::size_t>(std::floor(pos)) % bins;
      const double frac = pos - std::floor(pos);
      double* cell = hist.data() + ((r / config.cell) * cells_x + c / config.cell) * bins;
      cell[lower] += mag * (1.0 - frac);
      cell[(lower + 1) % bins] += mag * frac;
    }
  }

  std::vector<double> out;
  out.reserve(config.descriptor_size(h, w));
  std::vector<double> block(config.block * config.block * bins);
  constexpr double eps2 = 1e-20;
  for (std::size_t by = 0; by + config.block <= cells_y; ++by) {
    for (std::size_t bx = 0; bx + config.block <= cells_x; ++bx) {
      std::size_t k = 0;
      for (std::size_t dy = 0; dy < config.block; ++dy) {
        for (std::size_t dx = 0; dx < config.block; ++dx) {
          const double* cell = hist.data() + ((by + dy) * cells_x + bx + dx) * bins;
          for (std::size_t b = 0; b < bins; ++b) block[k++] = cell[b];
        }
      }
      double ss = 0.0;
      for (double v : block) ss += v * v;
      if (ss > 0.0) {
        double n = std::sqrt(ss + eps2);
        ss = 0.0;
        for (double& v : block) {
          v = std::min(v / n, config.clip);
          ss += v * v;
        }
        n = std::sqrt(ss + eps2);
        for (double& v : block) v /= n;
      }
      out.insert(out.end(), block.begin(), block.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pose normalization

GrayImage normalize_glyph(const GrayImage& img, const CanonicalFrame& frame, double radius, std::size_t patch) {
  GrayImage out(patch, patch);
  if (frame.degenerate || !(radius > 0.0)) return out;
  const auto& r = frame.rotation;
  const double step = 2.0 * radius / static_cast<double>(patch);
  for (std::size_t i = 0; i < patch; ++i) {
    for (std::size_t j = 0; j < patch; ++j) {
      double acc = 0.0;
      for (int sy = 0; sy < 2; ++sy) {
        for (int sx = 0; sx < 2; ++sx) {
          const double qx = -radius + (static_cast<double>(j) + 0.25 + 0.5 * sx) * step;
          const double qy = -radius + (static_cast<double>(i) + 0.25 + 0.5 * sy) * step;
          // R^-1 = R^T
          const double x = frame.centroid.x + r[0] * qx + r[2] * qy;
          const double y = frame.centroid.y + r[1] * qx + r[3] * qy;
          acc += img.sample(x, y);
        }
      }
      out.at(i, j) = static_cast<float>(acc / 4.0);
    }
  }
  return out;
}

GrayImage mask_glyph(const GrayImage& img, const BinaryMask& shape) {
  GrayImage masked(img.height, img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      bool keep = false;
      for (int dr = -1; dr <= 1 && !keep; ++dr) {
        for (int dc = -1; dc <= 1 && !keep; ++dc) {
          const long nr = static_cast<long>(r) + dr, nc = static_cast<long>(c) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(img.height) || nc >= static_cast<long>(img.width)) continue;
          keep = shape.at(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)) != 0;
        }
      }
      if (keep) masked.at(r, c) = img.at(r, c);
    }
  }
  return masked;
}

CanonicalFrame intensity_frame(const GrayImage& masked) {
  double w = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t r = 0; r < masked.height; ++r) {
    for (std::size_t c = 0; c < masked.width; ++c) {
      const double m = masked.at(r, c);
      w += m;
      cx += m * static_cast<double>(c);
      cy += m * static_cast<double>(r);
    }
  }
  if (!(w > 0.0)) return degenerate_frame({0.0, 0.0});
  cx /= w;
  cy /= w;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t r = 0; r < masked.height; ++r) {
    for (std::size_t c = 0; c < masked.width; ++c) {
      const double m = masked.at(r, c);
      const double dx = static_cast<double>(c) - cx, dy = static_cast<double>(r) - cy;
      sxx += m * dx * dx;
      sxy += m * dx * dy;
      syy += m * dy * dy;
    }
  }
  sxx /= w;
  sxy /= w;
  syy /= w;
  const double trace = sxx + syy;
  if (!(trace > 0.0)) return degenerate_frame({cx, cy});
  const double half = 0.5 * (sxx - syy);
  const double rad = std::sqrt(half * half + sxy * sxy);
  const double l1 = 0.5 * trace + rad;
  Point2 v = std::abs(sxy) > 1e-15 * trace ? Point2{l1 - syy, sxy} : (sxx >= syy ? Point2{1.0, 0.0} : Point2{0.0, 1.0});
  v = v * (1.0 / norm(v));
  double m2 = 0.0, m3 = 0.0;
  for (std::size_t r = 0; r < masked.height; ++r) {
    for (std::size_t c = 0; c < masked.width; ++c) {
      const double m = masked.at(r, c);
      const double t = (static_cast<double>(c) - cx) * v.x + (static_cast<double>(r) - cy) * v.y;
      m2 += m * t * t;
      m3 += m * t * t * t;
    }
  }
  m2 /= w;
  m3 /= w;
  double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  if (skew < 0.0) {
    v = v * -1.0;
    skew = -skew;
  }
  CanonicalFrame f;
  f.centroid = {cx, cy};
  f.scale = std::sqrt(trace);
  f.eigen_gap = 2.0 * rad;
  f.orientation_ambiguous = f.eigen_gap < 1e-6 * trace;
  f.skewness = skew;
  f.angle = std::atan2(v.y, v.x);
  const double cs = std::cos(f.angle), sn = std::sin(f.angle);
  f.rotation = {cs, sn, -sn, cs};
  return f;
}

CanonicalFrame glyph_frame(const GrayImage& img, const PrimitiveSet& primitives) {
  if (primitives.empty || primitives.frame.degenerate) return primitives.frame;
  return intensity_frame(mask_glyph(img, primitives.shape));
}

GrayImage normalize_glyph(const GrayImage& img, const PrimitiveSet& primitives, std::size_t patch) {
  if (primitives.empty || primitives.frame.degenerate) return GrayImage(patch, patch);
  const GrayImage masked = mask_glyph(img, primitives.shape);
  const CanonicalFrame frame = intensity_frame(masked);
  return normalize_glyph(masked, frame, kGlyphRadius * frame.scale, patch);
}

}  // namespace topohd
