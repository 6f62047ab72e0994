#pragma once

// Outer-shape appearance descriptors computed on a pose-normalized patch:
// spatial-pyramid Zernike magnitudes and HOG.

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "topohd/image.hpp"
#include "topohd/topology.hpp"

namespace topohd {

struct ZernikeConfig {
  int order = 8;
  std::size_t patch = 32;
  std::size_t grid_y = 2;
  std::size_t grid_x = 2;
  double radius0 = 16.0;
  double radius1 = 16.0;

  // (n, m) with 0 <= m <= n <= order and n - m even, ordered by n then m.
  std::vector<std::pair<int, int>> indices() const;
  std::size_t descriptor_size() const { return (grid_y * grid_x + 1) * indices().size(); }
  void validate() const;
};

// conj(V_nm) sampled at the pixel centers of a P x P patch inside a disk of
// the given radius (in pixels, centered on the patch), premultiplied by
// (n + 1) / pi and the pixel area in unit-disk coordinates.
class ZernikeBasis {
 public:
  ZernikeBasis(const ZernikeConfig& config, double radius);

  std::size_t patch() const noexcept { return patch_; }
  double radius() const noexcept { return radius_; }
  const std::vector<std::pair<int, int>>& indices() const noexcept { return indices_; }

  std::vector<std::complex<double>> moments(const GrayImage& patch) const;

 private:
  std::size_t patch_;
  double radius_;
  std::vector<std::pair<int, int>> indices_;
  std::vector<std::size_t> pixels_;                     // pixel indices inside the disk
  std::vector<std::vector<std::complex<double>>> rows_;  // one row per index over pixels_
};

// Zernike radial polynomial R_nm(rho) from the factorial series.
double zernike_radial(int n, int m, double rho);

std::vector<std::complex<double>> zernike_moments(const GrayImage& patch, const ZernikeConfig& config, double radius);

// Shared read-only basis tables for spz_descriptor.
class SpzExtractor {
 public:
  explicit SpzExtractor(const ZernikeConfig& config = {});

  const ZernikeConfig& config() const noexcept { return config_; }
  // [|Z(full patch; r0)|, |Z(cell_1; r1)|, ..., |Z(cell_g; r1)|], cells in
  // row-major order; each cell is zero-padded to a square and resampled to
  // P x P before its moments are taken.
  std::vector<double> descriptor(const GrayImage& patch) const;

 private:
  ZernikeConfig config_;
  ZernikeBasis level0_;
  ZernikeBasis level1_;
};

std::vector<double> spz_descriptor(const GrayImage& patch, const ZernikeConfig& config = {});

// Square region of `img` (zero outside) with the given top-left corner and
// side, resampled bilinearly to size x size.
GrayImage resample_square(const GrayImage& img, double top, double left, double side, std::size_t size);

struct HogConfig {
  std::size_t orientations = 9;
  std::size_t cell = 4;
  std::size_t block = 2;
  double clip = 0.2;

  std::size_t descriptor_size(std::size_t height, std::size_t width) const;
};

// Centered-difference gradients, unsigned orientation bins centered at
// multiples of pi/orientations with linear vote splitting, block L2
// normalization with clipping and renormalization. Blocks step by one cell.
std::vector<double> hog_descriptor(const GrayImage& patch, const HogConfig& config = {});

// Warps img into the canonical frame: the output P x P patch covers the
// square of half-size `radius` (pixels) centered on the frame centroid,
// rotated so that the principal axis is horizontal, i.e.
// out(q) = img(c + R^-1 q). Bilinear with 2x2 supersampling, zero fill.
GrayImage normalize_glyph(const GrayImage& img, const CanonicalFrame& frame, double radius, std::size_t patch);

// Half-size of the normalized window in units of the intensity RMS radius.
inline constexpr double kGlyphRadius = 2.5;

// Glyph intensities restricted to the shape dilated by one pixel, which keeps
// the anti-aliased rim.
GrayImage mask_glyph(const GrayImage& img, const BinaryMask& shape);

// Frame from intensity-weighted moments of a masked glyph: weighted centroid,
// RMS radius as scale, principal axis of the weighted covariance, sign fixed
// so the weighted projections have positive skewness.
CanonicalFrame intensity_frame(const GrayImage& masked);

// intensity_frame of the glyph masked by the extracted shape.
CanonicalFrame glyph_frame(const GrayImage& img, const PrimitiveSet& primitives);

// Masked glyph warped by glyph_frame over a window of half-size
// kGlyphRadius * scale. All zero for an empty shape.
GrayImage normalize_glyph(const GrayImage& img, const PrimitiveSet& primitives, std::size_t patch);

}  // namespace topohd
