#pragma once

// Shape primitives of a binarized glyph: the largest foreground component,
// its holes, sub-pixel contours, an RTS-canonical frame from the outer
// contour, and per-hole descriptors that do not change under rotation,
// translation or uniform scaling.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "topohd/image.hpp"

namespace topohd {

// Otsu threshold over a 256-bin histogram of round(255 v). Returns the bin
// index t; pixels with round(255 v) > t are foreground. Returns nullopt for
// a constant image.
std::optional<int> otsu_bin(const GrayImage& img);
BinaryMask binarize(const GrayImage& img);

// Drops 8-connected foreground components with fewer than `min_pixels` pixels.
BinaryMask remove_small_components(const BinaryMask& mask, std::size_t min_pixels);

// Largest 8-connected foreground component; ties go to the component whose
// first pixel comes first in row-major order. nullopt for an empty mask.
std::optional<BinaryMask> largest_component(const BinaryMask& mask);

// 4-connected background components that do not touch the image border and
// have at least `min_pixels` pixels, largest first.
std::vector<BinaryMask> find_holes(const BinaryMask& shape, std::size_t min_pixels = 2);

// The shape with every enclosed background component filled in.
BinaryMask fill_holes(const BinaryMask& shape);

// Closed 0.5-isocontour of the indicator image (pixel centers at integer
// coordinates). Saddle cells are resolved by the bilinear center value
// (0.5, counted as inside), which joins diagonal foreground pixels. Returns
// the longest loop, counterclockwise. Throws for an empty region.
Contour marching_squares(const BinaryMask& region);
// Every loop, each counterclockwise, longest first.
std::vector<Contour> marching_squares_all(const BinaryMask& region);

struct CanonicalFrame {
  Point2 centroid;
  double scale = 0.0;
  double angle = 0.0;
  // Row-major rotation by -angle.
  std::array<double, 4> rotation{1.0, 0.0, 0.0, 1.0};
  // All contour points coincide (scale = epsilon, angle = 0).
  bool degenerate = false;
  // Covariance eigen-gap below 1e-6 of its trace: the principal axis is
  // not well defined (e.g. a circle).
  bool orientation_ambiguous = false;
  double eigen_gap = 0.0;
  double skewness = 0.0;
};

inline constexpr double kFrameEpsilon = 1e-8;
inline constexpr double kSkewnessFallback = 1e-6;

// Centroid and RMS scale of the contour points, principal axis of their
// covariance, sign fixed so that the projections have positive skewness
// (or, for |skewness| < 1e-6, so that the farthest point projects >= 0).
CanonicalFrame canonical_frame(const Contour& outer);
CanonicalFrame degenerate_frame(Point2 centroid);

// R (p - c) / s.
Point2 canon_point(const CanonicalFrame& frame, Point2 p);
// Inverse of canon_point.
Point2 uncanon_point(const CanonicalFrame& frame, Point2 q);

inline constexpr std::size_t kSignatureSamples = 64;
inline constexpr std::size_t kShapeHarmonics = 12;

// Distances from the centroid of N points resampled uniformly by arc length
// along a periodic cubic spline through the contour vertices, divided by
// their RMS. Sampling starts at the point of the spline farthest from its
// centroid and runs counterclockwise, so the result does not depend on the
// starting vertex or on the vertex order. All zeros for a degenerate contour.
std::vector<double> radial_signature(const Contour& contour, std::size_t samples = kSignatureSamples);

// |DFT(sig)[m]| / N for m = 1..harmonics. Requires harmonics < N / 2.
std::vector<double> fourier_magnitudes(const std::vector<double>& sig, std::size_t harmonics = kShapeHarmonics);

struct HoleDescriptor {
  std::vector<double> fourier;  // non-DC radial-signature magnitudes
  double canon_y = 0.0;         // canonical centroid, minor axis
  double canon_x = 0.0;         // canonical centroid, principal axis
  double rel_area = 0.0;        // hole pixels / filled outer area
  double rel_perimeter = 0.0;   // hole contour length / outer contour length

  std::size_t size() const noexcept { return fourier.size() + 4; }
  // [fourier..., canon_y, canon_x, rel_area, rel_perimeter]
  std::vector<double> to_vector() const;
};

// Pixel centroid of a mask, (x = column, y = row).
Point2 mask_centroid(const BinaryMask& mask);

HoleDescriptor hole_descriptor(const BinaryMask& hole, const Contour& hole_contour, const CanonicalFrame& frame,
                               double outer_area, double outer_perimeter,
                               std::size_t harmonics = kShapeHarmonics,
                               std::size_t samples = kSignatureSamples);

// Descending rel_area; ties broken by the remaining fields so the order never
// depends on extraction order.
void sort_holes(std::vector<HoleDescriptor>& holes);

struct PrimitiveOptions {
  std::size_t max_holes = 4;
  std::size_t harmonics = kShapeHarmonics;
  std::size_t samples = kSignatureSamples;
  std::size_t min_component_pixels = 3;
  std::size_t min_hole_pixels = 2;
};

struct PrimitiveSet {
  bool empty = true;
  BinaryMask shape;   // largest component
  BinaryMask filled;  // shape with holes filled
  Contour outer;
  CanonicalFrame frame;
  double outer_area = 0.0;
  double outer_perimeter = 0.0;
  std::vector<HoleDescriptor> holes;  // sorted, at most max_holes
  std::size_t hole_count = 0;         // before truncation
};

PrimitiveSet extract_primitives(const GrayImage& img, const PrimitiveOptions& options = {});
// Same pipeline starting from an already binarized mask.
PrimitiveSet extract_primitives(const BinaryMask& mask, const PrimitiveOptions& options = {});

}  // namespace topohd
