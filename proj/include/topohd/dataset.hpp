#pragma once

// IDX dataset loading (plain or gzip) and analytic synthetic shapes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topohd/image.hpp"

namespace topohd {

struct LabeledDataset {
  std::string name;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t classes = 0;
  std::vector<GrayImage> images;
  std::vector<int> labels;

  std::size_t size() const noexcept { return images.size(); }
  // First n samples (or all, if fewer).
  LabeledDataset head(std::size_t n) const;
  std::vector<std::size_t> class_counts() const;
};

enum class IdxLayout : std::uint8_t {
  plain,           // MNIST: labels 0..9, glyphs stored upright
  emnist_letters,  // labels 1..26 remapped to 0..25; glyphs stored transposed
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Whole file, gunzipped when it is gzip-compressed. Throws naming the path.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Gzip-compressed when the path ends in ".gz".
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Raw IDX payloads. `source` names the file in error messages.
struct IdxImages {
  std::size_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes, const std::string& source);
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes, const std::string& source);
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        IdxLayout layout = IdxLayout::plain, std::string name = "idx");

// Inverse of load_idx for a plain-layout dataset (pixels rounded to bytes).
void write_idx(const LabeledDataset& data, const std::filesystem::path& images, const std::filesystem::path& labels);

// `split` is "train" or "t10k"; accepts the files with or without ".gz".
LabeledDataset load_mnist(const std::filesystem::path& dir, const std::string& split);
// `split` is "train" or "test" (emnist-letters-<split>-images-idx3-ubyte).
LabeledDataset load_emnist_letters(const std::filesystem::path& dir, const std::string& split);

// Analytic shapes in local coordinates (pixels, y down) centered on the
// origin before posing.
enum class SyntheticKind : std::uint8_t { disk, annulus, ellipse, polygon, double_annulus };

struct SyntheticShape {
  SyntheticKind kind = SyntheticKind::disk;
  double r_in = 0.0;    // annulus / double-annulus inner radius
  double r_out = 0.0;   // disk radius, annulus outer radius
  double a = 0.0;       // ellipse semi-axis along x
  double b = 0.0;       // ellipse semi-axis along y
  double offset = 0.0;  // double-annulus: centers at (+-offset, 0)
  std::vector<Point2> vertices;  // polygon, any orientation, simple

  static SyntheticShape disk(double r);
  static SyntheticShape annulus(double r_in, double r_out);
  static SyntheticShape ellipse(double a, double b);
  static SyntheticShape polygon(std::vector<Point2> vertices);
  static SyntheticShape double_annulus(double r_in = 5.0, double r_out = 10.0, double offset = 9.0);

  bool contains(Point2 p) const;
  double bounding_radius() const;
  double area() const;
};

struct Pose {
  double angle = 0.0;  // radians, applied in image coordinates (x right, y down)
  double scale = 1.0;
  double tx = 0.0;     // offset of the shape origin from the canvas center
  double ty = 0.0;
};

// Coverage-sampled (4 x 4 subpixels) rasterization. Throws
// std::invalid_argument when the posed shape does not fit on the canvas.
GrayImage make_synthetic(const SyntheticShape& shape, const Pose& pose, std::size_t height, std::size_t width);

// Random simple star-shaped polygon with `vertices` corners whose radii lie
// in [r_min, r_max]; used as an asymmetric fixture.
SyntheticShape random_star_polygon(std::uint64_t seed, std::size_t vertices, double r_min, double r_max);

}  // namespace topohd
