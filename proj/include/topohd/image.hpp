#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace topohd {

// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), pixels(h * w, fill) {}

  float& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  float at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  bool empty() const noexcept { return pixels.empty(); }

  void clip();
  // Bilinear sample at (x = column, y = row) in pixel-center coordinates;
  // outside the canvas contributes 0.
  float sample(double x, double y) const;

  bool operator==(const GrayImage&) const = default;
};

// Row-major boolean mask, foreground = 1.
struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::size_t h, std::size_t w) : height(h), width(w), bits(h * w, 0) {}

  std::uint8_t& at(std::size_t r, std::size_t c) { return bits[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return bits[r * width + c]; }
  std::size_t count() const;
  bool any() const;

  bool operator==(const BinaryMask&) const = default;
};

// x is the column axis, y the row axis; pixel (r, c) has its center at (c, r).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2&) const = default;
};

double norm(Point2 p);

// Closed polygon; the last vertex connects back to the first.
struct Contour {
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
  double length() const;
  // Shoelace area in (x, y) coordinates; positive for counterclockwise.
  double signed_area() const;
  bool counterclockwise() const { return signed_area() > 0.0; }
  Point2 mean() const;
};

}  // namespace topohd
