#include "topohd/image.hpp"

#include <algorithm>
#include <cmath>

namespace topohd {

void GrayImage::clip() {
  for (auto& p : pixels) p = std::clamp(p, 0.0f, 1.0f);
}

float GrayImage::sample(double x, double y) const {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double ax = x - fx;
  const double ay = y - fy;
  const auto c0 = static_cast<long>(fx);
  const auto r0 = static_cast<long>(fy);
  auto value = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= static_cast<long>(height) || c >= static_cast<long>(width)) return 0.0;
    return pixels[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)];
  };
  const double top = (1.0 - ax) * value(r0, c0) + ax * value(r0, c0 + 1);
  const double bottom = (1.0 - ax) * value(r0 + 1, c0) + ax * value(r0 + 1, c0 + 1);
  return static_cast<float>((1.0 - ay) * top + ay * bottom);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

double norm(Point2 p) { return std::hypot(p.x, p.y); }

double Contour::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += norm(points[(i + 1) % points.size()] - points[i]);
  return total;
}

double Contour::signed_area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2& a = points[i];
    const Point2& b = points[(i + 1) % points.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

Point2 Contour::mean() const {
  Point2 m;
  for (const auto& p : points) m = m + p;
  return points.empty() ? m : m * (1.0 / static_cast<double>(points.size()));
}

}  // namespace topohd
