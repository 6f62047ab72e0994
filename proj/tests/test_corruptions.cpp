#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "topohd/corruptions.hpp"
#include "topohd/dataset.hpp"

using namespace topohd;

namespace {

GrayImage centered_square(std::size_t canvas, std::size_t side) {
  GrayImage img(canvas, canvas);
  const std::size_t top = (canvas - side) / 2;
  for (std::size_t i = top; i < top + side; ++i) {
    for (std::size_t j = top; j < top + side; ++j) img.at(i, j) = 1.0f;
  }
  return img;
}

struct Box {
  std::size_t rows = 0, cols = 0;
};

Box bounding_box(const GrayImage& img, float level) {
  std::size_t r0 = img.height, r1 = 0, c0 = img.width, c1 = 0;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      if (img.at(r, c) <= level) continue;
      r0 = std::min(r0, r), r1 = std::max(r1, r), c0 = std::min(c0, c), c1 = std::max(c1, c);
    }
  }
  if (r0 > r1) return {};
  return {r1 - r0 + 1, c1 - c0 + 1};
}

bool in_range(const GrayImage& img) {
  return std::all_of(img.pixels.begin(), img.pixels.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

}  // namespace

TEST_SUITE("corruptions") {
  TEST_CASE("spec validation") {
    CHECK_THROWS(CorruptionSpec(CorruptionKind::rotation, 181));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::rotation, -1));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::gaussian, -0.1));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::salt_pepper, 1.5));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::cutout, 2.5));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::zoom, 0.0));
    CHECK_THROWS(CorruptionSpec(CorruptionKind::gaussian, std::nan("")));
    CHECK_NOTHROW(CorruptionSpec(CorruptionKind::rotation, 180));
    CHECK_THROWS(apply(CorruptionSpec(CorruptionKind::cutout, 29), GrayImage(28, 28), 0));
  }

  TEST_CASE("spec text round trip") {
    const CorruptionSpec s(CorruptionKind::gaussian, 0.1, 7);
    CHECK(CorruptionSpec::parse(s.to_string()) == s);
    CHECK(s.label() == "gaussian-0.1");
    CHECK(CorruptionSpec().label() == "clean");
    CHECK(CorruptionSpec::parse("kind=rotation,param=20") == CorruptionSpec(CorruptionKind::rotation, 20, 0));
    CHECK_THROWS(CorruptionSpec::parse("kind=blur,param=1"));
    CHECK_THROWS(CorruptionSpec::parse("kind=zoom,param=x"));
  }

  TEST_CASE("identity cases") {
    const auto data = load_mnist(TOPOHD_DATA_DIR "/mnist-desk", "t10k").head(20);
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(apply(CorruptionSpec(), data.images[i], i) == data.images[i]);
      CHECK(apply(CorruptionSpec(CorruptionKind::gaussian, 0.0, 3), data.images[i], i) == data.images[i]);
      CHECK(apply(CorruptionSpec(CorruptionKind::rotation, 0.0, 3), data.images[i], i) == data.images[i]);
      CHECK(apply(CorruptionSpec(CorruptionKind::zoom, 1.0, 3), data.images[i], i) == data.images[i]);
    }
  }

  TEST_CASE("determinism and range") {
    const auto data = load_mnist(TOPOHD_DATA_DIR "/mnist-desk", "t10k").head(10);
    const CorruptionSpec specs[] = {
        {CorruptionKind::rotation, 30, 5}, {CorruptionKind::gaussian, 0.3, 5}, {CorruptionKind::salt_pepper, 0.2, 5},
        {CorruptionKind::cutout, 6, 5},    {CorruptionKind::zoom, 1.4, 5},     {CorruptionKind::zoom, 0.6, 5}};
    for (const auto& spec : specs) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto a = apply(spec, data.images[i], i);
        CHECK(a == apply(spec, data.images[i], i));
        CHECK(in_range(a));
      }
      // Different indices draw different randomness; zoom has none.
      if (spec.kind() != CorruptionKind::zoom) CHECK_FALSE(apply(spec, data.images[0], 0) == apply(spec, data.images[0], 1));
    }
  }

  TEST_CASE("salt and pepper flip rate") {
    // On a mid-gray canvas every flipped pixel becomes 0 or 1.
    const GrayImage gray(28, 28, 0.5f);
    const CorruptionSpec spec(CorruptionKind::salt_pepper, 0.1, 31);
    double total = 0, salt = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      const auto out = apply(spec, gray, i);
      for (float v : out.pixels) {
        total += v != 0.5f;
        salt += v == 1.0f;
      }
    }
    CHECK(total / 1000 >= 74.0);
    CHECK(total / 1000 <= 83.0);
    CHECK(salt / total == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("cutout zeroes an in-canvas square") {
    const GrayImage ones(28, 28, 1.0f);
    for (std::size_t size : {0u, 1u, 4u, 10u, 28u}) {
      const CorruptionSpec spec(CorruptionKind::cutout, static_cast<double>(size), 2);
      for (std::size_t i = 0; i < 50; ++i) {
        const auto out = apply(spec, ones, i);
        CHECK(std::count(out.pixels.begin(), out.pixels.end(), 0.0f) == static_cast<long>(size * size));
        const auto box = bounding_box(GrayImage([&] {
          GrayImage inv(28, 28);
          for (std::size_t k = 0; k < inv.pixels.size(); ++k) inv.pixels[k] = 1.0f - out.pixels[k];
          return inv;
        }()), 0.5f);
        CHECK(box.rows == size);
        CHECK(box.cols == size);
      }
    }
  }

  TEST_CASE("zoom rescales the foreground about the center") {
    const auto img = centered_square(28, 20);
    const auto half = apply(CorruptionSpec(CorruptionKind::zoom, 0.5, 1), img, 0);
    const auto box = bounding_box(half, 0.5f);
    CHECK(std::abs(static_cast<long>(box.rows) - 10) <= 1);
    CHECK(std::abs(static_cast<long>(box.cols) - 10) <= 1);
    const auto big = apply(CorruptionSpec(CorruptionKind::zoom, 1.2, 1), centered_square(28, 10), 0);
    const auto bbox = bounding_box(big, 0.5f);
    CHECK(std::abs(static_cast<long>(bbox.rows) - 12) <= 1);
  }

  TEST_CASE("rotation stays within the maximum angle") {
    // A horizontal bar rotated by at most 10 degrees keeps a small vertical extent.
    GrayImage bar(29, 29);
    for (std::size_t j = 4; j < 25; ++j) bar.at(14, j) = 1.0f;
    const CorruptionSpec spec(CorruptionKind::rotation, 10, 4);
    for (std::size_t i = 0; i < 50; ++i) {
      const auto box = bounding_box(apply(spec, bar, i), 0.25f);
      // 20 px half-length * tan(10 deg) ~ 1.8 px each side plus interpolation.
      CHECK(box.rows <= 7);
    }
    const auto flipped = apply(CorruptionSpec(CorruptionKind::rotation, 180, 4), bar, 0);
    CHECK(in_range(flipped));
  }
}
