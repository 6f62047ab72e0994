#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "topohd/dataset.hpp"
#include "topohd/moments.hpp"

using namespace topohd;

namespace {

GrayImage unit_disk(std::size_t p) {
  GrayImage img(p, p);
  const double r = p / 2.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double x = (j + 0.5 - r) / r, y = (r - i - 0.5) / r;
      img.at(i, j) = x * x + y * y <= 1.0 ? 1.0f : 0.0f;
    }
  }
  return img;
}

// Counterclockwise quarter turn as displayed (row 0 at the top).
GrayImage rot90(const GrayImage& in) {
  GrayImage out(in.width, in.height);
  for (std::size_t i = 0; i < out.height; ++i) {
    for (std::size_t j = 0; j < out.width; ++j) out.at(i, j) = in.at(j, in.width - 1 - i);
  }
  return out;
}

GrayImage random_patch(std::uint64_t seed, std::size_t p) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<float> u;
  GrayImage img(p, p);
  for (auto& v : img.pixels) v = u(eng);
  return img;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

// Bilinear rotation by `degrees` about the image center, zero fill.
GrayImage rotate_image(const GrayImage& img, double degrees) {
  const double t = degrees * std::numbers::pi / 180, cs = std::cos(t), sn = std::sin(t);
  const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  GrayImage out(img.height, img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double dx = c - cx, dy = r - cy;
      out.at(r, c) = img.sample(cx + cs * dx + sn * dy, cy - sn * dx + cs * dy);
    }
  }
  out.clip();
  return out;
}

}  // namespace

TEST_SUITE("moments") {
  TEST_CASE("zernike index set") {
    ZernikeConfig cfg;
    CHECK(cfg.indices().size() == 25);
    CHECK(cfg.descriptor_size() == 125);
    for (auto [n, m] : cfg.indices()) CHECK((n - m) % 2 == 0);
    cfg.patch = 31;
    CHECK_THROWS(cfg.validate());
  }

  TEST_CASE("radial polynomials") {
    // R_20 = 2 rho^2 - 1, R_31 = 3 rho^3 - 2 rho, R_42 = 4 rho^4 - 3 rho^2.
    for (double rho : {0.0, 0.3, 0.7, 1.0}) {
      CHECK(zernike_radial(2, 0, rho) == doctest::Approx(2 * rho * rho - 1));
      CHECK(zernike_radial(3, 1, rho) == doctest::Approx(3 * std::pow(rho, 3) - 2 * rho));
      CHECK(zernike_radial(4, 2, rho) == doctest::Approx(4 * std::pow(rho, 4) - 3 * rho * rho));
      CHECK(zernike_radial(8, 8, rho) == doctest::Approx(std::pow(rho, 8)));
    }
  }

  TEST_CASE("zernike moments of a uniform disk and of zero") {
    const ZernikeConfig cfg;
    const auto z = zernike_moments(unit_disk(32), cfg, 16.0);
    const auto idx = cfg.indices();
    CHECK(std::abs(std::abs(z[0]) - 1.0) <= 0.03);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k].second != 0) CHECK(std::abs(z[k]) <= 0.02);
    }
    for (auto v : zernike_moments(GrayImage(32, 32), cfg, 16.0)) CHECK(v == std::complex<double>(0.0, 0.0));
  }

  TEST_CASE("zernike rotation law under exact pixel rotations") {
    const ZernikeConfig cfg;
    const auto idx = cfg.indices();
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto img = random_patch(s, 32);
      const auto z = zernike_moments(img, cfg, 16.0);
      const auto z90 = zernike_moments(rot90(img), cfg, 16.0);
      const auto z180 = zernike_moments(rot90(rot90(img)), cfg, 16.0);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const int m = idx[k].second;
        CHECK(std::abs(std::abs(z90[k]) - std::abs(z[k])) <= 1e-3);
        CHECK(std::abs(std::abs(z180[k]) - std::abs(z[k])) <= 1e-3);
        const auto expected = z[k] * std::polar(1.0, -m * std::numbers::pi / 2);
        CHECK(std::abs(z90[k] - expected) <= 1e-3);
      }
    }
  }

  TEST_CASE("zernike basis orthogonality on the discrete disk") {
    const ZernikeConfig cfg;
    const auto idx = cfg.indices();
    const std::size_t p = 32;
    const double r = p / 2.0;
    std::vector<std::vector<std::complex<double>>> v(idx.size());
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        const double x = (j + 0.5 - r) / r, y = (r - i - 0.5) / r, rho = std::hypot(x, y);
        if (rho > 1.0) continue;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          v[k].push_back(zernike_radial(idx[k].first, idx[k].second, rho) *
                         std::polar(1.0, idx[k].second * std::atan2(y, x)));
        }
      }
    }
    const double area = 1.0 / (r * r);
    double worst = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) {
        std::complex<double> s = 0.0;
        for (std::size_t q = 0; q < v[a].size(); ++q) s += v[a][q] * std::conj(v[b][q]);
        s *= (idx[a].first + 1) / std::numbers::pi * area;
        if (a != b) worst = std::max(worst, std::abs(s));
      }
    }
    MESSAGE("worst off-diagonal normalized inner product: " << worst);
    CHECK(worst <= 0.02);
  }

  TEST_CASE("spz descriptor") {
    const ZernikeConfig cfg;
    const SpzExtractor spz(cfg);
    const auto zero = spz.descriptor(GrayImage(32, 32));
    CHECK(zero.size() == 125);
    for (double v : zero) CHECK(v == 0.0);

    GrayImage corner(32, 32);
    for (std::size_t i = 3; i < 12; ++i) {
      for (std::size_t j = 4; j < 10; ++j) corner.at(i, j) = 1.0f;
    }
    const auto d = spz.descriptor(corner);
    double level0 = 0, cell0 = 0;
    for (std::size_t k = 0; k < 25; ++k) {
      level0 += d[k];
      cell0 += d[25 + k];
    }
    CHECK(level0 > 0.0);
    CHECK(cell0 > 0.0);
    for (std::size_t k = 50; k < 125; ++k) CHECK(d[k] <= 1e-6);
    for (double v : spz.descriptor(random_patch(1, 32))) CHECK(v >= 0.0);
    CHECK(spz_descriptor(corner, cfg) == d);
  }

  TEST_CASE("spz is stable under rotation of asymmetric glyphs") {
    const SpzExtractor spz;
    int checked = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto shape = random_star_polygon(s, 7, 5.0, 11.0);
      const auto a = extract_primitives(make_synthetic(shape, {}, 40, 40));
      const auto b = extract_primitives(make_synthetic(shape, {15 * std::numbers::pi / 180, 1.0, 0.0, 0.0}, 40, 40));
      const double gap = a.frame.eigen_gap / (a.frame.scale * a.frame.scale);
      if (gap <= 0.05 || std::abs(a.frame.skewness) <= 1e-3) continue;
      ++checked;
      const auto da = spz.descriptor(normalize_glyph(make_synthetic(shape, {}, 40, 40), a, 32));
      const auto db = spz.descriptor(
          normalize_glyph(make_synthetic(shape, {15 * std::numbers::pi / 180, 1.0, 0.0, 0.0}, 40, 40), b, 32));
      CHECK(rel_l2(db, da) <= 0.10);
    }
    CHECK(checked >= 5);
  }

  TEST_CASE("hog") {
    const HogConfig cfg;
    CHECK(cfg.descriptor_size(32, 32) == 1764);
    for (double v : hog_descriptor(GrayImage(32, 32, 0.4f), cfg)) CHECK(v == 0.0);

    GrayImage edge(32, 32);
    for (std::size_t i = 0; i < 32; ++i) {
      for (std::size_t j = 16; j < 32; ++j) edge.at(i, j) = 1.0f;
    }
    const auto d = hog_descriptor(edge, cfg);
    REQUIRE(d.size() == 1764);
    double horizontal = 0, total = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      total += d[k] * d[k];
      if (k % 9 == 0) horizontal += d[k] * d[k];
    }
    CHECK(horizontal > 0.6 * total);

    const auto img = random_patch(4, 32);
    const auto base = hog_descriptor(img, cfg);
    GrayImage scaled = img, affine = img;
    for (auto& v : scaled.pixels) v *= 0.5f;
    for (auto& v : affine.pixels) v = 0.25f * v + 0.5f;
    const auto ds = hog_descriptor(scaled, cfg), da = hog_descriptor(affine, cfg);
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(std::abs(ds[k] - base[k]) <= 1e-6);
      CHECK(std::abs(da[k] - base[k]) <= 1e-6);
    }
    CHECK_THROWS(hog_descriptor(GrayImage(30, 30), cfg));
  }

  TEST_CASE("normalize glyph") {
    SUBCASE("identity frame is a pure resample") {
      GrayImage img(32, 32);
      for (std::size_t i = 8; i < 24; ++i) {
        for (std::size_t j = 10; j < 22; ++j) img.at(i, j) = 1.0f;
      }
      CanonicalFrame f;
      f.centroid = {15.5, 15.5};
      f.scale = 1.0;
      const auto out = normalize_glyph(img, f, 16.0, 32);
      double diff = 0;
      for (std::size_t k = 0; k < img.pixels.size(); ++k) diff += std::abs(out.pixels[k] - img.pixels[k]);
      // Only the supersampled edge pixels may differ.
      CHECK(diff / img.pixels.size() <= 0.02);
    }

    SUBCASE("blank image gives a zero patch") {
      const auto prim = extract_primitives(GrayImage(28, 28));
      const auto out = normalize_glyph(GrayImage(28, 28), prim, 32);
      CHECK(out.height == 32);
      for (float v : out.pixels) CHECK(v == 0.0f);
    }

    SUBCASE("rotated asymmetric glyphs land on the same patch") {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const auto shape = random_star_polygon(100 + s, 7, 5.0, 11.0);
        const auto img = make_synthetic(shape, {}, 40, 40);
        const auto a = extract_primitives(img);
        if (a.frame.eigen_gap / (a.frame.scale * a.frame.scale) <= 0.05 || std::abs(a.frame.skewness) <= 1e-3) continue;
        const auto rot = rotate_image(img, 20.0);
        const auto pa = normalize_glyph(img, a, 32), pb = normalize_glyph(rot, extract_primitives(rot), 32);
        double diff = 0;
        for (std::size_t k = 0; k < pa.pixels.size(); ++k) diff += std::abs(pa.pixels[k] - pb.pixels[k]);
        CHECK(diff / pa.pixels.size() <= 0.05);
      }
    }
  }

  TEST_CASE("normalize glyph on rotated digits") {
    // Handwritten digits often have nearly isotropic outlines, where the
    // principal axis is unstable; the bound applies on average.
    const auto data = load_mnist(TOPOHD_DATA_DIR "/mnist-desk", "t10k").head(200);
    double total = 0;
    for (const auto& img : data.images) {
      const auto rot = rotate_image(img, 20.0);
      const auto pa = normalize_glyph(img, extract_primitives(img), 32);
      const auto pb = normalize_glyph(rot, extract_primitives(rot), 32);
      double diff = 0;
      for (std::size_t k = 0; k < pa.pixels.size(); ++k) diff += std::abs(pa.pixels[k] - pb.pixels[k]);
      total += diff / pa.pixels.size();
    }
    MESSAGE("mean abs diff over 200 digits: " << total / data.size());
    CHECK(total / data.size() <= 0.05);
  }
}
