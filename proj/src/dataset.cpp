#include "topohd/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "topohd/rng.hpp"

namespace topohd {

LabeledDataset LabeledDataset::head(std::size_t n) const {
  LabeledDataset out = *this;
  n = std::min(n, size());
  out.images.resize(n);
  out.labels.resize(n);
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(classes, 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  return counts;
}

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error(path.string() + ": file not found");
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  for (;;) {
    const int n = gzread(f, buf, sizeof buf);
    if (n < 0) {
      int code = 0;
      const std::string msg = gzerror(f, &code);
      gzclose(f);
      throw std::runtime_error(path.string() + ": read error after " + std::to_string(out.size()) + " bytes: " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  gzclose(f);
  return out;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  const bool gz = path.extension() == ".gz";
  gzFile f = gzopen(path.string().c_str(), gz ? "wb9" : "wbT");
  if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - done, 1u << 20));
    if (gzwrite(f, bytes.data() + done, n) != static_cast<int>(n)) {
      gzclose(f);
      throw std::runtime_error(path.string() + ": write failed");
    }
    done += n;
  }
  if (gzclose(f) != Z_OK) throw std::runtime_error(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t offset, const std::string& source) {
  if (offset + 4 > b.size()) {
    throw std::runtime_error(source + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void check_payload(const std::vector<std::uint8_t>& b, std::size_t header, std::size_t expected,
                   const std::string& source) {
  if (b.size() < header + expected) {
    throw std::runtime_error(source + ": truncated data at offset " + std::to_string(b.size()) + " (expected " +
                             std::to_string(header + expected) + " bytes)");
  }
  if (b.size() > header + expected) {
    throw std::runtime_error(source + ": trailing bytes at offset " + std::to_string(header + expected));
  }
}

}  // namespace

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  const std::uint32_t magic = be32(bytes, 0, source);
  if (magic != kIdxImageMagic) {
    throw std::runtime_error(source + ": expected image magic 0x00000803 at offset 0, found " + hex(magic));
  }
  IdxImages out;
  out.count = be32(bytes, 4, source);
  out.rows = be32(bytes, 8, source);
  out.cols = be32(bytes, 12, source);
  check_payload(bytes, 16, out.count * out.rows * out.cols, source);
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  const std::uint32_t magic = be32(bytes, 0, source);
  if (magic != kIdxLabelMagic) {
    throw std::runtime_error(source + ": expected label magic 0x00000801 at offset 0, found " + hex(magic));
  }
  const std::size_t count = be32(bytes, 4, source);
  check_payload(bytes, 8, count, source);
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.count));
  put_be32(out, static_cast<std::uint32_t>(images.rows));
  put_be32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, IdxLayout layout,
                        std::string name) {
  const IdxImages raw = parse_idx_images(read_file_bytes(images), images.string());
  const std::vector<std::uint8_t> raw_labels = parse_idx_labels(read_file_bytes(labels), labels.string());
  if (raw_labels.size() != raw.count) {
    throw std::runtime_error(labels.string() + ": label count " + std::to_string(raw_labels.size()) +
                             " does not match image count " + std::to_string(raw.count) + " in " + images.string());
  }
  const bool letters = layout == IdxLayout::emnist_letters;
  LabeledDataset out;
  out.name = std::move(name);
  out.height = letters ? raw.cols : raw.rows;
  out.width = letters ? raw.rows : raw.cols;
  out.classes = letters ? 26 : 10;
  out.images.reserve(raw.count);
  out.labels.reserve(raw.count);
  const std::size_t stride = raw.rows * raw.cols;
  for (std::size_t i = 0; i < raw.count; ++i) {
    GrayImage img(out.height, out.width);
    const std::uint8_t* src = raw.pixels.data() + i * stride;
    for (std::size_t r = 0; r < raw.rows; ++r) {
      for (std::size_t c = 0; c < raw.cols; ++c) {
        const float v = static_cast<float>(src[r * raw.cols + c]) / 255.0f;
        if (letters) img.at(c, r) = v;
        else img.at(r, c) = v;
      }
    }
    int y = raw_labels[i];
    if (letters) --y;
    if (y < 0 || y >= static_cast<int>(out.classes)) {
      throw std::runtime_error(labels.string() + ": label " + std::to_string(raw_labels[i]) + " out of range at offset " +
                               std::to_string(8 + i));
    }
    out.images.push_back(std::move(img));
    out.labels.push_back(y);
  }
  return out;
}

void write_idx(const LabeledDataset& data, const std::filesystem::path& images, const std::filesystem::path& labels) {
  IdxImages raw;
  raw.count = data.size();
  raw.rows = data.height;
  raw.cols = data.width;
  raw.pixels.reserve(raw.count * raw.rows * raw.cols);
  for (const auto& img : data.images) {
    for (float v : img.pixels) raw.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  std::vector<std::uint8_t> raw_labels;
  raw_labels.reserve(data.labels.size());
  for (int y : data.labels) raw_labels.push_back(static_cast<std::uint8_t>(y));
  write_file_bytes(images, serialize_idx_images(raw));
  write_file_bytes(labels, serialize_idx_labels(raw_labels));
}

namespace {

std::filesystem::path find_variant(const std::filesystem::path& dir, const std::string& base) {
  for (const char* suffix : {"", ".gz"}) {
    const auto p = dir / (base + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  throw std::runtime_error((dir / base).string() + ": file not found (also tried .gz)");
}

}  // namespace

LabeledDataset load_mnist(const std::filesystem::path& dir, const std::string& split) {
  if (split != "train" && split != "t10k") throw std::invalid_argument("mnist split must be 'train' or 't10k'");
  return load_idx(find_variant(dir, split + "-images-idx3-ubyte"), find_variant(dir, split + "-labels-idx1-ubyte"),
                  IdxLayout::plain, "mnist-" + split);
}

LabeledDataset load_emnist_letters(const std::filesystem::path& dir, const std::string& split) {
  if (split != "train" && split != "test") throw std::invalid_argument("emnist split must be 'train' or 'test'");
  const std::string base = "emnist-letters-" + split;
  return load_idx(find_variant(dir, base + "-images-idx3-ubyte"), find_variant(dir, base + "-labels-idx1-ubyte"),
                  IdxLayout::emnist_letters, base);
}

// ---------------------------------------------------------------------------
// Synthetic shapes

SyntheticShape SyntheticShape::disk(double r) {
  SyntheticShape s;
  s.kind = SyntheticKind::disk;
  s.r_out = r;
  return s;
}

SyntheticShape SyntheticShape::annulus(double r_in, double r_out) {
  if (!(r_in > 0.0 && r_in < r_out)) throw std::invalid_argument("annulus needs 0 < r_in < r_out");
  SyntheticShape s;
  s.kind = SyntheticKind::annulus;
  s.r_in = r_in;
  s.r_out = r_out;
  return s;
}

SyntheticShape SyntheticShape::ellipse(double a, double b) {
  SyntheticShape s;
  s.kind = SyntheticKind::ellipse;
  s.a = a;
  s.b = b;
  return s;
}

SyntheticShape SyntheticShape::polygon(std::vector<Point2> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  SyntheticShape s;
  s.kind = SyntheticKind::polygon;
  s.vertices = std::move(vertices);
  return s;
}

SyntheticShape SyntheticShape::double_annulus(double r_in, double r_out, double offset) {
  SyntheticShape s = annulus(r_in, r_out);
  s.kind = SyntheticKind::double_annulus;
  s.offset = offset;
  return s;
}

bool SyntheticShape::contains(Point2 p) const {
  switch (kind) {
    case SyntheticKind::disk: return norm(p) <= r_out;
    case SyntheticKind::annulus: {
      const double d = norm(p);
      return d >= r_in && d <= r_out;
    }
    case SyntheticKind::ellipse: return (p.x * p.x) / (a * a) + (p.y * p.y) / (b * b) <= 1.0;
    case SyntheticKind::polygon: {
      bool inside = false;
      for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
        const Point2 u = vertices[i], v = vertices[j];
        if ((u.y > p.y) != (v.y > p.y) && p.x < (v.x - u.x) * (p.y - u.y) / (v.y - u.y) + u.x) inside = !inside;
      }
      return inside;
    }
    case SyntheticKind::double_annulus: {
      const double d1 = norm(p - Point2{offset, 0.0}), d2 = norm(p - Point2{-offset, 0.0});
      // Union of two annuli minus both inner disks.
      if (d1 < r_in || d2 < r_in) return false;
      return d1 <= r_out || d2 <= r_out;
    }
  }
  return false;
}

double SyntheticShape::bounding_radius() const {
  switch (kind) {
    case SyntheticKind::disk:
    case SyntheticKind::annulus: return r_out;
    case SyntheticKind::ellipse: return std::max(a, b);
    case SyntheticKind::polygon: {
      double r = 0.0;
      for (const auto& v : vertices) r = std::max(r, norm(v));
      return r;
    }
    case SyntheticKind::double_annulus: return offset + r_out;
  }
  return 0.0;
}

double SyntheticShape::area() const {
  constexpr double pi = std::numbers::pi;
  switch (kind) {
    case SyntheticKind::disk: return pi * r_out * r_out;
    case SyntheticKind::annulus: return pi * (r_out * r_out - r_in * r_in);
    case SyntheticKind::ellipse: return pi * a * b;
    case SyntheticKind::polygon: {
      double twice = 0.0;
      for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
        twice += vertices[j].x * vertices[i].y - vertices[i].x * vertices[j].y;
      }
      return std::abs(twice) / 2.0;
    }
    case SyntheticKind::double_annulus: {
      // Two outer disks (lens overlap subtracted) minus both inner disks.
      const double d = 2.0 * offset, r = r_out;
      double lens = 0.0;
      if (d < 2.0 * r) lens = 2.0 * r * r * std::acos(d / (2.0 * r)) - d / 2.0 * std::sqrt(4.0 * r * r - d * d);
      return 2.0 * pi * r * r - lens - 2.0 * pi * r_in * r_in;
    }
  }
  return 0.0;
}

GrayImage make_synthetic(const SyntheticShape& shape, const Pose& pose, std::size_t height, std::size_t width) {
  if (!(pose.scale > 0.0)) throw std::invalid_argument("synthetic pose scale must be positive");
  const double cx = (static_cast<double>(width) - 1.0) / 2.0 + pose.tx;
  const double cy = (static_cast<double>(height) - 1.0) / 2.0 + pose.ty;
  const double extent = shape.bounding_radius() * pose.scale;
  if (cx - extent < -0.5 || cy - extent < -0.5 || cx + extent > static_cast<double>(width) - 0.5 ||
      cy + extent > static_cast<double>(height) - 0.5) {
    throw std::invalid_argument("synthetic shape exceeds the " + std::to_string(height) + "x" + std::to_string(width) +
                                " canvas after transform");
  }
  const double cs = std::cos(pose.angle), sn = std::sin(pose.angle);
  constexpr int kSub = 4;
  GrayImage img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double x = static_cast<double>(c) - 0.5 + (sx + 0.5) / kSub - cx;
          const double y = static_cast<double>(r) - 0.5 + (sy + 0.5) / kSub - cy;
          // Inverse pose: rotate by -angle, then unscale.
          const Point2 local{(cs * x + sn * y) / pose.scale, (-sn * x + cs * y) / pose.scale};
          hits += shape.contains(local) ? 1 : 0;
        }
      }
      img.at(r, c) = static_cast<float>(hits) / (kSub * kSub);
    }
  }
  return img;
}

SyntheticShape random_star_polygon(std::uint64_t seed, std::size_t vertices, double r_min, double r_max) {
  if (vertices < 3) throw std::invalid_argument("star polygon needs at least 3 vertices");
  Rng rng(seed);
  std::vector<Point2> pts;
  pts.reserve(vertices);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    const double t = (static_cast<double>(i) + rng.uniform(-0.3, 0.3)) * step;
    const double r = rng.uniform(r_min, r_max);
    pts.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return SyntheticShape::polygon(std::move(pts));
}

}  // namespace topohd
