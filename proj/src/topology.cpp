#include "topohd/topology.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace topohd {

namespace {

// Connected components of pixels where mask == value. Components are listed
// in order of their first pixel in row-major order.
std::vector<std::vector<std::size_t>> components(const BinaryMask& mask, std::uint8_t value, int connectivity) {
  const std::size_t h = mask.height, w = mask.width;
  std::vector<std::uint8_t> seen(h * w, 0);
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (seen[start] || mask.bits[start] != value) continue;
    std::vector<std::size_t> comp;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      comp.push_back(idx);
      const long r = static_cast<long>(idx / w), c = static_cast<long>(idx % w);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (connectivity == 4 && dr != 0 && dc != 0) continue;
          const long nr = r + dr, nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(h) || nc >= static_cast<long>(w)) continue;
          const std::size_t n = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
          if (!seen[n] && mask.bits[n] == value) {
            seen[n] = 1;
            stack.push_back(n);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool touches_border(const std::vector<std::size_t>& comp, std::size_t h, std::size_t w) {
  return std::any_of(comp.begin(), comp.end(), [&](std::size_t idx) {
    const std::size_t r = idx / w, c = idx % w;
    return r == 0 || c == 0 || r + 1 == h || c + 1 == w;
  });
}

BinaryMask mask_from(const std::vector<std::size_t>& comp, std::size_t h, std::size_t w) {
  BinaryMask m(h, w);
  for (auto idx : comp) m.bits[idx] = 1;
  return m;
}

struct GslSpline {
  std::unique_ptr<gsl_spline, decltype(&gsl_spline_free)> spline{nullptr, &gsl_spline_free};
  std::unique_ptr<gsl_interp_accel, decltype(&gsl_interp_accel_free)> accel{nullptr, &gsl_interp_accel_free};
};

// Closed curve through the vertices, parametrized by cumulative chord length.
class PeriodicCurve {
 public:
  explicit PeriodicCurve(const std::vector<Point2>& vertices) {
    static const bool handler_off = [] {
      gsl_set_error_handler_off();
      return true;
    }();
    (void)handler_off;
    const std::size_t n = vertices.size();
    std::vector<double> t(n + 1), xs(n + 1), ys(n + 1);
    t[0] = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const Point2& p = vertices[i % n];
      xs[i] = p.x;
      ys[i] = p.y;
      if (i > 0) t[i] = t[i - 1] + norm(p - vertices[i - 1]);
    }
    length_ = t[n];
    init(x_, t, xs);
    init(y_, t, ys);
  }

  double length() const { return length_; }

  Point2 at(double t) const {
    t = std::fmod(t, length_);
    if (t < 0.0) t += length_;
    return {gsl_spline_eval(x_.spline.get(), t, x_.accel.get()), gsl_spline_eval(y_.spline.get(), t, y_.accel.get())};
  }

 private:
  static void init(GslSpline& s, const std::vector<double>& t, const std::vector<double>& v) {
    s.spline.reset(gsl_spline_alloc(gsl_interp_cspline_periodic, t.size()));
    s.accel.reset(gsl_interp_accel_alloc());
    if (!s.spline || !s.accel || gsl_spline_init(s.spline.get(), t.data(), v.data(), t.size()) != GSL_SUCCESS) {
      throw std::runtime_error("periodic spline construction failed");
    }
  }

  double length_ = 0.0;
  GslSpline x_, y_;
};

Point2 polygon_centroid(const std::vector<Point2>& v) {
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& p = v[i];
    const Point2& q = v[(i + 1) % v.size()];
    const double cross = p.x * q.y - q.x * p.y;
    a2 += cross;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  if (std::abs(a2) < 1e-12) {
    Point2 m;
    for (const auto& p : v) m = m + p;
    return m * (1.0 / static_cast<double>(v.size()));
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Binarization and components

std::optional<int> otsu_bin(const GrayImage& img) {
  if (img.empty()) return std::nullopt;
  std::array<double, 256> hist{};
  for (float v : img.pixels) {
    const long b = std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0);
    hist[static_cast<std::size_t>(b)] += 1.0;
  }
  const double total = static_cast<double>(img.pixels.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double weight_bg = 0.0, sum_bg = 0.0, best = -1.0;
  int best_t = -1;
  for (int t = 0; t < 255; ++t) {
    weight_bg += hist[t];
    sum_bg += t * hist[t];
    const double weight_fg = total - weight_bg;
    if (weight_bg == 0.0 || weight_fg == 0.0) continue;
    const double mean_bg = sum_bg / weight_bg;
    const double mean_fg = (sum_all - sum_bg) / weight_fg;
    const double between = weight_bg * weight_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  if (best_t < 0) return std::nullopt;
  return best_t;
}

BinaryMask binarize(const GrayImage& img) {
  BinaryMask mask(img.height, img.width);
  const auto t = otsu_bin(img);
  if (!t) return mask;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const long b = std::lround(std::clamp(static_cast<double>(img.pixels[i]), 0.0, 1.0) * 255.0);
    mask.bits[i] = b > *t ? 1 : 0;
  }
  return mask;
}

BinaryMask remove_small_components(const BinaryMask& mask, std::size_t min_pixels) {
  BinaryMask out(mask.height, mask.width);
  for (const auto& comp : components(mask, 1, 8)) {
    if (comp.size() < min_pixels) continue;
    for (auto idx : comp) out.bits[idx] = 1;
  }
  return out;
}

std::optional<BinaryMask> largest_component(const BinaryMask& mask) {
  const auto comps = components(mask, 1, 8);
  if (comps.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (comps[i].size() > comps[best].size()) best = i;
  }
  return mask_from(comps[best], mask.height, mask.width);
}

std::vector<BinaryMask> find_holes(const BinaryMask& shape, std::size_t min_pixels) {
  auto comps = components(shape, 0, 4);
  std::vector<std::vector<std::size_t>> holes;
  for (auto& comp : comps) {
    if (comp.size() < std::max<std::size_t>(1, min_pixels)) continue;
    if (touches_border(comp, shape.height, shape.width)) continue;
    holes.push_back(std::move(comp));
  }
  std::stable_sort(holes.begin(), holes.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::vector<BinaryMask> out;
  out.reserve(holes.size());
  for (const auto& h : holes) out.push_back(mask_from(h, shape.height, shape.width));
  return out;
}

BinaryMask fill_holes(const BinaryMask& shape) {
  BinaryMask filled(shape.height, shape.width);
  std::fill(filled.bits.begin(), filled.bits.end(), std::uint8_t{1});
  for (const auto& comp : components(shape, 0, 4)) {
    if (!touches_border(comp, shape.height, shape.width)) continue;
    for (auto idx : comp) filled.bits[idx] = 0;
  }
  return filled;
}

// ---------------------------------------------------------------------------
// Marching squares

std::vector<Contour> marching_squares_all(const BinaryMask& region) {
  if (!region.any()) throw std::invalid_argument("marching_squares: empty region");
  const long h = static_cast<long>(region.height), w = static_cast<long>(region.width);
  auto inside = [&](long r, long c) -> int {
    if (r < 0 || c < 0 || r >= h || c >= w) return 0;
    return region.bits[static_cast<std::size_t>(r * w + c)] ? 1 : 0;
  };
  // Edge keys over the padded grid [-1, h] x [-1, w].
  const long stride = w + 2;
  auto hkey = [&](long r, long c) { return ((r + 1) * stride + (c + 1)) * 2; };      // (r,c)-(r,c+1)
  auto vkey = [&](long r, long c) { return ((r + 1) * stride + (c + 1)) * 2 + 1; };  // (r,c)-(r+1,c)
  auto key_point = [&](long key) -> Point2 {
    const long cell = key / 2;
    const long r = cell / stride - 1, c = cell % stride - 1;
    if (key % 2 == 0) return {static_cast<double>(c) + 0.5, static_cast<double>(r)};
    return {static_cast<double>(c), static_cast<double>(r) + 0.5};
  };

  std::unordered_map<long, std::array<long, 2>> links;
  auto link_one = [&](long a, long b) {
    auto& slot = links.try_emplace(a, std::array<long, 2>{-1, -1}).first->second;
    (slot[0] < 0 ? slot[0] : slot[1]) = b;
  };
  auto link = [&](long a, long b) {
    link_one(a, b);
    link_one(b, a);
  };

  for (long r = -1; r < h; ++r) {
    for (long c = -1; c < w; ++c) {
      const int tl = inside(r, c), tr = inside(r, c + 1), br = inside(r + 1, c + 1), bl = inside(r + 1, c);
      const int config = tl | (tr << 1) | (br << 2) | (bl << 3);
      if (config == 0 || config == 15) continue;
      const long top = hkey(r, c), bottom = hkey(r + 1, c), left = vkey(r, c), right = vkey(r, c + 1);
      if (config == 5) {  // tl, br inside; center value 0.5 joins them
        link(top, right);
        link(left, bottom);
        continue;
      }
      if (config == 10) {  // tr, bl inside
        link(top, left);
        link(right, bottom);
        continue;
      }
      std::array<long, 2> crossing{};
      int n = 0;
      if (tl != tr) crossing[n++] = top;
      if (tr != br) crossing[n++] = right;
      if (bl != br) crossing[n++] = bottom;
      if (tl != bl) crossing[n++] = left;
      link(crossing[0], crossing[1]);
    }
  }

  // Deterministic traversal: start loops from keys in increasing order.
  std::vector<long> keys;
  keys.reserve(links.size());
  for (const auto& [k, v] : links) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::unordered_map<long, bool> visited;
  std::vector<Contour> loops;
  for (long start : keys) {
    if (visited[start]) continue;
    Contour loop;
    long prev = -1, cur = start;
    while (!visited[cur]) {
      visited[cur] = true;
      loop.points.push_back(key_point(cur));
      const auto& next = links.at(cur);
      const long step = next[0] != prev ? next[0] : next[1];
      prev = cur;
      cur = step;
    }
    if (loop.signed_area() < 0.0) std::reverse(loop.points.begin(), loop.points.end());
    loops.push_back(std::move(loop));
  }
  std::stable_sort(loops.begin(), loops.end(), [](const Contour& a, const Contour& b) { return a.length() > b.length(); });
  return loops;
}

Contour marching_squares(const BinaryMask& region) { return marching_squares_all(region).front(); }

// ---------------------------------------------------------------------------
// Canonical frame

namespace {

std::array<double, 4> rotation_by(double angle) {
  const double c = std::cos(-angle), s = std::sin(-angle);
  return {c, -s, s, c};
}

}  // namespace

CanonicalFrame degenerate_frame(Point2 centroid) {
  CanonicalFrame f;
  f.centroid = centroid;
  f.scale = kFrameEpsilon;
  f.angle = 0.0;
  f.rotation = rotation_by(0.0);
  f.degenerate = true;
  f.orientation_ambiguous = true;
  return f;
}

CanonicalFrame canonical_frame(const Contour& outer) {
  if (outer.size() == 0) throw std::invalid_argument("canonical_frame: empty contour");
  const Point2 c = outer.mean();
  const double n = static_cast<double>(outer.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : outer.points) {
    const Point2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  sxx /= n;
  sxy /= n;
  syy /= n;
  const double trace = sxx + syy;
  if (!(trace > 1e-24)) return degenerate_frame(c);

  CanonicalFrame f;
  f.centroid = c;
  f.scale = std::sqrt(trace) + kFrameEpsilon;
  const double half_diff = 0.5 * (sxx - syy);
  const double radius = std::sqrt(half_diff * half_diff + sxy * sxy);
  const double lambda1 = 0.5 * trace + radius;
  f.eigen_gap = 2.0 * radius;
  f.orientation_ambiguous = f.eigen_gap < 1e-6 * trace;

  Point2 v;
  if (std::abs(sxy) > 1e-15 * trace) {
    v = {lambda1 - syy, sxy};
  } else {
    v = sxx >= syy ? Point2{1.0, 0.0} : Point2{0.0, 1.0};
  }
  v = v * (1.0 / norm(v));

  double m2 = 0.0, m3 = 0.0;
  for (const auto& p : outer.points) {
    const Point2 d = p - c;
    const double t = d.x * v.x + d.y * v.y;
    m2 += t * t;
    m3 += t * t * t;
  }
  m2 /= n;
  m3 /= n;
  double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  bool flip = false;
  if (std::abs(skew) >= kSkewnessFallback) {
    flip = skew < 0.0;
  } else {
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const double d = norm(outer.points[i] - c);
      if (d > best) {
        best = d;
        far = i;
      }
    }
    const Point2 d = outer.points[far] - c;
    flip = d.x * v.x + d.y * v.y < 0.0;
  }
  if (flip) {
    v = v * -1.0;
    skew = -skew;
  }
  f.skewness = skew;
  f.angle = std::atan2(v.y, v.x);
  f.rotation = rotation_by(f.angle);
  return f;
}

Point2 canon_point(const CanonicalFrame& frame, Point2 p) {
  const Point2 d = (p - frame.centroid) * (1.0 / frame.scale);
  const auto& r = frame.rotation;
  return {r[0] * d.x + r[1] * d.y, r[2] * d.x + r[3] * d.y};
}

Point2 uncanon_point(const CanonicalFrame& frame, Point2 q) {
  const auto& r = frame.rotation;
  // R is orthogonal: R^-1 = R^T.
  const Point2 d{r[0] * q.x + r[2] * q.y, r[1] * q.x + r[3] * q.y};
  return frame.centroid + d * frame.scale;
}

// ---------------------------------------------------------------------------
// Radial signature and Fourier magnitudes

std::vector<double> radial_signature(const Contour& contour, std::size_t samples) {
  if (samples < 16) throw std::invalid_argument("radial_signature needs at least 16 samples");
  std::vector<double> sig(samples, 0.0);

  std::vector<Point2> v;
  v.reserve(contour.size());
  for (const auto& p : contour.points) {
    if (v.empty() || norm(p - v.back()) > 1e-12) v.push_back(p);
  }
  while (v.size() > 1 && norm(v.front() - v.back()) <= 1e-12) v.pop_back();
  if (v.size() < 3) return sig;
  Contour cleaned{v};
  if (cleaned.signed_area() < 0.0) std::reverse(v.begin(), v.end());

  const PeriodicCurve curve(v);
  const double length = curve.length();
  if (!(length > 0.0)) return sig;
  const Point2 center = polygon_centroid(v);
  auto radius = [&](double t) { return norm(curve.at(t) - center); };

  // Coarse search for the farthest point, then golden-section refinement.
  const std::size_t coarse = 8 * samples;
  const double step = length / static_cast<double>(coarse);
  std::size_t best = 0;
  double best_r = -1.0;
  for (std::size_t i = 0; i < coarse; ++i) {
    const double r = radius(step * static_cast<double>(i));
    if (r > best_r) {
      best_r = r;
      best = i;
    }
  }
  double lo = step * (static_cast<double>(best) - 1.0), hi = step * (static_cast<double>(best) + 1.0);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - golden * (hi - lo), b = lo + golden * (hi - lo);
  double ra = radius(a), rb = radius(b);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * length; ++it) {
    if (ra >= rb) {
      hi = b;
      b = a;
      rb = ra;
      a = hi - golden * (hi - lo);
      ra = radius(a);
    } else {
      lo = a;
      a = b;
      ra = rb;
      b = lo + golden * (hi - lo);
      rb = radius(b);
    }
  }
  const double start = 0.5 * (lo + hi);

  std::vector<Point2> pts(samples);
  Point2 mean;
  for (std::size_t j = 0; j < samples; ++j) {
    pts[j] = curve.at(start + length * static_cast<double>(j) / static_cast<double>(samples));
    mean = mean + pts[j];
  }
  mean = mean * (1.0 / static_cast<double>(samples));
  double energy = 0.0;
  for (std::size_t j = 0; j < samples; ++j) {
    sig[j] = norm(pts[j] - mean);
    energy += sig[j] * sig[j];
  }
  const double rms = std::sqrt(energy / static_cast<double>(samples));
  for (auto& s : sig) s /= rms + kFrameEpsilon;
  return sig;
}

std::vector<double> fourier_magnitudes(const std::vector<double>& sig, std::size_t harmonics) {
  const std::size_t n = sig.size();
  if (n == 0 || 2 * harmonics >= n) throw std::invalid_argument("fourier_magnitudes: need harmonics < N/2");
  std::vector<double> out(harmonics);
  for (std::size_t m = 1; m <= harmonics; ++m) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((j * m) % n) / static_cast<double>(n);
      acc += sig[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[m - 1] = std::abs(acc) / static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hole descriptors

std::vector<double> HoleDescriptor::to_vector() const {
  std::vector<double> v(fourier);
  v.push_back(canon_y);
  v.push_back(canon_x);
  v.push_back(rel_area);
  v.push_back(rel_perimeter);
  return v;
}

Point2 mask_centroid(const BinaryMask& mask) {
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (std::size_t r = 0; r < mask.height; ++r) {
    for (std::size_t c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      sx += static_cast<double>(c);
      sy += static_cast<double>(r);
      n += 1.0;
    }
  }
  if (n == 0.0) return {};
  return {sx / n, sy / n};
}

HoleDescriptor hole_descriptor(const BinaryMask& hole, const Contour& hole_contour, const CanonicalFrame& frame,
                               double outer_area, double outer_perimeter, std::size_t harmonics,
                               std::size_t samples) {
  if (!(outer_area > 0.0) || !(outer_perimeter > 0.0)) {
    throw std::invalid_argument("hole_descriptor: outer area and perimeter must be positive");
  }
  HoleDescriptor d;
  d.fourier = fourier_magnitudes(radial_signature(hole_contour, samples), harmonics);
  const Point2 q = canon_point(frame, mask_centroid(hole));
  d.canon_x = q.x;
  d.canon_y = q.y;
  d.rel_area = static_cast<double>(hole.count()) / outer_area;
  d.rel_perimeter = hole_contour.length() / outer_perimeter;
  return d;
}

void sort_holes(std::vector<HoleDescriptor>& holes) {
  std::sort(holes.begin(), holes.end(), [](const HoleDescriptor& a, const HoleDescriptor& b) {
    if (a.rel_area != b.rel_area) return a.rel_area > b.rel_area;
    const auto va = a.to_vector(), vb = b.to_vector();
    return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
  });
}

// ---------------------------------------------------------------------------
// Full extraction

PrimitiveSet extract_primitives(const BinaryMask& mask, const PrimitiveOptions& options) {
  PrimitiveSet set;
  const BinaryMask cleaned = remove_small_components(mask, options.min_component_pixels);
  auto shape = largest_component(cleaned);
  if (!shape) {
    set.frame = degenerate_frame({(static_cast<double>(mask.width) - 1.0) / 2.0,
                                  (static_cast<double>(mask.height) - 1.0) / 2.0});
    set.shape = BinaryMask(mask.height, mask.width);
    set.filled = set.shape;
    return set;
  }
  set.empty = false;
  set.shape = std::move(*shape);
  set.filled = fill_holes(set.shape);
  set.outer = marching_squares(set.filled);
  set.frame = canonical_frame(set.outer);
  set.outer_area = static_cast<double>(set.filled.count());
  set.outer_perimeter = set.outer.length();

  const auto holes = find_holes(set.shape, options.min_hole_pixels);
  set.hole_count = holes.size();
  set.holes.reserve(holes.size());
  for (const auto& hole : holes) {
    const Contour contour = marching_squares(hole);
    set.holes.push_back(hole_descriptor(hole, contour, set.frame, set.outer_area, set.outer_perimeter,
                                        options.harmonics, options.samples));
  }
  sort_holes(set.holes);
  if (set.holes.size() > options.max_holes) set.holes.resize(options.max_holes);
  return set;
}

PrimitiveSet extract_primitives(const GrayImage& img, const PrimitiveOptions& options) {
  return extract_primitives(binarize(img), options);
}

}  // namespace topohd
