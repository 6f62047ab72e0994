#include "topohd/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topohd/parallel.hpp"
#include "topohd/rng.hpp"

namespace topohd {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::outer_hog: return "outer-hog";
    case Role::outer_zernike: return "outer-zernike";
    case Role::holes: return "holes";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ProjectionEncoder

namespace {

std::vector<float> gaussian_weights(std::size_t dim, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> w(dim * k);
  for (auto& v : w) v = static_cast<float>(rng.normal());
  return w;
}

}  // namespace

ProjectionEncoder::ProjectionEncoder(std::size_t dim, std::uint64_t seed, std::vector<double> mean,
                                     std::vector<double> scale)
    : dim_(dim), seed_(seed), mean_(std::move(mean)), scale_(std::move(scale)) {
  check_stats();
  weights_ = gaussian_weights(dim_, mean_.size(), seed_);
}

ProjectionEncoder::ProjectionEncoder(std::size_t dim, std::vector<float> weights, std::vector<double> mean,
                                     std::vector<double> scale)
    : dim_(dim), weights_(std::move(weights)), mean_(std::move(mean)), scale_(std::move(scale)) {
  check_stats();
  if (weights_.size() != dim_ * mean_.size()) {
    throw std::invalid_argument("projection weights must be dim x k");
  }
}

void ProjectionEncoder::check_stats() const {
  if (dim_ == 0) throw std::invalid_argument("projection dimension must be positive");
  if (mean_.empty() || mean_.size() != scale_.size()) {
    throw std::invalid_argument("projection mean/scale must be nonempty and of equal length");
  }
  for (double s : scale_) {
    if (!(s > 0.0)) throw std::invalid_argument("projection scales must be strictly positive");
  }
}

ProjectionEncoder ProjectionEncoder::fit(const FeatureMatrix& train, std::size_t dim, std::uint64_t seed) {
  if (train.rows < 2) throw std::invalid_argument("fit_projection needs at least two samples");
  const std::size_t k = train.cols;
  std::vector<double> mean(k, 0.0), scale(k, 0.0);
  for (std::size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    for (std::size_t j = 0; j < k; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double d = r[j] - mean[j];
      scale[j] += d * d;
    }
  }
  for (auto& s : scale) {
    s = std::sqrt(s / static_cast<double>(train.rows));
    if (s < 1e-8) s = 1.0;
  }
  return ProjectionEncoder(dim, seed, std::move(mean), std::move(scale));
}

namespace {

// Eight float lanes. Lane l of sample s accumulates w[i] * z[i] over i = l mod 8,
// in increasing i, so the sum never depends on the instruction set.
typedef float Lanes __attribute__((vector_size(32)));

inline Lanes load8(const float* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

}  // namespace

void ProjectionEncoder::project4(const float* const z[4], std::int8_t* const out[4]) const {
  const std::size_t k = mean_.size();
  const std::size_t body = k - k % 8;
  const float* z0 = z[0];
  const float* z1 = z[1];
  const float* z2 = z[2];
  const float* z3 = z[3];
  for (std::size_t d = 0; d < dim_; ++d) {
    const float* w = weights_.data() + d * k;
    Lanes a0 = {}, a1 = {}, a2 = {}, a3 = {};
    for (std::size_t i = 0; i < body; i += 8) {
      const Lanes wv = load8(w + i);
      a0 += wv * load8(z0 + i);
      a1 += wv * load8(z1 + i);
      a2 += wv * load8(z2 + i);
      a3 += wv * load8(z3 + i);
    }
    const Lanes* acc[4] = {&a0, &a1, &a2, &a3};
    for (int s = 0; s < 4; ++s) {
      const Lanes& a = *acc[s];
      float tail = 0.0f;
      for (std::size_t i = body; i < k; ++i) tail += w[i] * z[s][i];
      const float total = ((a[0] + a[4]) + (a[1] + a[5])) + ((a[2] + a[6]) + (a[3] + a[7])) + tail;
      out[s][d] = total < 0.0f ? -1 : 1;
    }
  }
}

Hypervector ProjectionEncoder::encode(std::span<const float> x) const {
  FeatureMatrix one(1, x.size());
  std::copy(x.begin(), x.end(), one.values.begin());
  return encode_batch(one).front();
}

std::vector<Hypervector> ProjectionEncoder::encode_batch(const FeatureMatrix& x, unsigned workers) const {
  const std::size_t k = mean_.size();
  if (x.cols != k) {
    throw std::invalid_argument("encode_projection: expected " + std::to_string(k) + " features, got " +
                                std::to_string(x.cols));
  }
  std::vector<Hypervector> result(x.rows);
  const std::size_t groups = (x.rows + 3) / 4;
  parallel_for(groups, workers, [&](std::size_t g) {
    std::vector<float> z(4 * k);
    std::vector<std::int8_t> bits(4 * dim_);
    const float* zp[4];
    std::int8_t* op[4];
    const std::size_t first = g * 4;
    for (int s = 0; s < 4; ++s) {
      const std::size_t row = std::min(first + s, x.rows - 1);
      auto src = x.row(row);
      for (std::size_t j = 0; j < k; ++j) {
        z[s * k + j] = static_cast<float>((static_cast<double>(src[j]) - mean_[j]) / scale_[j]);
      }
      zp[s] = z.data() + s * k;
      op[s] = bits.data() + s * dim_;
    }
    project4(zp, op);
    for (std::size_t s = 0; s < 4 && first + s < x.rows; ++s) {
      result[first + s] = Hypervector::from_values(
          std::vector<std::int8_t>(bits.begin() + s * dim_, bits.begin() + (s + 1) * dim_));
    }
  }, 1);
  return result;
}

// ---------------------------------------------------------------------------
// LevelTable

LevelTable::LevelTable(std::size_t dim, std::size_t levels, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw std::invalid_argument("level table dimension must be positive");
  if (levels < 2) throw std::invalid_argument("level table needs at least two levels");
  const Hypervector base = Hypervector::random(dim, derive_seed(seed, 0));
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 1));
  for (std::size_t i = dim - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<std::int8_t> current(base.values().begin(), base.values().end());
  levels_.reserve(levels);
  levels_.push_back(base);
  std::size_t flipped = 0;
  for (std::size_t q = 1; q < levels; ++q) {
    const std::size_t target = q * dim / (levels - 1);
    for (; flipped < target; ++flipped) current[order[flipped]] = static_cast<std::int8_t>(-current[order[flipped]]);
    levels_.push_back(Hypervector::from_values(current));
  }
}

std::size_t LevelTable::quantize(double v, double lo, double hi) const {
  if (!(hi > lo) || !std::isfinite(v)) return 0;
  const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  return static_cast<std::size_t>(std::lround(t * static_cast<double>(levels_.size() - 1)));
}

// ---------------------------------------------------------------------------
// HoleSetEncoder

HoleSetEncoder::HoleSetEncoder(std::size_t dim, std::size_t levels, std::size_t width, std::uint64_t seed,
                               std::vector<double> lower, std::vector<double> upper)
    : seed_(seed),
      table_(dim, levels, derive_seed(seed, kLevelTag)),
      no_hole_(Hypervector::random(dim, derive_seed(seed, kNoHoleTag))),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  if (width == 0 || lower_.size() != width || upper_.size() != width) {
    throw std::invalid_argument("hole encoder bounds must have one entry per feature");
  }
  roles_.reserve(width);
  for (std::size_t j = 0; j < width; ++j) roles_.push_back(Hypervector::random(dim, derive_seed(seed, kRoleTagBase + j)));
}

HoleSetEncoder HoleSetEncoder::fit(std::span<const double> rows, std::size_t width, std::size_t dim,
                                   std::size_t levels, std::uint64_t seed) {
  if (width == 0 || rows.size() % width != 0) throw std::invalid_argument("hole rows must be n x width");
  std::vector<double> lower(width, 0.0), upper(width, 1.0);
  const std::size_t n = rows.size() / width;
  if (n > 0) {
    for (std::size_t j = 0; j < width; ++j) {
      double lo = rows[j], hi = rows[j];
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, rows[i * width + j]);
        hi = std::max(hi, rows[i * width + j]);
      }
      lower[j] = lo;
      upper[j] = hi;
    }
  }
  return HoleSetEncoder(dim, levels, width, seed, std::move(lower), std::move(upper));
}

void HoleSetEncoder::accumulate_hole(std::span<const double> descriptor, std::vector<std::int32_t>& sums) const {
  const std::size_t dim = table_.dim();
  for (std::size_t j = 0; j < width(); ++j) {
    const Hypervector& level = table_.level(table_.quantize(descriptor[j], lower_[j], upper_[j]));
    const auto* lv = level.data();
    const auto* rv = roles_[j].data();
    for (std::size_t i = 0; i < dim; ++i) sums[i] += lv[i] * rv[i];
  }
}

Hypervector HoleSetEncoder::encode_hole(std::span<const double> descriptor) const {
  if (descriptor.size() != width()) {
    throw std::invalid_argument("hole descriptor has length " + std::to_string(descriptor.size()) +
                                ", expected " + std::to_string(width()));
  }
  std::vector<std::int32_t> sums(table_.dim(), 0);
  accumulate_hole(descriptor, sums);
  return Hypervector::sign_of(sums);
}

Hypervector HoleSetEncoder::encode(std::span<const double> rows, std::span<const std::uint8_t> valid) const {
  if (rows.size() != valid.size() * width()) {
    throw std::invalid_argument("hole block has " + std::to_string(rows.size()) + " values for " +
                                std::to_string(valid.size()) + " slots of width " + std::to_string(width()));
  }
  std::vector<std::int32_t> set_sums(table_.dim(), 0);
  std::size_t count = 0;
  for (std::size_t h = 0; h < valid.size(); ++h) {
    if (!valid[h]) continue;
    const Hypervector hole = encode_hole(rows.subspan(h * width(), width()));
    for (std::size_t i = 0; i < set_sums.size(); ++i) set_sums[i] += hole[i];
    ++count;
  }
  if (count == 0) return no_hole_;
  return Hypervector::sign_of(set_sums);
}

}  // namespace topohd
