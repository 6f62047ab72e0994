#include "topohd/hypervector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "topohd/rng.hpp"

namespace topohd {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Hypervector Hypervector::from_values(std::vector<std::int8_t> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 1 && values[i] != -1) {
      throw std::invalid_argument("hypervector element " + std::to_string(i) + " is not bipolar");
    }
  }
  Hypervector h;
  h.bits_ = std::move(values);
  return h;
}

Hypervector Hypervector::random(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Hypervector h;
  h.bits_.resize(dim);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i % 64 == 0) word = rng.next();
    h.bits_[i] = (word >> (i % 64)) & 1 ? 1 : -1;
  }
  return h;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a.dim(), b.dim(), "bind");
  std::vector<std::int8_t> out(a.dim());
  const auto* pa = a.data();
  const auto* pb = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int8_t>(pa[i] * pb[i]);
  return Hypervector::from_values(std::move(out));
}

Hypervector bundle(std::span<const WeightedHypervector> items) {
  if (items.empty()) throw std::invalid_argument("bundle: empty list");
  const std::size_t dim = items.front().vector->dim();
  bool any_positive = false;
  bool integral = true;
  for (const auto& item : items) {
    require_same_dim(dim, item.vector->dim(), "bundle");
    if (!(item.weight >= 0.0) || !std::isfinite(item.weight)) {
      throw std::invalid_argument("bundle: weights must be finite and nonnegative");
    }
    any_positive = any_positive || item.weight > 0.0;
    integral = integral && item.weight == std::floor(item.weight) && item.weight < 1e9;
  }
  if (!any_positive) throw std::invalid_argument("bundle: all weights are zero");

  if (integral) {
    std::vector<std::int64_t> sums(dim, 0);
    for (const auto& item : items) {
      const auto w = static_cast<std::int64_t>(item.weight);
      const auto* v = item.vector->data();
      for (std::size_t i = 0; i < dim; ++i) sums[i] += w * v[i];
    }
    return Hypervector::sign_of(sums);
  }

  // Floating-point sums depend on summation order; fix a canonical order.
  std::vector<WeightedHypervector> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) {
    if (l.weight != r.weight) return l.weight < r.weight;
    return std::lexicographical_compare(l.vector->values().begin(), l.vector->values().end(),
                                        r.vector->values().begin(), r.vector->values().end());
  });
  std::vector<double> sums(dim, 0.0);
  for (const auto& item : sorted) {
    const auto* v = item.vector->data();
    for (std::size_t i = 0; i < dim; ++i) sums[i] += item.weight * v[i];
  }
  return Hypervector::sign_of(sums);
}

Hypervector bundle(std::span<const Hypervector> items) {
  std::vector<WeightedHypervector> weighted;
  weighted.reserve(items.size());
  for (const auto& h : items) weighted.push_back({&h, 1.0});
  return bundle(std::span<const WeightedHypervector>(weighted));
}

std::size_t hamming(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a.dim(), b.dim(), "hamming");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) d += a[i] != b[i];
  return d;
}

double similarity(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a.dim(), b.dim(), "similarity");
  if (a.dim() == 0) return 0.0;
  std::int64_t dot = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return static_cast<double>(dot) / static_cast<double>(a.dim());
}

Accumulator Accumulator::from_counts(std::vector<std::int32_t> counts) {
  Accumulator acc;
  acc.counts_ = std::move(counts);
  for (auto c : acc.counts_) acc.squared_norm_ += static_cast<std::int64_t>(c) * c;
  return acc;
}

void Accumulator::add(const Hypervector& h, std::int32_t weight) {
  require_same_dim(dim(), h.dim(), "accumulate");
  const auto* v = h.data();
  std::int32_t* c = counts_.data();
  std::int64_t delta = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const std::int64_t before = c[i];
    const std::int64_t after = before + static_cast<std::int64_t>(weight) * v[i];
    delta += after * after - before * before;
    c[i] = static_cast<std::int32_t>(after);
  }
  squared_norm_ += delta;
}

void Accumulator::add(const Accumulator& other) {
  require_same_dim(dim(), other.dim(), "accumulate");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  squared_norm_ = 0;
  for (auto c : counts_) squared_norm_ += static_cast<std::int64_t>(c) * c;
}

std::int64_t Accumulator::dot(const Hypervector& h) const {
  require_same_dim(dim(), h.dim(), "dot");
  const auto* v = h.data();
  const std::int32_t* c = counts_.data();
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) sum += static_cast<std::int64_t>(c[i]) * v[i];
  return sum;
}

double cosine_from_dot(std::int64_t dot, std::size_t dim, std::int64_t squared_norm) {
  const double denom = std::sqrt(static_cast<double>(dim)) * std::sqrt(static_cast<double>(squared_norm));
  return static_cast<double>(dot) / (denom + kCosineEpsilon);
}

double cosine(const Hypervector& h, const Accumulator& p) {
  return cosine_from_dot(p.dot(h), h.dim(), p.squared_norm());
}

}  // namespace topohd
