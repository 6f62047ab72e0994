#include <algorithm>
#include <stdexcept>

#include "topohd/parallel.hpp"
#include "topohd/pipeline.hpp"
#include "topohd/rng.hpp"

namespace topohd {

NaiveEncoder::NaiveEncoder(std::size_t dim, std::size_t height, std::size_t width, std::size_t levels,
                           std::uint64_t seed)
    : seed_(seed), height_(height), width_(width), levels_(dim, levels, derive_seed(seed, kLevelTag)) {
  if (height == 0 || width == 0) throw std::invalid_argument("naive encoder needs a nonempty canvas");
  positions_.reserve(height * width);
  for (std::size_t p = 0; p < height * width; ++p) positions_.push_back(Hypervector::random(dim, derive_seed(seed, p)));
}

Hypervector NaiveEncoder::encode(const GrayImage& img) const {
  if (img.height != height_ || img.width != width_) throw std::invalid_argument("naive encoder: image size mismatch");
  const std::size_t d = dim();
  // |sum| <= pixel count, far inside int32.
  std::vector<std::int32_t> sums(d, 0);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    const std::int8_t* pos = positions_[p].data();
    const std::int8_t* lev = levels_.level(levels_.quantize(img.pixels[p], 0.0, 1.0)).data();
    std::int32_t* s = sums.data();
    for (std::size_t i = 0; i < d; ++i) s[i] += pos[i] * lev[i];
  }
  return Hypervector::sign_of(sums);
}

std::vector<Hypervector> NaiveEncoder::encode_batch(const std::vector<GrayImage>& images, unsigned workers) const {
  std::vector<Hypervector> out(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) { out[i] = encode(images[i]); });
  return out;
}

}  // namespace topohd
