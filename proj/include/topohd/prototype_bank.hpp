#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "topohd/hypervector.hpp"

namespace topohd {

enum class Channel : std::uint8_t { hog = 0, zernike = 1, holes = 2, pixel = 3 };

std::string_view channel_name(Channel channel);

// One integer accumulator per class for a single channel.
class PrototypeBank {
 public:
  PrototypeBank() = default;
  PrototypeBank(Channel channel, std::size_t classes, std::size_t dim);

  Channel channel() const noexcept { return channel_; }
  std::size_t classes() const noexcept { return prototypes_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const Accumulator& prototype(std::size_t c) const { return prototypes_.at(c); }
  void set_prototype(std::size_t c, Accumulator acc);

  // P[c] += h. Throws std::out_of_range for a bad class.
  void accumulate(const Hypervector& h, std::size_t c);
  // Elementwise sum of two banks with the same shape.
  void merge(const PrototypeBank& other);

  // Cosine similarity of h to every class prototype.
  std::vector<double> scores(const Hypervector& h) const;
  // argmax of scores(), lowest class index on ties.
  std::size_t predict(const Hypervector& h) const;

  // OnlineHD step: if the prediction c' differs from y, P[y] += eta h and
  // P[c'] -= eta h. Returns true when the bank changed.
  bool online_update(const Hypervector& h, std::size_t y, std::int32_t eta = 1);

  bool operator==(const PrototypeBank& other) const {
    return channel_ == other.channel_ && dim_ == other.dim_ && prototypes_ == other.prototypes_;
  }

 private:
  void check_class(std::size_t c) const;

  Channel channel_ = Channel::hog;
  std::size_t dim_ = 0;
  std::vector<Accumulator> prototypes_;
};

std::size_t argmax_lowest(const std::vector<double>& scores);

}  // namespace topohd
