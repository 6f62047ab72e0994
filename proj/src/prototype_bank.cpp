#include "topohd/prototype_bank.hpp"

#include <stdexcept>
#include <string>

namespace topohd {

std::string_view channel_name(Channel channel) {
  switch (channel) {
    case Channel::hog: return "hog";
    case Channel::zernike: return "zernike";
    case Channel::holes: return "holes";
    case Channel::pixel: return "pixel";
  }
  return "unknown";
}

std::size_t argmax_lowest(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

PrototypeBank::PrototypeBank(Channel channel, std::size_t classes, std::size_t dim)
    : channel_(channel), dim_(dim), prototypes_(classes, Accumulator(dim)) {
  if (classes == 0) throw std::invalid_argument("prototype bank needs at least one class");
}

void PrototypeBank::check_class(std::size_t c) const {
  if (c >= prototypes_.size()) {
    throw std::out_of_range("class " + std::to_string(c) + " outside [0, " + std::to_string(prototypes_.size()) + ")");
  }
}

void PrototypeBank::set_prototype(std::size_t c, Accumulator acc) {
  check_class(c);
  if (acc.dim() != dim_) throw std::invalid_argument("prototype dimension mismatch");
  prototypes_[c] = std::move(acc);
}

void PrototypeBank::accumulate(const Hypervector& h, std::size_t c) {
  check_class(c);
  prototypes_[c].add(h);
}

void PrototypeBank::merge(const PrototypeBank& other) {
  if (other.classes() != classes() || other.dim_ != dim_) throw std::invalid_argument("merge: bank shape mismatch");
  for (std::size_t c = 0; c < prototypes_.size(); ++c) prototypes_[c].add(other.prototypes_[c]);
}

std::vector<double> PrototypeBank::scores(const Hypervector& h) const {
  std::vector<double> s(prototypes_.size());
  for (std::size_t c = 0; c < prototypes_.size(); ++c) s[c] = cosine(h, prototypes_[c]);
  return s;
}

std::size_t PrototypeBank::predict(const Hypervector& h) const { return argmax_lowest(scores(h)); }

bool PrototypeBank::online_update(const Hypervector& h, std::size_t y, std::int32_t eta) {
  check_class(y);
  if (eta < 1) throw std::invalid_argument("online step size must be >= 1");
  const std::size_t predicted = predict(h);
  if (predicted == y) return false;
  prototypes_[y].add(h, eta);
  prototypes_[predicted].add(h, -eta);
  return true;
}

}  // namespace topohd
