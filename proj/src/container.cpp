#include "topohd/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace topohd {

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void ByteWriter::raw(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  bytes_.insert(bytes_.end(), p, p + n);
}

void ByteWriter::f64s(const std::vector<double>& v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void ByteReader::need(std::size_t n) const {
  if (size_ - offset_ < n) {
    throw std::runtime_error("container truncated at offset " + std::to_string(offset_) + " (need " +
                             std::to_string(n) + " bytes)");
  }
}

std::uint64_t ByteReader::get(int n) {
  need(static_cast<std::size_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[offset_ + i]) << (8 * i);
  offset_ += static_cast<std::size_t>(n);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(data_ + offset_), n);
  offset_ += n;
  return s;
}

void ByteReader::raw(void* out, std::size_t n) {
  need(n);
  std::memcpy(out, data_ + offset_, n);
  offset_ += n;
}

std::vector<double> ByteReader::f64s() {
  const std::uint64_t n = u64();
  need(n * 8);
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}

void Container::put(std::string_view tag, std::vector<std::uint8_t> payload) {
  if (tag.size() != 4) throw std::invalid_argument("section tags are four characters");
  for (auto& [t, p] : sections_) {
    if (t == tag) {
      p = std::move(payload);
      return;
    }
  }
  sections_.emplace_back(std::string(tag), std::move(payload));
}

bool Container::has(std::string_view tag) const {
  return std::any_of(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == tag; });
}

const std::vector<std::uint8_t>& Container::get(std::string_view tag) const {
  for (const auto& [t, p] : sections_) {
    if (t == tag) return p;
  }
  throw std::runtime_error("container has no section '" + std::string(tag) + "'");
}

std::vector<std::uint8_t> Container::serialize() const {
  ByteWriter w;
  w.raw(kContainerMagic.data(), kContainerMagic.size());
  w.u16(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(sections_.size()));
  for (const auto& [tag, payload] : sections_) {
    w.raw(tag.data(), 4);
    w.u64(payload.size());
    w.raw(payload.data(), payload.size());
  }
  return w.bytes();
}

Container Container::parse(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[5];
  r.raw(magic, 5);
  if (std::string_view(magic, 5) != kContainerMagic) throw std::runtime_error("not a THDC1 container (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kContainerVersion) {
    throw std::runtime_error("unsupported container version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  Container c;
  for (std::uint32_t i = 0; i < count; ++i) {
    char tag[4];
    r.raw(tag, 4);
    const std::uint64_t n = r.u64();
    std::vector<std::uint8_t> payload(n);
    r.raw(payload.data(), n);
    c.sections_.emplace_back(std::string(tag, 4), std::move(payload));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes after container sections");
  return c;
}

void Container::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

Container Container::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// W is regenerated from the seed on load; only the statistics are stored.
void write_projection(ByteWriter& w, const ProjectionEncoder& enc) {
  w.u64(enc.dim());
  w.u64(enc.seed());
  w.f64s(enc.mean());
  w.f64s(enc.scale());
}

ProjectionEncoder read_projection(ByteReader& r) {
  const std::uint64_t dim = r.u64();
  const std::uint64_t seed = r.u64();
  auto mean = r.f64s();
  auto scale = r.f64s();
  return ProjectionEncoder(dim, seed, std::move(mean), std::move(scale));
}

void write_hole_encoder(ByteWriter& w, const HoleSetEncoder& enc) {
  w.u64(enc.dim());
  w.u64(enc.levels());
  w.u64(enc.seed());
  w.f64s(enc.lower());
  w.f64s(enc.upper());
}

HoleSetEncoder read_hole_encoder(ByteReader& r) {
  const std::uint64_t dim = r.u64();
  const std::uint64_t levels = r.u64();
  const std::uint64_t seed = r.u64();
  auto lower = r.f64s();
  auto upper = r.f64s();
  const std::size_t width = lower.size();
  return HoleSetEncoder(dim, levels, width, seed, std::move(lower), std::move(upper));
}

void write_bank(ByteWriter& w, const PrototypeBank& bank) {
  w.u8(static_cast<std::uint8_t>(bank.channel()));
  w.u64(bank.classes());
  w.u64(bank.dim());
  for (std::size_t c = 0; c < bank.classes(); ++c) {
    for (std::int32_t v : bank.prototype(c).counts()) w.i32(v);
  }
}

PrototypeBank read_bank(ByteReader& r) {
  const auto channel = static_cast<Channel>(r.u8());
  if (static_cast<std::uint8_t>(channel) > static_cast<std::uint8_t>(Channel::pixel)) {
    throw std::runtime_error("unknown prototype channel tag");
  }
  const std::uint64_t classes = r.u64();
  const std::uint64_t dim = r.u64();
  PrototypeBank bank(channel, classes, dim);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::int32_t> counts(dim);
    for (auto& v : counts) v = r.i32();
    bank.set_prototype(c, Accumulator::from_counts(std::move(counts)));
  }
  return bank;
}

}  // namespace topohd
