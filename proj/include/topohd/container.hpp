#pragma once

// Versioned little-endian binary container ("THDC1") for encoders and
// prototype banks, so training and evaluation can run as separate processes.
//
// Layout:
//   "THDC1"              5 bytes
//   u16 version          currently 1
//   u32 section count
//   per section: 4-byte tag, u64 payload size, payload

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "topohd/encoders.hpp"
#include "topohd/prototype_bank.hpp"

namespace topohd {

inline constexpr std::string_view kContainerMagic = "THDC1";
inline constexpr std::uint16_t kContainerVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f64(double v);
  void str(std::string_view s);
  void raw(const void* data, std::size_t n);
  void f64s(const std::vector<double>& v);

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

// Throws std::runtime_error on truncated input, naming the offset.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : ByteReader(bytes.data(), bytes.size()) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  double f64();
  std::string str();
  void raw(void* out, std::size_t n);
  std::vector<double> f64s();

  std::size_t offset() const noexcept { return offset_; }
  bool done() const noexcept { return offset_ == size_; }

 private:
  void need(std::size_t n) const;
  std::uint64_t get(int n);

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t offset_ = 0;
};

using SectionTag = std::array<char, 4>;

class Container {
 public:
  void put(std::string_view tag, std::vector<std::uint8_t> payload);
  bool has(std::string_view tag) const;
  // Throws if the section is missing.
  const std::vector<std::uint8_t>& get(std::string_view tag) const;

  std::vector<std::uint8_t> serialize() const;
  static Container parse(const std::vector<std::uint8_t>& bytes);

  void save(const std::string& path) const;
  static Container load(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> sections_;
};

void write_projection(ByteWriter& w, const ProjectionEncoder& enc);
ProjectionEncoder read_projection(ByteReader& r);

void write_hole_encoder(ByteWriter& w, const HoleSetEncoder& enc);
HoleSetEncoder read_hole_encoder(ByteReader& r);

void write_bank(ByteWriter& w, const PrototypeBank& bank);
PrototypeBank read_bank(ByteReader& r);

}  // namespace topohd
