#pragma once

// Container format (all multi-byte fields little-endian):
//
//   offset  size  field
//   0       4     magic "RCMI"
//   4       1     version (1)
//   5       1     scheme id (see SchemeId)
//   6       4     M, image height
//   10      4     W, image width
//   14      1     N_b (block rows; line rows N_L for RCC)
//   15      1     c (context size; strip rows N_S for RCC)
//   16      8     theta, IEEE-754 binary64
//   24      8     theta*_0
//   32      8     theta*_1
//   40      8     theta*_2
//   48      8     theta*_tail, parameter of a short final block/line
//   56      ...   payload: [context table, scheme 4 only] u64 byte count, coded bytes

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "rcmi/error.hpp"

namespace rcmi {

enum class SchemeId : std::uint8_t {
  Model0 = 0,
  Model1 = 1,
  Rcc02 = 2,
  Empirical1 = 3,
  Empirical1EmbeddedTable = 4,
};

inline constexpr std::array<char, 4> kMagic = {'R', 'C', 'M', 'I'};
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 56;

struct BitstreamHeader {
  std::uint8_t version = kFormatVersion;
  SchemeId scheme = SchemeId::Model0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint8_t n_rows = 0;
  std::uint8_t context = 0;
  double theta = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta_tail = 0.0;

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> table;  // serialized ContextTable, scheme 4 only
  std::vector<std::uint8_t> coded;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(std::uint8_t(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return std::uint8_t(get(1)); }
  std::uint32_t u32() { return std::uint32_t(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::span<const std::uint8_t> data() const { return data_; }

 private:
  void need(std::size_t n) const {
    require(data_.size() - pos_ >= n, "truncated_stream", "bitstream ends prematurely");
  }
  std::uint64_t get(int n) {
    need(std::size_t(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(data_[pos_ + std::size_t(i)]) << (8 * i);
    pos_ += std::size_t(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> serialize_bitstream(const Bitstream& bs) {
  const auto& h = bs.header;
  ByteWriter w;
  for (char ch : kMagic) w.u8(std::uint8_t(ch));
  w.u8(h.version);
  w.u8(std::uint8_t(h.scheme));
  w.u32(h.height);
  w.u32(h.width);
  w.u8(h.n_rows);
  w.u8(h.context);
  w.f64(h.theta);
  w.f64(h.theta0);
  w.f64(h.theta1);
  w.f64(h.theta2);
  w.f64(h.theta_tail);
  if (h.scheme == SchemeId::Empirical1EmbeddedTable) w.bytes(bs.table);
  w.u64(bs.coded.size());
  w.bytes(bs.coded);
  return w.take();
}

// Byte length of a serialized table whose context size is c.
inline std::size_t embedded_table_bytes(std::uint8_t c) { return 1 + (std::size_t(2) << c) * 8; }

inline Bitstream parse_bitstream(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  require(data.size() >= kHeaderBytes, "truncated_stream", "bitstream shorter than its header");
  for (char ch : kMagic) require(r.u8() == std::uint8_t(ch), "bad_magic", "not an RCMI bitstream");
  Bitstream bs;
  auto& h = bs.header;
  h.version = r.u8();
  require(h.version == kFormatVersion, "bad_version", "unsupported bitstream version");
  const std::uint8_t scheme = r.u8();
  require(scheme <= std::uint8_t(SchemeId::Empirical1EmbeddedTable), "bad_scheme", "unknown scheme id");
  h.scheme = SchemeId(scheme);
  h.height = r.u32();
  h.width = r.u32();
  h.n_rows = r.u8();
  h.context = r.u8();
  h.theta = r.f64();
  h.theta0 = r.f64();
  h.theta1 = r.f64();
  h.theta2 = r.f64();
  h.theta_tail = r.f64();
  require(h.height >= 1 && h.width >= 1, "bad_header", "image dimensions must be positive");
  if (h.scheme == SchemeId::Empirical1EmbeddedTable) {
    require(r.remaining() >= 1, "truncated_stream", "bitstream ends prematurely");
    const std::uint8_t c = data[r.position()];
    require(c >= 1 && c <= 16, "bad_table", "embedded table has invalid context size");
    const auto t = r.bytes(embedded_table_bytes(c));
    bs.table.assign(t.begin(), t.end());
  }
  const std::uint64_t n = r.u64();
  require(n == r.remaining(), "truncated_stream", "payload length does not match stream size");
  const auto coded = r.bytes(std::size_t(n));
  bs.coded.assign(coded.begin(), coded.end());
  return bs;
}

}  // namespace rcmi
