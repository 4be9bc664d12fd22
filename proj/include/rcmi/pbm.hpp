#pragma once

// PBM "P4" raw bitmaps. Bit 1 is spin +1, bit 0 is spin -1; rows are packed
// most-significant-bit first and padded to a whole byte.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"

namespace rcmi {

// Each line of `comment` becomes a "# ..." header line.
inline std::vector<std::uint8_t> encode_pbm(const BinaryImage& img, const std::string& comment = {}) {
  std::string header = "P4\n";
  std::istringstream lines(comment);
  for (std::string line; std::getline(lines, line);) header += "# " + line + "\n";
  header += std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const std::size_t row_bytes = (std::size_t(img.width()) + 7) / 8;
  for (int r = 0; r < img.height(); ++r) {
    std::vector<std::uint8_t> packed(row_bytes, 0);
    for (int c = 0; c < img.width(); ++c)
      if (img(r, c) > 0) packed[std::size_t(c) / 8] |= std::uint8_t(0x80u >> (c % 8));
    out.insert(out.end(), packed.begin(), packed.end());
  }
  return out;
}

inline BinaryImage decode_pbm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    long v = 0;
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && v < 1'000'000'000) v = v * 10 + (bytes[pos++] - '0');
    require(pos > start, "bad_pbm", "malformed PBM header");
    return v;
  };

  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '4', "bad_pbm", "not a P4 PBM file");
  pos = 2;
  const long width = read_int();
  const long height = read_int();
  require(width >= 1 && height >= 1, "bad_pbm", "PBM dimensions must be positive");
  require(pos < bytes.size() && std::isspace(bytes[pos]), "bad_pbm", "malformed PBM header");
  ++pos;  // exactly one whitespace byte before the raster

  const std::size_t row_bytes = (std::size_t(width) + 7) / 8;
  require(bytes.size() - pos >= row_bytes * std::size_t(height), "bad_pbm", "PBM raster is truncated");
  BinaryImage img(ImageDims{int(height), int(width)});
  for (long r = 0; r < height; ++r) {
    const std::uint8_t* row = bytes.data() + pos + std::size_t(r) * row_bytes;
    for (long c = 0; c < width; ++c)
      img(int(r), int(c)) = (row[c / 8] & (0x80u >> (c % 8))) ? Spin(1) : Spin(-1);
  }
  return img;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "io_error", "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  require(bool(out), "io_error", "write failed for " + path);
}

inline BinaryImage read_pbm(const std::string& path) { return decode_pbm(read_file(path)); }
inline void write_pbm(const std::string& path, const BinaryImage& img, const std::string& comment = {}) {
  write_file(path, encode_pbm(img, comment));
}

}  // namespace rcmi
