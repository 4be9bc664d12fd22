#pragma once

// Frequency tables for 1-sided empirical coding.
//
// The context of pixel (r, i) packs c bits: bit 0 is the pixel to the left,
// bits 1..c-1 are the previous-row pixels at columns i .. i+c-2. Positions
// outside the image read as the pad spin -1. A bit is 1 for spin +1.

#include <cstdint>
#include <span>
#include <vector>

#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"

namespace rcmi {

inline constexpr int kMaxContextSize = 16;
inline constexpr Spin kPadSpin = -1;

class ContextTable {
 public:
  explicit ContextTable(int context_size) : c_(context_size) {
    require(context_size >= 1 && context_size <= kMaxContextSize, "bad_context_size",
            "context size must be in [1, 16]");
    counts_.assign(std::size_t(2) << context_size, 0);
  }

  int context_size() const { return c_; }
  std::size_t contexts() const { return std::size_t(1) << c_; }

  void add(std::size_t ctx, Spin target) { ++counts_[2 * ctx + (target > 0 ? 1 : 0)]; }

  std::uint64_t count(std::size_t ctx, Spin target) const { return counts_[2 * ctx + (target > 0 ? 1 : 0)]; }

  // Laplace-smoothed P(+1 | ctx).
  double p_plus(std::size_t ctx) const {
    const double n_minus = double(counts_[2 * ctx]);
    const double n_plus = double(counts_[2 * ctx + 1]);
    return (n_plus + 1.0) / (n_minus + n_plus + 2.0);
  }

  std::span<const std::uint64_t> raw() const { return counts_; }
  std::span<std::uint64_t> raw() { return counts_; }

  friend bool operator==(const ContextTable&, const ContextTable&) = default;

 private:
  int c_;
  std::vector<std::uint64_t> counts_;  // [ctx][target]
};

// `lookup(r, c)` returns the spin at (r, c); callers pass in-image positions only.
template <class Lookup>
std::size_t context_index(Lookup&& lookup, int width, int r, int i, int context_size) {
  std::size_t ctx = 0;
  const Spin left = i > 0 ? lookup(r, i - 1) : kPadSpin;
  if (left > 0) ctx |= 1u;
  for (int k = 1; k < context_size; ++k) {
    const int col = i + k - 1;
    const Spin above = (r > 0 && col < width) ? lookup(r - 1, col) : kPadSpin;
    if (above > 0) ctx |= std::size_t(1) << k;
  }
  return ctx;
}

inline ContextTable train_context_table(std::span<const BinaryImage> corpus, int context_size) {
  require(!corpus.empty(), "empty_corpus", "training corpus is empty");
  ContextTable table(context_size);
  for (const auto& img : corpus) {
    auto at = [&](int r, int c) { return img(r, c); };
    for (int r = 0; r < img.height(); ++r)
      for (int i = 0; i < img.width(); ++i)
        table.add(context_index(at, img.width(), r, i, context_size), img(r, i));
  }
  return table;
}

// u8 context size, then 2^c pairs of little-endian u64 counts (spin -1, spin +1).
inline std::vector<std::uint8_t> serialize_table(const ContextTable& table) {
  std::vector<std::uint8_t> out;
  out.reserve(1 + table.raw().size() * 8);
  out.push_back(std::uint8_t(table.context_size()));
  for (std::uint64_t v : table.raw())
    for (int b = 0; b < 8; ++b) out.push_back(std::uint8_t(v >> (8 * b)));
  return out;
}

// Parses a table starting at `pos`; advances `pos` past it.
inline ContextTable deserialize_table(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  require(pos < bytes.size(), "bad_table", "context table is truncated");
  const int c = bytes[pos];
  require(c >= 1 && c <= kMaxContextSize, "bad_table", "context table has invalid context size");
  ContextTable table(c);
  auto raw = table.raw();
  require(bytes.size() - pos - 1 >= raw.size() * 8, "bad_table", "context table is truncated");
  ++pos;
  for (auto& v : raw) {
    v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(bytes[pos++]) << (8 * b);
  }
  return table;
}

}  // namespace rcmi
