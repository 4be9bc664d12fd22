#pragma once

// Multi-symbol range coder with 64-bit registers.
//
// The encoder keeps the low end of the coding interval in a 64-bit register
// and the interval width in [2^56, 2^64). A carry out of `low` is propagated
// into the bytes already written. Frequencies are quantized to a total of
// 2^16, so r = range >> 16 keeps at least 40 bits of precision and the
// truncation loss per symbol is below 2^-40 in relative terms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <type_traits>
#include <vector>

#include "rcmi/error.hpp"

namespace rcmi {

inline constexpr unsigned kFrequencyBits = 16;
inline constexpr std::uint32_t kFrequencyTotal = std::uint32_t(1) << kFrequencyBits;

struct QuantizedDistribution {
  std::vector<std::uint32_t> cum;  // size K + 1, cum[0] = 0, cum[K] = total

  std::size_t size() const { return cum.size() - 1; }
  std::uint32_t total() const { return cum.back(); }
  std::uint32_t low(std::size_t s) const { return cum[s]; }
  std::uint32_t freq(std::size_t s) const { return cum[s + 1] - cum[s]; }
  double probability(std::size_t s) const { return double(freq(s)) / double(total()); }
};

// Proportional rounding to kFrequencyTotal with every symbol floored at 1,
// then a largest-remainder correction so the total is exact.
inline QuantizedDistribution quantize(std::span<const double> probs) {
  const std::size_t k = probs.size();
  require(k >= 1 && k <= kFrequencyTotal, "bad_distribution", "alphabet size out of range");
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  require(std::abs(sum - 1.0) <= 1e-9, "bad_distribution", "distribution does not sum to 1");

  const double total = double(kFrequencyTotal);
  std::vector<std::int64_t> f(k);
  std::vector<double> remainder(k);
  std::int64_t assigned = 0;
  for (std::size_t s = 0; s < k; ++s) {
    require(probs[s] >= 0.0, "bad_distribution", "negative probability");
    const double scaled = probs[s] * total;
    f[s] = std::max<std::int64_t>(1, std::int64_t(std::floor(scaled)));
    remainder[s] = scaled - double(f[s]);
    assigned += f[s];
  }

  std::int64_t excess = assigned - std::int64_t(kFrequencyTotal);
  if (excess != 0) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t(0));
    if (excess < 0) {
      // hand out the shortfall to the largest remainders
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
      for (std::size_t i = 0; excess < 0; i = (i + 1) % k, ++excess) ++f[order[i]];
    } else {
      // take back from the smallest remainders that can spare a count
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
      while (excess > 0) {
        bool progressed = false;
        for (std::size_t i = 0; i < k && excess > 0; ++i) {
          if (f[order[i]] > 1) {
            --f[order[i]];
            --excess;
            progressed = true;
          }
        }
        require(progressed, "bad_distribution", "cannot quantize distribution");
      }
    }
  }

  QuantizedDistribution q;
  q.cum.resize(k + 1);
  q.cum[0] = 0;
  for (std::size_t s = 0; s < k; ++s) q.cum[s + 1] = q.cum[s] + std::uint32_t(f[s]);
  return q;
}

inline QuantizedDistribution quantize_binary(double p_one) {
  const double p[2] = {1.0 - p_one, p_one};
  return quantize(p);
}

class RangeEncoder {
 public:
  void encode(std::size_t symbol, const QuantizedDistribution& q) {
    require(symbol < q.size(), "bad_symbol", "symbol outside distribution alphabet");
    const std::uint64_t r = range_ >> kFrequencyBits;
    const std::uint64_t offset = r * q.low(symbol);
    const std::uint64_t next_low = low_ + offset;
    if (next_low < low_) propagate_carry();
    low_ = next_low;
    // the last symbol absorbs the truncation slack
    range_ = (symbol + 1 == q.size()) ? range_ - offset : r * q.freq(symbol);
    while (range_ < kBottom) {
      out_.push_back(std::uint8_t(low_ >> 56));
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  // Emits the shortest tail that pins a value inside the final interval;
  // trailing zero bytes are dropped since the decoder pads with zeros.
  std::vector<std::uint8_t> finish() {
    using u128 = unsigned __int128;
    const u128 step = u128(1) << 56;
    u128 v = (u128(low_) + step - 1) & ~(step - 1);
    if (v >> 64) propagate_carry();
    out_.push_back(std::uint8_t(std::uint64_t(v) >> 56));
    while (!out_.empty() && out_.back() == 0) out_.pop_back();
    return std::move(out_);
  }

 private:
  static constexpr std::uint64_t kBottom = std::uint64_t(1) << 56;

  void propagate_carry() {
    for (std::size_t i = out_.size(); i-- > 0;)
      if (++out_[i] != 0) return;
    throw Error("coder_overflow", "range coder carry escaped the stream");
  }

  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~std::uint64_t(0);
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    for (int i = 0; i < 8; ++i) value_ = (value_ << 8) | next_byte();
  }

  std::size_t decode(const QuantizedDistribution& q) {
    const std::uint64_t r = range_ >> kFrequencyBits;
    std::uint64_t target = value_ / r;
    if (target >= q.total()) target = q.total() - 1;
    const auto it = std::upper_bound(q.cum.begin() + 1, q.cum.end(), std::uint32_t(target));
    const std::size_t symbol = std::size_t(it - q.cum.begin()) - 1;
    const std::uint64_t offset = r * q.low(symbol);
    value_ -= offset;
    range_ = (symbol + 1 == q.size()) ? range_ - offset : r * q.freq(symbol);
    require(value_ < range_, "corrupt_stream", "range decoder left the coding interval");
    while (range_ < kBottom) {
      value_ = (value_ << 8) | next_byte();
      range_ <<= 8;
    }
    return symbol;
  }

  // Bytes consumed beyond the end of the input (zero padding).
  std::size_t overrun() const { return pos_ > bytes_.size() ? pos_ - bytes_.size() : 0; }

 private:
  static constexpr std::uint64_t kBottom = std::uint64_t(1) << 56;

  std::uint8_t next_byte() {
    const std::uint8_t b = pos_ < bytes_.size() ? bytes_[pos_] : 0;
    ++pos_;
    return b;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t value_ = 0;
  std::uint64_t range_ = ~std::uint64_t(0);
};

// Sum of -log2 p(symbol); the rate statistic reported for every scheme.
template <class Dist>
double measure_ideal_bits(std::span<const std::size_t> symbols, std::span<const Dist> dists) {
  require(symbols.size() == dists.size(), "misaligned", "symbols and distributions differ in length");
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    double p;
    if constexpr (std::is_same_v<Dist, QuantizedDistribution>) {
      p = dists[i].probability(symbols[i]);
    } else {
      p = dists[i][symbols[i]];
    }
    require(p > 0.0, "zero_probability", "symbol has zero coding probability");
    bits -= std::log2(p);
  }
  return bits;
}

}  // namespace rcmi
