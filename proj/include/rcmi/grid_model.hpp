#pragma once

// Uniform Ising model on an M x W lattice with free boundary.
//
//   p(x; theta) = exp( theta * sum_{ {i,j} in E } x_i x_j - Phi(theta) )
//
// Spins are stored as int8 values in {-1, +1}, row-major.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcmi/error.hpp"

namespace rcmi {

using Spin = std::int8_t;

struct ImageDims {
  int height = 0;  // M
  int width = 0;   // W

  std::size_t sites() const { return std::size_t(height) * std::size_t(width); }
  bool valid() const { return height >= 1 && width >= 1; }
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

class BinaryImage {
 public:
  BinaryImage() = default;

  explicit BinaryImage(ImageDims dims, Spin fill = -1) : dims_(dims), pixels_(dims.sites(), fill) {
    require(dims.valid(), "invalid_dims", "image dimensions must be positive");
    require(fill == 1 || fill == -1, "invalid_spin", "spins must be -1 or +1");
  }

  BinaryImage(ImageDims dims, std::vector<Spin> pixels) : dims_(dims), pixels_(std::move(pixels)) {
    require(dims.valid(), "invalid_dims", "image dimensions must be positive");
    require(pixels_.size() == dims.sites(), "invalid_dims", "pixel count does not match dimensions");
    for (Spin s : pixels_) require(s == 1 || s == -1, "invalid_spin", "spins must be -1 or +1");
  }

  const ImageDims& dims() const { return dims_; }
  int height() const { return dims_.height; }
  int width() const { return dims_.width; }

  Spin operator()(int r, int c) const { return pixels_[index(r, c)]; }
  Spin& operator()(int r, int c) { return pixels_[index(r, c)]; }

  std::span<const Spin> row(int r) const {
    return {pixels_.data() + std::size_t(r) * std::size_t(dims_.width), std::size_t(dims_.width)};
  }
  std::span<const Spin> pixels() const { return pixels_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int r, int c) const { return std::size_t(r) * std::size_t(dims_.width) + std::size_t(c); }

  ImageDims dims_;
  std::vector<Spin> pixels_;
};

struct IsingParams {
  double theta = 0.0;
};

struct GibbsSettings {
  int burn_in_sweeps = 2000;
  int sweeps_between_samples = 100;
  std::uint64_t rng_seed = 1;
};

struct Edge {
  std::size_t a;
  std::size_t b;
};

inline std::vector<Edge> grid_edges(ImageDims dims) {
  require(dims.valid(), "invalid_dims", "image dimensions must be positive");
  std::vector<Edge> edges;
  edges.reserve(std::size_t(dims.height) * std::size_t(dims.width - 1) +
                std::size_t(dims.height - 1) * std::size_t(dims.width));
  const auto w = std::size_t(dims.width);
  for (int r = 0; r < dims.height; ++r) {
    for (int c = 0; c < dims.width; ++c) {
      const std::size_t i = std::size_t(r) * w + std::size_t(c);
      if (c + 1 < dims.width) edges.push_back({i, i + 1});
      if (r + 1 < dims.height) edges.push_back({i, i + w});
    }
  }
  return edges;
}

// Sum of x_i x_j over lattice edges.
inline long edge_agreement(const BinaryImage& img) {
  long sum = 0;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const int x = img(r, c);
      if (c + 1 < img.width()) sum += x * img(r, c + 1);
      if (r + 1 < img.height()) sum += x * img(r + 1, c);
    }
  }
  return sum;
}

inline double log_unnormalized_prob(const BinaryImage& img, IsingParams params) {
  return params.theta * double(edge_agreement(img));
}

// mt19937_64 has a sequence fixed by the C++ standard; doubles are built from
// the top 53 bits so streams are identical on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Raster-order systematic-scan Gibbs sampler on a single chain.
class GibbsChain {
 public:
  GibbsChain(ImageDims dims, IsingParams params, std::uint64_t seed)
      : image_(dims), rng_(seed) {
    require(dims.valid(), "invalid_dims", "image dimensions must be positive");
    require(std::isfinite(params.theta), "invalid_theta", "theta must be finite");
    // p(x_i = +1 | neighbour sum s) = 1 / (1 + exp(-2 theta s)), s in [-4, 4]
    for (int s = -4; s <= 4; ++s) p_plus_[s + 4] = 1.0 / (1.0 + std::exp(-2.0 * params.theta * s));
    for (int r = 0; r < dims.height; ++r)
      for (int c = 0; c < dims.width; ++c) image_(r, c) = rng_.uniform() < 0.5 ? Spin(1) : Spin(-1);
  }

  void sweep() {
    const int m = image_.height();
    const int w = image_.width();
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < w; ++c) {
        int s = 0;
        if (c > 0) s += image_(r, c - 1);
        if (c + 1 < w) s += image_(r, c + 1);
        if (r > 0) s += image_(r - 1, c);
        if (r + 1 < m) s += image_(r + 1, c);
        image_(r, c) = rng_.uniform() < p_plus_[s + 4] ? Spin(1) : Spin(-1);
      }
    }
  }

  const BinaryImage& state() const { return image_; }

 private:
  BinaryImage image_;
  Rng rng_;
  double p_plus_[9] = {};
};

inline std::vector<BinaryImage> gibbs_sample(ImageDims dims, IsingParams params, const GibbsSettings& settings,
                                             int count) {
  require(count >= 1, "invalid_count", "sample count must be positive");
  require(settings.burn_in_sweeps >= 0 && settings.sweeps_between_samples >= 0, "invalid_settings",
          "sweep counts must be nonnegative");
  GibbsChain chain(dims, params, settings.rng_seed);
  for (int i = 0; i < settings.burn_in_sweeps; ++i) chain.sweep();
  std::vector<BinaryImage> out;
  out.reserve(std::size_t(count));
  for (int k = 0; k < count; ++k) {
    if (k > 0)
      for (int i = 0; i < settings.sweeps_between_samples; ++i) chain.sweep();
    out.push_back(chain.state());
  }
  return out;
}

inline constexpr int kMaxEnumerationSites = 20;

// Configuration index <-> image: bit j of the index is site j (row-major), 1 <-> +1.
inline BinaryImage image_from_index(ImageDims dims, std::uint64_t index) {
  BinaryImage img(dims);
  for (int r = 0; r < dims.height; ++r)
    for (int c = 0; c < dims.width; ++c) {
      const auto j = std::size_t(r) * std::size_t(dims.width) + std::size_t(c);
      img(r, c) = ((index >> j) & 1u) ? Spin(1) : Spin(-1);
    }
  return img;
}

// Row of `width` spins from the low bits of `bits`; bit c is column c.
inline std::vector<Spin> row_from_bits(std::uint64_t bits, int width) {
  std::vector<Spin> row(static_cast<std::size_t>(width));
  for (int c = 0; c < width; ++c) row[std::size_t(c)] = ((bits >> c) & 1u) ? Spin(1) : Spin(-1);
  return row;
}

// Full probability table over all 2^(M W) configurations, indexed as above.
inline std::vector<double> enumerate_exact(ImageDims dims, IsingParams params) {
  require(dims.valid(), "invalid_dims", "image dimensions must be positive");
  require(dims.sites() <= std::size_t(kMaxEnumerationSites), "dims_too_large",
          "exact enumeration is limited to " + std::to_string(kMaxEnumerationSites) + " sites");
  const auto n = dims.sites();
  const std::uint64_t count = std::uint64_t(1) << n;
  const auto edges = grid_edges(dims);

  std::vector<double> logw(count);
  double max_log = -INFINITY;
  for (std::uint64_t x = 0; x < count; ++x) {
    long agree = 0;
    for (const auto& e : edges) agree += (((x >> e.a) ^ (x >> e.b)) & 1u) ? -1 : 1;
    logw[x] = params.theta * double(agree);
    max_log = std::max(max_log, logw[x]);
  }
  double total = 0.0;
  for (auto& v : logw) {
    v = std::exp(v - max_log);
    total += v;
  }
  for (auto& v : logw) v /= total;
  return logw;
}

}  // namespace rcmi
