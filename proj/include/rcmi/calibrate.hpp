#pragma once

// Moment-matching block parameters.
//
// The k-sided block family is an exponential family in theta* whose
// sufficient statistic T is the in-block edge agreement sum plus, for k >= 1,
// the agreements across the top boundary (and for k = 2 the bottom one). The
// member closest in divergence to the true block law matches E[T], so theta*
// is the root of  E_{theta*}[T] = E_true[T], found by bisection. For k >= 1
// the model expectation is averaged over boundary rows drawn from the same
// source as the target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rcmi/column_chain_bp.hpp"
#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"
#include "rcmi/parameters.hpp"

namespace rcmi {

struct BoundaryContext {
  std::vector<Spin> top;     // empty when absent
  std::vector<Spin> bottom;  // empty when absent
  double weight = 1.0;
};

struct MomentTarget {
  int sidedness = 0;
  int n_rows = 1;
  int width = 1;
  double value = 0.0;
  double stderr_ = 0.0;
  std::vector<BoundaryContext> contexts;  // one empty context for sidedness 0
};

struct TargetOptions {
  int max_contexts = 512;
  double tolerance_per_edge = 0.02;  // stderr must stay below tolerance / 3
};

inline int block_edge_count(int n_rows, int width) { return n_rows * (width - 1) + (n_rows - 1) * width; }

inline double default_solve_tolerance(int n_rows, int width) {
  return 1e-4 * std::max(1, block_edge_count(n_rows, width));
}

// Rows [r0, r0 + n) of `img`; boundary rows r0 - 1 and r0 + n per sidedness.
inline double band_statistic(const BinaryImage& img, int r0, int n_rows, int sidedness) {
  const int w = img.width();
  long t = 0;
  for (int r = r0; r < r0 + n_rows; ++r)
    for (int c = 0; c < w; ++c) {
      if (c + 1 < w) t += img(r, c) * img(r, c + 1);
      if (r + 1 < r0 + n_rows) t += img(r, c) * img(r + 1, c);
    }
  if (sidedness >= 1)
    for (int c = 0; c < w; ++c) t += img(r0 - 1, c) * img(r0, c);
  if (sidedness >= 2)
    for (int c = 0; c < w; ++c) t += img(r0 + n_rows - 1, c) * img(r0 + n_rows, c);
  return double(t);
}

inline MomentTarget estimate_target_moment(std::span<const BinaryImage> corpus, int n_rows, int sidedness,
                                           const TargetOptions& opt = {}) {
  require(!corpus.empty(), "empty_corpus", "calibration corpus is empty");
  require(sidedness >= 0 && sidedness <= 2, "bad_sidedness", "sidedness must be 0, 1 or 2");
  require(n_rows >= 1 && n_rows <= kMaxBlockRows, "block_too_large", "N_b must be in [1, 12]");
  const int width = corpus.front().width();
  for (const auto& img : corpus) require(img.width() == width, "bad_corpus", "corpus images differ in width");

  struct Band {
    std::size_t image;
    int r0;
  };
  std::vector<Band> bands;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const int first = sidedness >= 1 ? 1 : 0;
    const int last = corpus[k].height() - n_rows - (sidedness >= 2 ? 1 : 0);
    for (int r = first; r <= last; ++r) bands.push_back({k, r});
  }
  require(!bands.empty(), "insufficient_samples", "corpus images are too short for this block height");

  // boundary-conditioned targets are paired with a subsample of bands
  if (sidedness >= 1 && bands.size() > std::size_t(opt.max_contexts)) {
    std::vector<Band> picked;
    for (int j = 0; j < opt.max_contexts; ++j) picked.push_back(bands[std::size_t(j) * bands.size() / std::size_t(opt.max_contexts)]);
    bands = std::move(picked);
  }

  MomentTarget t;
  t.sidedness = sidedness;
  t.n_rows = n_rows;
  t.width = width;
  std::vector<double> sum(corpus.size(), 0.0);
  std::vector<double> cnt(corpus.size(), 0.0);
  double total = 0.0, total_sq = 0.0;
  for (const auto& b : bands) {
    const double v = band_statistic(corpus[b.image], b.r0, n_rows, sidedness);
    sum[b.image] += v;
    cnt[b.image] += 1.0;
    total += v;
    total_sq += v * v;
    if (sidedness >= 1) {
      BoundaryContext ctx;
      const auto top = corpus[b.image].row(b.r0 - 1);
      ctx.top.assign(top.begin(), top.end());
      if (sidedness == 2) {
        const auto bottom = corpus[b.image].row(b.r0 + n_rows);
        ctx.bottom.assign(bottom.begin(), bottom.end());
      }
      t.contexts.push_back(std::move(ctx));
    }
  }
  if (sidedness == 0) t.contexts.push_back({});
  const double n = double(bands.size());
  t.value = total / n;

  // bands within an image are correlated, so the spread of per-image means is
  // the honest error; with few images that spread is itself noisy, and the
  // band-level error (which ignores correlation) serves as a floor
  const double band_var = std::max(0.0, total_sq / n - t.value * t.value);
  t.stderr_ = std::sqrt(band_var / n);
  std::vector<double> means;
  for (std::size_t k = 0; k < corpus.size(); ++k)
    if (cnt[k] > 0) means.push_back(sum[k] / cnt[k]);
  if (means.size() >= 2) {
    double m = 0.0, ss = 0.0;
    for (double v : means) m += v;
    m /= double(means.size());
    for (double v : means) ss += (v - m) * (v - m);
    t.stderr_ = std::max(t.stderr_, std::sqrt(ss / double(means.size() - 1) / double(means.size())));
  }
  const double limit = opt.tolerance_per_edge * block_edge_count(n_rows, width) / 3.0;
  require(t.stderr_ <= limit, "insufficient_samples",
          "target moment standard error " + std::to_string(t.stderr_) + " exceeds " + std::to_string(limit));
  return t;
}

// Exact target from the enumerated law of a small grid; the block occupies
// rows [band_start, band_start + n_rows).
inline MomentTarget exact_target_moment(ImageDims dims, IsingParams params, int band_start, int n_rows,
                                        int sidedness) {
  require(sidedness >= 0 && sidedness <= 2, "bad_sidedness", "sidedness must be 0, 1 or 2");
  require(band_start >= (sidedness >= 1 ? 1 : 0) &&
              band_start + n_rows + (sidedness >= 2 ? 1 : 0) <= dims.height,
          "bad_band", "band does not fit in the grid with its boundary rows");
  const auto probs = enumerate_exact(dims, params);
  const int w = dims.width;
  MomentTarget t;
  t.sidedness = sidedness;
  t.n_rows = n_rows;
  t.width = w;

  std::map<std::pair<std::uint64_t, std::uint64_t>, double> boundary_mass;
  for (std::uint64_t x = 0; x < probs.size(); ++x) {
    const BinaryImage img = image_from_index(dims, x);
    t.value += probs[x] * band_statistic(img, band_start, n_rows, sidedness);
    if (sidedness >= 1) {
      const std::uint64_t top = (x >> (std::uint64_t(band_start - 1) * std::uint64_t(w))) & ((1ull << w) - 1);
      const std::uint64_t bottom =
          sidedness == 2 ? (x >> (std::uint64_t(band_start + n_rows) * std::uint64_t(w))) & ((1ull << w) - 1) : 0;
      boundary_mass[{top, bottom}] += probs[x];
    }
  }
  if (sidedness == 0) {
    t.contexts.push_back({});
  } else {
    for (const auto& [key, mass] : boundary_mass) {
      BoundaryContext ctx;
      ctx.top = row_from_bits(key.first, w);
      if (sidedness == 2) ctx.bottom = row_from_bits(key.second, w);
      ctx.weight = mass;
      t.contexts.push_back(std::move(ctx));
    }
  }
  return t;
}

inline BlockModel context_block_model(int n_rows, int width, double theta_star, const BoundaryContext& ctx) {
  std::optional<std::span<const Spin>> top, bottom;
  if (!ctx.top.empty()) top = std::span<const Spin>(ctx.top);
  if (!ctx.bottom.empty()) bottom = std::span<const Spin>(ctx.bottom);
  return build_block_model(n_rows, width, theta_star, top, bottom);
}

// Weighted average over boundary contexts of E_{theta*}[T | context].
inline double model_moment(double theta_star, int n_rows, int width, std::span<const BoundaryContext> contexts) {
  double acc = 0.0, weight = 0.0;
  for (const auto& ctx : contexts) {
    const auto st = block_statistics(context_block_model(n_rows, width, theta_star, ctx));
    double v = st.edge_moment;
    for (int c = 0; c < width; ++c) {
      if (!ctx.top.empty()) v += ctx.top[std::size_t(c)] * st.top_row_mean[std::size_t(c)];
      if (!ctx.bottom.empty()) v += ctx.bottom[std::size_t(c)] * st.bottom_row_mean[std::size_t(c)];
    }
    acc += ctx.weight * v;
    weight += ctx.weight;
  }
  return acc / weight;
}

inline constexpr double kThetaBracketHigh = 4.0;
inline constexpr int kMaxBisectionSteps = 200;

inline CalibrationResult solve_theta_star(const MomentTarget& target, double tolerance = -1.0) {
  if (tolerance <= 0.0) tolerance = default_solve_tolerance(target.n_rows, target.width);
  CalibrationResult res;
  res.sidedness = target.sidedness;
  res.n_rows = target.n_rows;
  res.target_moment = target.value;
  res.target_stderr = target.stderr_;

  auto f = [&](double th) { return model_moment(th, target.n_rows, target.width, target.contexts); };

  // theta* = 0 makes every statistic term mean zero; a sampled target that is
  // negative but within 3 standard errors of zero is read as zero
  require(target.value >= -(tolerance + 3.0 * target.stderr_), "bracket_failure",
          "target moment is negative; no theta* >= 0 attains it");
  if (target.value <= tolerance) {
    res.theta_star = 0.0;
    res.achieved_moment = 0.0;
    return res;
  }
  const double hi_value = f(kThetaBracketHigh);
  require(hi_value >= target.value - tolerance, "bracket_failure",
          "target moment exceeds the moment at theta* = 4");

  double lo = 0.0, hi = kThetaBracketHigh;
  double mid = hi, value = hi_value;
  int it = 0;
  while (std::abs(value - target.value) > tolerance && it < kMaxBisectionSteps) {
    mid = 0.5 * (lo + hi);
    value = f(mid);
    if (value < target.value)
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  require(std::abs(value - target.value) <= tolerance, "bracket_failure", "bisection did not converge");
  res.theta_star = mid;
  res.achieved_moment = value;
  res.iterations = it;
  return res;
}

inline CalibrationResult calibrate_corpus(std::span<const BinaryImage> corpus, int n_rows, int sidedness,
                                          const TargetOptions& opt = {}) {
  return solve_theta_star(estimate_target_moment(corpus, n_rows, sidedness, opt));
}

}  // namespace rcmi
