#pragma once

// Rate sweeps over a corpus and the redundancy estimates built from them.
// Rates are per image first; means and standard errors are taken across
// images, and comparisons between schemes use per-image paired differences.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rcmi/calibrate.hpp"
#include "rcmi/context_table.hpp"
#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"
#include "rcmi/parameters.hpp"
#include "rcmi/schemes.hpp"

namespace rcmi {

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> v) {
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= double(v.size());
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
  }
  return s;
}

struct ImageRate {
  double ideal_bpp = 0.0;
  double actual_bpp = 0.0;
  double line_bpp = 0.0;       // RCC lines
  double two_sided_bpp = 0.0;  // RCC strips with both boundary rows
};

struct RateReport {
  SchemeSpec spec;
  std::string corpus_id;
  std::vector<ImageRate> images;

  std::vector<double> column(double ImageRate::*field) const {
    std::vector<double> v;
    for (const auto& r : images) v.push_back(r.*field);
    return v;
  }
  Summary ideal() const { return summarize(column(&ImageRate::ideal_bpp)); }
  Summary actual() const { return summarize(column(&ImageRate::actual_bpp)); }
  Summary two_sided() const { return summarize(column(&ImageRate::two_sided_bpp)); }
};

inline RateReport measure_rates(std::span<const BinaryImage> corpus, const SchemeSpec& spec,
                                const ParameterTable& params, const ContextTable* table = nullptr,
                                const std::string& corpus_id = {}) {
  RateReport rep;
  rep.spec = spec;
  rep.corpus_id = corpus_id;
  for (const auto& img : corpus) {
    const auto res = encode_image(img, spec, params, table);
    ImageRate r;
    r.ideal_bpp = res.ideal_bpp();
    r.actual_bpp = res.actual_bpp();
    if (res.tally.line_pixels) r.line_bpp = res.tally.line_bits / double(res.tally.line_pixels);
    if (res.tally.two_sided_pixels) r.two_sided_bpp = res.tally.two_sided_bits / double(res.tally.two_sided_pixels);
    rep.images.push_back(r);
  }
  return rep;
}

// Per-image difference a - b of ideal rates (or any matched columns).
inline Summary paired_difference(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "misaligned", "paired comparison needs equal image counts");
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return summarize(d);
}

struct SweepGrid {
  std::vector<int> block_rows{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> context_sizes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct SweepResult {
  std::string corpus_id;
  std::vector<int> block_rows;
  std::vector<int> context_sizes;
  std::vector<RateReport> model0, model1, rcc, empirical;  // rcc uses N_L = N_S = N_b
};

// Calibrates 0- and 1-sided parameters for every N_b (and the 2-sided ones
// when asked), targets taken from the corpus itself.
inline std::vector<CalibrationResult> calibrate_grid(std::span<const BinaryImage> corpus,
                                                     const std::vector<int>& sidedness,
                                                     const std::vector<int>& block_rows,
                                                     const TargetOptions& opt = {}) {
  std::vector<CalibrationResult> out;
  for (int s : sidedness)
    for (int n : block_rows) out.push_back(calibrate_corpus(corpus, n, s, opt));
  return out;
}

inline ParameterTable parameter_table(double theta, std::span<const CalibrationResult> results) {
  ParameterTable t(theta);
  for (const auto& r : results) t.set(r.sidedness, r.n_rows, r.theta_star);
  return t;
}

// Short final blocks need parameters for their own height; this fills them
// from the corpus when the grid leaves gaps.
inline void complete_tail_parameters(ParameterTable& table, std::span<const BinaryImage> corpus,
                                     const std::vector<int>& block_rows, const TargetOptions& opt = {}) {
  if (corpus.empty()) return;
  const int height = corpus.front().height();
  for (int n : block_rows)
    for (auto kind : {SchemeKind::Model0, SchemeKind::Model1, SchemeKind::Rcc02}) {
      SchemeSpec spec{kind, n, n, n};
      const int tail = tail_height(spec, height);
      const int side = kind == SchemeKind::Model1 ? 1 : 0;
      if (tail && !table.has(side, tail)) table.set(side, tail, calibrate_corpus(corpus, tail, side, opt).theta_star);
    }
}

inline SweepResult sweep_rates(std::span<const BinaryImage> corpus, const SweepGrid& grid,
                               const ParameterTable& params, const std::string& corpus_id = {}) {
  SweepResult out;
  out.corpus_id = corpus_id;
  out.block_rows = grid.block_rows;
  out.context_sizes = grid.context_sizes;
  for (int n : grid.block_rows) {
    out.model0.push_back(measure_rates(corpus, {SchemeKind::Model0, n}, params, nullptr, corpus_id));
    out.model1.push_back(measure_rates(corpus, {SchemeKind::Model1, n}, params, nullptr, corpus_id));
    out.rcc.push_back(measure_rates(corpus, {SchemeKind::Rcc02, 1, n, n}, params, nullptr, corpus_id));
  }
  // 2-pass empirical coding: the table is trained on the corpus it codes
  for (int c : grid.context_sizes) {
    const auto table = train_context_table(corpus, c);
    SchemeSpec spec;
    spec.kind = SchemeKind::Empirical1;
    spec.context_size = c;
    out.empirical.push_back(measure_rates(corpus, spec, params, &table, corpus_id));
  }
  return out;
}

inline const RateReport& report_for(const std::vector<RateReport>& reports, const std::vector<int>& keys, int key) {
  for (std::size_t k = 0; k < keys.size(); ++k)
    if (keys[k] == key) return reports[k];
  throw Error("missing_grid_point", "sweep does not contain grid point " + std::to_string(key));
}

struct RedundancyEstimates {
  Summary h_inf_lower;    // largest 2-sided rate over the swept N_b
  int h_inf_rows = 0;     // the N_b attaining it
  Summary div_0m;         // R0M_1 - R0E_1 (c = 1 empirical)
  Summary info_adjacent;  // R0E_1 - h_inf_lower, bounds I(X_r1; X_r0) / W
  // I(X_r0; X_r_{N+1}) / W per gap N; only N = 1 is measurable from rates
  std::vector<std::optional<Summary>> info_gap;
};

inline RedundancyEstimates estimate_redundancies(const SweepResult& sw) {
  RedundancyEstimates e;
  for (std::size_t k = 0; k < sw.block_rows.size(); ++k) {
    const auto s = sw.rcc[k].two_sided();
    if (e.h_inf_rows == 0 || s.mean > e.h_inf_lower.mean) {
      e.h_inf_lower = s;
      e.h_inf_rows = sw.block_rows[k];
    }
  }
  const auto lower = report_for(sw.rcc, sw.block_rows, e.h_inf_rows).column(&ImageRate::two_sided_bpp);
  const auto r0m = report_for(sw.model0, sw.block_rows, 1).column(&ImageRate::ideal_bpp);
  const auto r0e = report_for(sw.empirical, sw.context_sizes, 1).column(&ImageRate::ideal_bpp);
  e.div_0m = paired_difference(r0m, r0e);
  e.info_adjacent = paired_difference(r0e, lower);

  // 0/2-sided with N = 1:  2 R02 = 2H + D/W + I(X_r2; X_r0)/W
  const auto r02 = report_for(sw.rcc, sw.block_rows, 1).column(&ImageRate::ideal_bpp);
  std::vector<double> gap1(r02.size());
  for (std::size_t k = 0; k < r02.size(); ++k) gap1[k] = 2.0 * r02[k] - 2.0 * lower[k] - (r0m[k] - r0e[k]);
  e.info_gap.push_back(summarize(gap1));
  for (std::size_t k = 1; k < sw.block_rows.size(); ++k) e.info_gap.push_back(std::nullopt);
  return e;
}

// Relative excess (percent) of a rate over the lower bound, per image.
inline Summary percent_above(std::span<const double> rate, std::span<const double> lower) {
  std::vector<double> v(rate.size());
  for (std::size_t k = 0; k < rate.size(); ++k) v[k] = 100.0 * (rate[k] - lower[k]) / lower[k];
  return summarize(v);
}

// ---- plot-data files ------------------------------------------------------

inline std::string config_preamble(const std::vector<std::pair<std::string, std::string>>& config) {
  std::string out;
  for (const auto& [k, v] : config) out += "# " + k + "=" + v + "\n";
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::string fig2_csv(const ParameterTable& params) {
  std::string out = "sidedness,n_rows,theta_star\n";
  for (const auto& [key, value] : params.values())
    out += std::to_string(key.first) + "," + std::to_string(key.second) + "," + format_double(value) + "\n";
  return out;
}

inline std::string fig3_csv(const SweepResult& sw) {
  std::string out = "curve,n_rows,ideal_bpp,actual_bpp,stderr\n";
  auto row = [&](const std::string& curve, int n, const Summary& ideal, const std::string& actual) {
    out += curve + "," + std::to_string(n) + "," + format_double(ideal.mean) + "," + actual + "," +
           format_double(ideal.stderr_) + "\n";
  };
  for (std::size_t k = 0; k < sw.block_rows.size(); ++k) {
    const int n = sw.block_rows[k];
    row("0-sided", n, sw.model0[k].ideal(), format_double(sw.model0[k].actual().mean));
    row("0/2-sided", n, sw.rcc[k].ideal(), format_double(sw.rcc[k].actual().mean));
    row("1-sided", n, sw.model1[k].ideal(), format_double(sw.model1[k].actual().mean));
    row("2-sided", n, sw.rcc[k].two_sided(), "");  // not a standalone code
  }
  return out;
}

inline std::string fig4_csv(const SweepResult& sw) {
  std::string out = "series,context_size,ideal_bpp,actual_bpp,stderr\n";
  const auto& m1 = report_for(sw.model1, sw.block_rows, 1);
  for (std::size_t k = 0; k < sw.context_sizes.size(); ++k) {
    const int c = sw.context_sizes[k];
    const auto mi = m1.ideal();
    out += "model_nb1," + std::to_string(c) + "," + format_double(mi.mean) + "," + format_double(m1.actual().mean) +
           "," + format_double(mi.stderr_) + "\n";
    const auto ei = sw.empirical[k].ideal();
    out += "empirical," + std::to_string(c) + "," + format_double(ei.mean) + "," +
           format_double(sw.empirical[k].actual().mean) + "," + format_double(ei.stderr_) + "\n";
  }
  return out;
}

inline std::string rates_csv(const SweepResult& sw) {
  std::string out = "scheme,sidedness,param,ideal_bpp,actual_bpp,stderr\n";
  auto emit = [&](const std::vector<RateReport>& reps, const std::vector<int>& keys, const std::string& name,
                  const std::string& side) {
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const auto s = reps[k].ideal();
      out += name + "," + side + "," + std::to_string(keys[k]) + "," + format_double(s.mean) + "," +
             format_double(reps[k].actual().mean) + "," + format_double(s.stderr_) + "\n";
    }
  };
  emit(sw.model0, sw.block_rows, "model0", "0");
  emit(sw.model1, sw.block_rows, "model1", "1");
  emit(sw.rcc, sw.block_rows, "rcc", "0/2");
  emit(sw.empirical, sw.context_sizes, "empirical1", "1");
  return out;
}

// Creates missing parent directories.
inline void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "io_error", "cannot write " + path);
  out << text;
  require(bool(out), "io_error", "write failed for " + path);
}

}  // namespace rcmi
