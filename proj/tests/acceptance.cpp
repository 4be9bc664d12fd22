// Acceptance runner: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rcmi/calibrate.hpp"
#include "rcmi/harness.hpp"
#include "rcmi/propositions.hpp"
#include "rcmi/range_coder.hpp"
#include "rcmi/schemes.hpp"

using namespace rcmi;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s  %s (%.1f s)\n", id, out.pass ? "PASS" : "FAIL", name.c_str(), secs);
  for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

// ---- 1 ---------------------------------------------------------------------

Outcome losslessness() {
  Outcome out;
  struct Set {
    double theta;
    ImageDims dims;
    int count;
  };
  // 50 images over the theta x size grid
  const std::vector<Set> sets{{0.0, {64, 64}, 7}, {0.2, {64, 64}, 7}, {0.4, {64, 64}, 7}, {0.8, {64, 64}, 7},
                              {0.0, {200, 200}, 6}, {0.2, {200, 200}, 6}, {0.4, {200, 200}, 5},
                              {0.8, {200, 200}, 5}};
  std::vector<SchemeSpec> specs;
  for (int n : {1, 3, 8}) {
    specs.push_back({SchemeKind::Model0, n});
    specs.push_back({SchemeKind::Model1, n});
  }
  for (auto [nl, ns] : {std::pair{1, 1}, {2, 3}, {4, 4}}) specs.push_back({SchemeKind::Rcc02, 1, nl, ns});
  for (int c : {1, 5, 10})
    for (bool embed : {false, true}) {
      SchemeSpec s;
      s.kind = SchemeKind::Empirical1;
      s.context_size = c;
      s.embed_table = embed;
      specs.push_back(s);
    }

  int images = 0, roundtrips = 0, mismatches = 0;
  std::uint64_t seed = 100;
  for (const auto& set : sets) {
    GibbsSettings g;
    g.burn_in_sweeps = 300;
    g.sweeps_between_samples = 20;
    g.rng_seed = seed++;
    const auto imgs = gibbs_sample(set.dims, {set.theta}, g, set.count);
    // parameters near the moment-matched values; any parameters must round-trip
    ParameterTable params(set.theta);
    for (int side = 0; side <= 2; ++side)
      for (int n = 1; n <= kMaxBlockRows; ++n) params.set(side, n, set.theta * (1.0 + 0.3 / n) + 0.01 * side);
    std::vector<ContextTable> tables;
    for (int c : {1, 5, 10}) tables.push_back(train_context_table(imgs, c));
    for (const auto& img : imgs) {
      ++images;
      for (const auto& spec : specs) {
        const ContextTable* table = nullptr;
        if (spec.kind == SchemeKind::Empirical1)
          table = &tables[spec.context_size == 1 ? 0 : spec.context_size == 5 ? 1 : 2];
        const auto res = encode_image(img, spec, params, table);
        const auto back = decode_image(res.bytes, spec.embed_table ? nullptr : table);
        ++roundtrips;
        if (!(back == img)) ++mismatches;
      }
    }
  }
  out.check(images == 50, fmt("%d images", images));
  out.check(mismatches == 0, fmt("%d round trips over %zu scheme configurations, %d mismatches", roundtrips,
                                 specs.size(), mismatches));
  return out;
}

// ---- 2 ---------------------------------------------------------------------

Outcome bp_oracle() {
  Outcome out;
  Rng rng(2024);
  double worst = 0.0;
  int shapes = 0, models = 0;
  for (int n = 1; n <= kMaxBlockRows; ++n)
    for (int w = 1; n * w <= 16; ++w) {
      ++shapes;
      for (int rep = 0; rep < 20; ++rep) {
        const auto m = oracle::random_block(rng, n, w);
        const auto truth = oracle::enumerate_block(m);
        worst = std::max(worst, oracle::total_variation(chain_joint(m), truth.p));
        ++models;
      }
    }
  out.check(worst <= 1e-9, fmt("%d shapes, %d parameterizations, worst total variation %.3g (limit 1e-9)", shapes,
                               models, worst));
  out.note("block heights above 12 rows (13..16 x 1) are outside the supported N_b range");
  return out;
}

// ---- 3 ---------------------------------------------------------------------

Outcome chain_rule() {
  Outcome out;
  const auto checks = chain_rule_checks(31337, 100, 5, 1e-10);
  double worst = 0.0;
  int passed = 0;
  for (const auto& c : checks) {
    worst = std::max(worst, c.gap());
    passed += c.pass();
  }
  out.check(passed == 100, fmt("%d/100 random chains agree, worst gap %.3g bits (limit 1e-10)", passed, worst));
  return out;
}

// ---- 4 ---------------------------------------------------------------------

Outcome exact_propositions() {
  Outcome out;
  for (int w : {2, 4, 6, 8})
    for (double theta : {0.2, 0.4, 0.8}) {
      const auto a = analyze_row_process(w, theta, 3);
      double worst = 0.0;
      bool all = true;
      for (const auto& c : exact_proposition_checks(a, 1e-8)) {
        worst = std::max(worst, c.gap());
        all = all && c.pass();
      }
      out.check(all, fmt("W=%d theta=%.1f: worst identity gap %.3g (limit 1e-8); H=%.5f I(X1;X0)/W=%.5f D0M/W=%.5f "
                         "R2M=%.5f",
                         w, theta, worst, a.h_inf, a.info_adjacent / w, a.div_0m / w, a.rate_2m));
    }
  return out;
}

// ---- 5 and 6 share the corpus ----------------------------------------------

struct Experiment {
  std::vector<BinaryImage> corpus;
  ParameterTable params;
  SweepResult sweep;
  RedundancyEstimates est;
  double seconds = 0.0;
};

const Experiment& experiment() {
  static Experiment ex = [] {
    const auto t0 = std::chrono::steady_clock::now();
    Experiment e;
    GibbsSettings g;  // defaults: 2000 burn-in sweeps, 100 between samples
    g.rng_seed = 2017;
    e.corpus = gibbs_sample({200, 200}, {0.4}, g, 17);
    SweepGrid grid;
    const auto cal = calibrate_grid(e.corpus, {0, 1}, grid.block_rows);
    e.params = parameter_table(0.4, cal);
    complete_tail_parameters(e.params, e.corpus, grid.block_rows);
    e.sweep = sweep_rates(e.corpus, grid, e.params, "theta0.4-200x200x17-seed2017");
    e.est = estimate_redundancies(e.sweep);
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return e;
  }();
  return ex;
}

std::vector<double> ideal(const RateReport& r) { return r.column(&ImageRate::ideal_bpp); }
std::vector<double> two_sided(const RateReport& r) { return r.column(&ImageRate::two_sided_bpp); }

// a is predicted to be larger than b; the ordering holds at 3 sigma when the
// per-image paired difference exceeds three standard errors.
void ordering(Outcome& out, const std::string& what, const std::vector<double>& a, const std::vector<double>& b) {
  const auto d = paired_difference(a, b);
  const double z = d.stderr_ > 0 ? d.mean / d.stderr_ : (d.mean > 0 ? INFINITY : -INFINITY);
  out.check(z > 3.0, fmt("%s: diff %.5f bpp, se %.5f, z %.1f", what.c_str(), d.mean, d.stderr_, z));
}

Outcome orderings() {
  Outcome out;
  const auto& ex = experiment();
  const auto& sw = ex.sweep;
  out.note(fmt("corpus, calibration and sweep: %.0f s", ex.seconds));
  const std::size_t n = sw.block_rows.size();
  for (std::size_t k = 0; k + 1 < n; ++k)
    ordering(out, fmt("R1M_%d > R1M_%d", sw.block_rows[k], sw.block_rows[k + 1]), ideal(sw.model1[k]),
             ideal(sw.model1[k + 1]));
  for (std::size_t k = 0; k < n; ++k)
    ordering(out, fmt("R0M_%d > R1M_%d", sw.block_rows[k], sw.block_rows[k]), ideal(sw.model0[k]),
             ideal(sw.model1[k]));
  for (std::size_t k = 0; k + 1 < n; ++k)
    ordering(out, fmt("R0M_%d > R0M_%d", sw.block_rows[k], sw.block_rows[k + 1]), ideal(sw.model0[k]),
             ideal(sw.model0[k + 1]));
  for (std::size_t k = 0; k + 1 < n; ++k)
    ordering(out, fmt("R2M_%d > R2M_%d", sw.block_rows[k + 1], sw.block_rows[k]), two_sided(sw.rcc[k + 1]),
             two_sided(sw.rcc[k]));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      ordering(out, fmt("R1M_%d > R2M_%d", sw.block_rows[k], sw.block_rows[j]), ideal(sw.model1[k]),
               two_sided(sw.rcc[j]));
  return out;
}

Outcome quantitative() {
  Outcome out;
  const auto& ex = experiment();
  const auto& sw = ex.sweep;
  const auto& est = ex.est;
  const auto lower = two_sided(report_for(sw.rcc, sw.block_rows, est.h_inf_rows));
  out.note(fmt("H lower bound: R2M_%d = %.5f bpp (se %.5f)", est.h_inf_rows, est.h_inf_lower.mean,
               est.h_inf_lower.stderr_));

  const auto m1_3 = percent_above(ideal(report_for(sw.model1, sw.block_rows, 3)), lower);
  out.check(std::abs(m1_3.mean - 3.5) <= 1.5,
            fmt("1-sided model N_b=3 above bound by %.2f%% (target 3.5 +- 1.5)", m1_3.mean));

  const auto& e5 = report_for(sw.empirical, sw.context_sizes, 5);
  const auto e5_pct = percent_above(ideal(e5), lower);
  out.check(std::abs(e5_pct.mean - 4.0) <= 1.5,
            fmt("empirical c=5 above bound by %.2f%% (target 4 +- 1.5)", e5_pct.mean));

  const auto gap = paired_difference(ideal(e5), ideal(report_for(sw.model1, sw.block_rows, 1)));
  out.check(std::abs(gap.mean - 0.0025) <= 0.002,
            fmt("empirical c=5 minus 1-sided model N_b=1: %.5f bpp (target 0.0025 +- 0.002)", gap.mean));

  out.check(std::abs(est.div_0m.mean - 0.1) <= 0.03,
            fmt("divergence estimate R0M_1 - R0E_1: %.5f bpp, se %.5f (target 0.1 +- 0.03)", est.div_0m.mean,
                est.div_0m.stderr_));

  out.check(std::abs(est.info_adjacent.mean - 0.041) <= 0.015,
            fmt("adjacent-row information bound: %.5f bpp, se %.5f (target 0.041 +- 0.015)", est.info_adjacent.mean,
                est.info_adjacent.stderr_));

  const auto m1_1 = report_for(sw.model1, sw.block_rows, 1).ideal();
  const auto r02_7 = report_for(sw.rcc, sw.block_rows, 7).ideal();
  const double sigma = std::hypot(m1_1.stderr_, r02_7.stderr_);
  out.check(std::abs(m1_1.mean - r02_7.mean) <= sigma,
            fmt("1-sided N_b=1 %.5f vs 0/2-sided N_b=7 %.5f: |diff| %.5f, 1 sigma %.5f", m1_1.mean, r02_7.mean,
                std::abs(m1_1.mean - r02_7.mean), sigma));
  return out;
}

// ---- 7 ---------------------------------------------------------------------

struct Run {
  std::string name;
  std::vector<std::size_t> symbols;
  std::vector<QuantizedDistribution> dists;
  std::vector<double> p_true;  // unquantized probability of each coded symbol
};

void check_run(Outcome& out, const Run& run) {
  RangeEncoder enc;
  for (std::size_t i = 0; i < run.symbols.size(); ++i) enc.encode(run.symbols[i], run.dists[i]);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  bool same = true;
  for (std::size_t i = 0; i < run.symbols.size() && same; ++i) same = dec.decode(run.dists[i]) == run.symbols[i];
  const double ideal_q = measure_ideal_bits<QuantizedDistribution>(run.symbols, run.dists);
  double ideal_p = 0.0;
  for (double p : run.p_true) ideal_p -= std::log2(p);
  const double actual = 8.0 * double(bytes.size());
  out.check(same && actual < ideal_q * 1.001 + 64,
            fmt("%s: %zu symbols, coded %.0f bits, ideal %.1f bits (excess %.4f%%); vs unquantized model %.4f%%",
                run.name.c_str(), run.symbols.size(), actual, ideal_q, 100.0 * (actual - ideal_q) / ideal_q,
                100.0 * (actual - ideal_p) / ideal_p));
}

Outcome coder_quality() {
  Outcome out;
  Rng rng(7);
  auto draw = [&](const std::vector<double>& p) {
    double u = rng.uniform();
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (u < p[s]) return s;
      u -= p[s];
    }
    return p.size() - 1;
  };
  // synthetic sources: fixed skewed binary, and random distributions over 16 and 256 symbols
  for (double p1 : {0.5, 0.1, 0.005}) {
    Run r{fmt("binary p=%.3f", p1), {}, {}, {}};
    const std::vector<double> p{1 - p1, p1};
    const auto q = quantize(p);
    for (int i = 0; i < 200000; ++i) {
      r.symbols.push_back(draw(p));
      r.dists.push_back(q);
      r.p_true.push_back(p[r.symbols.back()]);
    }
    check_run(out, r);
  }
  for (std::size_t k : {16u, 256u}) {
    Run r{fmt("random %zu-ary", k), {}, {}, {}};
    for (int i = 0; i < 100000; ++i) {
      std::vector<double> p(k);
      double z = 0;
      for (auto& v : p) z += v = std::pow(rng.uniform(), 4.0);
      for (auto& v : p) v /= z;
      r.symbols.push_back(draw(p));
      r.dists.push_back(quantize(p));
      r.p_true.push_back(p[r.symbols.back()]);
    }
    check_run(out, r);
  }
  // model-driven runs over corpus images: 1-sided column super-pixels and empirical c=5 pixels
  GibbsSettings g;
  g.burn_in_sweeps = 500;
  g.sweeps_between_samples = 50;
  g.rng_seed = 8;
  const auto imgs = gibbs_sample({200, 200}, {0.4}, g, 4);
  for (int nb : {1, 4}) {
    Run r{fmt("1-sided model N_b=%d columns", nb), {}, {}, {}};
    for (int pass = 0; r.symbols.size() < 100000; ++pass) {
      const auto& img = imgs[std::size_t(pass) % imgs.size()];
      for (int r0 = nb; r0 + nb <= img.height(); r0 += nb) {
        const auto top = img.row(r0 - 1);
        const ColumnChain chain(build_block_model(nb, img.width(), 0.45, top));
        std::optional<ColumnState> prev;
        for (int c = 0; c < img.width(); ++c) {
          const auto d = chain.distribution(c, prev);
          const auto s = column_state(img, r0, nb, c);
          r.symbols.push_back(s);
          r.dists.push_back(quantize(d));
          r.p_true.push_back(d[s]);
          prev = s;
        }
      }
    }
    check_run(out, r);
  }
  {
    const auto table = train_context_table(imgs, 5);
    Run r{"empirical c=5 pixels", {}, {}, {}};
    for (const auto& img : imgs) {
      auto at = [&](int rr, int cc) { return img(rr, cc); };
      for (int rr = 0; rr < img.height(); ++rr)
        for (int i = 0; i < img.width(); ++i) {
          const double pp = table.p_plus(context_index(at, img.width(), rr, i, 5));
          const std::size_t s = img(rr, i) > 0;
          r.symbols.push_back(s);
          r.dists.push_back(quantize_binary(pp));
          r.p_true.push_back(s ? pp : 1 - pp);
        }
    }
    check_run(out, r);
  }
  return out;
}

// ---- 8 ---------------------------------------------------------------------

Outcome iprojection() {
  Outcome out;
  struct Case {
    ImageDims dims;
    int r0, n, side;
  };
  const std::vector<Case> cases{
      {{3, 5}, 1, 1, 0}, {{3, 5}, 1, 1, 1}, {{3, 5}, 1, 1, 2}, {{4, 4}, 1, 2, 0}, {{4, 4}, 1, 2, 1},
      {{4, 4}, 1, 2, 2}, {{5, 4}, 1, 3, 0}, {{5, 4}, 1, 3, 1}, {{5, 3}, 1, 3, 2}, {{4, 5}, 1, 2, 0},
      {{4, 5}, 1, 2, 1}, {{6, 3}, 1, 4, 2}, {{5, 4}, 0, 4, 0},
  };
  for (double theta : {0.2, 0.4, 0.8})
    for (const auto& c : cases) {
      const auto target = exact_target_moment(c.dims, {theta}, c.r0, c.n, c.side);
      const auto res = solve_theta_star(target);
      const auto ip = oracle::iprojection(c.dims, theta, c.r0, c.n, c.side, res.theta_star);
      // grid resolution: theta* must sit within one step of the enumerated argmin. The D gap is
      // informational; the bisection stops at 1e-4 |E_b| so theta* can trail a grid point that
      // happens to land on the exact minimizer by a few 1e-8 nats.
      const bool ok = std::abs(ip.grid_argmin - res.theta_star) <= 1e-3 + 1e-9;
      out.check(ok, fmt("theta=%.1f grid %dx%d block %dx%d %d-sided: theta*=%.5f grid argmin %.3f, D gap %.2e nats",
                        theta, c.dims.height, c.dims.width, c.n, c.dims.width, c.side, res.theta_star,
                        ip.grid_argmin, ip.divergence_at_calibrated - ip.divergence_grid_min));
    }
  return out;
}

}  // namespace

int main() {
  run(1, "losslessness of every scheme on 50 Gibbs images", losslessness);
  run(2, "sequential BP conditionals reproduce enumerated block laws", bp_oracle);
  run(3, "chain-rule divergence decomposition on random chains", chain_rule);
  run(4, "exact single-row redundancy identities for W <= 8", exact_propositions);
  run(5, "rate orderings on the theta=0.4 200x200 corpus at 3 sigma", orderings);
  run(6, "quantitative rates and redundancy estimates on the same corpus", quantitative);
  run(7, "range coder within 0.1% + 64 bits of the ideal length", coder_quality);
  run(8, "calibrated theta* minimizes the enumerated block divergence", iprojection);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
