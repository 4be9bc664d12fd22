// rcmi: command-line front end.
//
//   rcmi sample    --theta 0.4 --height 200 --width 200 --count 17 --out-dir corpus
//   rcmi calibrate --corpus corpus --out calibration.csv
//   rcmi encode    --in x.pbm --out x.rcmi --scheme model1 --block-rows 3 --calibration calibration.csv
//   rcmi decode    --in x.rcmi --out y.pbm
//   rcmi sweep     --corpus corpus --calibration calibration.csv --out-dir results
//   rcmi analyze   --corpus corpus --calibration calibration.csv --out results/estimates.json
//   rcmi verify    [--corpus corpus --calibration calibration.csv]
//
// Every option may also come from a key=value file given with --config;
// command-line values win. Failures print one JSON object on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rcmi/calibrate.hpp"
#include "rcmi/harness.hpp"
#include "rcmi/pbm.hpp"
#include "rcmi/propositions.hpp"
#include "rcmi/row_process.hpp"
#include "rcmi/schemes.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rcmi;

namespace {

struct RunConfig {
  // image source
  double theta = 0.4;
  int height = 200;
  int width = 200;
  int count = 17;
  std::uint64_t seed = 1;
  int burn_in = 2000;
  int sweeps_between = 100;

  // paths
  std::string corpus;
  std::string calibration;
  std::string table;
  std::string in;
  std::string out;
  std::string out_dir = ".";
  std::string prefix = "img";

  // schemes
  std::string scheme = "model1";
  int block_rows = 1;
  int line_rows = 1;
  int strip_rows = 1;
  int context_size = 5;
  bool embed_table = false;

  // grids
  std::vector<int> sidedness{0, 1};
  std::vector<int> grid_rows{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> grid_contexts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int max_contexts = 512;
  double tolerance_per_edge = 0.02;

  // exact analysis
  std::vector<int> exact_widths{2, 4, 6, 8};
  std::vector<double> exact_thetas{0.2, 0.4, 0.8};
  int lemma_chains = 100;
};

[[noreturn]] void fail(const std::string& code, const std::string& message, int status = 2) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << std::endl;
  std::exit(status);
}

std::vector<BinaryImage> load_corpus(const std::string& dir) {
  require(!dir.empty(), "missing_corpus", "--corpus is required");
  require(fs::is_directory(dir), "missing_corpus", "corpus directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".pbm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), "missing_corpus", "no .pbm files in " + dir);
  std::vector<BinaryImage> out;
  for (const auto& f : files) out.push_back(read_pbm(f.string()));
  return out;
}

ParameterTable load_calibration(const std::string& path) {
  require(!path.empty(), "missing_calibration", "--calibration is required");
  return read_calibration_csv(path);
}

std::string corpus_id(const RunConfig& c) { return fs::path(c.corpus).filename().string(); }

SchemeSpec scheme_spec(const RunConfig& c) {
  SchemeSpec s;
  s.kind = parse_scheme_kind(c.scheme);
  s.n_rows = c.block_rows;
  s.line_rows = c.line_rows;
  s.strip_rows = c.strip_rows;
  s.context_size = c.context_size;
  s.embed_table = c.embed_table;
  s.validate();
  return s;
}

// Context table from --table (serialized) or trained on --corpus.
std::optional<ContextTable> context_table(const RunConfig& c, int context_size) {
  if (!c.table.empty()) {
    const auto bytes = read_file(c.table);
    std::size_t pos = 0;
    return deserialize_table(bytes, pos);
  }
  if (!c.corpus.empty()) return train_context_table(load_corpus(c.corpus), context_size);
  return std::nullopt;
}

// key=value lines of the effective configuration, unset paths omitted.
std::string echo(const CLI::App& app) {
  std::string out;
  std::istringstream in(app.config_to_str(true, false));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '[' && line.find("=\"\"") == std::string::npos) out += line + "\n";
  return out;
}

std::string commented(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out += "# config " + line + "\n";
  return out;
}

json summary_json(const Summary& s) { return {{"mean", s.mean}, {"stderr", s.stderr_}, {"n", s.n}}; }

// ---- commands --------------------------------------------------------------

void cmd_sample(const RunConfig& c, const std::string& config) {
  GibbsSettings g;
  g.burn_in_sweeps = c.burn_in;
  g.sweeps_between_samples = c.sweeps_between;
  g.rng_seed = c.seed;
  const auto imgs = gibbs_sample({c.height, c.width}, {c.theta}, g, c.count);
  fs::create_directories(c.out_dir);
  json files = json::array();
  for (std::size_t k = 0; k < imgs.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu.pbm", c.prefix.c_str(), k);
    const auto path = (fs::path(c.out_dir) / name).string();
    write_pbm(path, imgs[k], config + "index=" + std::to_string(k));
    files.push_back(path);
  }
  std::cout << json{{"command", "sample"}, {"files", files}}.dump(2) << std::endl;
}

void cmd_calibrate(const RunConfig& c, const std::string& config) {
  const auto corpus = load_corpus(c.corpus);
  TargetOptions opt{c.max_contexts, c.tolerance_per_edge};
  std::vector<CalibrationResult> rows;
  json failures = json::array();
  for (int side : c.sidedness)
    for (int n : c.grid_rows) {
      try {
        rows.push_back(calibrate_corpus(corpus, n, side, opt));
      } catch (const Error& e) {
        failures.push_back({{"sidedness", side}, {"n_rows", n}, {"error", e.code()}, {"message", e.what()}});
      }
    }
  require(!c.out.empty(), "missing_output", "--out is required");
  write_text(c.out, calibration_csv(c.theta, rows) + commented(config));
  if (!failures.empty()) fail("calibration_failed", failures.dump());
  std::cout << json{{"command", "calibrate"}, {"rows", rows.size()}, {"out", c.out}}.dump(2) << std::endl;
}

void cmd_encode(const RunConfig& c) {
  require(!c.in.empty() && !c.out.empty(), "missing_path", "--in and --out are required");
  const auto img = read_pbm(c.in);
  const auto spec = scheme_spec(c);
  std::optional<ContextTable> table;
  ParameterTable params(c.theta);
  if (spec.kind == SchemeKind::Empirical1) {
    table = context_table(c, spec.context_size);
    require(table.has_value(), "missing_table", "empirical coding needs --table or --corpus");
  } else {
    params = load_calibration(c.calibration);
  }
  const auto res = encode_image(img, spec, params, table ? &*table : nullptr);
  write_file(c.out, res.bytes);
  std::cout << json{{"command", "encode"},
                    {"scheme", scheme_name(spec.kind)},
                    {"pixels", res.pixels},
                    {"bytes", res.bytes.size()},
                    {"ideal_bpp", res.ideal_bpp()},
                    {"actual_bpp", res.actual_bpp()}}
                   .dump(2)
            << std::endl;
}

void cmd_decode(const RunConfig& c) {
  require(!c.in.empty() && !c.out.empty(), "missing_path", "--in and --out are required");
  const auto bytes = read_file(c.in);
  const auto header = parse_bitstream(bytes).header;
  std::optional<ContextTable> table;
  if (header.scheme == SchemeId::Empirical1) {
    table = context_table(c, header.context);
    require(table.has_value(), "missing_table", "stream needs its context table: pass --table or --corpus");
  }
  const auto img = decode_image(bytes, table ? &*table : nullptr);
  write_pbm(c.out, img);
  std::cout << json{{"command", "decode"}, {"height", img.height()}, {"width", img.width()}}.dump(2) << std::endl;
}

SweepResult run_sweep(const RunConfig& c, const std::vector<BinaryImage>& corpus, ParameterTable& params) {
  SweepGrid grid;
  grid.block_rows = c.grid_rows;
  grid.context_sizes = c.grid_contexts;
  complete_tail_parameters(params, corpus, grid.block_rows, {c.max_contexts, c.tolerance_per_edge});
  return sweep_rates(corpus, grid, params, corpus_id(c));
}

void cmd_sweep(const RunConfig& c, const std::string& config) {
  const auto corpus = load_corpus(c.corpus);
  auto params = load_calibration(c.calibration);
  const auto sw = run_sweep(c, corpus, params);
  fs::create_directories(c.out_dir);
  const std::string pre = commented(config + "corpus_id=" + sw.corpus_id);
  const fs::path dir(c.out_dir);
  write_text((dir / "fig2_params.csv").string(), pre + fig2_csv(params));
  write_text((dir / "fig3_model_rates.csv").string(), pre + fig3_csv(sw));
  write_text((dir / "fig4_1sided.csv").string(), pre + fig4_csv(sw));
  write_text((dir / "rates.csv").string(), pre + rates_csv(sw));
  std::cout << json{{"command", "sweep"}, {"out_dir", c.out_dir}, {"images", corpus.size()}}.dump(2) << std::endl;
}

json exact_info_curve(int width, double theta, const std::vector<int>& gaps) {
  const RowProcess rp(width, theta);
  json curve = json::array();
  for (int n : gaps) curve.push_back({{"n", n}, {"info_bpp", rp.mutual_information(n + 1) / width}});
  return curve;
}

void cmd_analyze(const RunConfig& c, const std::string& config) {
  const auto corpus = load_corpus(c.corpus);
  auto params = load_calibration(c.calibration);
  const auto sw = run_sweep(c, corpus, params);
  const auto est = estimate_redundancies(sw);
  json gap = json::array();
  for (std::size_t k = 0; k < est.info_gap.size(); ++k) {
    if (est.info_gap[k])
      gap.push_back({{"n", sw.block_rows[k]}, {"estimate", summary_json(*est.info_gap[k])}});
    else
      gap.push_back({{"n", sw.block_rows[k]}, {"estimate", nullptr}, {"reason", "unavailable"}});
  }
  const int exact_w = std::min(kMaxRowProcessWidth, corpus.front().width());
  json out{{"command", "analyze"},
           {"config", config},
           {"corpus_id", sw.corpus_id},
           {"h_inf_lower", summary_json(est.h_inf_lower)},
           {"h_inf_lower_rows", est.h_inf_rows},
           {"div_0m", summary_json(est.div_0m)},
           {"info_adjacent", summary_json(est.info_adjacent)},
           {"info_gap", gap},
           {"info_gap_exact", {{"width", exact_w}, {"theta", params.theta()},
                               {"curve", exact_info_curve(exact_w, params.theta(), sw.block_rows)}}}};
  if (!c.out.empty()) write_text(c.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << std::endl;
}

void cmd_verify(const RunConfig& c, const std::string& config) {
  json ledger = json::array();
  bool all = true;
  auto add = [&](const std::string& group, const PropositionCheck& p) {
    all = all && p.pass();
    ledger.push_back({{"group", group}, {"check", p.name}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"gap", p.gap()},
                      {"tolerance", p.tolerance}, {"pass", p.pass()}});
  };
  for (int w : c.exact_widths)
    for (double th : c.exact_thetas) {
      const auto a = analyze_row_process(w, th, std::min(c.context_size, w + 1));
      for (const auto& p : exact_proposition_checks(a))
        add("exact W=" + std::to_string(w) + " theta=" + format_double(th), p);
    }
  for (const auto& p : chain_rule_checks(c.seed, c.lemma_chains)) add("chain rule", p);

  if (!c.corpus.empty()) {
    const auto corpus = load_corpus(c.corpus);
    auto params = load_calibration(c.calibration);
    const auto sw = run_sweep(c, corpus, params);
    // orderings: predicted-larger rate first; pass when the paired difference exceeds 3 standard errors
    auto order = [&](const std::string& name, const std::vector<double>& hi, const std::vector<double>& lo) {
      const auto d = paired_difference(hi, lo);
      add("ordering", {name, d.mean, 3.0 * d.stderr_, 0.0});
      ledger.back()["pass"] = d.mean > 3.0 * d.stderr_;
      ledger.back()["gap"] = d.mean;
      all = all && d.mean > 3.0 * d.stderr_;
    };
    const auto& n = sw.block_rows;
    auto ideal = [](const RateReport& r) { return r.column(&ImageRate::ideal_bpp); };
    auto strip = [](const RateReport& r) { return r.column(&ImageRate::two_sided_bpp); };
    for (std::size_t k = 0; k + 1 < n.size(); ++k) {
      const auto a = std::to_string(n[k]), b = std::to_string(n[k + 1]);
      order("R1M_" + a + " > R1M_" + b, ideal(sw.model1[k]), ideal(sw.model1[k + 1]));
      order("R0M_" + a + " > R0M_" + b, ideal(sw.model0[k]), ideal(sw.model0[k + 1]));
      order("R2M_" + b + " > R2M_" + a, strip(sw.rcc[k + 1]), strip(sw.rcc[k]));
    }
    for (std::size_t k = 0; k < n.size(); ++k) {
      order("R0M_" + std::to_string(n[k]) + " > R1M_" + std::to_string(n[k]), ideal(sw.model0[k]),
            ideal(sw.model1[k]));
      for (std::size_t j = 0; j < n.size(); ++j)
        order("R1M_" + std::to_string(n[k]) + " > R2M_" + std::to_string(n[j]), ideal(sw.model1[k]),
              strip(sw.rcc[j]));
    }
  }
  json out{{"command", "verify"}, {"config", config}, {"all_pass", all}, {"checks", ledger}};
  if (!c.out.empty()) write_text(c.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << std::endl;
  if (!all) std::exit(3);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Row-centric lossless coding of bilevel Ising images"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig c;

  app.add_option("--theta", c.theta, "Ising coupling of the source")->capture_default_str();
  app.add_option("--height", c.height, "image rows M")->capture_default_str();
  app.add_option("--width", c.width, "image columns W")->capture_default_str();
  app.add_option("--count", c.count, "number of images to sample")->capture_default_str();
  app.add_option("--seed", c.seed, "random seed")->capture_default_str();
  app.add_option("--burn-in", c.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  app.add_option("--sweeps-between", c.sweeps_between, "Gibbs sweeps between samples")->capture_default_str();
  app.add_option("--corpus", c.corpus, "directory of .pbm images");
  app.add_option("--calibration", c.calibration, "calibration CSV");
  app.add_option("--table", c.table, "serialized context table");
  app.add_option("--in", c.in, "input file");
  app.add_option("--out", c.out, "output file");
  app.add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  app.add_option("--prefix", c.prefix, "sample file name prefix")->capture_default_str();
  app.add_option("--scheme", c.scheme, "model0 | model1 | rcc | empirical1")->capture_default_str();
  app.add_option("--block-rows", c.block_rows, "N_b for model0/model1")->capture_default_str();
  app.add_option("--line-rows", c.line_rows, "N_L for rcc")->capture_default_str();
  app.add_option("--strip-rows", c.strip_rows, "N_S for rcc")->capture_default_str();
  app.add_option("--context-size", c.context_size, "c for empirical1")->capture_default_str();
  app.add_flag("--embed-table", c.embed_table, "store the context table in the stream");
  app.add_option("--sidedness", c.sidedness, "sidedness values to calibrate")->capture_default_str();
  app.add_option("--grid-rows", c.grid_rows, "N_b grid")->capture_default_str();
  app.add_option("--grid-contexts", c.grid_contexts, "context-size grid")->capture_default_str();
  app.add_option("--max-contexts", c.max_contexts, "boundary samples per 1/2-sided target")->capture_default_str();
  app.add_option("--tolerance-per-edge", c.tolerance_per_edge, "allowed target stderr per block edge (x3)")
      ->capture_default_str();
  app.add_option("--exact-widths", c.exact_widths, "strip widths for exact checks")->capture_default_str();
  app.add_option("--exact-thetas", c.exact_thetas, "couplings for exact checks")->capture_default_str();
  app.add_option("--lemma-chains", c.lemma_chains, "random chains for the chain-rule check")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "write a Gibbs-sampled PBM corpus");
  auto* calibrate = app.add_subcommand("calibrate", "moment-match block parameters on a corpus");
  auto* encode = app.add_subcommand("encode", "compress one PBM image");
  auto* decode = app.add_subcommand("decode", "decompress one stream to PBM");
  auto* sweep = app.add_subcommand("sweep", "rate curves and figure data");
  auto* analyze = app.add_subcommand("analyze", "redundancy estimates");
  auto* verify = app.add_subcommand("verify", "proposition ledger");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what(), 64);
  }

  const std::string config = echo(app);
  try {
    if (*sample) cmd_sample(c, config);
    if (*calibrate) cmd_calibrate(c, config);
    if (*encode) cmd_encode(c);
    if (*decode) cmd_decode(c);
    if (*sweep) cmd_sweep(c, config);
    if (*analyze) cmd_analyze(c, config);
    if (*verify) cmd_verify(c, config);
  } catch (const Error& e) {
    fail(e.code(), e.what());
  } catch (const std::exception& e) {
    fail("internal_error", e.what());
  }
  return 0;
}
