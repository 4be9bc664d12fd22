#pragma once

// End-to-end row-centric coding schemes.
//
//   Model0      rows split into N_b-row blocks, each coded with no boundary
//   Model1      each block conditioned on the decoded row above it
//   Rcc02       alternating 0-sided lines (N_L rows) and 2-sided strips (N_S
//               rows); all lines are coded first, then all strips
//   Empirical1  per-pixel coding from a trained context table
//
// Encoder and decoder run the same driver. All context is read through a
// Canvas that only exposes pixels already coded, so any forward reference
// raises an error on either side.
//
// Tail rule: when the height is not a multiple of the block height the final
// block (or line) keeps the remaining rows and uses theta*_tail. A strip that
// ends at the bottom of the image has no row below and is coded 1-sided with
// theta*_2. The first block of Model1 has no row above and a zero field.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcmi/bitstream.hpp"
#include "rcmi/column_chain_bp.hpp"
#include "rcmi/context_table.hpp"
#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"
#include "rcmi/parameters.hpp"
#include "rcmi/range_coder.hpp"

namespace rcmi {

enum class SchemeKind { Model0, Model1, Rcc02, Empirical1 };

inline std::string scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::Model0: return "model0";
    case SchemeKind::Model1: return "model1";
    case SchemeKind::Rcc02: return "rcc";
    case SchemeKind::Empirical1: return "empirical1";
  }
  return "unknown";
}

inline SchemeKind parse_scheme_kind(const std::string& name) {
  if (name == "model0") return SchemeKind::Model0;
  if (name == "model1") return SchemeKind::Model1;
  if (name == "rcc" || name == "rcc02") return SchemeKind::Rcc02;
  if (name == "empirical1" || name == "empirical") return SchemeKind::Empirical1;
  throw Error("bad_scheme", "unknown scheme '" + name + "'");
}

struct SchemeSpec {
  SchemeKind kind = SchemeKind::Model0;
  int n_rows = 1;        // Model0 / Model1
  int line_rows = 1;     // Rcc02, N_L
  int strip_rows = 1;    // Rcc02, N_S
  int context_size = 1;  // Empirical1, c
  bool embed_table = false;

  void validate() const {
    switch (kind) {
      case SchemeKind::Model0:
      case SchemeKind::Model1:
        require(n_rows >= 1 && n_rows <= kMaxBlockRows, "bad_scheme", "N_b must be in [1, 12]");
        break;
      case SchemeKind::Rcc02:
        require(line_rows >= 1 && line_rows <= kMaxBlockRows && strip_rows >= 1 && strip_rows <= kMaxBlockRows,
                "bad_scheme", "N_L and N_S must be in [1, 12]");
        break;
      case SchemeKind::Empirical1:
        require(context_size >= 1 && context_size <= kMaxContextSize, "bad_scheme", "c must be in [1, 16]");
        break;
    }
  }
};

// Parameters the decoder needs; carried verbatim in the bitstream header.
struct SchemeParams {
  double theta = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta_tail = 0.0;
};

struct RowBlock {
  int start = 0;
  int height = 0;
  bool strip = false;
};

inline std::vector<RowBlock> row_blocks(int height, int n_rows) {
  std::vector<RowBlock> out;
  for (int r = 0; r < height; r += n_rows) out.push_back({r, std::min(n_rows, height - r), false});
  return out;
}

inline std::vector<RowBlock> rcc_layout(int height, int line_rows, int strip_rows) {
  std::vector<RowBlock> out;
  bool strip = false;
  for (int r = 0; r < height;) {
    const int h = std::min(strip ? strip_rows : line_rows, height - r);
    out.push_back({r, h, strip});
    r += h;
    strip = !strip;
  }
  return out;
}

inline int tail_height(const SchemeSpec& spec, int height) {
  switch (spec.kind) {
    case SchemeKind::Model0:
    case SchemeKind::Model1:
      return height % spec.n_rows;
    case SchemeKind::Rcc02:
      for (const auto& b : rcc_layout(height, spec.line_rows, spec.strip_rows))
        if (!b.strip && b.height != spec.line_rows) return b.height;
      return 0;
    case SchemeKind::Empirical1:
      return 0;
  }
  return 0;
}

inline SchemeParams resolve_params(const SchemeSpec& spec, const ParameterTable& table, int height) {
  spec.validate();
  SchemeParams p;
  p.theta = table.theta();
  const int tail = tail_height(spec, height);
  switch (spec.kind) {
    case SchemeKind::Model0:
      p.theta0 = table.get(0, spec.n_rows);
      if (tail) p.theta_tail = table.get(0, tail);
      break;
    case SchemeKind::Model1:
      p.theta1 = table.get(1, spec.n_rows);
      if (tail) p.theta_tail = table.get(1, tail);
      break;
    case SchemeKind::Rcc02:
      p.theta0 = table.get(0, spec.line_rows);
      p.theta2 = table.get(2, spec.strip_rows);
      if (tail) p.theta_tail = table.get(0, tail);
      break;
    case SchemeKind::Empirical1:
      break;
  }
  return p;
}

struct CodingTally {
  double ideal_bits = 0.0;  // sum of -log2 of the unquantized coding probabilities
  double line_bits = 0.0;   // Rcc02 only
  double strip_bits = 0.0;  // Rcc02 only
  std::size_t line_pixels = 0;
  std::size_t strip_pixels = 0;
  double two_sided_bits = 0.0;  // strips bounded on both sides
  std::size_t two_sided_pixels = 0;
};

struct EncodeResult {
  Bitstream stream;
  std::vector<std::uint8_t> bytes;  // full serialized file
  CodingTally tally;
  std::size_t pixels = 0;

  double ideal_bpp() const { return tally.ideal_bits / double(pixels); }
  // Payload bits only: header and any embedded table are excluded.
  double actual_bpp() const { return 8.0 * double(stream.coded.size()) / double(pixels); }
};

class Canvas {
 public:
  explicit Canvas(ImageDims dims) : image_(dims), known_(dims.sites(), 0) {}

  Spin at(int r, int c) const {
    require(known_[index(r, c)] != 0, "forward_reference",
            "context read of an uncoded pixel at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
    return image_(r, c);
  }

  std::vector<Spin> row(int r) const {
    std::vector<Spin> out(std::size_t(image_.width()));
    for (int c = 0; c < image_.width(); ++c) out[std::size_t(c)] = at(r, c);
    return out;
  }

  void set(int r, int c, Spin s) {
    require(known_[index(r, c)] == 0, "double_write", "pixel coded twice");
    image_(r, c) = s;
    known_[index(r, c)] = 1;
  }

  void set_column(int row0, int rows, int col, ColumnState s) {
    for (int k = 0; k < rows; ++k) set(row0 + k, col, Spin(state_spin(s, k)));
  }

  bool complete() const {
    for (auto k : known_)
      if (!k) return false;
    return true;
  }

  const BinaryImage& image() const { return image_; }

 private:
  std::size_t index(int r, int c) const {
    require(r >= 0 && r < image_.height() && c >= 0 && c < image_.width(), "index_out_of_range",
            "pixel index out of range");
    return std::size_t(r) * std::size_t(image_.width()) + std::size_t(c);
  }

  BinaryImage image_;
  std::vector<std::uint8_t> known_;
};

namespace detail {

class EncoderIo {
 public:
  explicit EncoderIo(const BinaryImage& source) : source_(source) {}

  std::size_t column(int row0, int rows, int col, const QuantizedDistribution& q) {
    const ColumnState s = column_state(source_, row0, rows, col);
    enc_.encode(s, q);
    return s;
  }
  std::size_t pixel(int r, int c, const QuantizedDistribution& q) {
    const std::size_t s = source_(r, c) > 0 ? 1 : 0;
    enc_.encode(s, q);
    return s;
  }
  std::vector<std::uint8_t> finish() { return enc_.finish(); }

 private:
  const BinaryImage& source_;
  RangeEncoder enc_;
};

class DecoderIo {
 public:
  explicit DecoderIo(std::span<const std::uint8_t> coded) : dec_(coded) {}

  std::size_t column(int, int, int, const QuantizedDistribution& q) { return dec_.decode(q); }
  std::size_t pixel(int, int, const QuantizedDistribution& q) { return dec_.decode(q); }

 private:
  RangeDecoder dec_;
};

template <class Io>
double code_block(Io& io, Canvas& canvas, const RowBlock& block, const BlockModel& model) {
  const ColumnChain chain(model);
  double bits = 0.0;
  std::optional<ColumnState> prev;
  for (int col = 0; col < model.width; ++col) {
    const auto dist = chain.distribution(col, prev);
    const auto q = quantize(dist);
    const auto s = ColumnState(io.column(block.start, block.height, col, q));
    bits -= std::log2(dist[s]);
    canvas.set_column(block.start, block.height, col, s);
    prev = s;
  }
  return bits;
}

template <class Io>
void run_scheme(Io& io, Canvas& canvas, const SchemeSpec& spec, const SchemeParams& p, const ContextTable* table,
                CodingTally& tally) {
  const int height = canvas.image().height();
  const int width = canvas.image().width();
  switch (spec.kind) {
    case SchemeKind::Model0: {
      for (const auto& b : row_blocks(height, spec.n_rows)) {
        const double th = b.height == spec.n_rows ? p.theta0 : p.theta_tail;
        tally.ideal_bits += code_block(io, canvas, b, build_block_model(b.height, width, th));
      }
      break;
    }
    case SchemeKind::Model1: {
      for (const auto& b : row_blocks(height, spec.n_rows)) {
        const double th = b.height == spec.n_rows ? p.theta1 : p.theta_tail;
        std::optional<std::vector<Spin>> above;
        if (b.start > 0) above = canvas.row(b.start - 1);
        const auto model = above ? build_block_model(b.height, width, th, std::span<const Spin>(*above))
                                 : build_block_model(b.height, width, th);
        tally.ideal_bits += code_block(io, canvas, b, model);
      }
      break;
    }
    case SchemeKind::Rcc02: {
      const auto layout = rcc_layout(height, spec.line_rows, spec.strip_rows);
      for (const auto& b : layout) {
        if (b.strip) continue;
        const double th = b.height == spec.line_rows ? p.theta0 : p.theta_tail;
        const double bits = code_block(io, canvas, b, build_block_model(b.height, width, th));
        tally.line_bits += bits;
        tally.line_pixels += std::size_t(b.height) * std::size_t(width);
      }
      for (const auto& b : layout) {
        if (!b.strip) continue;
        const auto above = canvas.row(b.start - 1);
        std::optional<std::vector<Spin>> below;
        if (b.start + b.height < height) below = canvas.row(b.start + b.height);
        const auto model =
            below ? build_block_model(b.height, width, p.theta2, std::span<const Spin>(above),
                                      std::span<const Spin>(*below))
                  : build_block_model(b.height, width, p.theta2, std::span<const Spin>(above));
        const double bits = code_block(io, canvas, b, model);
        tally.strip_bits += bits;
        tally.strip_pixels += std::size_t(b.height) * std::size_t(width);
        if (below) {
          tally.two_sided_bits += bits;
          tally.two_sided_pixels += std::size_t(b.height) * std::size_t(width);
        }
      }
      tally.ideal_bits = tally.line_bits + tally.strip_bits;
      break;
    }
    case SchemeKind::Empirical1: {
      require(table != nullptr, "missing_table", "empirical coding needs a context table");
      require(table->context_size() == spec.context_size, "bad_table", "context table size does not match c");
      std::vector<QuantizedDistribution> q;
      std::vector<double> p_plus;
      q.reserve(table->contexts());
      for (std::size_t ctx = 0; ctx < table->contexts(); ++ctx) {
        p_plus.push_back(table->p_plus(ctx));
        q.push_back(quantize_binary(p_plus.back()));
      }
      auto at = [&](int r, int c) { return canvas.at(r, c); };
      for (int r = 0; r < height; ++r) {
        for (int i = 0; i < width; ++i) {
          const std::size_t ctx = context_index(at, width, r, i, spec.context_size);
          const std::size_t s = io.pixel(r, i, q[ctx]);
          tally.ideal_bits -= std::log2(s ? p_plus[ctx] : 1.0 - p_plus[ctx]);
          canvas.set(r, i, s ? Spin(1) : Spin(-1));
        }
      }
      break;
    }
  }
}

inline SchemeId scheme_id(const SchemeSpec& spec) {
  switch (spec.kind) {
    case SchemeKind::Model0: return SchemeId::Model0;
    case SchemeKind::Model1: return SchemeId::Model1;
    case SchemeKind::Rcc02: return SchemeId::Rcc02;
    case SchemeKind::Empirical1:
      return spec.embed_table ? SchemeId::Empirical1EmbeddedTable : SchemeId::Empirical1;
  }
  return SchemeId::Model0;
}

}  // namespace detail

inline EncodeResult encode_image(const BinaryImage& img, const SchemeSpec& spec, const SchemeParams& params,
                                 const ContextTable* table = nullptr) {
  spec.validate();
  EncodeResult res;
  res.pixels = img.dims().sites();
  auto& h = res.stream.header;
  h.scheme = detail::scheme_id(spec);
  h.height = std::uint32_t(img.height());
  h.width = std::uint32_t(img.width());
  h.theta = params.theta;
  h.theta0 = params.theta0;
  h.theta1 = params.theta1;
  h.theta2 = params.theta2;
  h.theta_tail = params.theta_tail;
  switch (spec.kind) {
    case SchemeKind::Model0:
    case SchemeKind::Model1:
      h.n_rows = std::uint8_t(spec.n_rows);
      break;
    case SchemeKind::Rcc02:
      h.n_rows = std::uint8_t(spec.line_rows);
      h.context = std::uint8_t(spec.strip_rows);
      break;
    case SchemeKind::Empirical1:
      h.context = std::uint8_t(spec.context_size);
      break;
  }

  Canvas canvas(img.dims());
  detail::EncoderIo io(img);
  detail::run_scheme(io, canvas, spec, params, table, res.tally);
  res.stream.coded = io.finish();
  if (spec.embed_table && spec.kind == SchemeKind::Empirical1) res.stream.table = serialize_table(*table);
  res.bytes = serialize_bitstream(res.stream);
  return res;
}

inline EncodeResult encode_image(const BinaryImage& img, const SchemeSpec& spec, const ParameterTable& params,
                                 const ContextTable* table = nullptr) {
  return encode_image(img, spec, resolve_params(spec, params, img.height()), table);
}

inline SchemeSpec spec_from_header(const BitstreamHeader& h) {
  SchemeSpec spec;
  switch (h.scheme) {
    case SchemeId::Model0:
      spec.kind = SchemeKind::Model0;
      spec.n_rows = h.n_rows;
      break;
    case SchemeId::Model1:
      spec.kind = SchemeKind::Model1;
      spec.n_rows = h.n_rows;
      break;
    case SchemeId::Rcc02:
      spec.kind = SchemeKind::Rcc02;
      spec.line_rows = h.n_rows;
      spec.strip_rows = h.context;
      break;
    case SchemeId::Empirical1:
    case SchemeId::Empirical1EmbeddedTable:
      spec.kind = SchemeKind::Empirical1;
      spec.context_size = h.context;
      spec.embed_table = h.scheme == SchemeId::Empirical1EmbeddedTable;
      break;
  }
  spec.validate();
  return spec;
}

inline SchemeParams params_from_header(const BitstreamHeader& h) {
  return {h.theta, h.theta0, h.theta1, h.theta2, h.theta_tail};
}

// `table` is used only for out-of-band empirical streams.
inline BinaryImage decode_image(std::span<const std::uint8_t> bytes, const ContextTable* table = nullptr,
                                CodingTally* tally_out = nullptr) {
  const Bitstream bs = parse_bitstream(bytes);
  const auto& h = bs.header;
  require(std::uint64_t(h.height) * h.width <= (std::uint64_t(1) << 32), "bad_header", "image too large");
  const SchemeSpec spec = spec_from_header(h);

  std::optional<ContextTable> embedded;
  if (spec.embed_table) {
    std::size_t pos = 0;
    embedded = deserialize_table(bs.table, pos);
    table = &*embedded;
  }

  Canvas canvas(ImageDims{int(h.height), int(h.width)});
  detail::DecoderIo io(bs.coded);
  CodingTally tally;
  detail::run_scheme(io, canvas, spec, params_from_header(h), table, tally);
  require(canvas.complete(), "corrupt_stream", "decoder did not reconstruct every pixel");
  if (tally_out) *tally_out = tally;
  return canvas.image();
}

// Named entry points for each scheme.
inline EncodeResult encode_model_0sided(const BinaryImage& img, int n_rows, double theta0, double theta_tail) {
  SchemeSpec spec{SchemeKind::Model0, n_rows};
  return encode_image(img, spec, SchemeParams{0.0, theta0, 0.0, 0.0, theta_tail});
}

inline EncodeResult encode_model_1sided(const BinaryImage& img, int n_rows, double theta1, double theta_tail) {
  SchemeSpec spec{SchemeKind::Model1, n_rows};
  return encode_image(img, spec, SchemeParams{0.0, 0.0, theta1, 0.0, theta_tail});
}

inline EncodeResult encode_rcc(const BinaryImage& img, int line_rows, int strip_rows, double theta0, double theta2,
                               double theta_tail) {
  SchemeSpec spec;
  spec.kind = SchemeKind::Rcc02;
  spec.line_rows = line_rows;
  spec.strip_rows = strip_rows;
  return encode_image(img, spec, SchemeParams{theta2, theta0, 0.0, theta2, theta_tail});
}

inline EncodeResult encode_empirical_1sided(const BinaryImage& img, const ContextTable& table, bool embed = false) {
  SchemeSpec spec;
  spec.kind = SchemeKind::Empirical1;
  spec.context_size = table.context_size();
  spec.embed_table = embed;
  return encode_image(img, spec, SchemeParams{}, &table);
}

}  // namespace rcmi
