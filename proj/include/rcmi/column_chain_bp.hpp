#pragma once

// Exact coding distributions for an N_b x W block of rows.
//
// Each column of the block is lumped into one super-pixel with 2^N_b states
// and the block becomes a chain of W super-pixels. Boundary rows above and
// below the block enter as per-site fields on the first and last block rows:
//
//   log p(x_b) = theta* sum_{E_b} x_i x_j + sum_i top_field[i] x_{r1,i}
//              + sum_i bottom_field[i] x_{rN,i} - log Z
//
// Factorization along the chain: column 0 carries a unary factor
// exp(u_0(s)); each later column i carries exp(theta* H(s_{i-1}, s_i) + u_i(s_i))
// where u_i holds the column's vertical couplings and its boundary fields and
// H(a, b) = sum_k a_k b_k is the horizontal agreement between two columns.
//
// The horizontal factor exp(theta* H(a, b)) is a Kronecker product of N_b
// identical 2x2 matrices, so multiplying a message by it costs O(N_b 2^N_b)
// rather than O(4^N_b).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"

namespace rcmi {

inline constexpr int kMaxBlockRows = 12;

using ColumnState = unsigned;  // bit k is the spin of block row k (1 <-> +1)

inline int state_spin(ColumnState s, int k) { return ((s >> k) & 1u) ? 1 : -1; }

inline ColumnState column_state(const BinaryImage& img, int row0, int rows, int col) {
  ColumnState s = 0;
  for (int k = 0; k < rows; ++k)
    if (img(row0 + k, col) > 0) s |= ColumnState(1) << k;
  return s;
}

struct BlockModel {
  int n_rows = 1;
  int width = 1;
  double theta_star = 0.0;
  std::vector<double> top_field;     // theta* s_i on block row 0
  std::vector<double> bottom_field;  // theta* s_i on block row n_rows - 1

  std::size_t states() const { return std::size_t(1) << n_rows; }
};

// Message into each column from its right, normalized to sum 1.
struct MessageSet {
  std::vector<std::vector<double>> into;
};

inline BlockModel build_block_model(int n_rows, int width, double theta_star,
                                    std::optional<std::span<const Spin>> top_row = std::nullopt,
                                    std::optional<std::span<const Spin>> bottom_row = std::nullopt) {
  require(n_rows >= 1 && n_rows <= kMaxBlockRows, "block_too_large",
          "block height must be in [1, " + std::to_string(kMaxBlockRows) + "]");
  require(width >= 1, "invalid_dims", "block width must be positive");
  require(std::isfinite(theta_star), "invalid_theta", "theta* must be finite");
  BlockModel m{n_rows, width, theta_star, std::vector<double>(std::size_t(width), 0.0),
               std::vector<double>(std::size_t(width), 0.0)};
  if (top_row) {
    require(top_row->size() == std::size_t(width), "boundary_mismatch", "top boundary row has wrong length");
    for (int i = 0; i < width; ++i) m.top_field[std::size_t(i)] = theta_star * (*top_row)[std::size_t(i)];
  }
  if (bottom_row) {
    require(bottom_row->size() == std::size_t(width), "boundary_mismatch", "bottom boundary row has wrong length");
    for (int i = 0; i < width; ++i) m.bottom_field[std::size_t(i)] = theta_star * (*bottom_row)[std::size_t(i)];
  }
  return m;
}

namespace detail {

inline int vertical_agreement(ColumnState s, int n_rows) {
  // adjacent rows agree when their bits match
  const ColumnState mask = (ColumnState(1) << (n_rows - 1)) - 1u;
  const int disagree = std::popcount((s ^ (s >> 1)) & mask);
  return (n_rows - 1) - 2 * disagree;
}

// Log unary weight of every state of column `col`.
inline void column_log_unary(const BlockModel& m, int col, std::vector<double>& out) {
  const std::size_t k = m.states();
  out.resize(k);
  const double top = m.top_field[std::size_t(col)];
  const double bottom = m.bottom_field[std::size_t(col)];
  for (ColumnState s = 0; s < k; ++s)
    out[s] = m.theta_star * vertical_agreement(s, m.n_rows) + top * state_spin(s, 0) +
             bottom * state_spin(s, m.n_rows - 1);
}

// exp(u - max u); returns max u.
inline double exponentiate_shifted(std::vector<double>& u) {
  const double top = *std::max_element(u.begin(), u.end());
  for (auto& v : u) v = std::exp(v - top);
  return top;
}

inline double normalize(std::span<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= total;
  return total;
}

// v <- C^{(x) n} v with C = [[1, c], [c, 1]], c = exp(-2 theta*). This is the
// horizontal factor scaled by exp(-n theta*).
inline void apply_coupling(std::span<double> v, int n_rows, double c) {
  const std::size_t k = v.size();
  for (int bit = 0; bit < n_rows; ++bit) {
    const std::size_t step = std::size_t(1) << bit;
    for (std::size_t j = 0; j < k; ++j) {
      if (j & step) continue;
      const double a = v[j];
      const double b = v[j | step];
      v[j] = a + c * b;
      v[j | step] = c * a + b;
    }
  }
}

// Same transform together with its derivative in theta*: on return d holds
// (d/dtheta* C^{(x) n}) v_in + C^{(x) n} d_in.
inline void apply_coupling_dual(std::span<double> v, std::span<double> d, int n_rows, double c) {
  const std::size_t k = v.size();
  for (int bit = 0; bit < n_rows; ++bit) {
    const std::size_t step = std::size_t(1) << bit;
    for (std::size_t j = 0; j < k; ++j) {
      if (j & step) continue;
      const double a = v[j], b = v[j | step];
      const double da = d[j], db = d[j | step];
      v[j] = a + c * b;
      v[j | step] = c * a + b;
      d[j] = da + c * db - 2.0 * c * b;
      d[j | step] = c * da + db - 2.0 * c * a;
    }
  }
}

}  // namespace detail

// exp(theta* H(left, right) + u_col(right)); column 0's own unary factor is
// column_unary_weight.
inline double column_pair_weight(const BlockModel& m, int col, ColumnState left, ColumnState right) {
  require(col >= 1 && col < m.width, "index_out_of_range", "pair index must be in [1, W)");
  require(left < m.states() && right < m.states(), "index_out_of_range", "column state out of range");
  const int h = m.n_rows - 2 * std::popcount(left ^ right);
  const double u = m.theta_star * detail::vertical_agreement(right, m.n_rows) +
                   m.top_field[std::size_t(col)] * state_spin(right, 0) +
                   m.bottom_field[std::size_t(col)] * state_spin(right, m.n_rows - 1);
  return std::exp(m.theta_star * h + u);
}

inline double column_unary_weight(const BlockModel& m, ColumnState s) {
  require(s < m.states(), "index_out_of_range", "column state out of range");
  return std::exp(m.theta_star * detail::vertical_agreement(s, m.n_rows) + m.top_field[0] * state_spin(s, 0) +
                  m.bottom_field[0] * state_spin(s, m.n_rows - 1));
}

inline MessageSet backward_pass(const BlockModel& m) {
  const std::size_t k = m.states();
  const double c = std::exp(-2.0 * m.theta_star);
  MessageSet msgs;
  msgs.into.assign(std::size_t(m.width), std::vector<double>(k, 1.0 / double(k)));
  std::vector<double> u;
  for (int col = m.width - 1; col >= 1; --col) {
    detail::column_log_unary(m, col, u);
    detail::exponentiate_shifted(u);
    auto& out = msgs.into[std::size_t(col - 1)];
    const auto& in = msgs.into[std::size_t(col)];
    for (std::size_t s = 0; s < k; ++s) out[s] = u[s] * in[s];
    detail::apply_coupling(out, m.n_rows, c);
    detail::normalize(out);
  }
  return msgs;
}

// Coding distribution of column `col` given the realized previous column.
inline std::vector<double> next_column_distribution(const BlockModel& m, const MessageSet& msgs, int col,
                                                    std::optional<ColumnState> prev) {
  require(col >= 0 && col < m.width, "index_out_of_range", "column index out of range");
  require(prev.has_value() == (col > 0), "bad_context", "previous column state required exactly when col > 0");
  const std::size_t k = m.states();
  std::vector<double> p;
  detail::column_log_unary(m, col, p);
  if (prev) {
    require(*prev < k, "index_out_of_range", "column state out of range");
    for (ColumnState s = 0; s < k; ++s) p[s] -= 2.0 * m.theta_star * std::popcount(s ^ *prev);
  }
  detail::exponentiate_shifted(p);
  const auto& msg = msgs.into[std::size_t(col)];
  for (std::size_t s = 0; s < k; ++s) p[s] *= msg[s];
  detail::normalize(p);
  return p;
}

// Sequential coder-side view of one block: runs the backward pass once and
// hands out column distributions left to right.
class ColumnChain {
 public:
  explicit ColumnChain(BlockModel model) : model_(std::move(model)), msgs_(backward_pass(model_)) {}

  const BlockModel& model() const { return model_; }
  std::vector<double> distribution(int col, std::optional<ColumnState> prev) const {
    return next_column_distribution(model_, msgs_, col, prev);
  }

 private:
  BlockModel model_;
  MessageSet msgs_;
};

struct BlockStatistics {
  double log_partition = 0.0;  // nats
  double entropy = 0.0;        // nats
  double edge_moment = 0.0;    // E[sum_{E_b} x_i x_j]
  std::vector<double> top_row_mean;     // E[x_{r1,i}]
  std::vector<double> bottom_row_mean;  // E[x_{rN,i}]
};

// Forward-backward over the column chain.
inline BlockStatistics block_statistics(const BlockModel& m) {
  const std::size_t k = m.states();
  const int n = m.n_rows;
  const double c = std::exp(-2.0 * m.theta_star);
  const MessageSet msgs = backward_pass(m);

  BlockStatistics st;
  st.top_row_mean.assign(std::size_t(m.width), 0.0);
  st.bottom_row_mean.assign(std::size_t(m.width), 0.0);

  std::vector<double> u, alpha(k), prev_alpha(k), v(k), d(k), marg(k);
  double vertical = 0.0, horizontal = 0.0;

  for (int col = 0; col < m.width; ++col) {
    detail::column_log_unary(m, col, u);
    const double shift = detail::exponentiate_shifted(u);
    const auto& msg = msgs.into[std::size_t(col)];
    if (col == 0) {
      alpha = u;
      st.log_partition = shift;
    } else {
      // horizontal expectation between col-1 and col
      v = prev_alpha;
      std::fill(d.begin(), d.end(), 0.0);
      detail::apply_coupling_dual(v, d, n, c);
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double beta = u[s] * msg[s];
        num += beta * d[s];
        den += beta * v[s];
      }
      horizontal += double(n) + num / den;

      for (std::size_t s = 0; s < k; ++s) alpha[s] = v[s] * u[s];
      st.log_partition += shift + double(n) * m.theta_star;
    }
    st.log_partition += std::log(detail::normalize(alpha));

    for (std::size_t s = 0; s < k; ++s) marg[s] = alpha[s] * msg[s];
    detail::normalize(marg);
    double top = 0.0, bottom = 0.0;
    for (ColumnState s = 0; s < k; ++s) {
      vertical += marg[s] * detail::vertical_agreement(s, n);
      top += marg[s] * state_spin(s, 0);
      bottom += marg[s] * state_spin(s, n - 1);
    }
    st.top_row_mean[std::size_t(col)] = top;
    st.bottom_row_mean[std::size_t(col)] = bottom;
    prev_alpha = alpha;
  }

  st.edge_moment = vertical + horizontal;
  double field_energy = 0.0;
  for (int col = 0; col < m.width; ++col)
    field_energy += m.top_field[std::size_t(col)] * st.top_row_mean[std::size_t(col)] +
                    m.bottom_field[std::size_t(col)] * st.bottom_row_mean[std::size_t(col)];
  st.entropy = st.log_partition - m.theta_star * st.edge_moment - field_energy;
  return st;
}

inline double block_conditional_entropy(const BlockModel& m) { return block_statistics(m).entropy; }
inline double block_moment(const BlockModel& m) { return block_statistics(m).edge_moment; }

}  // namespace rcmi
