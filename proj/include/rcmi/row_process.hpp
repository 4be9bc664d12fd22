#pragma once

// Exact row process of a narrow Ising strip.
//
// For width W <= 8 the rows of an infinitely tall W-wide lattice form a
// stationary Markov chain on 2^W states. With the symmetric transfer matrix
//
//   S(a, b) = exp(theta [V(a)/2 + H(a, b) + V(b)/2])
//
// (V: horizontal agreement inside a row, H: vertical agreement between rows)
// and its Perron pair (lambda, phi), the chain has stationary law pi = phi^2
// and transitions P(b | a) = S(a, b) phi(b) / (lambda phi(a)). Everything
// here is exact up to floating point; all information quantities are in bits.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rcmi/column_chain_bp.hpp"
#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"

namespace rcmi {

inline constexpr int kMaxRowProcessWidth = 8;

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// Joint law of every configuration of a block implied by its sequential
// column coding distributions. Index bit (k + N_b * col) is row k of column col.
inline std::vector<double> chain_joint(const BlockModel& m) {
  require(m.n_rows * m.width <= 24, "dims_too_large", "block too large for joint enumeration");
  const ColumnChain chain(m);
  const std::size_t k = m.states();
  std::vector<double> joint(std::size_t(1) << (m.n_rows * m.width), 0.0);
  // depth-first over columns carrying the running product
  const auto first = chain.distribution(0, std::nullopt);
  struct Frame {
    int col;
    std::uint64_t prefix;
    double p;
    ColumnState prev;
  };
  std::vector<Frame> stack;
  for (ColumnState s = 0; s < k; ++s) stack.push_back({1, std::uint64_t(s), first[s], s});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.col == m.width) {
      joint[f.prefix] = f.p;
      continue;
    }
    const auto dist = chain.distribution(f.col, f.prev);
    for (ColumnState s = 0; s < k; ++s)
      stack.push_back({f.col + 1, f.prefix | (std::uint64_t(s) << (m.n_rows * f.col)), f.p * dist[s], s});
  }
  return joint;
}

class RowProcess {
 public:
  RowProcess(int width, double theta) : width_(width), theta_(theta), k_(std::size_t(1) << width) {
    require(width >= 1 && width <= kMaxRowProcessWidth, "dims_too_large", "row process width must be in [1, 8]");
    Eigen::MatrixXd s(k_, k_);
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t b = 0; b < k_; ++b)
        s(Eigen::Index(a), Eigen::Index(b)) =
            std::exp(theta * (0.5 * row_agreement(a) + vertical(a, b) + 0.5 * row_agreement(b)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    require(eig.info() == Eigen::Success, "numeric_error", "transfer matrix eigen-decomposition failed");
    const Eigen::Index top = Eigen::Index(k_) - 1;  // eigenvalues ascend
    const double lambda = eig.eigenvalues()(top);
    Eigen::VectorXd phi = eig.eigenvectors().col(top);
    if (phi.sum() < 0) phi = -phi;

    pi_.resize(k_);
    double z = 0.0;
    for (std::size_t a = 0; a < k_; ++a) z += phi(Eigen::Index(a)) * phi(Eigen::Index(a));
    for (std::size_t a = 0; a < k_; ++a) pi_[a] = phi(Eigen::Index(a)) * phi(Eigen::Index(a)) / z;

    trans_.assign(k_ * k_, 0.0);
    for (std::size_t a = 0; a < k_; ++a) {
      double row_sum = 0.0;
      for (std::size_t b = 0; b < k_; ++b) {
        const double v = s(Eigen::Index(a), Eigen::Index(b)) * phi(Eigen::Index(b)) / (lambda * phi(Eigen::Index(a)));
        trans_[a * k_ + b] = v;
        row_sum += v;
      }
      for (std::size_t b = 0; b < k_; ++b) trans_[a * k_ + b] /= row_sum;  // removes eigen-solver rounding
    }
  }

  int width() const { return width_; }
  double theta() const { return theta_; }
  std::size_t states() const { return k_; }

  std::span<const double> stationary() const { return pi_; }
  double transition(std::size_t a, std::size_t b) const { return trans_[a * k_ + b]; }

  // n-step transition matrix, row-major.
  std::vector<double> transition_power(int n) const {
    std::vector<double> out(k_ * k_, 0.0);
    for (std::size_t a = 0; a < k_; ++a) out[a * k_ + a] = 1.0;
    std::vector<double> tmp(k_ * k_);
    for (int step = 0; step < n; ++step) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (std::size_t a = 0; a < k_; ++a)
        for (std::size_t m = 0; m < k_; ++m) {
          const double x = out[a * k_ + m];
          if (x == 0.0) continue;
          for (std::size_t b = 0; b < k_; ++b) tmp[a * k_ + b] += x * trans_[m * k_ + b];
        }
      out.swap(tmp);
    }
    return out;
  }

  double row_entropy() const {
    double h = 0.0;
    for (double p : pi_) h -= xlog2x(p);
    return h;
  }

  // H(X_{r1} | X_{r0})
  double conditional_entropy() const {
    double h = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t b = 0; b < k_; ++b) h -= pi_[a] * xlog2x(transition(a, b));
    return h;
  }

  double entropy_rate() const { return conditional_entropy() / width_; }

  // I(X_{r0}; X_{r_{gap}}) from the gap-step joint law.
  double mutual_information(int gap) const {
    const auto pn = transition_power(gap);
    double i = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t c = 0; c < k_; ++c) {
        const double p = pn[a * k_ + c];
        if (p > 0.0) i += pi_[a] * p * std::log2(p / pi_[c]);
      }
    return i;
  }

  // H(X_{r1} | X_{r0}, X_{r2})
  double two_sided_conditional_entropy() const {
    const auto p2 = transition_power(2);
    double h = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t b = 0; b < k_; ++b) {
        const double pab = pi_[a] * transition(a, b);
        for (std::size_t c = 0; c < k_; ++c) {
          const double joint = pab * transition(b, c);
          if (joint > 0.0) h -= joint * std::log2(transition(a, b) * transition(b, c) / p2[a * k_ + c]);
        }
      }
    return h;
  }

  // I(X_{r1}; X_{r2} | X_{r0})
  double conditional_mutual_information() const {
    const auto p2 = transition_power(2);
    double i = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t b = 0; b < k_; ++b) {
        const double pab = pi_[a] * transition(a, b);
        for (std::size_t c = 0; c < k_; ++c) {
          const double joint = pab * transition(b, c);
          if (joint > 0.0) i += joint * std::log2(transition(b, c) / p2[a * k_ + c]);
        }
      }
    return i;
  }

  // H(X_{r1..rN} | X_{r0}, X_{r_{N+1}}) through the Markov chain rule.
  double strip_conditional_entropy(int n_rows) const {
    const auto pn = transition_power(n_rows + 1);
    double h_ends = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t c = 0; c < k_; ++c) h_ends -= xlog2x(pi_[a] * pn[a * k_ + c]);
    return row_entropy() + (n_rows + 1) * conditional_entropy() - h_ends;
  }

 private:
  double row_agreement(std::size_t a) const {
    if (width_ == 1) return 0.0;
    const std::size_t mask = (std::size_t(1) << (width_ - 1)) - 1;
    return double((width_ - 1) - 2 * std::popcount((a ^ (a >> 1)) & mask));
  }
  double vertical(std::size_t a, std::size_t b) const { return double(width_ - 2 * std::popcount(a ^ b)); }

  int width_;
  double theta_;
  std::size_t k_;
  std::vector<double> pi_;
  std::vector<double> trans_;
};

// sum_i sum_{x_<i} P(x_<i) D(P(. | x_<i) || Q(. | x_<i)) over binary columns,
// with conditionals taken from the prefix marginals of each joint. Index bit i
// is column i. Bits.
inline double column_divergence_sum(std::span<const double> p, std::span<const double> q, int columns) {
  require(p.size() == (std::size_t(1) << columns) && q.size() == p.size(), "misaligned", "joint sizes differ");
  double total = 0.0;
  for (int i = 0; i < columns; ++i) {
    const std::size_t prefixes = std::size_t(1) << i;
    std::vector<double> pm(2 * prefixes, 0.0), qm(2 * prefixes, 0.0);
    const std::size_t mask = (std::size_t(1) << (i + 1)) - 1;
    for (std::size_t x = 0; x < p.size(); ++x) {
      pm[x & mask] += p[x];
      qm[x & mask] += q[x];
    }
    for (std::size_t pre = 0; pre < prefixes; ++pre) {
      const double p_pre = pm[pre] + pm[pre | prefixes];
      const double q_pre = qm[pre] + qm[pre | prefixes];
      if (p_pre <= 0.0) continue;
      for (std::size_t bit = 0; bit < 2; ++bit) {
        const double pc = pm[pre | (bit * prefixes)] / p_pre;
        const double qc = qm[pre | (bit * prefixes)] / q_pre;
        if (pc > 0.0) total += p_pre * pc * std::log2(pc / qc);
      }
    }
  }
  return total;
}

}  // namespace rcmi
