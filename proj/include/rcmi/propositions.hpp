#pragma once

// Exact redundancy analysis of single-row coding on narrow strips, plus the
// chain-rule divergence decomposition on random chains. Every check compares
// two independently assembled numbers and records the gap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rcmi/calibrate.hpp"
#include "rcmi/column_chain_bp.hpp"
#include "rcmi/context_table.hpp"
#include "rcmi/error.hpp"
#include "rcmi/grid_model.hpp"
#include "rcmi/row_process.hpp"

namespace rcmi {

struct PropositionCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;

  double gap() const { return std::abs(lhs - rhs); }
  bool pass() const { return std::isfinite(lhs) && std::isfinite(rhs) && gap() <= tolerance; }
};

// Rates in bits per pixel, divergences and informations in bits per row.
struct ExactRowAnalysis {
  int width = 0;
  double theta = 0.0;
  double theta0 = 0.0;  // exact theta*_{0,1}
  double theta1 = 0.0;  // exact theta*_{1,1}

  double h_inf = 0.0;
  double info_adjacent = 0.0;     // I(X_r1; X_r0)
  double info_skip = 0.0;         // I(X_r2; X_r0)
  double info_conditional = 0.0;  // I(X_r1; X_r2 | X_r0)

  double rate_0e = 0.0;  // coding a row with its true marginal
  double rate_0m = 0.0;
  double rate_1m = 0.0;
  double rate_2m = 0.0;           // H(X_r1 | X_r0, X_r2) / W
  double rate_2m_bp = 0.0;        // 2-sided block coder with theta, averaged over boundaries
  double rate_0e_c1 = 0.0;        // c = 1 empirical (left pixel only), exact pooled table
  double div_0m = 0.0;
  double div_1m = 0.0;

  int context_size = 0;
  double rate_1e = 0.0;
  double div_1e = 0.0;
};

// Exact pooled context statistics of interior rows: every column of a row
// pair (a, b) drawn from pi(a) P(b | a). Returns P(+1 | ctx).
inline std::vector<double> exact_context_conditionals(const RowProcess& rp, int context_size) {
  const int w = rp.width();
  const std::size_t k = rp.states();
  const std::size_t n_ctx = std::size_t(1) << context_size;
  std::vector<double> plus(n_ctx, 0.0), mass(n_ctx, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      const double p = rp.stationary()[a] * rp.transition(a, b);
      auto at = [&](int r, int c) -> Spin { return (((r == 0 ? a : b) >> c) & 1u) ? 1 : -1; };
      for (int i = 0; i < w; ++i) {
        const std::size_t ctx = context_index(at, w, 1, i, context_size);
        mass[ctx] += p;
        if ((b >> i) & 1u) plus[ctx] += p;
      }
    }
  for (std::size_t ctx = 0; ctx < n_ctx; ++ctx) plus[ctx] = mass[ctx] > 0.0 ? plus[ctx] / mass[ctx] : 0.5;
  return plus;
}

// Joint law over rows b of the product of table conditionals given row a above.
inline std::vector<double> empirical_row_joint(std::span<const double> p_plus, int width, std::size_t a,
                                               int context_size) {
  const std::size_t k = std::size_t(1) << width;
  std::vector<double> q(k, 1.0);
  for (std::size_t b = 0; b < k; ++b) {
    auto at = [&](int r, int c) -> Spin { return (((r == 0 ? a : b) >> c) & 1u) ? 1 : -1; };
    for (int i = 0; i < width; ++i) {
      const double pp = p_plus[context_index(at, width, 1, i, context_size)];
      q[b] *= ((b >> i) & 1u) ? pp : 1.0 - pp;
    }
  }
  return q;
}

inline ExactRowAnalysis analyze_row_process(int width, double theta, int context_size = 3) {
  const RowProcess rp(width, theta);
  const std::size_t k = rp.states();
  const auto pi = rp.stationary();
  ExactRowAnalysis out;
  out.width = width;
  out.theta = theta;
  out.context_size = context_size;
  const double w = double(width);

  out.h_inf = rp.entropy_rate();
  out.info_adjacent = rp.mutual_information(1);
  out.info_skip = rp.mutual_information(2);
  out.info_conditional = rp.conditional_mutual_information();
  out.rate_0e = rp.row_entropy() / w;
  out.rate_2m = rp.two_sided_conditional_entropy() / w;

  auto row_agreement = [width](std::size_t x) {
    double v = 0.0;
    for (int c = 0; c + 1 < width; ++c) v += (((x >> c) ^ (x >> (c + 1))) & 1u) ? -1.0 : 1.0;
    return v;
  };
  auto vertical = [width](std::size_t x, std::size_t y) {
    double v = 0.0;
    for (int c = 0; c < width; ++c) v += (((x ^ y) >> c) & 1u) ? -1.0 : 1.0;
    return v;
  };

  // exact moment-matching parameters
  MomentTarget t0;
  t0.sidedness = 0;
  t0.width = width;
  t0.contexts.push_back({});
  for (std::size_t x = 0; x < k; ++x) t0.value += pi[x] * row_agreement(x);
  out.theta0 = solve_theta_star(t0, 1e-12).theta_star;

  MomentTarget t1;
  t1.sidedness = 1;
  t1.width = width;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) t1.value += pi[a] * rp.transition(a, b) * (row_agreement(b) + vertical(a, b));
    t1.contexts.push_back({row_from_bits(a, width), {}, pi[a]});
  }
  out.theta1 = solve_theta_star(t1, 1e-12).theta_star;

  // 0-sided: one coding law for every row
  const auto q0 = chain_joint(build_block_model(1, width, out.theta0, std::nullopt, std::nullopt));
  for (std::size_t x = 0; x < k; ++x) out.rate_0m -= pi[x] * std::log2(q0[x]) / w;
  out.div_0m = column_divergence_sum(pi, q0, width);

  // 1-sided and empirical: coding law depends on the row above
  const auto table = exact_context_conditionals(rp, context_size);
  const auto table_c1 = exact_context_conditionals(rp, 1);
  const auto q_c1 = empirical_row_joint(table_c1, width, 0, 1);  // c = 1 ignores the row above
  for (std::size_t x = 0; x < k; ++x) out.rate_0e_c1 -= pi[x] * std::log2(q_c1[x]) / w;

  std::vector<double> truth(k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) truth[b] = rp.transition(a, b);
    const auto top = row_from_bits(a, width);
    const auto q1 = chain_joint(build_block_model(1, width, out.theta1, std::span<const Spin>(top), std::nullopt));
    const auto qe = empirical_row_joint(table, width, a, context_size);
    for (std::size_t b = 0; b < k; ++b) {
      if (truth[b] <= 0.0) continue;
      out.rate_1m -= pi[a] * truth[b] * std::log2(q1[b]) / w;
      out.rate_1e -= pi[a] * truth[b] * std::log2(qe[b]) / w;
    }
    out.div_1m += pi[a] * column_divergence_sum(truth, q1, width);
    out.div_1e += pi[a] * column_divergence_sum(truth, qe, width);
  }

  // 2-sided block coder with the true parameter, averaged over both boundaries
  const auto p2 = rp.transition_power(2);
  for (std::size_t a = 0; a < k; ++a) {
    const auto top = row_from_bits(a, width);
    for (std::size_t c = 0; c < k; ++c) {
      const double mass = pi[a] * p2[a * k + c];
      if (mass <= 0.0) continue;
      const auto bottom = row_from_bits(c, width);
      const auto m = build_block_model(1, width, theta, std::span<const Spin>(top), std::span<const Spin>(bottom));
      out.rate_2m_bp += mass * block_conditional_entropy(m) / std::log(2.0) / w;
    }
  }
  return out;
}

inline std::vector<PropositionCheck> exact_proposition_checks(const ExactRowAnalysis& a, double tol = 1e-8) {
  const double w = double(a.width);
  return {
      {"0-sided model rate = H + (D + I)/W", a.rate_0m, a.h_inf + (a.div_0m + a.info_adjacent) / w, tol},
      {"0-sided empirical rate = H + I/W", a.rate_0e, a.h_inf + a.info_adjacent / w, tol},
      {"2-sided rate = H - I(X1;X2|X0)/W", a.rate_2m, a.h_inf - a.info_conditional / w, tol},
      {"I(X1;X0) - I(X1;X2|X0) = I(X2;X0)", a.info_adjacent - a.info_conditional, a.info_skip, tol},
      {"0/2-sided mean rate = H + D/2W + I(X2;X0)/2W", 0.5 * (a.rate_0m + a.rate_2m),
       a.h_inf + a.div_0m / (2 * w) + a.info_skip / (2 * w), tol},
      {"1-sided model rate = H + D/W", a.rate_1m, a.h_inf + a.div_1m / w, tol},
      {"1-sided empirical rate = H + D/W", a.rate_1e, a.h_inf + a.div_1e / w, tol},
      {"2-sided block coder attains H(X1|X0,X2)", a.rate_2m_bp, a.rate_2m, tol},
  };
}

// A chain of finite variables whose law factors through contexts C_i, with a
// coding law factoring through contexts Cbar_i. Contexts are index sets of
// earlier variables.
struct RandomChain {
  std::vector<int> alphabet;
  std::vector<std::vector<int>> p_context, q_context;
  // table[i][ctx_index * alphabet[i] + x]
  std::vector<std::vector<double>> p_table, q_table;
};

inline std::size_t chain_context_index(const RandomChain& ch, const std::vector<int>& ctx,
                                       const std::vector<int>& values) {
  std::size_t idx = 0;
  for (int j : ctx) idx = idx * std::size_t(ch.alphabet[std::size_t(j)]) + std::size_t(values[std::size_t(j)]);
  return idx;
}

inline std::size_t chain_context_count(const RandomChain& ch, const std::vector<int>& ctx) {
  std::size_t n = 1;
  for (int j : ctx) n *= std::size_t(ch.alphabet[std::size_t(j)]);
  return n;
}

inline RandomChain random_chain(Rng& rng, int n_vars, int max_alphabet = 3) {
  RandomChain ch;
  auto random_table = [&](std::size_t contexts, int size) {
    std::vector<double> t(contexts * std::size_t(size));
    for (std::size_t c = 0; c < contexts; ++c) {
      double total = 0.0;
      for (int x = 0; x < size; ++x) total += t[c * std::size_t(size) + std::size_t(x)] = 0.05 + rng.uniform();
      for (int x = 0; x < size; ++x) t[c * std::size_t(size) + std::size_t(x)] /= total;
    }
    return t;
  };
  for (int i = 0; i < n_vars; ++i) {
    ch.alphabet.push_back(2 + int(rng.uniform() * (max_alphabet - 1)));
    std::vector<int> cp, cq;
    for (int j = 0; j < i; ++j) {
      if (rng.uniform() < 0.5) cp.push_back(j);
      if (rng.uniform() < 0.5) cq.push_back(j);
    }
    ch.p_context.push_back(cp);
    ch.q_context.push_back(cq);
    ch.p_table.push_back(random_table(chain_context_count(ch, cp), ch.alphabet.back()));
    ch.q_table.push_back(random_table(chain_context_count(ch, cq), ch.alphabet.back()));
  }
  return ch;
}

template <class Fn>
void for_each_assignment(const std::vector<int>& alphabet, Fn&& fn) {
  std::vector<int> v(alphabet.size(), 0);
  while (true) {
    fn(v);
    std::size_t j = 0;
    while (j < v.size() && ++v[j] == alphabet[j]) v[j++] = 0;
    if (j == v.size()) return;
  }
}

// D(prod p || prod q) by summing over every joint assignment. Bits.
inline double chain_divergence_direct(const RandomChain& ch) {
  double d = 0.0;
  for_each_assignment(ch.alphabet, [&](const std::vector<int>& v) {
    double p = 1.0, q = 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::size_t a = std::size_t(ch.alphabet[i]);
      p *= ch.p_table[i][chain_context_index(ch, ch.p_context[i], v) * a + std::size_t(v[i])];
      q *= ch.q_table[i][chain_context_index(ch, ch.q_context[i], v) * a + std::size_t(v[i])];
    }
    if (p > 0.0) d += p * std::log2(p / q);
  });
  return d;
}

// sum_i sum over x_{C_i u Cbar_i} of p(x_{C_i u Cbar_i}) D(p_{i|C_i} || q_{i|Cbar_i}). Bits.
inline double chain_divergence_decomposed(const RandomChain& ch) {
  const std::size_t n = ch.alphabet.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> joint_ctx = ch.p_context[i];
    joint_ctx.insert(joint_ctx.end(), ch.q_context[i].begin(), ch.q_context[i].end());
    std::sort(joint_ctx.begin(), joint_ctx.end());
    joint_ctx.erase(std::unique(joint_ctx.begin(), joint_ctx.end()), joint_ctx.end());

    // marginal law of the union context, from the full joint
    std::vector<double> marginal(chain_context_count(ch, joint_ctx), 0.0);
    std::vector<std::vector<int>> representative(marginal.size());
    for_each_assignment(ch.alphabet, [&](const std::vector<int>& v) {
      double p = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        p *= ch.p_table[j][chain_context_index(ch, ch.p_context[j], v) * std::size_t(ch.alphabet[j]) +
                           std::size_t(v[j])];
      const std::size_t idx = chain_context_index(ch, joint_ctx, v);
      marginal[idx] += p;
      if (representative[idx].empty()) representative[idx] = v;
    });

    const std::size_t a = std::size_t(ch.alphabet[i]);
    for (std::size_t idx = 0; idx < marginal.size(); ++idx) {
      if (marginal[idx] <= 0.0) continue;
      const auto& v = representative[idx];
      const std::size_t cp = chain_context_index(ch, ch.p_context[i], v);
      const std::size_t cq = chain_context_index(ch, ch.q_context[i], v);
      double d = 0.0;
      for (std::size_t x = 0; x < a; ++x) {
        const double p = ch.p_table[i][cp * a + x];
        if (p > 0.0) d += p * std::log2(p / ch.q_table[i][cq * a + x]);
      }
      total += marginal[idx] * d;
    }
  }
  return total;
}

inline std::vector<PropositionCheck> chain_rule_checks(std::uint64_t seed, int chains = 100, int max_vars = 5,
                                                       double tol = 1e-10) {
  Rng rng(seed);
  std::vector<PropositionCheck> out;
  for (int k = 0; k < chains; ++k) {
    const int n = 2 + int(rng.uniform() * (max_vars - 1));
    const auto ch = random_chain(rng, n);
    out.push_back({"chain rule, " + std::to_string(n) + " variables", chain_divergence_direct(ch),
                   chain_divergence_decomposed(ch), tol});
  }
  return out;
}

}  // namespace rcmi
