#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rcmi/row_process.hpp"

using namespace rcmi;

namespace {

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// Stationary row law by power iteration on the unsymmetrized transfer matrix.
std::vector<double> power_stationary(int w, double theta) {
  const std::size_t k = std::size_t(1) << w;
  auto agree_row = [&](std::size_t a) {
    double v = 0;
    for (int c = 0; c + 1 < w; ++c) v += oracle::spin_at(a, c) * oracle::spin_at(a, c + 1);
    return v;
  };
  std::vector<double> s(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      double v = agree_row(b);
      for (int c = 0; c < w; ++c) v += oracle::spin_at(a, c) * oracle::spin_at(b, c);
      s[a * k + b] = std::exp(theta * v);
    }
  std::vector<double> phi(k, 1.0), next(k);
  for (int it = 0; it < 2000; ++it) {
    double norm = 0;
    for (std::size_t a = 0; a < k; ++a) {
      next[a] = 0;
      for (std::size_t b = 0; b < k; ++b) next[a] += s[a * k + b] * phi[b];
      norm += next[a];
    }
    for (std::size_t a = 0; a < k; ++a) phi[a] = next[a] / norm;
  }
  // right eigenvector of S(a,b)=exp(theta(H(a,b)+V(b))) is psi; the symmetric
  // version's phi equals psi scaled by exp(theta V/2), and pi = phi^2
  std::vector<double> pi(k);
  double z = 0;
  for (std::size_t a = 0; a < k; ++a) z += pi[a] = phi[a] * phi[a] * std::exp(theta * agree_row(a));
  for (auto& v : pi) v /= z;
  return pi;
}

}  // namespace

TEST(RowProcess, WidthOneIsBinaryMarkovChain) {
  const double theta = 0.7;
  const RowProcess rp(1, theta);
  const double flip = 1.0 / (1.0 + std::exp(2 * theta));
  EXPECT_NEAR(rp.stationary()[0], 0.5, 1e-14);
  EXPECT_NEAR(rp.transition(0, 1), flip, 1e-14);
  EXPECT_NEAR(rp.entropy_rate(), h2(flip), 1e-13);
  EXPECT_NEAR(rp.mutual_information(1), 1.0 - h2(flip), 1e-13);
}

TEST(RowProcess, StationaryMatchesPowerIteration) {
  for (int w : {2, 3, 5}) {
    const RowProcess rp(w, 0.45);
    const auto pi = power_stationary(w, 0.45);
    for (std::size_t a = 0; a < rp.states(); ++a) EXPECT_NEAR(rp.stationary()[a], pi[a], 1e-12) << w;
  }
}

TEST(RowProcess, MiddleRowOfTallGridApproachesStationaryLaw) {
  const ImageDims dims{9, 2};
  const auto law = oracle::grid_law(dims, 0.3);
  std::vector<double> mid(4, 0.0);
  for (std::uint64_t x = 0; x < law.size(); ++x) mid[oracle::row_bits(x, 4, 2)] += law[x];
  const RowProcess rp(2, 0.3);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(mid[a], rp.stationary()[a], 1e-4);
}

TEST(RowProcess, StationaryIsInvariant) {
  const RowProcess rp(4, 0.6);
  for (std::size_t b = 0; b < rp.states(); ++b) {
    double v = 0;
    for (std::size_t a = 0; a < rp.states(); ++a) v += rp.stationary()[a] * rp.transition(a, b);
    EXPECT_NEAR(v, rp.stationary()[b], 1e-14);
  }
}

TEST(RowProcess, InformationIdentities) {
  const RowProcess rp(5, 0.4);
  EXPECT_NEAR(rp.mutual_information(1), rp.row_entropy() - rp.conditional_entropy(), 1e-11);
  EXPECT_NEAR(rp.strip_conditional_entropy(1), rp.two_sided_conditional_entropy(), 1e-11);
  EXPECT_GT(rp.mutual_information(1), rp.mutual_information(2));
  EXPECT_GT(rp.mutual_information(2), rp.mutual_information(3));
  // per-row 2-sided rate grows with strip height
  EXPECT_LT(rp.strip_conditional_entropy(1) / 1, rp.strip_conditional_entropy(2) / 2);
}

TEST(RowProcess, ZeroCouplingIsIndependent) {
  const RowProcess rp(3, 0.0);
  EXPECT_NEAR(rp.entropy_rate(), 1.0, 1e-13);
  EXPECT_NEAR(rp.mutual_information(1), 0.0, 1e-13);
}

TEST(RowProcess, ColumnDivergenceSumIsFullDivergence) {
  Rng rng(2);
  const int n = 4;
  std::vector<double> p(16), q(16);
  double zp = 0, zq = 0;
  for (std::size_t x = 0; x < 16; ++x) {
    zp += p[x] = rng.uniform() + 0.01;
    zq += q[x] = rng.uniform() + 0.01;
  }
  double kl = 0;
  for (std::size_t x = 0; x < 16; ++x) {
    p[x] /= zp;
    q[x] /= zq;
  }
  for (std::size_t x = 0; x < 16; ++x) kl += p[x] * std::log2(p[x] / q[x]);
  EXPECT_NEAR(column_divergence_sum(p, q, n), kl, 1e-13);
}

TEST(RowProcess, RejectsWideStrips) { EXPECT_THROW(RowProcess(9, 0.4), Error); }
