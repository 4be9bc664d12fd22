#include <gtest/gtest.h>

#include "rcmi/context_table.hpp"

using namespace rcmi;

TEST(ContextTable, ContextBitsFollowLayout) {
  // rows: + - +   /   - + ?
  BinaryImage img({2, 3});
  img(0, 0) = 1;
  img(0, 2) = 1;
  img(1, 1) = 1;
  auto at = [&](int r, int c) { return img(r, c); };
  // (1, 1): left = -1, above cols 1, 2 = -1, +1 -> bits 0b100
  EXPECT_EQ(context_index(at, 3, 1, 1, 3), 0b100u);
  // (1, 2): left = +1, above col 2 = +1, col 3 pads -1 -> 0b011
  EXPECT_EQ(context_index(at, 3, 1, 2, 3), 0b011u);
  // first row and first column read the pad
  EXPECT_EQ(context_index(at, 3, 0, 0, 4), 0u);
  // c = 1 is the left pixel only
  EXPECT_EQ(context_index(at, 3, 0, 1, 1), 1u);
}

TEST(ContextTable, LaplaceSmoothing) {
  ContextTable t(2);
  EXPECT_DOUBLE_EQ(t.p_plus(0), 0.5);
  t.add(1, 1);
  t.add(1, 1);
  t.add(1, -1);
  EXPECT_DOUBLE_EQ(t.p_plus(1), 3.0 / 5.0);
}

TEST(ContextTable, TrainingCountsEveryPixel) {
  GibbsSettings s;
  s.burn_in_sweeps = 3;
  const auto corpus = gibbs_sample({9, 11}, {0.4}, s, 2);
  const auto t = train_context_table(corpus, 4);
  std::uint64_t total = 0;
  for (auto v : t.raw()) total += v;
  EXPECT_EQ(total, 2u * 9u * 11u);
}

TEST(ContextTable, SerializationRoundTrip) {
  ContextTable t(3);
  for (std::size_t ctx = 0; ctx < 8; ++ctx) t.add(ctx, ctx % 2 ? 1 : -1);
  t.raw()[5] = (std::uint64_t(1) << 40) + 7;
  const auto bytes = serialize_table(t);
  EXPECT_EQ(bytes.size(), 1u + 16u * 8u);
  std::size_t pos = 0;
  EXPECT_EQ(deserialize_table(bytes, pos), t);
  EXPECT_EQ(pos, bytes.size());
  std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
  pos = 0;
  EXPECT_THROW(deserialize_table(cut, pos), Error);
}

TEST(ContextTable, RejectsBadSize) {
  EXPECT_THROW(ContextTable(0), Error);
  EXPECT_THROW(ContextTable(17), Error);
}
