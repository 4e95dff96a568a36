#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pdsim/digital_die.hpp"
#include "pdsim/error.hpp"

using namespace pdsim;

TEST(Mau, RecomputesExactSlice) {
  std::mt19937_64 rng(4);
  const auto a = oracle::random_codes(rng, 1, 64);
  const auto b = oracle::random_codes(rng, 1, 64);
  FlaggedSet flagged;
  const Coordinate c{3, 4, 0};
  flagged.insert(c);
  MauSpec mau;
  mau.macs_per_cycle = 8;
  const auto r = mau_recompute({c}, a.v, b.v, flagged, mau);
  int64_t expect = 0;
  for (std::size_t i = 0; i < 64; ++i) expect += int64_t{a.v[i]} * b.v[i];
  EXPECT_EQ(r.value, expect);
  EXPECT_EQ(r.cycles, 8u);
}

TEST(Mau, CyclesRoundUp) {
  MauSpec mau;
  mau.macs_per_cycle = 64;
  EXPECT_EQ(mau_cycles(1, mau), 1u);
  EXPECT_EQ(mau_cycles(64, mau), 1u);
  EXPECT_EQ(mau_cycles(65, mau), 2u);
  EXPECT_EQ(mau_cycles(0, mau), 0u);
}

TEST(Mau, RejectsUnflaggedCoordinate) {
  const std::vector<int32_t> x{1}, y{1};
  FlaggedSet flagged;
  flagged.insert({0, 0, 0});
  EXPECT_THROW(mau_recompute({{0, 0, 1}}, x, y, flagged, MauSpec{}), Error);
}

TEST(FixedArg, QuantizesQ88) {
  EXPECT_EQ(FixedArg::from_real(-1.0).raw, -256);
  EXPECT_EQ(FixedArg::from_real(-1.0 / 512).raw, 0);  // tie to even
  EXPECT_EQ(FixedArg::from_real(-3.0 / 512).raw, -2);
  EXPECT_EQ(FixedArg::from_real(-1000.0).raw, FixedArg::kMinRaw);
}

TEST(SoftmaxLut, TablesMatchIndependentComputation) {
  const SoftmaxLut lut;
  for (int i = 0; i < 256; ++i) {
    EXPECT_EQ(lut.hi_table()[i], static_cast<int>(std::floor(255.0 * std::exp(-i) + 0.5))) << i;
    EXPECT_EQ(lut.lo_table()[i], static_cast<int>(std::floor(255.0 * std::exp(-i / 256.0) + 0.5)))
        << i;
  }
  EXPECT_EQ(lut.size_bytes(), 512u);
}

TEST(SoftmaxLut, ProductOfTableEntries) {
  const SoftmaxLut lut;
  std::mt19937_64 rng(6);
  for (int t = 0; t < 2000; ++t) {
    const int32_t raw = -static_cast<int32_t>(rng() % 32768);
    const int m = -raw;
    EXPECT_EQ(lut.lut_exp(FixedArg{raw}),
              (lut.hi_table()[m / 256] / 255.0) * (lut.lo_table()[m % 256] / 255.0));
  }
}

TEST(SoftmaxLut, DomainEdges) {
  const SoftmaxLut lut;
  EXPECT_DOUBLE_EQ(lut.lut_exp(0.0), 1.0);
  EXPECT_EQ(lut.lut_exp(-128.0), 0.0);
  EXPECT_EQ(lut.lut_exp(-500.0), 0.0);
  EXPECT_THROW(lut.lut_exp(0.01), Error);
  EXPECT_THROW(lut.lut_exp(FixedArg{1}), Error);
}

TEST(SoftmaxLut, ErrorBoundOverDomain) {
  const SoftmaxLut lut;
  for (int32_t raw = 0; raw >= FixedArg::kMinRaw; --raw) {
    const FixedArg a{raw};
    ASSERT_LE(std::fabs(lut.lut_exp(a) - std::exp(a.value())), 1.0 / 64) << raw;
  }
}

TEST(SoftmaxLut, HexDump) {
  const SoftmaxLut lut;
  std::stringstream ss;
  lut.dump_hex(ss);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(ss, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 512u);
  EXPECT_EQ(lines[0], "ff");
  EXPECT_EQ(lines[1], "5e");
  EXPECT_EQ(lines[256], "ff");
}

TEST(SoftmaxRow, UniformInputGivesUniformOutput) {
  const SoftmaxLut lut;
  const std::vector<double> s(37, 12.0);
  const auto p = softmax_row(s, 0.01, 64, lut);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 37);
}

TEST(SoftmaxRow, SumsToOneAndTracksExact) {
  const SoftmaxLut lut;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(0.0, 40.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(1 + rng() % 300);
    for (double& x : s) x = std::round(d(rng));
    const double scale = 0.02;
    const auto p = softmax_row(s, scale, 64, lut);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    const double mx = *std::max_element(s.begin(), s.end());
    double den = 0.0;
    for (double x : s) den += std::exp((x - mx) * scale / 8.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_NEAR(p[i], std::exp((s[i] - mx) * scale / 8.0) / den, 0.05);
    }
  }
}

TEST(SoftmaxRow, Rejections) {
  const SoftmaxLut lut;
  EXPECT_THROW(softmax_row({}, 1.0, 64, lut), Error);
  const std::vector<double> s{1.0};
  EXPECT_THROW(softmax_row(s, 1.0, 0, lut), Error);
}

TEST(Accumulator, SumsSlicesAndCounts) {
  Accumulator acc(1, 1, 3, 0.5);
  acc.add_lowres({0, 0, 0}, 3, 2.0);
  acc.add_exact({0, 0, 2}, 100);
  acc.add_lowres({0, 0, 1}, -7, 1.0);
  const auto out = acc.finalize();
  EXPECT_DOUBLE_EQ(out.at(0, 0), 6.0 + 100.0 - 7.0);
  EXPECT_DOUBLE_EQ(out.scale, 0.5);
  EXPECT_EQ(acc.lowres_contributions(), 2u);
  EXPECT_EQ(acc.exact_contributions(), 1u);
}

TEST(Accumulator, Rejections) {
  Accumulator acc(2, 2, 2, 1.0);
  acc.add_exact({0, 0, 0}, 1);
  EXPECT_THROW(acc.add_exact({0, 0, 0}, 1), Error);
  EXPECT_THROW(acc.add_exact({2, 0, 0}, 1), Error);
  EXPECT_THROW(acc.finalize(), Error);
}
