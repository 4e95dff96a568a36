#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pdsim/error.hpp"
#include "pdsim/photonic.hpp"

using namespace pdsim;

TEST(Ddot, ExactWithoutNoise) {
  const std::vector<int32_t> x{1, -2, 3}, y{4, 5, -6};
  EXPECT_DOUBLE_EQ(ddot(x, y), 4 - 10 - 18);
  NoiseSource silent(0.0, 1);
  EXPECT_DOUBLE_EQ(ddot(x, y, &silent), -24.0);
}

TEST(Ddot, LengthMismatch) {
  const std::vector<int32_t> x{1, 2}, y{1};
  EXPECT_THROW(ddot(x, y), Error);
}

TEST(Ddot, NoiseIsSeededAndCentred) {
  const std::vector<int32_t> x{1}, y{1};
  NoiseSource a(0.5, 42), b(0.5, 42);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double va = ddot(x, y, &a);
    EXPECT_EQ(va, ddot(x, y, &b));
    sum += va - 1.0;
    sq += (va - 1.0) * (va - 1.0);
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(sq / n), 0.5, 0.02);
}

TEST(AdcConvert, RoundsHalfAwayFromZero) {
  AdcSpec adc;
  EXPECT_EQ(adc_convert(2.5, adc).code, 3);
  EXPECT_EQ(adc_convert(-2.5, adc).code, -3);
  EXPECT_EQ(adc_convert(2.49, adc).code, 2);
  EXPECT_FALSE(adc_convert(7.0, adc).saturated);
}

TEST(AdcConvert, Saturates) {
  AdcSpec adc;
  const auto hi = adc_convert(7.5, adc);
  EXPECT_EQ(hi.code, 7);
  EXPECT_TRUE(hi.saturated);
  const auto lo = adc_convert(-100.0, adc);
  EXPECT_EQ(lo.code, -7);
  EXPECT_TRUE(lo.saturated);
}

TEST(AdcConvert, MatchesOracleOverRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-40.0, 40.0);
  for (int i = 0; i < 10000; ++i) {
    AdcSpec adc;
    adc.bits = 2 + static_cast<int>(rng() % 7);
    adc.lsb = 0.25 * static_cast<double>(1 + rng() % 8);
    const double x = d(rng);
    EXPECT_DOUBLE_EQ(adc_convert(x, adc).code * adc.lsb, oracle::adc_reconstruct(x, adc.bits, adc.lsb));
  }
}

TEST(Classify, BoundaryIsInclusive) {
  AdcSpec adc;
  CoordinateRegister reg;
  EXPECT_EQ(classify(7.0, adc, {}, &reg).classification, SignalClass::LowRes);
  EXPECT_EQ(classify(-7.0, adc, {}, &reg).classification, SignalClass::LowRes);
  EXPECT_EQ(classify(7.01, adc, {1, 2, 3}, &reg).classification, SignalClass::OverRes);
  EXPECT_EQ(reg.resident(), 1u);
  EXPECT_EQ(reg.entries().front(), (Coordinate{1, 2, 3}));
}

TEST(CoordinateRegister, SpillsWhenFull) {
  CoordinateRegister reg(16, 4);
  EXPECT_EQ(reg.capacity_entries(), 4u);
  for (uint32_t i = 0; i < 4; ++i) EXPECT_EQ(reg.log({i, 0, 0}), 0u);
  EXPECT_EQ(reg.log({4, 0, 0}), 4u);
  EXPECT_EQ(reg.resident(), 1u);
  EXPECT_EQ(reg.take_spilled().size(), 4u);
}

TEST(CoordinateRegisterProperty, NothingIsLost) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    CoordinateRegister reg(4 * (rng() % 20), 4);
    uint64_t collected = 0;
    for (int step = 0; step < 500; ++step) {
      switch (rng() % 8) {
        case 0: collected += reg.drain().size(); break;
        case 1: collected += reg.take_spilled().size(); break;
        default: reg.log({static_cast<uint32_t>(step), 0, 0});
      }
      EXPECT_EQ(reg.logged(), reg.spilled() + reg.drained() + reg.resident());
      EXPECT_LE(reg.resident(), reg.capacity_entries());
      EXPECT_LE(reg.peak(), reg.capacity_entries());
    }
    collected += reg.drain().size() + reg.take_spilled().size();
    EXPECT_EQ(collected, reg.logged());
  }
}

TEST(DptcTileOp, PadsAndMatchesDdot) {
  std::mt19937_64 rng(2);
  const auto a = oracle::random_codes(rng, 10, 20);
  const auto b = oracle::random_codes(rng, 20, 5);
  DptcSpec dptc;
  const auto out = dptc_tile_op(oracle::to_matrix(a), oracle::to_matrix(b), dptc);
  EXPECT_EQ(out.rows, 64u);
  EXPECT_EQ(out.cols, 64u);
  const auto exact = oracle::exact_gemm(a, b);
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c)
      EXPECT_EQ(out.at(r, c), r < 10 && c < 5 ? static_cast<double>(exact[r * 5 + c]) : 0.0);
}

TEST(DptcTileOp, RejectsOversizeTiles) {
  DptcSpec dptc;
  EXPECT_THROW(dptc_tile_op(QuantizedMatrix::zeros(65, 64), QuantizedMatrix::zeros(64, 64), dptc), Error);
  EXPECT_THROW(dptc_tile_op(QuantizedMatrix::zeros(64, 65), QuantizedMatrix::zeros(65, 64), dptc), Error);
  EXPECT_THROW(dptc_tile_op(QuantizedMatrix::zeros(4, 4), QuantizedMatrix::zeros(5, 4), dptc), Error);
}

TEST(ResolutionHistogram, MatchesPartialSumOracle) {
  std::mt19937_64 rng(8);
  std::vector<GemmOperands> work;
  std::vector<int64_t> all;
  for (int g = 0; g < 5; ++g) {
    const auto a = oracle::random_codes(rng, 1 + rng() % 70, 1 + rng() % 200);
    const auto b = oracle::random_codes(rng, a.cols, 1 + rng() % 70);
    work.push_back({oracle::to_matrix(a), oracle::to_matrix(b)});
    const auto p = oracle::partials(a, b);
    all.insert(all.end(), p.begin(), p.end());
  }
  const std::vector<int> bits{2, 4, 8, 12};
  const auto h = resolution_histogram(work, bits, 64);
  ASSERT_EQ(h.total_signals, all.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const int64_t full = (1 << (bits[i] - 1)) - 1;
    uint64_t within = 0;
    for (int64_t p : all) within += std::llabs(p) <= full ? 1 : 0;
    EXPECT_EQ(h.bins[i].within, within);
    if (i > 0) EXPECT_GE(h.bins[i].fraction_in_range, h.bins[i - 1].fraction_in_range);
  }
}

TEST(ResolutionHistogram, EightBitCoversSmallPartials) {
  // |a|,|b| <= 1 over 64 terms keeps every partial within +-64.
  std::mt19937_64 rng(1);
  const auto a = oracle::random_codes(rng, 64, 128, 2);
  const auto b = oracle::random_codes(rng, 128, 64, 2);
  const std::vector<GemmOperands> work{{oracle::to_matrix(a, 2), oracle::to_matrix(b, 2)}};
  const std::vector<int> bits{2, 4, 8};
  EXPECT_DOUBLE_EQ(resolution_histogram(work, bits, 64).bins[2].fraction_in_range, 1.0);
}

TEST(ResolutionHistogram, Rejections) {
  const std::vector<GemmOperands> none;
  const std::vector<int> bits{4};
  EXPECT_THROW(resolution_histogram(none, bits, 64), Error);
  const std::vector<GemmOperands> one{{QuantizedMatrix::zeros(1, 1), QuantizedMatrix::zeros(1, 1)}};
  const std::vector<int> descending{8, 4};
  EXPECT_THROW(resolution_histogram(one, descending, 64), Error);
}
