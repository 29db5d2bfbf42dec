#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "tcsnn/fixed_point.hpp"

using namespace tcsnn;

TEST(FixedPointFormat, DefaultIsSignedQ16) {
  const FixedPointFormat f;
  EXPECT_EQ(f.total_bits, 32);
  EXPECT_EQ(f.frac_bits, 16);
  EXPECT_TRUE(f.is_signed);
  EXPECT_EQ(f.one(), 65536);
  EXPECT_EQ(f.max_raw(), 2147483647);
  EXPECT_EQ(f.min_raw(), -2147483648LL);
}

TEST(FixedPointFormat, RejectsBadWidths) {
  EXPECT_THROW((FixedPointFormat{32, 32, true}.validate()), ParameterError);
  EXPECT_THROW((FixedPointFormat{65, 16, true}.validate()), ParameterError);
  EXPECT_THROW((FixedPointFormat{16, -1, true}.validate()), ParameterError);
  EXPECT_NO_THROW((FixedPointFormat{64, 0, true}.validate()));
  EXPECT_NO_THROW((FixedPointFormat{16, 15, false}.validate()));
}

TEST(FixedPointFormat, UnsignedRange) {
  const FixedPointFormat f{8, 4, false};
  EXPECT_EQ(f.min_raw(), 0);
  EXPECT_EQ(f.max_raw(), 255);
}

TEST(FixedPointFormat, SixtyFourBitLimits) {
  const FixedPointFormat f{64, 16, true};
  EXPECT_EQ(f.max_raw(), std::numeric_limits<Raw>::max());
  EXPECT_EQ(f.min_raw(), std::numeric_limits<Raw>::min());
}

TEST(FixedPointFormat, RoundTripAndRounding) {
  const FixedPointFormat f;
  EXPECT_EQ(f.from_real(1.5), 98304);
  EXPECT_DOUBLE_EQ(f.to_real(98304), 1.5);
  EXPECT_EQ(f.from_real(-0.25), -16384);
  // Halfway cases round to even in the default rounding mode.
  EXPECT_EQ(f.from_real(std::ldexp(0.5, -16)), 0);
  EXPECT_EQ(f.from_real(std::ldexp(1.5, -16)), 2);
}

TEST(FixedPointFormat, FromRealClamps) {
  const FixedPointFormat f{16, 8, true};
  EXPECT_EQ(f.from_real(1e9), f.max_raw());
  EXPECT_EQ(f.from_real(-1e9), f.min_raw());
  EXPECT_THROW(f.from_real(std::nan("")), ParameterError);
}

TEST(Saturation, CountsEveryClamp) {
  const FixedPointFormat f{16, 8, true};
  SaturationCounter sat;
  EXPECT_EQ(saturating_add(f.max_raw(), 1, f, sat), f.max_raw());
  EXPECT_EQ(saturating_add(f.min_raw(), -1, f, sat), f.min_raw());
  EXPECT_EQ(sat.count, 2u);
  EXPECT_EQ(saturating_add(100, -50, f, sat), 50);
  EXPECT_EQ(sat.count, 2u);
}

TEST(Saturation, NeverWrapsAt64Bits) {
  const FixedPointFormat f{64, 16, true};
  SaturationCounter sat;
  EXPECT_EQ(saturating_add(std::numeric_limits<Raw>::max(), 5, f, sat), std::numeric_limits<Raw>::max());
  EXPECT_EQ(sat.count, 1u);
}

TEST(DecayStep, Examples) {
  EXPECT_EQ(decay_step(0, 3), 0);
  EXPECT_EQ(decay_step(256, 3), 224);
  EXPECT_EQ(decay_step(256, 0), 0);
}

TEST(DecayStep, ArithmeticShiftOnNegatives) {
  // -256 >> 3 = -32, -1 >> k = -1, so negative values decay toward zero
  // but stick at -1 like positives stick below 2^k.
  EXPECT_EQ(decay_step(-256, 3), -224);
  EXPECT_EQ(decay_step(-1, 4), 0);
  EXPECT_EQ(decay_step(7, 3), 7);
}

TEST(DecayStep, HugeShiftIsIdentityForPositives) {
  EXPECT_EQ(decay_step(12345, 63), 12345);
  EXPECT_EQ(decay_step(12345, 200), 12345);
  EXPECT_EQ(decay_step(-12345, 63), -12344);
}

TEST(DecayStep, RejectsNegativeShift) {
  EXPECT_THROW(decay_step(1, -1), ParameterError);
}

TEST(DecayStep, MatchesRealFactorUpToTruncation) {
  for (int k = 1; k < 12; ++k) {
    for (Raw x : {Raw{1000}, Raw{65536}, Raw{123456789}, Raw{-98765}}) {
      const double exact = static_cast<double>(x) * (1.0 - std::ldexp(1.0, -k));
      EXPECT_LE(std::abs(static_cast<double>(decay_step(x, k)) - exact), 1.0) << "x=" << x << " k=" << k;
    }
  }
}

TEST(Gain, AppliesWithFloorRounding) {
  const FixedPointFormat f;
  SaturationCounter sat;
  const Gain half = Gain::from_real(0.5);
  EXPECT_EQ(half.apply(f.from_real(3.0), f, sat), f.from_real(1.5));
  EXPECT_EQ(half.apply(3, f, sat), 1);
  EXPECT_EQ(half.apply(-3, f, sat), -2);
  EXPECT_DOUBLE_EQ(Gain::from_real(0.03125).to_real(), 0.03125);
  EXPECT_EQ(sat.count, 0u);
}

TEST(Gain, SaturatesLargeProducts) {
  const FixedPointFormat f{16, 8, true};
  SaturationCounter sat;
  EXPECT_EQ(Gain::from_real(1000.0).apply(f.max_raw(), f, sat), f.max_raw());
  EXPECT_EQ(sat.count, 1u);
}

TEST(FixedMul, ProductInSameFormat) {
  const FixedPointFormat f;
  SaturationCounter sat;
  EXPECT_EQ(fixed_mul(f.from_real(1.5), f.from_real(-2.0), f, sat), f.from_real(-3.0));
  EXPECT_EQ(fixed_mul(f.from_real(0.5), f.from_real(0.5), f, sat), f.from_real(0.25));
  EXPECT_EQ(sat.count, 0u);
}
