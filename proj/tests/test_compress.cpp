#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tcsnn/compress.hpp"
#include "tcsnn/rng.hpp"

using namespace tcsnn;

namespace {

// Independent oracle: dense window sums over the bit vector.
std::vector<int> bin_bits(const std::vector<std::uint8_t>& bits, int gamma) {
  std::vector<int> out((bits.size() + static_cast<std::size_t>(gamma) - 1) / static_cast<std::size_t>(gamma), 0);
  for (std::size_t t = 0; t < bits.size(); ++t) out[t / static_cast<std::size_t>(gamma)] += bits[t];
  return out;
}

std::vector<int> densify(const WeightedSpikeTrain& w) {
  std::vector<int> out(static_cast<std::size_t>(w.length_steps()), 0);
  for (const auto& e : w.events()) out[static_cast<std::size_t>(e.step)] = e.weight;
  return out;
}

}  // namespace

TEST(CompressTrain, WindowSum) {
  const std::vector<std::uint8_t> bits{1, 0, 1, 1};
  const auto w = compress_train(BinarySpikeTrain::from_bits(0, bits), 4);
  ASSERT_EQ(w.events().size(), 1u);
  EXPECT_EQ(w.events()[0], (WeightedEvent{0, 3}));
  EXPECT_EQ(w.length_steps(), 1);
  EXPECT_EQ(w.gamma(), 4);
}

TEST(CompressTrain, IdentityAtGammaOne) {
  const BinarySpikeTrain t(5, {0, 3, 4, 9}, 12);
  const auto w = compress_train(t, 1);
  EXPECT_EQ(w.channel_id(), 5);
  EXPECT_EQ(w.length_steps(), 12);
  ASSERT_EQ(w.events().size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(w.events()[i], (WeightedEvent{t.events()[i], 1}));
}

TEST(CompressTrain, PartialLastWindowKeepsSpikes) {
  const BinarySpikeTrain t(0, {8, 9}, 10);
  const auto w = compress_train(t, 4);
  EXPECT_EQ(w.length_steps(), 3);
  ASSERT_EQ(w.events().size(), 1u);
  EXPECT_EQ(w.events()[0], (WeightedEvent{2, 2}));
}

TEST(CompressTrain, EmptyWindowsOmitted) {
  const BinarySpikeTrain t(0, {0, 15}, 16);
  const auto w = compress_train(t, 2);
  EXPECT_EQ(w.events(), (std::vector<WeightedEvent>{{0, 1}, {7, 1}}));
}

TEST(CompressTrain, RejectsBadGamma) {
  EXPECT_THROW(compress_train(BinarySpikeTrain(0, {}, 4), 0), ParameterError);
}

TEST(CompressTrain, ConservationAndBinningOracle) {
  Rng rng(derive_seed(2024, 0));
  for (int trial = 0; trial < 10000; ++trial) {
    const auto len = static_cast<std::size_t>(uniform_int(rng, 1, 2048));
    const double density = uniform01(rng);
    std::vector<std::uint8_t> bits(len);
    for (auto& b : bits) b = bernoulli(rng, density) ? 1 : 0;
    const int gamma = static_cast<int>(uniform_int(rng, 1, 16));
    const auto w = compress_train(BinarySpikeTrain::from_bits(0, bits), gamma);
    const auto expected = bin_bits(bits, gamma);
    ASSERT_EQ(densify(w), expected) << "trial " << trial;
    ASSERT_EQ(w.total_weight(), std::accumulate(bits.begin(), bits.end(), std::int64_t{0}));
    for (const auto& e : w.events()) ASSERT_LE(e.weight, gamma);
  }
}

TEST(CompressedLength, Ceil) {
  EXPECT_EQ(compressed_length(500, 16), 32);
  EXPECT_EQ(compressed_length(512, 16), 32);
  EXPECT_EQ(compressed_length(513, 16), 33);
  EXPECT_EQ(compressed_length(1, 16), 1);
  EXPECT_EQ(compressed_length(0, 4), 0);
}

TEST(ScaleTimeConstant, Examples) {
  EXPECT_DOUBLE_EQ(scale_time_constant(16.0, 1), 16.0);
  EXPECT_NEAR(scale_time_constant(16.0, 2), 256.0 / 31.0, 1e-12);
  const double exact = scale_time_constant(16.0, 4);
  EXPECT_NEAR(exact, 4.3951, 5e-5);
  const double linear_error = std::abs(16.0 / 4.0 - exact) / exact;
  EXPECT_NEAR(linear_error, 0.090, 0.002);
}

TEST(ScaleTimeConstant, IdentityHoldsOnGrid) {
  for (double tau = 2; tau <= 4096; tau *= 2) {
    for (int g = 1; g <= 16; ++g) {
      const double c = scale_time_constant(tau, g);
      EXPECT_LE(std::abs((1.0 - 1.0 / c) - std::pow(1.0 - 1.0 / tau, g)), 1e-12) << tau << " " << g;
      EXPECT_GT(c, 1.0);
      EXPECT_LE(c, tau);
    }
  }
}

TEST(ScaleTimeConstant, StrictlyDecreasingInGamma) {
  for (double tau : {1.5, 2.0, 5.0, 16.0, 100.0, 4096.0}) {
    double prev = scale_time_constant(tau, 1);
    for (int g = 2; g <= 16; ++g) {
      const double c = scale_time_constant(tau, g);
      EXPECT_LT(c, prev) << tau << " " << g;
      prev = c;
    }
  }
}

TEST(ScaleTimeConstant, RejectsInvalid) {
  EXPECT_THROW(scale_time_constant(1.0, 2), ParameterError);
  EXPECT_THROW(scale_time_constant(0.5, 2), ParameterError);
  EXPECT_THROW(scale_time_constant(4.0, 0), ParameterError);
}

TEST(MakeSchedule, PowerOfTwoIsConstant) {
  const auto p = make_schedule(8.0);
  EXPECT_TRUE(p.constant());
  EXPECT_EQ(p.k_low, 3);
  EXPECT_EQ(schedule_shifts(p, 6), (std::vector<int>(6, 3)));
  EXPECT_EQ(p.period(), 1);
  EXPECT_TRUE(make_schedule(1.0).constant());
  EXPECT_EQ(make_schedule(1.0).k_low, 0);
}

TEST(MakeSchedule, FiveTogglesFourAndEight) {
  const auto p = make_schedule(5.0);
  EXPECT_EQ(p.k_low, 2);
  EXPECT_EQ(p.k_high, 3);
  EXPECT_EQ(p.period(), 4);
  const auto ks = schedule_shifts(p, 8);
  EXPECT_EQ(ks, (std::vector<int>{2, 2, 2, 3, 2, 2, 2, 3}));
  double mean = 0;
  for (int i = 0; i < 4; ++i) mean += std::ldexp(1.0, ks[static_cast<std::size_t>(i)]);
  EXPECT_DOUBLE_EQ(mean / 4, 5.0);
}

TEST(MakeSchedule, TenTogglesEightAndSixteen) {
  const auto p = make_schedule(10.0);
  EXPECT_EQ(p.period(), 4);
  EXPECT_EQ(schedule_shifts(p, 4), (std::vector<int>{3, 3, 3, 4}));
}

TEST(MakeSchedule, LongRunMeanOnGrid) {
  for (double target = 2.0; target <= 16.0; target += 0.25) {
    const auto ks = schedule_shifts(make_schedule(target), 1024);
    double sum = 0;
    for (int k : ks) sum += std::ldexp(1.0, k);
    EXPECT_NEAR(sum / 1024.0, target, 1e-6) << target;
  }
}

TEST(MakeSchedule, MeanExactOverWholePeriods) {
  for (double target : {3.0, 5.0, 6.5, 10.0, 12.25, 13.75}) {
    const auto p = make_schedule(target);
    const auto period = p.period();
    ASSERT_TRUE(period.has_value()) << target;
    for (int reps : {1, 3, 7}) {
      const auto ks = schedule_shifts(p, static_cast<std::size_t>(*period * reps));
      double sum = 0;
      for (int k : ks) sum += std::ldexp(1.0, k);
      EXPECT_NEAR(sum / static_cast<double>(ks.size()), target, 1e-9);
    }
  }
}

TEST(MakeSchedule, BracketsTarget) {
  for (double target = 1.0; target < 5000; target *= 1.37) {
    const auto p = make_schedule(target);
    EXPECT_LE(p.low(), target);
    EXPECT_GE(p.high(), target);
    EXPECT_TRUE(p.k_high == p.k_low || p.k_high == p.k_low + 1);
  }
}

TEST(MakeSchedule, CompressedPlanKeepsNominal) {
  const auto p = make_schedule(16.0, 4);
  EXPECT_EQ(p.tau_nom, 16.0);
  EXPECT_EQ(p.gamma, 4);
  EXPECT_DOUBLE_EQ(p.tau_nom_c_exact, scale_time_constant(16.0, 4));
  EXPECT_EQ(p.k_low, 2);
  EXPECT_EQ(p.k_high, 3);
}

TEST(MakeSchedule, RejectsInvalid) {
  EXPECT_THROW(make_schedule(0.5), ParameterError);
  EXPECT_THROW(make_schedule(std::nan("")), ParameterError);
  EXPECT_THROW(make_schedule(INFINITY), ParameterError);
}

TEST(ShiftSchedule, ResetRestartsPattern) {
  ShiftSchedule s(make_schedule(5.0));
  std::vector<int> a, b;
  for (int i = 0; i < 6; ++i) a.push_back(s.next());
  s.reset();
  for (int i = 0; i < 6; ++i) b.push_back(s.next());
  EXPECT_EQ(a, b);
}

// Shifter decay over the tau=5 schedule against a real-valued run of the
// same schedule (factor 1 - 2^-k per step).
TEST(DecayStep, TracksRealValuedScheduleDecay) {
  const auto ks = schedule_shifts(make_schedule(5.0), 1000);
  Raw x = Raw{1} << 40;
  double real = std::ldexp(1.0, 40);
  for (std::size_t t = 0; t < ks.size(); ++t) {
    x = decay_step(x, ks[t]);
    real *= 1.0 - std::ldexp(1.0, -ks[t]);
    if (real > 1e6) {
      ASSERT_NEAR(static_cast<double>(x) / real, 1.0, 0.02) << "step " << t;
    }
  }
}

// The arithmetic-mean schedule has the requested mean time constant but a
// stronger per-period decay than a true (1 - 1/5) leak.
TEST(DecayStep, ArithmeticMeanScheduleDecaysFasterThanTarget) {
  const auto ks = schedule_shifts(make_schedule(5.0), 4);
  double per_period = 1.0;
  for (int k : ks) per_period *= 1.0 - std::ldexp(1.0, -k);
  EXPECT_NEAR(per_period, 0.369140625, 1e-12);
  EXPECT_LT(per_period, std::pow(0.8, 4));
}
