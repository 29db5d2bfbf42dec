#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tcsnn/spike.hpp"

using namespace tcsnn;

TEST(BinarySpikeTrain, RejectsInvalidEvents) {
  EXPECT_THROW(BinarySpikeTrain(0, {3, 3}, 10), ParameterError);
  EXPECT_THROW(BinarySpikeTrain(0, {5, 2}, 10), ParameterError);
  EXPECT_THROW(BinarySpikeTrain(0, {10}, 10), ParameterError);
  EXPECT_THROW(BinarySpikeTrain(0, {-1}, 10), ParameterError);
  EXPECT_NO_THROW(BinarySpikeTrain(0, {0, 9}, 10));
}

TEST(BinarySpikeTrain, FromBits) {
  const std::vector<std::uint8_t> bits{1, 0, 1, 1};
  const auto t = BinarySpikeTrain::from_bits(2, bits);
  EXPECT_EQ(t.channel_id(), 2);
  EXPECT_EQ(t.events(), (std::vector<Step>{0, 2, 3}));
  EXPECT_EQ(t.length_steps(), 4);
}

TEST(WeightedSpikeTrain, RejectsInvalidEvents) {
  EXPECT_THROW(WeightedSpikeTrain(0, {{0, 0}}, 4, 2), ParameterError);
  EXPECT_THROW(WeightedSpikeTrain(0, {{1, 1}, {1, 2}}, 4, 2), ParameterError);
  EXPECT_THROW(WeightedSpikeTrain(0, {{4, 1}}, 4, 2), ParameterError);
  EXPECT_THROW(WeightedSpikeTrain(0, {}, 4, 0), ParameterError);
  EXPECT_EQ(WeightedSpikeTrain(0, {{0, 3}, {2, 1}}, 4, 4).total_weight(), 4);
}

TEST(PoissonEncode, ZeroRateGivesEmptyTrain) {
  const std::vector<double> rates{0.0};
  EXPECT_EQ(poisson_encode(rates, 1000, 7)[0].spike_count(), 0u);
}

TEST(PoissonEncode, UnitRateFiresEveryStep) {
  const std::vector<double> rates{1.0};
  const auto t = poisson_encode(rates, 10, 7)[0];
  EXPECT_EQ(t.events(), (std::vector<Step>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(PoissonEncode, CountWithinThreeSigma) {
  const std::vector<double> rates{0.1};
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    const auto t = poisson_encode(rates, 10000, seed)[0];
    // sigma = sqrt(10000 * 0.1 * 0.9) = 30
    EXPECT_NEAR(static_cast<double>(t.spike_count()), 1000.0, 90.0) << "seed " << seed;
  }
}

TEST(PoissonEncode, Reproducible) {
  const std::vector<double> rates{0.05, 0.2, 0.5};
  EXPECT_EQ(poisson_encode(rates, 500, 11), poisson_encode(rates, 500, 11));
  EXPECT_NE(poisson_encode(rates, 500, 11), poisson_encode(rates, 500, 12));
}

TEST(PoissonEncode, ChannelsAreIndependentStreams) {
  const std::vector<double> two{0.3, 0.3};
  const std::vector<double> three{0.3, 0.3, 0.7};
  const auto a = poisson_encode(two, 200, 5);
  const auto b = poisson_encode(three, 200, 5);
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(a[1], b[1]);
  EXPECT_NE(a[0].events(), a[1].events());
}

TEST(PoissonEncode, RejectsBadArguments) {
  const std::vector<double> high{1.5}, low{-0.1}, ok{0.5};
  EXPECT_THROW(poisson_encode(high, 10, 1), ParameterError);
  EXPECT_THROW(poisson_encode(low, 10, 1), ParameterError);
  EXPECT_THROW(poisson_encode(ok, 0, 1), ParameterError);
}

namespace {

SyntheticTaskParams noiseless(std::uint64_t seed) {
  SyntheticTaskParams p;
  p.num_classes = 3;
  p.num_channels = 12;
  p.length_steps = 100;
  p.jitter_steps = 0;
  p.examples_per_class = 4;
  p.deletion_prob = 0.0;
  p.insertion_prob = 0.0;
  p.max_template_rate = 0.3;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(SyntheticTask, NoiselessExamplesEqualTheirTemplate) {
  const auto ds = synthetic_task(noiseless(3));
  ASSERT_EQ(ds.examples.size(), 12u);
  for (const auto& ex : ds.examples) {
    const auto& first = ds.examples[static_cast<std::size_t>(ex.label) * 4];
    EXPECT_EQ(ex.channels, first.channels);
  }
  EXPECT_NE(ds.examples[0].channels, ds.examples[4].channels);
}

TEST(SyntheticTask, CountsAndLayout) {
  const auto ds = synthetic_task(5, 78, 500, 4, 20, 1);
  EXPECT_EQ(ds.examples.size(), 100u);
  EXPECT_EQ(ds.num_classes, 5);
  EXPECT_EQ(ds.num_channels, 78);
  EXPECT_NO_THROW(ds.validate());
  for (std::size_t i = 0; i < ds.examples.size(); ++i) EXPECT_EQ(ds.examples[i].label, static_cast<int>(i / 20));
}

TEST(SyntheticTask, DistinctSeedsGiveDistinctTemplates) {
  const auto a = synthetic_task(noiseless(1));
  const auto b = synthetic_task(noiseless(2));
  EXPECT_NE(a.examples[0].channels, b.examples[0].channels);
}

TEST(SyntheticTask, DeterministicUnderSeed) {
  EXPECT_EQ(synthetic_task(4, 20, 300, 5, 6, 9), synthetic_task(4, 20, 300, 5, 6, 9));
}

TEST(SyntheticTask, NoiseStaysInRange) {
  SyntheticTaskParams p = noiseless(8);
  p.jitter_steps = 10;
  p.deletion_prob = 0.2;
  p.insertion_prob = 0.05;
  const auto ds = synthetic_task(p);
  EXPECT_NO_THROW(ds.validate());
  EXPECT_NE(ds.examples[0].channels, ds.examples[1].channels);
}

TEST(SyntheticTask, RejectsBadParameters) {
  EXPECT_THROW(synthetic_task(1, 10, 100, 0, 1, 1), ParameterError);
  EXPECT_THROW(synthetic_task(2, 0, 100, 0, 1, 1), ParameterError);
  EXPECT_THROW(synthetic_task(2, 10, 100, 100, 1, 1), ParameterError);
  EXPECT_THROW(synthetic_task(2, 10, 100, 150, 1, 1), ParameterError);
  SyntheticTaskParams p = noiseless(1);
  p.deletion_prob = 1.5;
  EXPECT_THROW(synthetic_task(p), ParameterError);
}

TEST(SpikeDataset, ValidateCatchesInconsistency) {
  auto ds = synthetic_task(noiseless(1));
  ds.examples[0].label = 3;
  EXPECT_THROW(ds.validate(), ParameterError);
  ds = synthetic_task(noiseless(1));
  ds.examples[0].channels.pop_back();
  EXPECT_THROW(ds.validate(), ParameterError);
}
