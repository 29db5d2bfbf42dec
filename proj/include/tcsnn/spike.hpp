#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcsnn/error.hpp"
#include "tcsnn/rng.hpp"

namespace tcsnn {

/// Discrete time index in units of the (implicit, uniform) base step.
using Step = std::int64_t;

/// Uncompressed spike train: at most one spike per step.
class BinarySpikeTrain {
 public:
  BinarySpikeTrain() = default;

  BinarySpikeTrain(int channel_id, std::vector<Step> events, Step length_steps)
      : channel_id_(channel_id), events_(std::move(events)), length_steps_(length_steps) {
    if (length_steps_ < 0) throw ParameterError("train length must be non-negative");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (events_[i] < 0 || events_[i] >= length_steps_)
        throw ParameterError("spike step " + std::to_string(events_[i]) + " outside [0, " +
                             std::to_string(length_steps_) + ")");
      if (i > 0 && events_[i] <= events_[i - 1])
        throw ParameterError("spike steps must be strictly increasing");
    }
  }

  /// Builds a train from a dense 0/1 vector.
  static BinarySpikeTrain from_bits(int channel_id, std::span<const std::uint8_t> bits) {
    std::vector<Step> events;
    for (std::size_t t = 0; t < bits.size(); ++t)
      if (bits[t]) events.push_back(static_cast<Step>(t));
    return BinarySpikeTrain(channel_id, std::move(events), static_cast<Step>(bits.size()));
  }

  int channel_id() const { return channel_id_; }
  const std::vector<Step>& events() const { return events_; }
  Step length_steps() const { return length_steps_; }
  std::size_t spike_count() const { return events_.size(); }

  friend bool operator==(const BinarySpikeTrain&, const BinarySpikeTrain&) = default;

 private:
  int channel_id_ = 0;
  std::vector<Step> events_;
  Step length_steps_ = 0;
};

struct WeightedEvent {
  Step step = 0;
  int weight = 1;
  friend bool operator==(const WeightedEvent&, const WeightedEvent&) = default;
};

/// Compressed spike train; each event carries an integer spike weight.
class WeightedSpikeTrain {
 public:
  WeightedSpikeTrain() = default;

  WeightedSpikeTrain(int channel_id, std::vector<WeightedEvent> events, Step length_steps,
                     int gamma)
      : channel_id_(channel_id), events_(std::move(events)), length_steps_(length_steps),
        gamma_(gamma) {
    if (gamma_ < 1) throw ParameterError("gamma must be >= 1");
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (events_[i].weight < 1) throw ParameterError("spike weights must be >= 1");
      if (events_[i].step < 0 || events_[i].step >= length_steps_)
        throw ParameterError("weighted spike outside train length");
      if (i > 0 && events_[i].step <= events_[i - 1].step)
        throw ParameterError("weighted spike steps must be strictly increasing");
    }
  }

  int channel_id() const { return channel_id_; }
  const std::vector<WeightedEvent>& events() const { return events_; }
  Step length_steps() const { return length_steps_; }
  int gamma() const { return gamma_; }

  std::int64_t total_weight() const {
    std::int64_t sum = 0;
    for (const auto& e : events_) sum += e.weight;
    return sum;
  }

  friend bool operator==(const WeightedSpikeTrain&, const WeightedSpikeTrain&) = default;

 private:
  int channel_id_ = 0;
  std::vector<WeightedEvent> events_;
  Step length_steps_ = 0;
  int gamma_ = 1;
};

/// One multi-channel sample: channel c of `channels` has channel_id c.
struct LabeledExample {
  std::vector<BinarySpikeTrain> channels;
  int label = 0;
  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct SpikeDataset {
  std::vector<LabeledExample> examples;
  int num_channels = 0;
  int num_classes = 0;
  Step length_steps = 0;

  void validate() const {
    if (num_channels < 1 || num_classes < 1 || length_steps < 0)
      throw ParameterError("dataset needs channels >= 1, classes >= 1, steps >= 0");
    for (const auto& ex : examples) {
      if (static_cast<int>(ex.channels.size()) != num_channels)
        throw ParameterError("example channel count differs from dataset");
      if (ex.label < 0 || ex.label >= num_classes)
        throw ParameterError("example label out of range");
      for (std::size_t c = 0; c < ex.channels.size(); ++c) {
        if (ex.channels[c].channel_id() != static_cast<int>(c))
          throw ParameterError("channel ids must match their position");
        if (ex.channels[c].length_steps() != length_steps)
          throw ParameterError("train length differs from dataset length");
      }
    }
  }

  friend bool operator==(const SpikeDataset&, const SpikeDataset&) = default;
};

/// Independent Bernoulli(rate) process per channel and step. Each channel
/// draws from its own derived stream, so adding channels leaves earlier
/// channels unchanged.
inline std::vector<BinarySpikeTrain> poisson_encode(std::span<const double> rates,
                                                    Step length_steps, std::uint64_t seed) {
  if (length_steps < 1) throw ParameterError("length_steps must be >= 1");
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("rate outside [0, 1]");

  std::vector<BinarySpikeTrain> trains;
  trains.reserve(rates.size());
  for (std::size_t c = 0; c < rates.size(); ++c) {
    Rng rng(derive_seed(seed, c));
    std::vector<Step> events;
    for (Step t = 0; t < length_steps; ++t)
      if (bernoulli(rng, rates[c])) events.push_back(t);
    trains.emplace_back(static_cast<int>(c), std::move(events), length_steps);
  }
  return trains;
}

struct SyntheticTaskParams {
  int num_classes = 5;
  int num_channels = 78;
  Step length_steps = 500;
  Step jitter_steps = 4;
  int examples_per_class = 20;
  std::uint64_t seed = 1;
  double deletion_prob = 0.05;
  double insertion_prob = 0.005;
  /// Channel rates are drawn once, uniformly in [0, max_template_rate], and
  /// shared by every class template, so classes differ in spike timing
  /// rather than in per-channel rate.
  double max_template_rate = 0.1;
};

namespace detail {

inline BinarySpikeTrain perturb(const BinarySpikeTrain& tmpl, const SyntheticTaskParams& p,
                                Rng& rng) {
  const Step T = tmpl.length_steps();
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(T), 0);
  for (Step t : tmpl.events()) {
    if (bernoulli(rng, p.deletion_prob)) continue;
    Step moved = t;
    if (p.jitter_steps > 0) moved += uniform_int(rng, -p.jitter_steps, p.jitter_steps);
    moved = std::clamp<Step>(moved, 0, T - 1);
    bits[static_cast<std::size_t>(moved)] = 1;
  }
  if (p.insertion_prob > 0.0) {
    for (Step t = 0; t < T; ++t)
      if (!bits[static_cast<std::size_t>(t)] && bernoulli(rng, p.insertion_prob))
        bits[static_cast<std::size_t>(t)] = 1;
  }
  return BinarySpikeTrain::from_bits(tmpl.channel_id(), bits);
}

}  // namespace detail

/// Class templates are frozen Poisson patterns; examples are noisy copies
/// (jitter, deletion, insertion). Examples are ordered class-major.
inline SpikeDataset synthetic_task(const SyntheticTaskParams& p) {
  if (p.num_classes < 2) throw ParameterError("synthetic task needs >= 2 classes");
  if (p.num_channels < 1) throw ParameterError("synthetic task needs >= 1 channel");
  if (p.length_steps < 1) throw ParameterError("synthetic task needs length_steps >= 1");
  if (p.jitter_steps < 0 || p.jitter_steps >= p.length_steps)
    throw ParameterError("jitter_steps must be in [0, length_steps)");
  if (p.examples_per_class < 0) throw ParameterError("examples_per_class must be >= 0");
  for (double prob : {p.deletion_prob, p.insertion_prob, p.max_template_rate})
    if (!(prob >= 0.0 && prob <= 1.0)) throw ParameterError("probability outside [0, 1]");

  Rng template_rng(derive_seed(p.seed, 0));
  std::vector<double> rates(static_cast<std::size_t>(p.num_channels));
  for (double& r : rates) r = uniform01(template_rng) * p.max_template_rate;
  std::vector<std::vector<BinarySpikeTrain>> templates;
  for (int k = 0; k < p.num_classes; ++k)
    templates.push_back(poisson_encode(rates, p.length_steps, template_rng()));

  SpikeDataset ds;
  ds.num_channels = p.num_channels;
  ds.num_classes = p.num_classes;
  ds.length_steps = p.length_steps;
  Rng noise_rng(derive_seed(p.seed, 1));
  for (int k = 0; k < p.num_classes; ++k) {
    for (int i = 0; i < p.examples_per_class; ++i) {
      LabeledExample ex;
      ex.label = k;
      for (const auto& tmpl : templates[static_cast<std::size_t>(k)])
        ex.channels.push_back(detail::perturb(tmpl, p, noise_rng));
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

/// Convenience overload mirroring the positional argument order.
inline SpikeDataset synthetic_task(int num_classes, int num_channels, Step length_steps,
                                   Step jitter_steps, int examples_per_class,
                                   std::uint64_t seed) {
  SyntheticTaskParams p;
  p.num_classes = num_classes;
  p.num_channels = num_channels;
  p.length_steps = length_steps;
  p.jitter_steps = jitter_steps;
  p.examples_per_class = examples_per_class;
  p.seed = seed;
  return synthetic_task(p);
}

}  // namespace tcsnn
