#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tcsnn/compress.hpp"
#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/parallel.hpp"
#include "tcsnn/rng.hpp"
#include "tcsnn/simulator.hpp"
#include "tcsnn/spike.hpp"

namespace tcsnn {

struct LearningParams {
  /// Weight step per unit of trace, in weight units.
  double eta = 0.0005;
  double tau_trace_nom = 16.0;
  /// The teacher keeps being potentiated until its spike weight leads every
  /// other readout neuron by this much; others are depressed while they are
  /// within this margin of the teacher.
  std::int64_t teacher_margin = 2;
  int epochs = 50;
  double w_min = -4.0;
  double w_max = 4.0;
  /// Round trained weights to signed powers of two (shift-only synapses).
  bool snap_power_of_two = false;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(eta >= 0.0)) throw ParameterError("learning rate must be >= 0");
    if (!(tau_trace_nom > 1.0)) throw ParameterError("trace time constant must be > 1");
    if (teacher_margin < 0) throw ParameterError("teacher margin must be >= 0");
    if (epochs < 0) throw ParameterError("epochs must be >= 0");
    if (!(w_min <= 0.0 && w_max >= 0.0 && w_min < w_max))
      throw ParameterError("weight bounds must satisfy w_min <= 0 <= w_max, w_min < w_max");
  }
};

/// Stratified split: each class contributes round(train_fraction * n_k)
/// of its examples (at least one to each side when it has two or more),
/// chosen by a seeded shuffle.
struct DatasetSplit {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline SplitIndices split_dataset(const SpikeDataset& ds, const DatasetSplit& split) {
  if (ds.examples.empty()) throw ParameterError("dataset is empty");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw ParameterError("train fraction must be in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.examples.size(); ++i)
    by_class[static_cast<std::size_t>(ds.examples[i].label)].push_back(i);

  SplitIndices out;
  Rng rng(derive_seed(split.seed, 7));
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[uniform_index(rng, i)]);
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(split.train_fraction * static_cast<double>(members.size())));
    if (members.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  if (out.train.empty() || out.test.empty())
    throw ParameterError("split leaves the train or test set empty");
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct Classification {
  int label = 0;
  bool no_spike = false;
};

/// Argmax of total spike weight; ties go to the lowest index.
inline Classification classify_counts(std::span<const std::int64_t> weights) {
  Classification c;
  std::int64_t best = 0;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    if (weights[r] > best) {
      best = weights[r];
      c.label = static_cast<int>(r);
    }
  }
  c.no_spike = best == 0;
  return c;
}

inline std::vector<std::int64_t> readout_spike_weights(const SimulationTrace& trace) {
  std::vector<std::int64_t> w(static_cast<std::size_t>(trace.num_readout), 0);
  const int first = trace.first_readout();
  for (const SpikeRecord& s : trace.spikes)
    if (s.node >= first) w[static_cast<std::size_t>(s.node - first)] += s.weight;
  return w;
}

inline Classification classify(const SimulationTrace& trace) {
  const auto w = readout_spike_weights(trace);
  return classify_counts(w);
}

/// State visible to a readout learning rule after each readout step.
struct RuleContext {
  int teacher = 0;
  int gamma = 1;
  int reservoir_size = 0;
  std::span<const int> outputs;             // this step's readout spike weights
  std::span<const std::int64_t> totals;     // cumulative readout spike weights
  std::span<const Raw> trace;               // presynaptic traces, state units
  const FixedPointFormat* format = nullptr;
};

class ReadoutRule {
 public:
  virtual ~ReadoutRule() = default;
  /// Updates the [readout][reservoir] weight matrix in place.
  virtual void update(const RuleContext& ctx, std::span<Raw> weights) const = 0;
};

/// Teacher-driven trace rule. Potentiation of a silent teacher is scaled
/// by gamma: one compressed step stands for gamma original steps in which
/// the teacher would have been potentiated each time. Depression of a
/// firing non-teacher scales with its output spike weight.
class TeacherTraceRule : public ReadoutRule {
 public:
  TeacherTraceRule(const LearningParams& p, const FixedPointFormat& fmt)
      : eta_(fmt.from_real(p.eta)), w_min_(fmt.from_real(p.w_min)), w_max_(fmt.from_real(p.w_max)),
        margin_(p.teacher_margin) {}

  void update(const RuleContext& ctx, std::span<Raw> weights) const override {
    if (eta_ == 0) return;
    const int frac = ctx.format->frac_bits;
    const auto N = static_cast<std::size_t>(ctx.reservoir_size);
    std::int64_t best_other = 0;
    for (std::size_t r = 0; r < ctx.totals.size(); ++r)
      if (static_cast<int>(r) != ctx.teacher) best_other = std::max(best_other, ctx.totals[r]);
    const std::int64_t teacher_total = ctx.totals[static_cast<std::size_t>(ctx.teacher)];

    auto adjust = [&](std::size_t r, Raw scale) {
      Raw* w = weights.data() + r * N;
      for (std::size_t i = 0; i < N; ++i) {
        if (ctx.trace[i] == 0) continue;
        const __int128 delta = (static_cast<__int128>(eta_) * ctx.trace[i] * scale) >> frac;
        const __int128 next = static_cast<__int128>(w[i]) + delta;
        w[i] = static_cast<Raw>(std::clamp<__int128>(next, w_min_, w_max_));
      }
    };

    const auto t = static_cast<std::size_t>(ctx.teacher);
    if (ctx.outputs[t] == 0 && teacher_total < best_other + margin_) adjust(t, ctx.gamma);
    for (std::size_t r = 0; r < ctx.outputs.size(); ++r) {
      if (r == t || ctx.outputs[r] == 0) continue;
      if (ctx.totals[r] + margin_ > teacher_total) adjust(r, -ctx.outputs[r]);
    }
  }

 private:
  Raw eta_, w_min_, w_max_;
  std::int64_t margin_;
};

struct EvaluationResult {
  double accuracy = 0.0;  // percent
  int correct = 0;
  int total = 0;
  int no_spike = 0;
  std::vector<int> predictions;
  LayerCounters input;
  LayerCounters reservoir;
  LayerCounters readout;
  std::uint64_t timesteps = 0;
  std::uint64_t saturations = 0;

  friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

struct TrainingReport {
  std::vector<double> epoch_train_accuracy;  // percent, frozen weights at each example's turn
  EvaluationResult test;
  int epochs_run = 0;
  std::vector<Raw> weights;

  double test_accuracy() const { return test.accuracy; }
  friend bool operator==(const TrainingReport&, const TrainingReport&) = default;
};

namespace detail {

inline double percent(int correct, int total) {
  return total == 0 ? 0.0 : 100.0 * correct / total;
}

/// Teacher spike weight minus the largest other readout spike weight.
inline std::int64_t teacher_lead(std::span<const std::int64_t> totals, int teacher) {
  std::int64_t best_other = std::numeric_limits<std::int64_t>::min();
  for (std::size_t r = 0; r < totals.size(); ++r)
    if (static_cast<int>(r) != teacher) best_other = std::max(best_other, totals[r]);
  if (totals.size() < 2) return totals[static_cast<std::size_t>(teacher)];
  return totals[static_cast<std::size_t>(teacher)] - best_other;
}

inline std::vector<ReservoirActivity> record_activity(const CompiledNetwork& cn, const SpikeDataset& ds,
                                                      std::span<const std::size_t> indices, int workers) {
  std::vector<ReservoirActivity> out(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t j) {
    out[j] = run_reservoir(cn, ds.examples[indices[j]].channels);
  });
  return out;
}

}  // namespace detail

/// Clamps weights into bounds and rounds each non-zero weight to the
/// nearest signed power of two (ties toward the larger magnitude).
inline void snap_to_power_of_two(std::span<Raw> weights, Raw w_min, Raw w_max) {
  for (Raw& w : weights) {
    if (w == 0) continue;
    const auto m = static_cast<std::uint64_t>(w < 0 ? -w : w);
    const std::uint64_t lo = std::bit_floor(m);
    const std::uint64_t snapped = (m - lo) * 2 >= lo ? lo * 2 : lo;
    const Raw v = w < 0 ? -static_cast<Raw>(snapped) : static_cast<Raw>(snapped);
    w = std::clamp(v, w_min, w_max);
  }
}

/// Runs the readout over recorded activity; returns readout spike weights.
inline std::vector<std::int64_t> readout_response(const CompiledNetwork& cn, const ReservoirActivity& act,
                                                  std::span<const Raw> weights, LayerCounters& counters,
                                                  SaturationCounter& sat) {
  ReadoutLayer readout(cn);
  std::vector<std::int64_t> totals(static_cast<std::size_t>(cn.num_readout()), 0);
  for (Step t = 0; t < act.steps; ++t) {
    const auto arrivals = t > 0 ? act.at(t - 1) : std::span<const SourceSpike>{};
    const auto outs = readout.step(arrivals, weights, sat, counters);
    for (std::size_t r = 0; r < totals.size(); ++r) totals[r] += outs[r];
  }
  return totals;
}

/// Inference over the given examples with read-only weights.
inline EvaluationResult evaluate(const CompiledNetwork& cn, std::span<const Raw> weights,
                                 const SpikeDataset& ds, std::span<const std::size_t> indices,
                                 int workers = 1) {
  struct Slot {
    Classification c;
    LayerCounters input, reservoir, readout;
    std::uint64_t steps = 0, saturations = 0;
  };
  std::vector<Slot> slots(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t j) {
    const ReservoirActivity act = run_reservoir(cn, ds.examples[indices[j]].channels);
    Slot& s = slots[j];
    SaturationCounter sat;
    const auto totals = readout_response(cn, act, weights, s.readout, sat);
    s.c = classify_counts(totals);
    s.input = act.input;
    s.reservoir = act.reservoir;
    s.steps = static_cast<std::uint64_t>(act.steps);
    s.saturations = act.saturations + sat.count;
  });

  EvaluationResult res;
  res.total = static_cast<int>(indices.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    const Slot& s = slots[j];
    res.predictions.push_back(s.c.label);
    if (s.c.label == ds.examples[indices[j]].label) ++res.correct;
    if (s.c.no_spike) ++res.no_spike;
    res.input += s.input;
    res.reservoir += s.reservoir;
    res.readout += s.readout;
    res.timesteps += s.steps;
    res.saturations += s.saturations;
  }
  res.accuracy = detail::percent(res.correct, res.total);
  return res;
}

/// Trains the readout weights of `net` in place and evaluates on the test
/// part of the split. Compressed mode trains at net.compression.gamma.
/// Training is sequential over examples; reservoir recording and test
/// evaluation use up to `workers` threads without affecting results.
inline TrainingReport train_readout(Network& net, const SpikeDataset& ds, const DatasetSplit& split,
                                    const LearningParams& params, RunMode mode, int workers = 1,
                                    const ReadoutRule* rule = nullptr) {
  params.validate();
  ds.validate();
  if (ds.num_channels != net.num_inputs)
    throw ParameterError("dataset channel count differs from network inputs");
  if (ds.num_classes > net.num_readout)
    throw ParameterError("dataset has more classes than readout neurons");
  const SplitIndices idx = split_dataset(ds, split);

  const CompiledNetwork cn(net, mode);
  const FixedPointFormat& fmt = net.format;
  const TeacherTraceRule default_rule(params, fmt);
  const ReadoutRule& active = rule ? *rule : default_rule;

  const auto train_activity = detail::record_activity(cn, ds, idx.train, workers);
  const auto N = static_cast<std::size_t>(net.reservoir_size);
  const auto R = static_cast<std::size_t>(net.num_readout);
  const TimeConstantPlan trace_plan = make_schedule(params.tau_trace_nom, cn.gamma());

  TrainingReport report;
  std::vector<Raw> trace(N, 0);
  std::vector<std::int64_t> totals(R, 0);
  std::vector<std::size_t> order(idx.train.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Rng rng(derive_seed(params.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    int correct = 0;
    for (std::size_t j : order) {
      const ReservoirActivity& act = train_activity[j];
      const int label = ds.examples[idx.train[j]].label;

      // Stop-learning gate: a frozen pass decides whether this example
      // still needs teaching. Its outcome is also the reported accuracy.
      {
        LayerCounters unused;
        SaturationCounter unused_sat;
        const auto frozen = readout_response(cn, act, net.readout_weights, unused, unused_sat);
        if (classify_counts(frozen).label == label) ++correct;
        if (detail::teacher_lead(frozen, label) >= std::max<std::int64_t>(params.teacher_margin, 1)) continue;
      }

      ReadoutLayer readout(cn);
      ShiftSchedule trace_shift(trace_plan);
      std::fill(trace.begin(), trace.end(), 0);
      std::fill(totals.begin(), totals.end(), 0);
      SaturationCounter sat;
      LayerCounters scratch;

      for (Step t = 0; t < act.steps; ++t) {
        const int k = trace_shift.next();
        for (Raw& x : trace) x = decay_step(x, k);
        const auto arrivals = t > 0 ? act.at(t - 1) : std::span<const SourceSpike>{};
        for (const SourceSpike& s : arrivals) {
          if (s.source < net.num_inputs) continue;
          Raw& x = trace[static_cast<std::size_t>(s.source - net.num_inputs)];
          x = saturating_add(x, static_cast<Raw>(s.weight) * fmt.one(), fmt, sat);
        }
        const auto outs = readout.step(arrivals, net.readout_weights, sat, scratch);
        for (std::size_t r = 0; r < R; ++r) totals[r] += outs[r];

        RuleContext ctx;
        ctx.teacher = label;
        ctx.gamma = cn.gamma();
        ctx.reservoir_size = net.reservoir_size;
        ctx.outputs = outs;
        ctx.totals = totals;
        ctx.trace = trace;
        ctx.format = &fmt;
        active.update(ctx, net.readout_weights);
      }
    }
    report.epoch_train_accuracy.push_back(detail::percent(correct, static_cast<int>(order.size())));
    ++report.epochs_run;
  }

  if (params.snap_power_of_two)
    snap_to_power_of_two(net.readout_weights, fmt.from_real(params.w_min), fmt.from_real(params.w_max));

  report.weights = net.readout_weights;
  report.test = evaluate(cn, net.readout_weights, ds, idx.test, workers);
  return report;
}

// Weight snapshot: "tcsnn-weights 1", "shape <readout> <reservoir>",
// "frac_bits <f>", then one row of raw fixed-point values per readout neuron.

inline void write_weights(std::ostream& out, std::span<const Raw> weights, int num_readout,
                          int reservoir_size, int frac_bits) {
  if (weights.size() != static_cast<std::size_t>(num_readout) * static_cast<std::size_t>(reservoir_size))
    throw ParameterError("weight count does not match the stated shape");
  out << "tcsnn-weights 1\n";
  out << "shape " << num_readout << ' ' << reservoir_size << '\n';
  out << "frac_bits " << frac_bits << '\n';
  for (int r = 0; r < num_readout; ++r) {
    for (int i = 0; i < reservoir_size; ++i)
      out << (i ? " " : "") << weights[static_cast<std::size_t>(r * reservoir_size + i)];
    out << '\n';
  }
}

inline void write_weights(std::ostream& out, const Network& net) {
  write_weights(out, net.readout_weights, net.num_readout, net.reservoir_size, net.format.frac_bits);
}

/// Loads a snapshot into `net`; shape and format must match.
inline void read_weights(std::istream& in, Network& net) {
  std::size_t lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] != '#') return std::istringstream(line);
    }
    throw FormatError("weights", lineno, "unexpected end of input");
  };
  std::string key;
  int version = 0;
  if (!(next_line() >> key >> version) || key != "tcsnn-weights" || version != 1)
    throw FormatError("weights", lineno, "missing 'tcsnn-weights 1' header");
  int rows = 0, cols = 0;
  if (!(next_line() >> key >> rows >> cols) || key != "shape")
    throw FormatError("weights", lineno, "expected 'shape <readout> <reservoir>'");
  if (rows != net.num_readout || cols != net.reservoir_size)
    throw FormatError("weights", lineno, "shape does not match the network");
  int frac = 0;
  if (!(next_line() >> key >> frac) || key != "frac_bits")
    throw FormatError("weights", lineno, "expected 'frac_bits <n>'");
  if (frac != net.format.frac_bits) throw FormatError("weights", lineno, "fixed-point format mismatch");
  std::vector<Raw> w(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    auto row = next_line();
    for (int i = 0; i < cols; ++i)
      if (!(row >> w[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(i)]))
        throw FormatError("weights", lineno, "row " + std::to_string(r) + " is short");
    std::string extra;
    if (row >> extra) throw FormatError("weights", lineno, "row " + std::to_string(r) + " is too long");
  }
  net.readout_weights = std::move(w);
}

inline void export_weights(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_weights(out, net);
}

inline void import_weights(const std::string& path, Network& net) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path + "'");
  read_weights(in, net);
}

}  // namespace tcsnn
