#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcsnn/compress.hpp"
#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/neuron.hpp"
#include "tcsnn/spike.hpp"

namespace tcsnn {

/// Baseline runs the binary pipeline at gamma = 1; Compressed passes every
/// input channel through compress_train at the network's ratio first.
enum class RunMode { Baseline, Compressed };

struct SpikeRecord {
  std::int32_t node = 0;
  Step step = 0;
  int weight = 0;
  friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

/// Event counters of one layer. synaptic_ops counts deliveries into the
/// layer (one per non-silent presynaptic spike per synapse).
struct LayerCounters {
  std::uint64_t synaptic_ops = 0;
  std::uint64_t neuron_updates = 0;
  std::uint64_t spike_events = 0;
  std::uint64_t spike_weight = 0;

  LayerCounters& operator+=(const LayerCounters& o) {
    synaptic_ops += o.synaptic_ops;
    neuron_updates += o.neuron_updates;
    spike_events += o.spike_events;
    spike_weight += o.spike_weight;
    return *this;
  }
  friend bool operator==(const LayerCounters&, const LayerCounters&) = default;
};

struct SimulationTrace {
  int num_inputs = 0;
  int reservoir_size = 0;
  int num_readout = 0;
  int gamma = 1;
  Step input_length = 0;
  Step timestep_count = 0;
  /// Ordered by (step, node).
  std::vector<SpikeRecord> spikes;
  LayerCounters input;  // ISCU output spikes (no updates, no deliveries)
  LayerCounters reservoir;
  LayerCounters readout;
  std::uint64_t saturations = 0;
  /// Optional membrane record, [step][reservoir..., readout...].
  std::vector<Raw> membrane;

  int num_nodes() const { return num_inputs + reservoir_size + num_readout; }
  int first_reservoir() const { return num_inputs; }
  int first_readout() const { return num_inputs + reservoir_size; }

  /// Reservoir + readout + input spike counters.
  LayerCounters totals() const {
    LayerCounters t = input;
    t += reservoir;
    t += readout;
    return t;
  }

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// Fixed part of a network prepared for one compression ratio: neuron
/// dynamics plus incoming (gather) adjacency of the reservoir.
class CompiledNetwork {
 public:
  CompiledNetwork(const Network& net, RunMode mode)
      : num_inputs_(net.num_inputs), reservoir_size_(net.reservoir_size),
        num_readout_(net.num_readout),
        gamma_(mode == RunMode::Baseline ? 1 : net.compression.gamma), mode_(mode) {
    net.validate();
    dyn_ = NeuronDynamics::make(net.model, net.neuron, net.burst, gamma_, net.format);

    const int sources = num_inputs_ + reservoir_size_;
    std::vector<std::vector<const Synapse*>> incoming(static_cast<std::size_t>(reservoir_size_));
    out_degree_.assign(static_cast<std::size_t>(sources), 0);
    for (const Synapse& s : net.synapses) {
      incoming[static_cast<std::size_t>(s.post - num_inputs_)].push_back(&s);
      ++out_degree_[static_cast<std::size_t>(s.pre)];
    }
    in_offsets_.push_back(0);
    for (auto& list : incoming) {
      for (const Synapse* s : list) {
        in_source_.push_back(s->pre);
        in_shift_.push_back(s->exponent);
        in_sign_.push_back(s->sign);
      }
      in_offsets_.push_back(static_cast<std::int32_t>(in_source_.size()));
    }
  }

  int num_inputs() const { return num_inputs_; }
  int reservoir_size() const { return reservoir_size_; }
  int num_readout() const { return num_readout_; }
  int gamma() const { return gamma_; }
  RunMode mode() const { return mode_; }
  const NeuronDynamics& dynamics() const { return dyn_; }
  const std::vector<std::int32_t>& in_offsets() const { return in_offsets_; }
  const std::vector<std::int32_t>& in_source() const { return in_source_; }
  const std::vector<std::int8_t>& in_shift() const { return in_shift_; }
  const std::vector<std::int8_t>& in_sign() const { return in_sign_; }
  std::uint32_t out_degree(int source) const { return out_degree_[static_cast<std::size_t>(source)]; }

 private:
  int num_inputs_, reservoir_size_, num_readout_;
  int gamma_;
  RunMode mode_;
  NeuronDynamics dyn_;
  std::vector<std::int32_t> in_offsets_;
  std::vector<std::int32_t> in_source_;
  std::vector<std::int8_t> in_shift_;
  std::vector<std::int8_t> in_sign_;
  std::vector<std::uint32_t> out_degree_;
};

/// Spike emitted by an input channel or reservoir neuron. `efficacy` is
/// weight * g(t) in state units (weight * 1.0 for non-bursting models).
struct SourceSpike {
  std::int32_t source = 0;
  std::int32_t weight = 0;
  Raw efficacy = 0;
};

/// Input and reservoir activity of one example, grouped by step.
struct ReservoirActivity {
  int gamma = 1;
  Step input_length = 0;
  Step steps = 0;
  std::vector<SourceSpike> spikes;
  std::vector<std::size_t> step_offsets;  // steps + 1 entries
  LayerCounters input;
  LayerCounters reservoir;
  std::uint64_t saturations = 0;
  std::vector<Raw> membrane;  // [step][reservoir] when recorded

  std::span<const SourceSpike> at(Step t) const {
    return std::span<const SourceSpike>(spikes).subspan(
        step_offsets[static_cast<std::size_t>(t)],
        step_offsets[static_cast<std::size_t>(t) + 1] - step_offsets[static_cast<std::size_t>(t)]);
  }
};

/// Per-step input schedule: (channel, weight) lists. Baseline mode reads
/// binary trains directly; compressed mode goes through the ISCU.
inline std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> input_schedule(
    const std::vector<BinarySpikeTrain>& example, int num_inputs, RunMode mode, int gamma,
    Step& input_length, Step& steps) {
  if (static_cast<int>(example.size()) != num_inputs)
    throw ParameterError("example has " + std::to_string(example.size()) +
                         " channels, network expects " + std::to_string(num_inputs));
  input_length = example.empty() ? 0 : example.front().length_steps();
  for (const auto& tr : example)
    if (tr.length_steps() != input_length) throw ParameterError("channel lengths differ");
  steps = mode == RunMode::Baseline ? input_length : compressed_length(input_length, gamma);

  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> per_step(
      static_cast<std::size_t>(steps));
  for (std::size_t c = 0; c < example.size(); ++c) {
    if (mode == RunMode::Baseline) {
      for (Step t : example[c].events())
        per_step[static_cast<std::size_t>(t)].emplace_back(static_cast<std::int32_t>(c), 1);
    } else {
      const WeightedSpikeTrain w = compress_train(example[c], gamma);
      for (const auto& e : w.events())
        per_step[static_cast<std::size_t>(e.step)].emplace_back(static_cast<std::int32_t>(c), e.weight);
    }
  }
  return per_step;
}

inline ReservoirActivity run_reservoir(const CompiledNetwork& cn,
                                       const std::vector<BinarySpikeTrain>& example,
                                       bool record_membrane = false) {
  const NeuronDynamics& d = cn.dynamics();
  const int I = cn.num_inputs();
  const int N = cn.reservoir_size();
  const bool bursting = is_bursting(d.model);

  ReservoirActivity act;
  act.gamma = cn.gamma();
  const auto schedule = input_schedule(example, I, cn.mode(), cn.gamma(), act.input_length, act.steps);

  std::vector<NeuronState> state(static_cast<std::size_t>(N));
  std::vector<BurstChannel> burst(static_cast<std::size_t>(I + N));
  std::vector<Raw> efficacy(static_cast<std::size_t>(I + N), 0);
  std::vector<std::int32_t> out_weight(static_cast<std::size_t>(N), 0);
  std::vector<Raw> out_efficacy(static_cast<std::size_t>(N), 0);
  std::vector<std::int32_t> in_weight(static_cast<std::size_t>(I), 0);
  DynamicsClock clock(d);
  SaturationCounter sat;
  const auto& offs = cn.in_offsets();
  const auto& src = cn.in_source();
  const auto& shift = cn.in_shift();
  const auto& sign = cn.in_sign();

  act.step_offsets.reserve(static_cast<std::size_t>(act.steps) + 1);
  act.step_offsets.push_back(0);
  if (record_membrane) act.membrane.reserve(static_cast<std::size_t>(act.steps * N));

  for (Step t = 0; t < act.steps; ++t) {
    const StepShifts k = clock.next();

    // Input layer (ISCU outputs) for this step.
    for (const auto& [c, w] : schedule[static_cast<std::size_t>(t)]) in_weight[static_cast<std::size_t>(c)] = w;
    for (int c = 0; c < I; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const int w = in_weight[ci];
      if (bursting) {
        burst_advance(burst[ci], d.burst_mode, d.burst_max_exponent);
        burst_record(burst[ci], w);
      }
      if (w == 0) {
        efficacy[ci] = 0;
        continue;
      }
      efficacy[ci] = static_cast<Raw>(w) * d.burst_factor[static_cast<std::size_t>(burst[ci].exponent)];
      act.spikes.push_back({c, w, efficacy[ci]});
      ++act.input.spike_events;
      act.input.spike_weight += static_cast<std::uint64_t>(w);
      act.reservoir.synaptic_ops += cn.out_degree(c);
      in_weight[ci] = 0;
    }

    // Reservoir: gather from inputs at t and reservoir outputs of t - 1.
    for (int n = 0; n < N; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      Raw acc = 0;
      for (std::int32_t j = offs[ni]; j < offs[ni + 1]; ++j) {
        const auto ji = static_cast<std::size_t>(j);
        acc += sign[ji] * (efficacy[static_cast<std::size_t>(src[ji])] << shift[ji]);
      }
      const Raw input = saturate(acc, d.fmt, sat);
      const Raw current = synapse_step(state[ni], input, d, k, sat);
      BurstChannel& self = burst[static_cast<std::size_t>(I) + ni];
      if (bursting) burst_advance(self, d.burst_mode, d.burst_max_exponent);
      const int out = neuron_fire_step(state[ni], current, d, k, self.exponent, sat);
      if (bursting) burst_record(self, out);
      out_weight[ni] = out;
      out_efficacy[ni] = out == 0 ? 0 : static_cast<Raw>(out) * d.burst_factor[static_cast<std::size_t>(self.exponent)];
      if (record_membrane) act.membrane.push_back(state[ni].u);
    }
    act.reservoir.neuron_updates += static_cast<std::uint64_t>(N);

    for (int n = 0; n < N; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      efficacy[static_cast<std::size_t>(I) + ni] = out_efficacy[ni];
      if (out_weight[ni] == 0) continue;
      act.spikes.push_back({I + n, out_weight[ni], out_efficacy[ni]});
      ++act.reservoir.spike_events;
      act.reservoir.spike_weight += static_cast<std::uint64_t>(out_weight[ni]);
      act.reservoir.synaptic_ops += cn.out_degree(I + n);
    }
    act.step_offsets.push_back(act.spikes.size());
  }
  act.saturations = sat.count;
  return act;
}

/// Readout layer stepped one timestep at a time so learning rules can
/// observe and modify weights between steps.
class ReadoutLayer {
 public:
  explicit ReadoutLayer(const CompiledNetwork& cn)
      : d_(&cn.dynamics()), num_inputs_(cn.num_inputs()), reservoir_size_(cn.reservoir_size()),
        num_readout_(cn.num_readout()) {
    reset();
  }

  void reset() {
    state_.assign(static_cast<std::size_t>(num_readout_), {});
    burst_.assign(static_cast<std::size_t>(num_readout_), {});
    outputs_.assign(static_cast<std::size_t>(num_readout_), 0);
    efficacy_.assign(static_cast<std::size_t>(reservoir_size_), 0);
    clock_ = DynamicsClock(*d_);
  }

  /// Delivers `arrivals` (reservoir spikes of the previous step; other
  /// sources are ignored) and advances every readout neuron one step.
  std::span<const int> step(std::span<const SourceSpike> arrivals, std::span<const Raw> weights,
                            SaturationCounter& sat, LayerCounters& counters) {
    const StepShifts k = clock_.next();
    std::fill(efficacy_.begin(), efficacy_.end(), 0);
    for (const SourceSpike& s : arrivals) {
      if (s.source < num_inputs_) continue;
      efficacy_[static_cast<std::size_t>(s.source - num_inputs_)] = s.efficacy;
      counters.synaptic_ops += static_cast<std::uint64_t>(num_readout_);
    }
    const bool bursting = is_bursting(d_->model);
    for (int r = 0; r < num_readout_; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      const Raw* w = weights.data() + ri * static_cast<std::size_t>(reservoir_size_);
      __int128 acc = 0;
      for (int i = 0; i < reservoir_size_; ++i)
        acc += static_cast<__int128>(w[i]) * efficacy_[static_cast<std::size_t>(i)];
      const Raw input = saturate(acc >> d_->fmt.frac_bits, d_->fmt, sat);
      const Raw current = synapse_step(state_[ri], input, *d_, k, sat);
      if (bursting) burst_advance(burst_[ri], d_->burst_mode, d_->burst_max_exponent);
      const int out = neuron_fire_step(state_[ri], current, *d_, k, burst_[ri].exponent, sat);
      if (bursting) burst_record(burst_[ri], out);
      outputs_[ri] = out;
      if (out > 0) {
        ++counters.spike_events;
        counters.spike_weight += static_cast<std::uint64_t>(out);
      }
    }
    counters.neuron_updates += static_cast<std::uint64_t>(num_readout_);
    return outputs_;
  }

  const std::vector<NeuronState>& states() const { return state_; }

 private:
  const NeuronDynamics* d_;
  int num_inputs_, reservoir_size_, num_readout_;
  std::vector<NeuronState> state_;
  std::vector<BurstChannel> burst_;
  std::vector<int> outputs_;
  std::vector<Raw> efficacy_;
  DynamicsClock clock_;
};

struct SimulateOptions {
  bool record_membrane = false;
};

/// Runs the readout over a recorded reservoir activity and assembles the
/// full trace. Readout never feeds back, so this equals a joint run.
inline SimulationTrace assemble_trace(const CompiledNetwork& cn, const ReservoirActivity& act,
                                      std::span<const Raw> readout_weights,
                                      const SimulateOptions& opt = {}) {
  SimulationTrace tr;
  tr.num_inputs = cn.num_inputs();
  tr.reservoir_size = cn.reservoir_size();
  tr.num_readout = cn.num_readout();
  tr.gamma = act.gamma;
  tr.input_length = act.input_length;
  tr.timestep_count = act.steps;
  tr.input = act.input;
  tr.reservoir = act.reservoir;
  tr.spikes.reserve(act.spikes.size());

  ReadoutLayer readout(cn);
  SaturationCounter sat;
  const int first_readout = cn.num_inputs() + cn.reservoir_size();
  const std::size_t per_step = static_cast<std::size_t>(cn.reservoir_size() + cn.num_readout());
  if (opt.record_membrane) tr.membrane.reserve(static_cast<std::size_t>(act.steps) * per_step);

  for (Step t = 0; t < act.steps; ++t) {
    for (const SourceSpike& s : act.at(t)) tr.spikes.push_back({s.source, t, s.weight});
    const auto arrivals = t > 0 ? act.at(t - 1) : std::span<const SourceSpike>{};
    const auto outs = readout.step(arrivals, readout_weights, sat, tr.readout);
    for (int r = 0; r < cn.num_readout(); ++r)
      if (outs[static_cast<std::size_t>(r)] > 0)
        tr.spikes.push_back({first_readout + r, t, outs[static_cast<std::size_t>(r)]});
    if (opt.record_membrane) {
      const auto base = act.membrane.begin() + static_cast<std::ptrdiff_t>(t * cn.reservoir_size());
      tr.membrane.insert(tr.membrane.end(), base, base + cn.reservoir_size());
      for (const auto& s : readout.states()) tr.membrane.push_back(s.u);
    }
  }
  tr.saturations = act.saturations + sat.count;
  return tr;
}

inline SimulationTrace simulate(const CompiledNetwork& cn, const Network& net,
                                const std::vector<BinarySpikeTrain>& example,
                                const SimulateOptions& opt = {}) {
  const ReservoirActivity act = run_reservoir(cn, example, opt.record_membrane);
  return assemble_trace(cn, act, net.readout_weights, opt);
}

/// Simulates one example. Compressed mode uses net.compression.gamma.
inline SimulationTrace simulate(const Network& net, const std::vector<BinarySpikeTrain>& example,
                                RunMode mode, const SimulateOptions& opt = {}) {
  const CompiledNetwork cn(net, mode);
  return simulate(cn, net, example, opt);
}

/// Accelerator with a global compression controller: examples are run
/// step by step and the ratio may only be reprogrammed between examples.
class Accelerator {
 public:
  explicit Accelerator(Network net) : net_(std::move(net)) { net_.validate(); }

  const Network& network() const { return net_; }
  Network& network() { return net_; }
  bool in_example() const { return pending_.has_value(); }

  void set_compression_ratio(int gamma) {
    if (in_example()) throw StateError("compression ratio cannot change mid-example");
    net_.set_compression_ratio(gamma);
  }

  void begin_example(std::vector<BinarySpikeTrain> example) {
    if (in_example()) throw StateError("an example is already running");
    pending_ = std::move(example);
  }

  SimulationTrace finish_example(const SimulateOptions& opt = {}) {
    if (!in_example()) throw StateError("no example is running");
    auto example = std::move(*pending_);
    pending_.reset();
    return simulate(net_, example, RunMode::Compressed, opt);
  }

  SimulationTrace run(const std::vector<BinarySpikeTrain>& example, const SimulateOptions& opt = {}) {
    begin_example(example);
    return finish_example(opt);
  }

 private:
  Network net_;
  std::optional<std::vector<BinarySpikeTrain>> pending_;
};

}  // namespace tcsnn
