#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "tcsnn/error.hpp"
#include "tcsnn/simulator.hpp"

namespace tcsnn {

enum class Layer { Input, Reservoir, Readout };

inline std::string to_string(Layer l) {
  switch (l) {
    case Layer::Input: return "input";
    case Layer::Reservoir: return "reservoir";
    case Layer::Readout: return "readout";
  }
  return "?";
}

inline std::pair<int, int> layer_range(const SimulationTrace& tr, Layer l) {
  switch (l) {
    case Layer::Input: return {0, tr.num_inputs};
    case Layer::Reservoir: return {tr.first_reservoir(), tr.first_reservoir() + tr.reservoir_size};
    case Layer::Readout: return {tr.first_readout(), tr.first_readout() + tr.num_readout};
  }
  return {0, 0};
}

/// Per-node spike weight summed into windows of `bin` trace steps:
/// result[node - first][window], for the nodes of one layer.
inline std::vector<std::vector<std::int64_t>> bin_layer(const SimulationTrace& tr, Layer l, int bin) {
  if (bin < 1) throw ParameterError("bin width must be >= 1");
  const auto [first, last] = layer_range(tr, l);
  const Step windows = compressed_length(tr.timestep_count, bin);
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(last - first),
                                             std::vector<std::int64_t>(static_cast<std::size_t>(windows), 0));
  for (const SpikeRecord& s : tr.spikes)
    if (s.node >= first && s.node < last)
      out[static_cast<std::size_t>(s.node - first)][static_cast<std::size_t>(s.step / bin)] += s.weight;
  return out;
}

/// L1 distance between two equally shaped count matrices divided by the
/// total of `reference` (or by 1 when the reference is empty).
inline double binned_count_distance(const std::vector<std::vector<std::int64_t>>& reference,
                                    const std::vector<std::vector<std::int64_t>>& other) {
  if (reference.size() != other.size()) throw ParameterError("count matrices differ in node count");
  std::int64_t diff = 0, total = 0;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    if (reference[n].size() != other[n].size()) throw ParameterError("count matrices differ in length");
    for (std::size_t j = 0; j < reference[n].size(); ++j) {
      diff += std::llabs(reference[n][j] - other[n][j]);
      total += reference[n][j];
    }
  }
  return static_cast<double>(diff) / static_cast<double>(total > 0 ? total : 1);
}

/// Compares the baseline raster, binned into windows of gamma, with the
/// compressed raster of the same layer. 0 means every window holds the
/// same spike mass in both runs.
inline double binned_raster_distance(const SimulationTrace& baseline, const SimulationTrace& compressed,
                                     int gamma, Layer layer = Layer::Reservoir) {
  if (baseline.num_inputs != compressed.num_inputs ||
      baseline.reservoir_size != compressed.reservoir_size ||
      baseline.num_readout != compressed.num_readout)
    throw ParameterError("traces come from networks with different neuron sets");
  if (gamma < 1) throw ParameterError("gamma must be >= 1");
  if (compressed_length(baseline.timestep_count, gamma) != compressed.timestep_count)
    throw ParameterError("compressed trace length is not ceil(T / gamma)");
  return binned_count_distance(bin_layer(baseline, layer, gamma), bin_layer(compressed, layer, 1));
}

/// Same comparison on a coarser common grid of `window` original steps
/// (a multiple of gamma). Runs at different ratios are only comparable on
/// a shared grid: at the native grid a one-step recurrent delay already
/// shifts spikes across windows.
inline double binned_raster_distance(const SimulationTrace& baseline, const SimulationTrace& compressed,
                                     int gamma, Layer layer, int window) {
  if (gamma < 1) throw ParameterError("gamma must be >= 1");
  if (window < gamma || window % gamma != 0) throw ParameterError("window must be a positive multiple of gamma");
  binned_raster_distance(baseline, compressed, gamma, layer);  // shape checks
  return binned_count_distance(bin_layer(baseline, layer, window), bin_layer(compressed, layer, window / gamma));
}

struct EnergyModel {
  double e_synaptic_op = 1.0;
  double e_neuron_update = 1.0;
  double e_spike = 0.5;
  /// Static energy per timestep; unset means one unit per neuron.
  std::optional<double> p_static;

  void validate() const {
    if (!(e_synaptic_op >= 0 && e_neuron_update >= 0 && e_spike >= 0 && p_static.value_or(0.0) >= 0))
      throw ParameterError("energy coefficients must be >= 0");
  }
};

inline double energy_estimate(const LayerCounters& events, std::uint64_t timesteps, int num_neurons,
                              const EnergyModel& m) {
  m.validate();
  const double p = m.p_static.value_or(static_cast<double>(num_neurons));
  return p * static_cast<double>(timesteps) +
         m.e_synaptic_op * static_cast<double>(events.synaptic_ops) +
         m.e_neuron_update * static_cast<double>(events.neuron_updates) +
         m.e_spike * static_cast<double>(events.spike_events);
}

inline double energy_estimate(const SimulationTrace& tr, const EnergyModel& m) {
  return energy_estimate(tr.totals(), static_cast<std::uint64_t>(tr.timestep_count),
                         tr.reservoir_size + tr.num_readout, m);
}

struct AtelInputs {
  std::int64_t lut_count = 0;
  std::int64_t ff_count = 0;
  double runtime = 0.0;
  double energy = 0.0;
  double accuracy = 0.0;  // percent

  double area() const { return static_cast<double>(ff_count) + 2.0 * static_cast<double>(lut_count); }
};

/// Area x time x energy x loss of `design`, each normalized to `baseline`,
/// in percent. Area is FF + 2 LUT, loss is 100 - accuracy.
inline double atel(const AtelInputs& design, const AtelInputs& baseline) {
  for (const AtelInputs* a : {&design, &baseline}) {
    if (a->lut_count < 0 || a->ff_count < 0 || a->runtime < 0 || a->energy < 0)
      throw ParameterError("resource, runtime and energy figures must be >= 0");
    if (!(a->accuracy >= 0.0 && a->accuracy <= 100.0))
      throw ParameterError("accuracy must be within [0, 100]");
  }
  if (baseline.accuracy >= 100.0) throw ParameterError("baseline accuracy of 100% leaves loss undefined");
  if (baseline.runtime == 0.0) throw ParameterError("baseline runtime is zero");
  if (baseline.energy == 0.0) throw ParameterError("baseline energy is zero");
  if (baseline.area() == 0.0) throw ParameterError("baseline area is zero");
  return design.area() / baseline.area() * (design.runtime / baseline.runtime) *
         (design.energy / baseline.energy) * ((100.0 - design.accuracy) / (100.0 - baseline.accuracy)) * 100.0;
}

struct SpikeStatistics {
  std::uint64_t total_events = 0;
  std::uint64_t total_weight = 0;
  std::vector<std::uint64_t> node_events;
  std::vector<std::uint64_t> node_weight;
  std::uint64_t layer_events[3] = {0, 0, 0};
  std::uint64_t layer_weight[3] = {0, 0, 0};

  std::uint64_t events(Layer l) const { return layer_events[static_cast<int>(l)]; }
  std::uint64_t weight(Layer l) const { return layer_weight[static_cast<int>(l)]; }
};

inline SpikeStatistics spike_statistics(const SimulationTrace& tr) {
  SpikeStatistics s;
  s.node_events.assign(static_cast<std::size_t>(tr.num_nodes()), 0);
  s.node_weight.assign(static_cast<std::size_t>(tr.num_nodes()), 0);
  for (const SpikeRecord& r : tr.spikes) {
    const auto w = static_cast<std::uint64_t>(r.weight);
    ++s.total_events;
    s.total_weight += w;
    ++s.node_events[static_cast<std::size_t>(r.node)];
    s.node_weight[static_cast<std::size_t>(r.node)] += w;
    const int layer = r.node < tr.first_reservoir() ? 0 : r.node < tr.first_readout() ? 1 : 2;
    ++s.layer_events[layer];
    s.layer_weight[layer] += w;
  }
  return s;
}

}  // namespace tcsnn
