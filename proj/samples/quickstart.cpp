// Builds the reference reservoir, runs one example uncompressed and at
// 8:1, and prints timestep, event and energy figures for both runs.

#include <cstdio>

#include "tcsnn/tcsnn.hpp"

int main() {
  using namespace tcsnn;

  const SpikeDataset ds = synthetic_task(reference_task_params(1));
  const auto& example = ds.examples.front().channels;

  const Network net = build_lsm(reference_lsm_config(NeuronModel::IowLif, 8, 1));
  const SimulationTrace base = simulate(net, example, RunMode::Baseline);
  const SimulationTrace comp = simulate(net, example, RunMode::Compressed);

  const EnergyModel energy;
  for (const auto* tr : {&base, &comp}) {
    const SpikeStatistics s = spike_statistics(*tr);
    std::printf("gamma %2d: %4lld steps, %6llu input weight, %6llu reservoir weight, energy %.0f\n", tr->gamma,
                static_cast<long long>(tr->timestep_count),
                static_cast<unsigned long long>(s.weight(Layer::Input)),
                static_cast<unsigned long long>(s.weight(Layer::Reservoir)), energy_estimate(*tr, energy));
  }
  std::printf("input raster distance     %.4f\n", binned_raster_distance(base, comp, 8, Layer::Input));
  std::printf("reservoir raster distance %.4f\n", binned_raster_distance(base, comp, 8, Layer::Reservoir));
  return 0;
}
