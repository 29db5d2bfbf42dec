#pragma once

#include <cstdint>

#include "tcsnn/learning.hpp"
#include "tcsnn/network.hpp"
#include "tcsnn/spike.hpp"

namespace tcsnn {

// Reference desk-scale experiment: 5 timing-coded classes on 78 channels,
// a 135-neuron reservoir and a 5-neuron readout.

inline SyntheticTaskParams reference_task_params(std::uint64_t seed) {
  SyntheticTaskParams p;
  p.num_classes = 5;
  p.num_channels = 78;
  p.length_steps = 500;
  p.jitter_steps = 8;
  p.examples_per_class = 40;
  p.seed = seed;
  p.deletion_prob = 0.1;
  p.insertion_prob = 0.01;
  p.max_template_rate = 0.3;
  return p;
}

inline LsmConfig reference_lsm_config(NeuronModel model, int gamma, std::uint64_t seed) {
  LsmConfig c;
  c.num_inputs = 78;
  c.reservoir_size = 135;
  c.num_readout = 5;
  c.model = model;
  c.neuron.u_th = 2.0;
  if (is_bursting(model)) {
    c.neuron.synapse.order = SynapseOrder::Zeroth;
    c.burst = BurstParams{};
  }
  c.compression.max_gamma = 16;
  c.compression.gamma = gamma;
  c.seed = seed;
  return c;
}

inline LearningParams reference_learning_params(std::uint64_t seed) {
  LearningParams p;
  p.eta = 0.0005;
  p.tau_trace_nom = 16.0;
  p.teacher_margin = 2;
  p.epochs = 50;
  p.w_min = -4.0;
  p.w_max = 4.0;
  p.seed = seed;
  return p;
}

}  // namespace tcsnn
