#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcsnn/compress.hpp"
#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"

namespace tcsnn {

enum class NeuronModel { Lif, IwLif, IowLif, BurstLif, IowBurstLif };

inline constexpr NeuronModel kAllModels[] = {NeuronModel::Lif, NeuronModel::IwLif,
                                             NeuronModel::IowLif, NeuronModel::BurstLif,
                                             NeuronModel::IowBurstLif};

inline std::string_view to_string(NeuronModel m) {
  switch (m) {
    case NeuronModel::Lif: return "lif";
    case NeuronModel::IwLif: return "iw-lif";
    case NeuronModel::IowLif: return "iow-lif";
    case NeuronModel::BurstLif: return "burst-lif";
    case NeuronModel::IowBurstLif: return "iow-burst-lif";
  }
  return "?";
}

inline NeuronModel parse_neuron_model(std::string_view name) {
  for (NeuronModel m : kAllModels)
    if (to_string(m) == name) return m;
  throw ParameterError("unknown neuron model '" + std::string(name) + "'");
}

/// Multi-bit output spikes (threshold multiples).
constexpr bool emits_weighted(NeuronModel m) {
  return m == NeuronModel::IowLif || m == NeuronModel::IowBurstLif;
}
/// Models able to consume compressed (weighted) input.
constexpr bool accepts_weighted_input(NeuronModel m) {
  return m == NeuronModel::IwLif || m == NeuronModel::IowLif || m == NeuronModel::IowBurstLif;
}
constexpr bool is_bursting(NeuronModel m) {
  return m == NeuronModel::BurstLif || m == NeuronModel::IowBurstLif;
}

/// Uncompressed counterpart used for baseline rows.
constexpr NeuronModel baseline_counterpart(NeuronModel m) {
  return is_bursting(m) ? NeuronModel::BurstLif : NeuronModel::Lif;
}

enum class SynapseOrder { Zeroth = 0, First = 1, Second = 2 };

struct SynapseParams {
  SynapseOrder order = SynapseOrder::Second;
  double tau_s1_nom = 4.0;  // rise (second order) or the only constant (first order)
  double tau_s2_nom = 8.0;  // decay
  double q = 1.0;

  void validate() const {
    if (!(q > 0.0)) throw ParameterError("synapse charge q must be > 0");
    if (order == SynapseOrder::First && !(tau_s1_nom > 1.0))
      throw ParameterError("first-order synapse needs tau_s1 > 1");
    if (order == SynapseOrder::Second) {
      if (!(tau_s1_nom > 1.0) || !(tau_s2_nom > 1.0))
        throw ParameterError("second-order synapse needs both constants > 1");
      if (tau_s1_nom == tau_s2_nom)
        throw ParameterError("second-order synapse needs distinct constants");
    }
  }

  friend bool operator==(const SynapseParams&, const SynapseParams&) = default;
};

struct LIFParams {
  /// Normalized membrane constant; empty means a leakless integrator.
  std::optional<double> tau_m_nom = 32.0;
  double u_th = 1.0;
  double resistance = 1.0;
  int n_max = 7;
  SynapseParams synapse;

  void validate() const {
    if (tau_m_nom && !(*tau_m_nom > 1.0)) throw ParameterError("tau_m must be > 1");
    if (!(u_th > 0.0)) throw ParameterError("u_th must be > 0");
    if (!(resistance > 0.0)) throw ParameterError("resistance must be > 0");
    if (n_max < 1) throw ParameterError("n_max must be >= 1");
    synapse.validate();
  }

  friend bool operator==(const LIFParams&, const LIFParams&) = default;
};

struct BurstParams {
  double beta = 2.0;
  /// Bound on the accumulated burst exponent: g stays within
  /// [min(1, beta^max_exponent), max(1, beta^max_exponent)].
  int max_exponent = 8;

  void validate() const {
    if (!(beta > 0.0)) throw ParameterError("burst constant beta must be > 0");
    if (max_exponent < 0) throw ParameterError("burst max_exponent must be >= 0");
  }

  friend bool operator==(const BurstParams&, const BurstParams&) = default;
};

/// Membrane and synaptic filter state of one neuron.
struct NeuronState {
  Raw u = 0;
  Raw s1 = 0;
  Raw s2 = 0;
  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

/// Burst function state of one spike source. g = beta^exponent.
struct BurstChannel {
  int exponent = 0;
  bool fired_prev = false;
  int weight_prev = 0;
  friend bool operator==(const BurstChannel&, const BurstChannel&) = default;
};

enum class BurstMode { Binary, Weighted };

/// g(t) from g(t-1): beta*g (binary) or beta^w*g (weighted) when the
/// source fired on the previous step, else 1.
inline double burst_g_update(double g_prev, bool fired_prev, int spike_weight, double beta,
                             BurstMode mode = BurstMode::Weighted) {
  if (spike_weight < 0) throw ParameterError("spike weight must be >= 0");
  if (!fired_prev) return 1.0;
  return mode == BurstMode::Binary ? beta * g_prev : std::pow(beta, spike_weight) * g_prev;
}

/// Integer form of burst_g_update: tracks the exponent of beta.
inline void burst_advance(BurstChannel& ch, BurstMode mode, int max_exponent) {
  if (!ch.fired_prev) {
    ch.exponent = 0;
    return;
  }
  const int step = mode == BurstMode::Binary ? 1 : ch.weight_prev;
  ch.exponent = std::min(ch.exponent + step, max_exponent);
}

inline void burst_record(BurstChannel& ch, int emitted_weight) {
  ch.fired_prev = emitted_weight > 0;
  ch.weight_prev = emitted_weight;
}

/// Decay shifts for one step, drawn from the per-constant schedules.
struct StepShifts {
  int membrane = 0;
  int syn1 = 0;
  int syn2 = 0;
};

/// Everything about a neuron population that is fixed for a given model,
/// parameter set and compression ratio: decay plans, folded gains and
/// threshold tables.
///
/// Gain folding keeps equilibria and per-spike charge independent of gamma:
///  * synaptic increment per unit input: q * tau_s / (gamma * tau_s,c)
///  * membrane drive for filtered current: R / tau_m,c (R * gamma when leakless)
///  * membrane drive for zeroth-order input: R * q * tau_m / (gamma * tau_m,c)
/// All three reduce to the uncompressed values at gamma = 1.
struct NeuronDynamics {
  FixedPointFormat fmt;
  NeuronModel model = NeuronModel::IowLif;
  SynapseOrder order = SynapseOrder::Second;
  int gamma = 1;
  int n_max = 1;
  bool leakless = false;
  Raw u_th = 0;
  std::optional<TimeConstantPlan> membrane_plan;
  std::optional<TimeConstantPlan> syn1_plan;
  std::optional<TimeConstantPlan> syn2_plan;
  Gain drive;
  Gain syn1_increment;
  Gain syn2_increment;
  Gain syn_norm;
  bool syn2_is_slow = true;
  BurstMode burst_mode = BurstMode::Binary;
  int burst_max_exponent = 0;
  std::vector<Raw> burst_factor;     // beta^e in fmt
  std::vector<Raw> burst_threshold;  // beta^e * u_th in fmt

  static double increment_scale(double tau, int gamma) {
    return gamma == 1 ? 1.0 : tau / (gamma * scale_time_constant(tau, gamma));
  }

  /// max_t (a^t - b^t) over integer t for decay factors a > b.
  static double difference_peak(double slow, double fast) {
    const double a = 1.0 - 1.0 / slow, b = 1.0 - 1.0 / fast;
    double peak = 0.0;
    double pa = 1.0, pb = 1.0;
    for (int t = 0; t < 100000; ++t) {
      peak = std::max(peak, pa - pb);
      pa *= a;
      pb *= b;
      if (pa < peak * 1e-3) break;
    }
    return peak;
  }

  static NeuronDynamics make(NeuronModel model, const LIFParams& p,
                             const std::optional<BurstParams>& burst, int gamma,
                             const FixedPointFormat& fmt = {}) {
    p.validate();
    fmt.validate();
    if (gamma < 1) throw ParameterError("gamma must be >= 1");
    if (gamma > 1 && !accepts_weighted_input(model))
      throw ParameterError(std::string(to_string(model)) +
                           " is a binary model and cannot run compressed (gamma > 1)");
    if (is_bursting(model) && p.synapse.order != SynapseOrder::Zeroth)
      throw ParameterError("bursting models use a zeroth-order synapse");

    NeuronDynamics d;
    d.fmt = fmt;
    d.model = model;
    d.order = p.synapse.order;
    d.gamma = gamma;
    d.n_max = emits_weighted(model) ? p.n_max : 1;
    d.leakless = !p.tau_m_nom.has_value();
    d.u_th = fmt.from_real(p.u_th);
    if (d.u_th <= 0) throw ParameterError("u_th rounds to zero in this fixed-point format");

    const double q = p.synapse.q;
    const double R = p.resistance;
    if (!d.leakless) {
      d.membrane_plan = make_schedule(*p.tau_m_nom, gamma);
      const double inv_tau_c = 1.0 / d.membrane_plan->tau_nom_c_exact;
      d.drive = Gain::from_real(d.order == SynapseOrder::Zeroth
                                    ? R * q * increment_scale(*p.tau_m_nom, gamma)
                                    : R * inv_tau_c);
    } else {
      d.drive = Gain::from_real(d.order == SynapseOrder::Zeroth ? R * q : R * gamma);
    }

    if (d.order != SynapseOrder::Zeroth) {
      d.syn1_plan = make_schedule(p.synapse.tau_s1_nom, gamma);
      d.syn1_increment = Gain::from_real(q * increment_scale(p.synapse.tau_s1_nom, gamma));
    }
    if (d.order == SynapseOrder::Second) {
      d.syn2_plan = make_schedule(p.synapse.tau_s2_nom, gamma);
      d.syn2_increment = Gain::from_real(q * increment_scale(p.synapse.tau_s2_nom, gamma));
      d.syn2_is_slow = p.synapse.tau_s2_nom > p.synapse.tau_s1_nom;
      const double slow = std::max(p.synapse.tau_s1_nom, p.synapse.tau_s2_nom);
      const double fast = std::min(p.synapse.tau_s1_nom, p.synapse.tau_s2_nom);
      d.syn_norm = Gain::from_real(1.0 / difference_peak(slow, fast));
    }

    if (is_bursting(model)) {
      if (!burst) throw ParameterError("bursting model requires burst parameters");
      burst->validate();
      d.burst_mode = emits_weighted(model) ? BurstMode::Weighted : BurstMode::Binary;
      d.burst_max_exponent = burst->max_exponent;
      for (int e = 0; e <= burst->max_exponent; ++e) {
        const double g = std::pow(burst->beta, e);
        d.burst_factor.push_back(fmt.from_real(g));
        d.burst_threshold.push_back(std::max<Raw>(1, fmt.from_real(g * p.u_th)));
      }
    } else {
      d.burst_factor.push_back(fmt.one());
      d.burst_threshold.push_back(d.u_th);
    }
    return d;
  }
};

/// Holds the three per-constant schedules of one simulation.
class DynamicsClock {
 public:
  DynamicsClock() = default;
  explicit DynamicsClock(const NeuronDynamics& d) {
    if (d.membrane_plan) membrane_ = ShiftSchedule(*d.membrane_plan);
    if (d.syn1_plan) syn1_ = ShiftSchedule(*d.syn1_plan);
    if (d.syn2_plan) syn2_ = ShiftSchedule(*d.syn2_plan);
  }

  StepShifts next() { return {membrane_.next(), syn1_.next(), syn2_.next()}; }

 private:
  ShiftSchedule membrane_, syn1_, syn2_;
};

/// Synaptic filter update. `input` is the weight-multiplied input sum for
/// this step in state units; returns the current driving the membrane.
inline Raw synapse_step(NeuronState& st, Raw input, const NeuronDynamics& d,
                        const StepShifts& k, SaturationCounter& sat) {
  switch (d.order) {
    case SynapseOrder::Zeroth:
      return input;
    case SynapseOrder::First:
      st.s1 = saturating_add(decay_step(st.s1, k.syn1), d.syn1_increment.apply(input, d.fmt, sat),
                             d.fmt, sat);
      return st.s1;
    case SynapseOrder::Second: {
      st.s1 = saturating_add(decay_step(st.s1, k.syn1), d.syn1_increment.apply(input, d.fmt, sat),
                             d.fmt, sat);
      st.s2 = saturating_add(decay_step(st.s2, k.syn2), d.syn2_increment.apply(input, d.fmt, sat),
                             d.fmt, sat);
      const Raw diff = d.syn2_is_slow ? st.s2 - st.s1 : st.s1 - st.s2;
      return d.syn_norm.apply(diff, d.fmt, sat);
    }
  }
  return 0;
}

/// u <- decay(u) + drive * I (no decay when leakless).
inline void integrate(NeuronState& st, Raw current, const NeuronDynamics& d, const StepShifts& k,
                      SaturationCounter& sat) {
  const Raw decayed = d.leakless ? st.u : decay_step(st.u, k.membrane);
  st.u = saturating_add(decayed, d.drive.apply(current, d.fmt, sat), d.fmt, sat);
}

/// Single-threshold firing with subtractive reset.
inline int fire_binary(Raw& u, Raw threshold) {
  if (u < threshold) return 0;
  u -= threshold;
  return 1;
}

/// Multi-threshold firing: weight k for k*th <= u < (k+1)*th, capped at
/// n_max; the reset subtracts the threshold multiple actually emitted.
inline int fire_weighted(Raw& u, Raw threshold, int n_max) {
  if (u < threshold) return 0;
  const Raw k = std::min<Raw>(u / threshold, n_max);
  u -= k * threshold;
  return static_cast<int>(k);
}

inline int lif_step(NeuronState& st, Raw current, const NeuronDynamics& d, const StepShifts& k,
                    SaturationCounter& sat) {
  integrate(st, current, d, k, sat);
  return fire_binary(st.u, d.u_th);
}

inline int iw_lif_step(NeuronState& st, Raw current, const NeuronDynamics& d,
                       const StepShifts& k, SaturationCounter& sat) {
  integrate(st, current, d, k, sat);
  return fire_binary(st.u, d.u_th);
}

inline int iow_lif_step(NeuronState& st, Raw current, const NeuronDynamics& d,
                        const StepShifts& k, SaturationCounter& sat) {
  integrate(st, current, d, k, sat);
  return fire_weighted(st.u, d.u_th, d.n_max);
}

/// Model-dispatched membrane update + firing; `burst_exponent` selects
/// the neuron's own threshold g*u_th for bursting models.
inline int neuron_fire_step(NeuronState& st, Raw current, const NeuronDynamics& d,
                            const StepShifts& k, int burst_exponent, SaturationCounter& sat) {
  integrate(st, current, d, k, sat);
  const Raw th = d.burst_threshold[static_cast<std::size_t>(burst_exponent)];
  return emits_weighted(d.model) ? fire_weighted(st.u, th, d.n_max) : fire_binary(st.u, th);
}

/// One input of a bursting neuron for the current step.
struct BurstInput {
  Raw synaptic_weight = 0;  // w_i in state units
  int spike_weight = 0;     // omega_i(t), 0 when silent
};

/// Bursting (IOW or binary, per d.model) neuron with zeroth-order synapse.
/// Advances every presynaptic burst function, accumulates
/// sum_i w_i * g_i(t) * omega_i(t), then fires against the neuron's own
/// threshold set {k * g_self(t) * u_th} and records its own output in `self`.
inline int burst_iow_step(NeuronState& st, BurstChannel& self, std::span<BurstChannel> channels,
                          std::span<const BurstInput> inputs, const NeuronDynamics& d,
                          const StepShifts& k, SaturationCounter& sat) {
  if (!is_bursting(d.model)) throw ParameterError("burst_iow_step needs a bursting model");
  if (channels.size() != inputs.size()) throw ParameterError("channel/input size mismatch");
  __int128 acc = 0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    burst_advance(channels[i], d.burst_mode, d.burst_max_exponent);
    if (inputs[i].spike_weight > 0) {
      const Raw g = d.burst_factor[static_cast<std::size_t>(channels[i].exponent)];
      acc += static_cast<__int128>(fixed_mul(inputs[i].synaptic_weight, g, d.fmt, sat)) *
             inputs[i].spike_weight;
    }
    burst_record(channels[i], inputs[i].spike_weight);
  }
  const Raw current = synapse_step(st, saturate(acc, d.fmt, sat), d, k, sat);
  burst_advance(self, d.burst_mode, d.burst_max_exponent);
  const int out = neuron_fire_step(st, current, d, k, self.exponent, sat);
  burst_record(self, out);
  return out;
}

}  // namespace tcsnn
