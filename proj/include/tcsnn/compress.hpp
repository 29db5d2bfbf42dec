#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "tcsnn/error.hpp"
#include "tcsnn/fixed_point.hpp"
#include "tcsnn/spike.hpp"

namespace tcsnn {

struct CompressionConfig {
  int gamma = 1;
  /// Runtime-programmable ratio (may be changed between examples).
  bool programmable = false;
  int max_gamma = 16;

  void validate() const {
    if (max_gamma < 1) throw ParameterError("max_gamma must be >= 1");
    if (gamma < 1 || gamma > max_gamma)
      throw ParameterError("compression ratio " + std::to_string(gamma) + " outside [1, " +
                           std::to_string(max_gamma) + "]");
  }

  friend bool operator==(const CompressionConfig&, const CompressionConfig&) = default;
};

inline Step compressed_length(Step length, int gamma) { return (length + gamma - 1) / gamma; }

/// Input spike compression: step j of the result carries the number of
/// binary spikes in original steps [j*gamma, (j+1)*gamma). The last window
/// may be partial; empty windows produce no event.
inline WeightedSpikeTrain compress_train(const BinarySpikeTrain& train, int gamma) {
  if (gamma < 1) throw ParameterError("gamma must be >= 1");
  std::vector<WeightedEvent> out;
  for (Step t : train.events()) {
    const Step window = t / gamma;
    if (!out.empty() && out.back().step == window)
      ++out.back().weight;
    else
      out.push_back({window, 1});
  }
  return WeightedSpikeTrain(train.channel_id(), std::move(out),
                            compressed_length(train.length_steps(), gamma), gamma);
}

/// Exact normalized time constant after compressing time by gamma:
/// 1 / (1 - (1 - 1/tau_nom)^gamma).
inline double scale_time_constant(double tau_nom, int gamma) {
  if (!(tau_nom > 1.0)) throw ParameterError("tau_nom must be > 1");
  if (gamma < 1) throw ParameterError("gamma must be >= 1");
  if (gamma == 1) return tau_nom;
  return -1.0 / std::expm1(gamma * std::log1p(-1.0 / tau_nom));
}

/// Realization of a (possibly non power-of-two) time constant by toggling
/// the decay shift between the two bracketing powers of two.
struct TimeConstantPlan {
  double tau_nom = 0.0;
  int gamma = 1;
  double tau_nom_c_exact = 0.0;
  int k_low = 0;
  int k_high = 0;

  bool constant() const { return k_low == k_high; }
  double low() const { return std::ldexp(1.0, k_low); }
  double high() const { return std::ldexp(1.0, k_high); }

  /// Fraction of steps spent at 2^k_high.
  double high_fraction() const {
    return constant() ? 0.0 : (tau_nom_c_exact - low()) / (high() - low());
  }

  /// Length of the repeating shift pattern, if it repeats within max_period.
  std::optional<int> period(int max_period = 4096) const {
    if (constant()) return 1;
    const double f = high_fraction();
    for (int p = 1; p <= max_period; ++p) {
      const double n = f * p;
      if (std::abs(n - std::nearbyint(n)) < 1e-9) return p;
    }
    return std::nullopt;
  }

  friend bool operator==(const TimeConstantPlan&, const TimeConstantPlan&) = default;
};

/// Plan for an arbitrary target constant (tau_target >= 1).
inline TimeConstantPlan make_schedule(double tau_target) {
  if (!(tau_target >= 1.0) || !std::isfinite(tau_target))
    throw ParameterError("schedule target must be a finite value >= 1");
  TimeConstantPlan plan;
  plan.tau_nom = tau_target;
  plan.tau_nom_c_exact = tau_target;
  int exponent = 0;
  const double mantissa = std::frexp(tau_target, &exponent);
  plan.k_low = exponent - 1;
  plan.k_high = mantissa == 0.5 ? plan.k_low : plan.k_low + 1;
  return plan;
}

/// Plan for tau_nom compressed by gamma.
inline TimeConstantPlan make_schedule(double tau_nom, int gamma) {
  TimeConstantPlan plan = make_schedule(scale_time_constant(tau_nom, gamma));
  plan.tau_nom = tau_nom;
  plan.gamma = gamma;
  return plan;
}

/// Per-simulation iteration state over a plan. Error-accumulator rule:
/// add (tau - 2^k_low) every step and emit k_high whenever the accumulator
/// reaches (2^k_high - 2^k_low), then subtract that span.
class ShiftSchedule {
 public:
  ShiftSchedule() = default;
  explicit ShiftSchedule(const TimeConstantPlan& plan)
      : k_low_(plan.k_low), k_high_(plan.k_high),
        increment_(plan.tau_nom_c_exact - plan.low()),
        span_(plan.high() - plan.low()) {}

  int next() {
    if (k_low_ == k_high_) return k_low_;
    accumulator_ += increment_;
    if (accumulator_ >= span_ * (1.0 - 1e-12)) {
      accumulator_ -= span_;
      return k_high_;
    }
    return k_low_;
  }

  void reset() { accumulator_ = 0.0; }

 private:
  int k_low_ = 0;
  int k_high_ = 0;
  double increment_ = 0.0;
  double span_ = 0.0;
  double accumulator_ = 0.0;
};

/// Decay shifts for `steps` iterations of a fresh schedule.
inline std::vector<int> schedule_shifts(const TimeConstantPlan& plan, std::size_t steps) {
  ShiftSchedule s(plan);
  std::vector<int> out(steps);
  for (auto& k : out) k = s.next();
  return out;
}

}  // namespace tcsnn
