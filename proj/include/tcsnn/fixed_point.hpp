#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "tcsnn/error.hpp"

namespace tcsnn {

using Raw = std::int64_t;

/// Two's-complement fixed-point layout. Values are carried as Raw integers
/// scaled by 2^frac_bits and saturated to the representable range.
struct FixedPointFormat {
  int total_bits = 32;
  int frac_bits = 16;
  bool is_signed = true;

  void validate() const {
    if (total_bits < 2 || total_bits > 64 || frac_bits < 0 || frac_bits >= total_bits)
      throw ParameterError("fixed-point format needs 0 <= frac_bits < total_bits <= 64");
  }

  Raw max_raw() const {
    const int magnitude_bits = is_signed ? total_bits - 1 : total_bits;
    if (magnitude_bits >= 63) return std::numeric_limits<Raw>::max();
    return (Raw{1} << magnitude_bits) - 1;
  }

  Raw min_raw() const {
    if (!is_signed) return 0;
    if (total_bits >= 64) return std::numeric_limits<Raw>::min();
    return -(Raw{1} << (total_bits - 1));
  }

  Raw one() const { return Raw{1} << frac_bits; }

  double to_real(Raw raw) const { return std::ldexp(static_cast<double>(raw), -frac_bits); }

  /// Round-to-nearest conversion; out-of-range values clamp.
  Raw from_real(double value) const {
    if (std::isnan(value)) throw ParameterError("cannot convert NaN to fixed point");
    const double scaled = std::nearbyint(std::ldexp(value, frac_bits));
    if (!(scaled < static_cast<double>(max_raw()))) return max_raw();
    if (!(scaled > static_cast<double>(min_raw()))) return min_raw();
    return static_cast<Raw>(scaled);
  }

  friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

/// Counts every clamp applied by saturating arithmetic.
struct SaturationCounter {
  std::uint64_t count = 0;
};

inline Raw saturate(__int128 value, const FixedPointFormat& fmt, SaturationCounter& sat) {
  if (value > fmt.max_raw()) {
    ++sat.count;
    return fmt.max_raw();
  }
  if (value < fmt.min_raw()) {
    ++sat.count;
    return fmt.min_raw();
  }
  return static_cast<Raw>(value);
}

inline Raw saturating_add(Raw a, Raw b, const FixedPointFormat& fmt, SaturationCounter& sat) {
  return saturate(static_cast<__int128>(a) + b, fmt, sat);
}

/// x - (x >> k): one step of first-order decay with time constant 2^k,
/// realized with a shifter. C++20 guarantees arithmetic shift on negatives.
constexpr Raw decay_step(Raw x, int k) {
  if (k < 0) throw ParameterError("decay shift must be non-negative");
  if (k >= 63) return x - (x < 0 ? -1 : 0);
  return x - (x >> k);
}

/// Multiplier constant with its own (finer) binary point, used for the
/// precomputed drive gains so the state format can stay narrow.
struct Gain {
  static constexpr int kFracBits = 24;
  Raw raw = 0;

  static Gain from_real(double g) {
    return Gain{static_cast<Raw>(std::nearbyint(std::ldexp(g, kFracBits)))};
  }
  double to_real() const { return std::ldexp(static_cast<double>(raw), -kFracBits); }

  /// x * gain, floor-rounded, saturated into fmt.
  Raw apply(Raw x, const FixedPointFormat& fmt, SaturationCounter& sat) const {
    const __int128 product = static_cast<__int128>(x) * raw;
    return saturate(product >> kFracBits, fmt, sat);
  }

  friend bool operator==(const Gain&, const Gain&) = default;
};

/// Fixed-point product of two values in the same format.
inline Raw fixed_mul(Raw a, Raw b, const FixedPointFormat& fmt, SaturationCounter& sat) {
  const __int128 product = static_cast<__int128>(a) * b;
  return saturate(product >> fmt.frac_bits, fmt, sat);
}

}  // namespace tcsnn
