#pragma once

// Signed two's-complement fixed-point arithmetic with floor quantization and
// saturation. Two layers live here:
//
//  * FixedPointValue and the fxp_* free functions: a value-semantic scalar API
//    where every value carries its format and a sticky saturation flag.
//  * FixedMath: the raw-mantissa kernel used by the streaming pipeline. It runs
//    on plain int64 mantissas and counts saturations instead of flagging them,
//    so whole frames can be processed without per-sample bookkeeping.
//
// Both layers share the same rounding (floor) and clamping rules, so a value
// computed through either route is bit-identical.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nretina {

class FormatMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FixedPointFormat {
  int total_bits = 19;
  int frac_bits = 10;

  /// Throws std::invalid_argument unless 2 <= total_bits <= 64 and
  /// 0 <= frac_bits < total_bits.
  void validate() const;

  std::int64_t max_raw() const;
  std::int64_t min_raw() const;
  std::int64_t one_raw() const { return std::int64_t{1} << frac_bits; }
  double lsb() const;
  double max_value() const;
  double min_value() const;

  std::string to_string() const;

  friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

class FixedPointValue {
 public:
  /// `raw` must already fit the format; use quantize() to convert reals.
  FixedPointValue(std::int64_t raw, FixedPointFormat format, bool saturated = false);

  std::int64_t raw() const { return raw_; }
  const FixedPointFormat& format() const { return format_; }
  bool saturated() const { return saturated_; }
  double to_real() const;

 private:
  std::int64_t raw_;
  FixedPointFormat format_;
  bool saturated_;
};

/// floor(x * 2^frac) * 2^-frac, saturated to the format range. NaN maps to 0
/// with the saturation flag set.
FixedPointValue quantize(double x, FixedPointFormat fmt);

FixedPointValue fxp_add(const FixedPointValue& a, const FixedPointValue& b);
FixedPointValue fxp_sub(const FixedPointValue& a, const FixedPointValue& b);

/// Full-precision product, floored back to frac_bits, then saturated.
FixedPointValue fxp_mul(const FixedPointValue& a, const FixedPointValue& b);

/// a / b through the reciprocal table (relative error well under 2^-8).
/// Throws std::domain_error for b <= 0.
FixedPointValue fxp_div(const FixedPointValue& a, const FixedPointValue& b);

/// e^-x by linear interpolation over a 256-segment table on [0, 8]; 0 beyond.
/// Throws std::domain_error for negative x.
FixedPointValue fxp_exp_neg(const FixedPointValue& x);

namespace detail {

// Internal precision of the lookup tables.
inline constexpr int kTableFracBits = 40;

// floor(v / 2^shift) for shift >= 0, v * 2^-shift otherwise.
inline __int128 shift_floor(__int128 v, int shift) {
  return shift >= 0 ? (v >> shift) : (v << -shift);
}

// e^-x sampled at x = k/32 for k in [0, 256], kTableFracBits fractional bits.
const std::array<std::int64_t, 257>& exp_neg_table();

// 1/u sampled at u = 1 + k/256 for k in [0, 256], kTableFracBits fractional bits.
const std::array<std::int64_t, 257>& reciprocal_table();

}  // namespace detail

/// Raw-mantissa arithmetic for one format. Not thread-safe: the saturation
/// counter is mutated by every clamping operation.
class FixedMath {
 public:
  explicit FixedMath(FixedPointFormat fmt);

  const FixedPointFormat& format() const { return fmt_; }
  std::int64_t one() const { return one_; }
  std::int64_t max_raw() const { return hi_; }
  std::int64_t min_raw() const { return lo_; }

  std::uint64_t saturations() const { return saturations_; }
  void reset_saturations() { saturations_ = 0; }

  std::int64_t saturate(__int128 v) {
    if (v > hi_) {
      ++saturations_;
      return hi_;
    }
    if (v < lo_) {
      ++saturations_;
      return lo_;
    }
    return static_cast<std::int64_t>(v);
  }

  std::int64_t add(std::int64_t a, std::int64_t b) {
    return saturate(static_cast<__int128>(a) + b);
  }
  std::int64_t sub(std::int64_t a, std::int64_t b) {
    return saturate(static_cast<__int128>(a) - b);
  }
  std::int64_t mul(std::int64_t a, std::int64_t b) {
    if (narrow_) return saturate((a * b) >> frac_);
    return saturate((static_cast<__int128>(a) * b) >> frac_);
  }

  /// Exact product with 2 * frac_bits fractional bits, for accumulation.
  static __int128 wide_mul(std::int64_t a, std::int64_t b) { return static_cast<__int128>(a) * b; }
  /// Value with 2 * frac_bits fractional bits.
  __int128 widen(std::int64_t a) const { return static_cast<__int128>(a) << frac_; }
  /// Floors a 2 * frac_bits accumulator back to the format, then saturates.
  std::int64_t narrow(__int128 acc) { return saturate(acc >> frac_); }
  /// True when a sum of up to 64 products of in-range values fits in int64.
  bool small_accumulator() const { return small_acc_; }

  /// num / den with den > 0 (checked by the caller); see fxp_div.
  std::int64_t div(std::int64_t num, std::int64_t den);

  /// e^-x for x >= 0 (checked by the caller); see fxp_exp_neg.
  std::int64_t exp_neg(std::int64_t x) const;

  std::int64_t from_real(double x);
  double to_real(std::int64_t raw) const;

 private:
  FixedPointFormat fmt_;
  int frac_;
  std::int64_t one_;
  std::int64_t lo_;
  std::int64_t hi_;
  // True when a raw product cannot overflow int64.
  bool narrow_;
  bool small_acc_;
  std::uint64_t saturations_ = 0;
};

}  // namespace nretina
