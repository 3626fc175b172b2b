#pragma once

#include <cstdint>

#include "nretina/fixedpoint.hpp"

namespace nretina {

// Arithmetic policies shared by the generic filter kernels. A policy supplies
// `value_type`, `add`, `sub` and `mul`, plus a multiply-accumulate path:
// `wide_mul` and `widen` produce exact values in `acc_type`, and `narrow`
// rounds an accumulated sum back to `value_type` once. In fixed point the
// accumulator holds 2 * frac_bits fractional bits, so a sum of products is
// floored a single time.

struct RealArith {
  using value_type = double;
  double add(double a, double b) const { return a + b; }
  double sub(double a, double b) const { return a - b; }
  double mul(double a, double b) const { return a * b; }

  using acc_type = double;
  double wide_mul(double a, double b) const { return a * b; }
  double widen(double a) const { return a; }
  double narrow(double acc) const { return acc; }
};

struct FixedArith {
  using value_type = std::int64_t;
  FixedMath* math;

  std::int64_t add(std::int64_t a, std::int64_t b) const { return math->add(a, b); }
  std::int64_t sub(std::int64_t a, std::int64_t b) const { return math->sub(a, b); }
  std::int64_t mul(std::int64_t a, std::int64_t b) const { return math->mul(a, b); }

  using acc_type = __int128;
  __int128 wide_mul(std::int64_t a, std::int64_t b) const { return FixedMath::wide_mul(a, b); }
  __int128 widen(std::int64_t a) const { return math->widen(a); }
  std::int64_t narrow(__int128 acc) const { return math->narrow(acc); }
};

}  // namespace nretina
