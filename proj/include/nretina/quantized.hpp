#pragma once

#include "nretina/fixedpoint.hpp"

namespace nretina {

/// Real value of quantize(x, fmt).
inline double quantized_value(double x, FixedPointFormat fmt) { return quantize(x, fmt).to_real(); }

/// As quantized_value, but a positive constant never floors to zero: spatial
/// and time constants keep at least one LSB.
inline double quantized_positive(double x, FixedPointFormat fmt) {
  const double q = quantized_value(x, fmt);
  return (x > 0.0 && q <= 0.0) ? fmt.lsb() : q;
}

}  // namespace nretina
