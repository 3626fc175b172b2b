#include "nretina/temporal.hpp"

namespace nretina {

namespace {

void require_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("high-pass weight must lie in [0, 1]");
}

}  // namespace

RealLowPass make_lowpass(double tau, double dt, Geometry geometry) {
  const auto c = lowpass_coefficients(tau, dt);
  return RealLowPass(c.a, c.b, geometry, RealArith{});
}

RealHighPass make_highpass(double weight, double tau, double dt, Geometry geometry) {
  require_weight(weight);
  return RealHighPass(weight, make_lowpass(tau, dt, geometry), RealArith{});
}

FixedLowPass make_lowpass(double tau, double dt, Geometry geometry, FixedMath& math) {
  const auto c = lowpass_coefficients(tau, dt);
  const std::int64_t a = math.from_real(c.a);
  return FixedLowPass(a, math.one() - a, geometry, FixedArith{&math});
}

FixedHighPass make_highpass(double weight, double tau, double dt, Geometry geometry,
                            FixedMath& math) {
  require_weight(weight);
  return FixedHighPass(math.from_real(weight), make_lowpass(tau, dt, geometry, math),
                       FixedArith{&math});
}

}  // namespace nretina
