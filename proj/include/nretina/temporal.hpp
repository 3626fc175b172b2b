#pragma once

#include <cmath>
#include <stdexcept>

#include "nretina/arith.hpp"
#include "nretina/plane.hpp"

namespace nretina {

/// Pole-mapped first-order low-pass: a = e^(-dt/tau), b = 1 - a.
/// tau == 0 degenerates to a pass-through (a = 0).
struct LowPassCoefficients {
  double a = 0.0;
  double b = 1.0;
};

inline LowPassCoefficients lowpass_coefficients(double tau, double dt) {
  if (tau < 0.0 || !(dt > 0.0)) throw std::invalid_argument("need tau >= 0 and dt > 0");
  const double a = tau == 0.0 ? 0.0 : std::exp(-dt / tau);
  return {a, 1.0 - a};
}

/// Per-pixel recursive low-pass y[n] = b*x[n] + a*y[n-1], y[-1] = 0, with the
/// sum of both products rounded once.
template <typename Arith>
class LowPassBank {
 public:
  using T = typename Arith::value_type;

  LowPassBank(T coeff_a, T coeff_b, Geometry geometry, Arith arith)
      : a_(coeff_a), b_(coeff_b), arith_(arith), state_(geometry) {}

  T coeff_a() const { return a_; }
  T coeff_b() const { return b_; }
  const Plane<T>& state() const { return state_; }
  const Geometry& geometry() const { return state_.geometry(); }

  void reset() { preset(T{}); }
  void preset(T value) { state_ = Plane<T>(state_.geometry(), value); }

  const Plane<T>& step(const Plane<T>& in) {
    require_geometry(state_.geometry(), in.geometry());
    auto x = in.data();
    auto y = state_.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = arith_.narrow(arith_.wide_mul(b_, x[i]) + arith_.wide_mul(a_, y[i]));
    }
    return state_;
  }

 private:
  T a_;
  T b_;
  Arith arith_;
  Plane<T> state_;
};

/// Partial high-pass y = x - w * lowpass(x), rounded once.
template <typename Arith>
class HighPassBank {
 public:
  using T = typename Arith::value_type;

  HighPassBank(T weight, LowPassBank<Arith> inner, Arith arith)
      : w_(weight), inner_(std::move(inner)), arith_(arith) {}

  T weight() const { return w_; }
  const LowPassBank<Arith>& inner() const { return inner_; }
  void reset() { inner_.reset(); }
  void preset(T value) { inner_.preset(value); }

  Plane<T> step(const Plane<T>& in) {
    const Plane<T>& lp = inner_.step(in);
    Plane<T> out(in.geometry());
    auto x = in.data();
    auto l = lp.data();
    auto y = out.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = arith_.narrow(arith_.widen(x[i]) - arith_.wide_mul(w_, l[i]));
    }
    return out;
  }

 private:
  T w_;
  LowPassBank<Arith> inner_;
  Arith arith_;
};

using RealLowPass = LowPassBank<RealArith>;
using RealHighPass = HighPassBank<RealArith>;
using FixedLowPass = LowPassBank<FixedArith>;
using FixedHighPass = HighPassBank<FixedArith>;

RealLowPass make_lowpass(double tau, double dt, Geometry geometry);
RealHighPass make_highpass(double weight, double tau, double dt, Geometry geometry);

/// Coefficients computed from `tau` (already quantized by the caller), then
/// floored into the datapath format with b = 1 - a exactly.
FixedLowPass make_lowpass(double tau, double dt, Geometry geometry, FixedMath& math);
FixedHighPass make_highpass(double weight, double tau, double dt, Geometry geometry,
                            FixedMath& math);

}  // namespace nretina
