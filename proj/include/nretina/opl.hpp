#pragma once

#include <memory>

#include "nretina/fixedpoint.hpp"
#include "nretina/plane.hpp"
#include "nretina/spatial.hpp"
#include "nretina/temporal.hpp"

namespace nretina {

/// Outer plexiform layer parameters. Spatial constants in degrees, time
/// constants in seconds.
struct OplParams {
  double sigma_c = 0.05;
  double tau_c = 0.010;
  double tau_u = 0.010;
  double w_c = 1.0;
  double sigma_s = 0.15;
  double tau_s = 0.010;
  double lambda_opl = 1.0;
  double omega_opl = 0.5;

  /// Throws std::invalid_argument. `allow_zero_time` admits tau == 0, which a
  /// coarse format can produce.
  void validate(bool allow_zero_time = false) const;
};

template <typename T>
struct OplFrames {
  Plane<T> center;
  Plane<T> surround;
  Plane<T> current;
};

/// Fixed-point OPL: conv3x3 -> low-pass(tau_c) -> high-pass(w_c, tau_u) gives
/// the center C; conv5x5(C) -> low-pass(tau_s) gives the surround S;
/// I_OPL = lambda * (C - omega * S).
class OplLayer {
 public:
  OplLayer(const OplParams& params, Geometry geometry, double fps, double pixels_per_degree,
           FixedPointFormat fmt);

  OplFrames<std::int64_t> step(const RawFrame& luminance);

  void reset();
  std::uint64_t saturations() const { return math_->saturations(); }
  const FixedKernel& center_kernel() const { return center_kernel_; }
  const FixedKernel& surround_kernel() const { return surround_kernel_; }

 private:
  std::unique_ptr<FixedMath> math_;
  Geometry geometry_;
  FixedKernel center_kernel_;
  FixedKernel surround_kernel_;
  LineBufferConvolver<FixedArith> center_conv_;
  LineBufferConvolver<FixedArith> surround_conv_;
  FixedLowPass center_lp_;
  FixedHighPass center_hp_;
  FixedLowPass surround_lp_;
  std::int64_t lambda_;
  std::int64_t omega_;
};

}  // namespace nretina
