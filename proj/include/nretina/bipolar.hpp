#pragma once

#include <memory>

#include "nretina/fixedpoint.hpp"
#include "nretina/plane.hpp"
#include "nretina/spatial.hpp"
#include "nretina/temporal.hpp"

namespace nretina {

/// Contrast gain control parameters. The membrane capacitance is normalized
/// to 1; `dt` is the integration step in seconds.
struct BipolarParams {
  double sigma_a = 0.05;
  double tau_a = 0.005;
  double g0_a = 50.0;
  double lambda_a = 0.0;
  /// Gain on I_OPL in E_inf = inputamp * I_OPL / g_A. Equal to g0_a, the
  /// resting bipolar gain is 1.
  double inputamp = 50.0;
  double dt = 0.005;

  void validate(bool allow_zero_time = false) const;
};

/// Fixed-point bipolar stage. Per frame, per pixel:
///
///   g_A   = g0_A + prev_E_A
///   att   = exp(-dt * g_A)
///   E_inf = inputamp * I_OPL / g_A
///   V_Bip = (prev_V_Bip - E_inf) * att + E_inf
///   E_A   = conv5x5(lowpass_tauA(lambda_A * prev_V_Bip^2))
///
/// The division goes through the reciprocal table and the exponential through
/// the e^-x table. Feedback uses the previous frame's V_Bip.
class BipolarLayer {
 public:
  BipolarLayer(const BipolarParams& params, Geometry geometry, double fps,
               double pixels_per_degree, FixedPointFormat fmt);

  RawFrame step(const RawFrame& opl_current);

  void reset();
  std::uint64_t saturations() const { return math_->saturations(); }
  const RawFrame& prev_v_bip() const { return prev_v_; }
  const RawFrame& prev_e_a() const { return prev_e_a_; }

 private:
  std::unique_ptr<FixedMath> math_;
  Geometry geometry_;
  FixedKernel kernel_;
  LineBufferConvolver<FixedArith> conv_;
  FixedLowPass feedback_lp_;
  std::int64_t g0_;
  std::int64_t lambda_;
  std::int64_t inputamp_;
  std::int64_t dt_;
  RawFrame prev_v_;
  RawFrame prev_e_a_;
  RawFrame squared_;
};

}  // namespace nretina
