#include "nretina/bipolar.hpp"

#include "nretina/quantized.hpp"

namespace nretina {

void BipolarParams::validate(bool allow_zero_time) const {
  if (!(sigma_a > 0.0)) throw std::invalid_argument("sigma_a must be positive");
  if (!(tau_a > 0.0 || (allow_zero_time && tau_a == 0.0))) {
    throw std::invalid_argument("tau_a must be positive");
  }
  if (!(g0_a > 0.0)) throw std::invalid_argument("g0_a must be positive");
  if (!(lambda_a >= 0.0)) throw std::invalid_argument("lambda_a must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("bipolar dt must be positive");
}

BipolarLayer::BipolarLayer(const BipolarParams& params, Geometry geometry, double fps,
                           double pixels_per_degree, FixedPointFormat fmt)
    : math_((params.validate(), std::make_unique<FixedMath>(fmt))),
      geometry_(geometry),
      kernel_(quantize_kernel(
          gaussian_kernel(quantized_positive(params.sigma_a, fmt), pixels_per_degree, 5), fmt)),
      conv_(5, kernel_.weights),
      feedback_lp_(make_lowpass(quantized_positive(params.tau_a, fmt), 1.0 / fps, geometry, *math_)),
      g0_(math_->from_real(quantized_positive(params.g0_a, fmt))),
      lambda_(math_->from_real(params.lambda_a)),
      inputamp_(math_->from_real(params.inputamp)),
      dt_(math_->from_real(quantized_positive(params.dt, fmt))),
      prev_v_(geometry),
      prev_e_a_(geometry),
      squared_(geometry) {}

RawFrame BipolarLayer::step(const RawFrame& opl_current) {
  require_geometry(geometry_, opl_current.geometry());
  FixedMath& m = *math_;
  RawFrame v_bip(geometry_);
  auto in = opl_current.data();
  auto prev_v = prev_v_.data();
  auto prev_e = prev_e_a_.data();
  auto sq = squared_.data();
  auto out = v_bip.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    // prev_E_A >= 0, so g_A >= g0_A > 0 and the division is safe.
    const std::int64_t g_a = m.add(g0_, prev_e[i]);
    const std::int64_t att = m.exp_neg(m.mul(dt_, g_a));
    const std::int64_t e_inf = m.div(m.mul(inputamp_, in[i]), g_a);
    out[i] = m.add(m.mul(m.sub(prev_v[i], e_inf), att), e_inf);
    sq[i] = m.mul(lambda_, m.mul(prev_v[i], prev_v[i]));
  }
  prev_e_a_ = conv_.run(feedback_lp_.step(squared_), FixedArith{math_.get()});
  prev_v_ = v_bip;
  return v_bip;
}

void BipolarLayer::reset() {
  feedback_lp_.reset();
  prev_v_ = RawFrame(geometry_);
  prev_e_a_ = RawFrame(geometry_);
  math_->reset_saturations();
}

}  // namespace nretina
