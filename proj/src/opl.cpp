#include "nretina/opl.hpp"

#include "nretina/quantized.hpp"

namespace nretina {

void OplParams::validate(bool allow_zero_time) const {
  const auto positive = [&](double v, bool time) {
    return v > 0.0 || (time && allow_zero_time && v == 0.0);
  };
  if (!positive(sigma_c, false) || !positive(sigma_s, false)) {
    throw std::invalid_argument("OPL sigmas must be positive");
  }
  if (!positive(tau_c, true) || !positive(tau_u, true) || !positive(tau_s, true)) {
    throw std::invalid_argument("OPL time constants must be positive");
  }
  if (!(w_c >= 0.0 && w_c <= 1.0)) throw std::invalid_argument("w_c must lie in [0, 1]");
  if (!(omega_opl >= 0.0 && omega_opl <= 1.0)) {
    throw std::invalid_argument("omega_opl must lie in [0, 1]");
  }
}

namespace {

FixedKernel make_kernel(double sigma, double ppd, int size, FixedPointFormat fmt) {
  return quantize_kernel(gaussian_kernel(quantized_positive(sigma, fmt), ppd, size), fmt);
}

}  // namespace

OplLayer::OplLayer(const OplParams& params, Geometry geometry, double fps,
                   double pixels_per_degree, FixedPointFormat fmt)
    : math_((params.validate(), std::make_unique<FixedMath>(fmt))),
      geometry_(geometry),
      center_kernel_(make_kernel(params.sigma_c, pixels_per_degree, 3, fmt)),
      surround_kernel_(make_kernel(params.sigma_s, pixels_per_degree, 5, fmt)),
      center_conv_(3, center_kernel_.weights),
      surround_conv_(5, surround_kernel_.weights),
      center_lp_(make_lowpass(quantized_positive(params.tau_c, fmt), 1.0 / fps, geometry, *math_)),
      center_hp_(make_highpass(quantized_value(params.w_c, fmt), quantized_positive(params.tau_u, fmt),
                               1.0 / fps, geometry, *math_)),
      surround_lp_(make_lowpass(quantized_positive(params.tau_s, fmt), 1.0 / fps, geometry, *math_)),
      lambda_(math_->from_real(params.lambda_opl)),
      omega_(math_->from_real(params.omega_opl)) {}

OplFrames<std::int64_t> OplLayer::step(const RawFrame& luminance) {
  require_geometry(geometry_, luminance.geometry());
  FixedArith arith{math_.get()};
  OplFrames<std::int64_t> out;
  const RawFrame blurred = center_conv_.run(luminance, arith);
  const RawFrame& smoothed = center_lp_.step(blurred);
  out.center = center_hp_.step(smoothed);
  out.surround = surround_lp_.step(surround_conv_.run(out.center, arith));
  out.current = RawFrame(geometry_);
  auto c = out.center.data();
  auto s = out.surround.data();
  auto i_opl = out.current.data();
  for (std::size_t i = 0; i < i_opl.size(); ++i) {
    i_opl[i] = math_->mul(lambda_, math_->sub(c[i], math_->mul(omega_, s[i])));
  }
  return out;
}

void OplLayer::reset() {
  center_lp_.reset();
  center_hp_.reset();
  surround_lp_.reset();
  math_->reset_saturations();
}

}  // namespace nretina
