#include "nretina/ganglion.hpp"

#include "nretina/quantized.hpp"

namespace nretina {

std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "ON") return Polarity::On;
  if (s == "OFF") return Polarity::Off;
  return std::nullopt;
}

void GanglionParams::validate(bool allow_zero_time) const {
  if (!(tau_g > 0.0 || (allow_zero_time && tau_g == 0.0))) {
    throw std::invalid_argument("tau_g must be positive");
  }
  if (!(w_g >= 0.0 && w_g <= 1.0)) throw std::invalid_argument("w_g must lie in [0, 1]");
  if (xi != 1 && xi != -1) throw std::invalid_argument("xi must be +1 or -1");
  if (!(i0_g > 0.0)) throw std::invalid_argument("i0_g must be positive");
  if (!(lambda_g >= 0.0)) throw std::invalid_argument("lambda_g must be >= 0");
  if (!(g_leak >= 0.0)) throw std::invalid_argument("g_leak must be >= 0");
  if (!(tau_step > 0.0)) throw std::invalid_argument("tau_step must be positive");
  if (refr < 0) throw std::invalid_argument("refr must be >= 0");
  if (!(v_threshold > 0.0)) throw std::invalid_argument("v_threshold must be positive");
}

namespace {

double saturating_branch(double v, const GanglionParams& p) {
  return p.i0_g / (1.0 - p.lambda_g * (v - p.v0_g) / p.i0_g);
}

double linear_branch(double v, const GanglionParams& p) {
  return p.i0_g + p.lambda_g * (v - p.v0_g);
}

}  // namespace

double static_nonlinearity(double v, const GanglionParams& p) {
  return v < p.v0_g ? saturating_branch(v, p) : linear_branch(v, p);
}

double ganglion_current(double x, const GanglionParams& p) {
  if (x > 0.0) return linear_branch(x, p);
  const double den = 1.0 - p.lambda_g * (x - p.v0_g) / p.i0_g;
  // Only reachable with v0 < 0, where the two branch rules disagree.
  return den > 0.0 ? p.i0_g / den : linear_branch(x, p);
}

GanglionLayer::GanglionLayer(const GanglionParams& params, Geometry geometry, double fps,
                             FixedPointFormat fmt)
    : math_((params.validate(), std::make_unique<FixedMath>(fmt))),
      geometry_(geometry),
      polarity_(params.polarity()),
      transient_(make_highpass(quantized_value(params.w_g, fmt), quantized_positive(params.tau_g, fmt),
                               1.0 / fps, geometry, *math_)),
      lambda_(math_->from_real(params.lambda_g)),
      i0_(math_->from_real(quantized_positive(params.i0_g, fmt))),
      v0_(math_->from_real(params.v0_g)),
      leak_(math_->from_real(params.g_leak)),
      tau_(math_->from_real(quantized_positive(params.tau_step, fmt))),
      threshold_(math_->from_real(quantized_positive(params.v_threshold, fmt))),
      refr_(params.refr),
      v_m_(geometry),
      refractory_(geometry.pixels(), 0) {}

std::int64_t GanglionLayer::nonlinearity(std::int64_t x) {
  FixedMath& m = *math_;
  const std::int64_t linear = m.add(i0_, m.mul(lambda_, m.sub(x, v0_)));
  if (x > 0) return linear;
  const std::int64_t den = m.sub(i0_, m.mul(lambda_, m.sub(x, v0_)));
  if (den <= 0) return linear;
  return m.mul(i0_, m.div(i0_, den));
}

RawFrame GanglionLayer::current_step(const RawFrame& v_bip) {
  require_geometry(geometry_, v_bip.geometry());
  // The polarity flip is applied at the filter input: T_G is linear, and
  // flipping first keeps xi=-1 on -V bit-identical to xi=+1 on V under floor
  // rounding.
  RawFrame signed_input = v_bip;
  if (polarity_ == Polarity::Off) {
    for (auto& v : signed_input.data()) v = math_->sub(0, v);
  }
  RawFrame x = transient_.step(signed_input);
  for (auto& v : x.data()) v = nonlinearity(v);
  return x;
}

LifOutput GanglionLayer::lif_step(const RawFrame& current) {
  require_geometry(geometry_, current.geometry());
  FixedMath& m = *math_;
  LifOutput out;
  auto in = current.data();
  auto v = v_m_.data();
  const int width = geometry_.width;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = m.add(v[i], m.mul(m.sub(in[i], m.mul(leak_, v[i])), tau_));
    // Integer counters: ">= 0.5" is ">= 1". The counter is decremented before
    // the refractory test, so a reload of refr + 1 silences refr frames.
    int& counter = refractory_[i];
    --counter;
    if (counter >= 1) v[i] = 0;
    const bool spike = v[i] > threshold_;
    if (counter < 0) counter = 0;
    if (spike) {
      v[i] = 0;
      counter = refr_ + 1;
      out.spikes.push_back({frame_, static_cast<int>(i % width), static_cast<int>(i / width),
                            polarity_});
    }
  }
  out.v_m = v_m_;
  ++frame_;
  return out;
}

void GanglionLayer::reset() {
  transient_.reset();
  v_m_ = RawFrame(geometry_);
  std::fill(refractory_.begin(), refractory_.end(), 0);
  frame_ = 0;
  math_->reset_saturations();
}

}  // namespace nretina
