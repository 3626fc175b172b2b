#include "nretina/reference_model.hpp"

#include <chrono>
#include <cmath>

namespace nretina {

namespace {

double decay(double tau, double dt) { return tau > 0.0 ? std::exp(-dt / tau) : 0.0; }

}  // namespace

RealFrame correlate_direct(const RealFrame& frame, const Kernel& k) {
  const int W = frame.width();
  const int H = frame.height();
  const int h = (k.size - 1) / 2;
  RealFrame out(frame.geometry());
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k.size; ++i) {
        const int yy = y + i - h;
        if (yy < 0 || yy >= H) continue;
        for (int j = 0; j < k.size; ++j) {
          const int xx = x + j - h;
          if (xx < 0 || xx >= W) continue;
          acc += k(i, j) * frame(xx, yy);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

const RealFrame& ReferenceRetina::LowPass::step(const RealFrame& x) {
  auto in = x.data();
  auto y = state.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = b * in[i] + a * y[i];
  return state;
}

ReferenceRetina::ReferenceRetina(const RetinaParams& params)
    : params_((params.validate(), params)),
      geometry_(params.geometry),
      center_kernel_(gaussian_kernel(params.opl.sigma_c, params.pixels_per_degree, 3)),
      surround_kernel_(gaussian_kernel(params.opl.sigma_s, params.pixels_per_degree, 5)),
      feedback_kernel_(gaussian_kernel(params.bipolar.sigma_a, params.pixels_per_degree, 5)),
      prev_v_(params.geometry),
      prev_e_a_(params.geometry) {
  const double dt = 1.0 / params.fps;
  const auto make = [&](double tau) {
    LowPass lp;
    lp.a = decay(tau, dt);
    lp.b = 1.0 - lp.a;
    lp.state = RealFrame(geometry_);
    return lp;
  };
  center_lp_ = make(params.opl.tau_c);
  center_hp_inner_ = make(params.opl.tau_u);
  surround_lp_ = make(params.opl.tau_s);
  feedback_lp_ = make(params.bipolar.tau_a);
  for (const Polarity pol : params.polarities()) {
    Channel ch;
    ch.params = params.ganglion_for(pol);
    ch.transient = make(ch.params.tau_g);
    ch.v_m = RealFrame(geometry_);
    ch.refractory.assign(geometry_.pixels(), 0);
    channels_.push_back(std::move(ch));
  }
}

OplFrames<double> ReferenceRetina::opl_step(const RealFrame& luminance) {
  require_geometry(geometry_, luminance.geometry());
  const OplParams& p = params_.opl;
  OplFrames<double> out;
  const RealFrame& smoothed = center_lp_.step(correlate_direct(luminance, center_kernel_));
  const RealFrame& slow = center_hp_inner_.step(smoothed);
  out.center = RealFrame(geometry_);
  for (std::size_t i = 0; i < out.center.data().size(); ++i) {
    out.center.data()[i] = smoothed.data()[i] - p.w_c * slow.data()[i];
  }
  out.surround = surround_lp_.step(correlate_direct(out.center, surround_kernel_));
  out.current = RealFrame(geometry_);
  for (std::size_t i = 0; i < out.current.data().size(); ++i) {
    out.current.data()[i] =
        p.lambda_opl * (out.center.data()[i] - p.omega_opl * out.surround.data()[i]);
  }
  return out;
}

RealFrame ReferenceRetina::bipolar_step(const RealFrame& opl_current) {
  require_geometry(geometry_, opl_current.geometry());
  const BipolarParams& p = params_.bipolar;
  RealFrame v_bip(geometry_);
  RealFrame squared(geometry_);
  for (std::size_t i = 0; i < v_bip.data().size(); ++i) {
    const double prev = prev_v_.data()[i];
    const double g_a = p.g0_a + prev_e_a_.data()[i];
    v_bip.data()[i] = exp_euler_step(prev, p.inputamp * opl_current.data()[i], g_a, p.dt);
    squared.data()[i] = p.lambda_a * prev * prev;
  }
  prev_e_a_ = correlate_direct(feedback_lp_.step(squared), feedback_kernel_);
  prev_v_ = v_bip;
  return v_bip;
}

RealFrame ReferenceRetina::ganglion_current_step(std::size_t channel, const RealFrame& v_bip) {
  require_geometry(geometry_, v_bip.geometry());
  Channel& ch = channels_.at(channel);
  const RealFrame& slow = ch.transient.step(v_bip);
  RealFrame out(geometry_);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    const double x = ch.params.xi * (v_bip.data()[i] - ch.params.w_g * slow.data()[i]);
    out.data()[i] = ganglion_current(x, ch.params);
  }
  return out;
}

LifResult<double> ReferenceRetina::lif_step(std::size_t channel, const RealFrame& current) {
  require_geometry(geometry_, current.geometry());
  Channel& ch = channels_.at(channel);
  const GanglionParams& p = ch.params;
  LifResult<double> out;
  auto v = ch.v_m.data();
  auto in = current.data();
  const int width = geometry_.width;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] += (in[i] - p.g_leak * v[i]) * p.tau_step;
    int& counter = ch.refractory[i];
    --counter;
    if (counter >= 1) v[i] = 0.0;
    const bool spike = v[i] > p.v_threshold;
    if (counter < 0) counter = 0;
    if (spike) {
      v[i] = 0.0;
      counter = p.refr + 1;
      out.spikes.push_back({ch.frame, static_cast<int>(i % width), static_cast<int>(i / width),
                            p.polarity()});
    }
  }
  out.v_m = ch.v_m;
  ++ch.frame;
  return out;
}

StageFrames<double> ReferenceRetina::step(const RealFrame& luminance) {
  StageFrames<double> out;
  out.opl = opl_step(luminance);
  out.bipolar = bipolar_step(out.opl.current);
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    RealFrame current = ganglion_current_step(c, out.bipolar);
    LifResult<double> lif = lif_step(c, current);
    out.spikes.insert(out.spikes.end(), lif.spikes.begin(), lif.spikes.end());
    out.channels.push_back({polarity(c), std::move(current), std::move(lif.v_m)});
  }
  return out;
}

RunRecord run_reference(const FrameStream& stream, const RetinaParams& params,
                        const RecordOptions& options) {
  const RetinaParams p = params.with_stream(stream.geometry, stream.fps);
  ReferenceRetina retina(p);
  RunRecord rec;
  rec.geometry = stream.geometry;
  rec.fps = stream.fps;
  rec.probe = checked_probe(options, stream.geometry);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    record_frame(rec, options, i, retina.step(stream.frames[i]), nullptr);
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace nretina
