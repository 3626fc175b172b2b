#pragma once

#include <vector>

#include "nretina/params.hpp"
#include "nretina/record.hpp"
#include "nretina/spatial.hpp"
#include "nretina/stimulus.hpp"

namespace nretina {

/// Double-precision model of the same stage graph as FixedRetina. Kernels are
/// exact Gaussians, the bipolar division and exponential are exact, and
/// spatial filtering is a whole-frame zero-padded correlation rather than the
/// streaming line-buffer engine. Nothing is quantized unless the caller passes
/// RetinaParams::quantized().
class ReferenceRetina {
 public:
  explicit ReferenceRetina(const RetinaParams& params);

  StageFrames<double> step(const RealFrame& luminance);

  OplFrames<double> opl_step(const RealFrame& luminance);
  RealFrame bipolar_step(const RealFrame& opl_current);
  RealFrame ganglion_current_step(std::size_t channel, const RealFrame& v_bip);
  LifResult<double> lif_step(std::size_t channel, const RealFrame& current);

  std::size_t channel_count() const { return channels_.size(); }
  Polarity polarity(std::size_t channel) const { return channels_.at(channel).params.polarity(); }
  const RealFrame& feedback() const { return prev_e_a_; }

 private:
  struct LowPass {
    double a = 0.0;
    double b = 1.0;
    RealFrame state;
    const RealFrame& step(const RealFrame& x);
  };
  struct Channel {
    GanglionParams params;
    LowPass transient;
    RealFrame v_m;
    std::vector<int> refractory;
    int frame = 0;
  };

  RetinaParams params_;
  Geometry geometry_;
  Kernel center_kernel_;
  Kernel surround_kernel_;
  Kernel feedback_kernel_;
  LowPass center_lp_;
  LowPass center_hp_inner_;
  LowPass surround_lp_;
  LowPass feedback_lp_;
  RealFrame prev_v_;
  RealFrame prev_e_a_;
  std::vector<Channel> channels_;
};

/// Zero-padded 2-D correlation evaluated directly per output pixel.
RealFrame correlate_direct(const RealFrame& frame, const Kernel& k);

/// One exponential-Euler step of dV/dt = drive - g V over dt.
inline double exp_euler_step(double v, double drive, double g, double dt) {
  const double v_inf = drive / g;
  return (v - v_inf) * std::exp(-dt * g) + v_inf;
}

/// Runs the reference model. The stream's geometry and fps override `params`.
RunRecord run_reference(const FrameStream& stream, const RetinaParams& params,
                        const RecordOptions& options = {});

using ReferenceRun = RunRecord;

}  // namespace nretina
