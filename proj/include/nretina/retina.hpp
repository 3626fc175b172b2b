#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nretina/bipolar.hpp"
#include "nretina/ganglion.hpp"
#include "nretina/opl.hpp"
#include "nretina/params.hpp"
#include "nretina/record.hpp"
#include "nretina/stimulus.hpp"

namespace nretina {

/// Bit-accurate streaming retina: OPL -> bipolar -> ganglion current -> LIF,
/// one frame at a time, every signal in the configured fixed-point format.
class FixedRetina {
 public:
  /// Uses params.format, params.geometry and params.fps. Model constants are
  /// quantized into the format by each stage.
  explicit FixedRetina(const RetinaParams& params);

  StageFrames<std::int64_t> step(const RealFrame& luminance);
  StageFrames<std::int64_t> step_raw(const RawFrame& luminance);

  RawFrame quantize_input(const RealFrame& luminance);

  void reset();
  const FixedPointFormat& format() const { return format_; }
  std::map<std::string, std::uint64_t> saturations() const;

  OplLayer& opl() { return opl_; }
  BipolarLayer& bipolar() { return bipolar_; }
  GanglionLayer& ganglion(std::size_t channel) { return ganglia_.at(channel); }
  std::size_t channel_count() const { return ganglia_.size(); }

 private:
  FixedPointFormat format_;
  Geometry geometry_;
  FixedMath input_math_;
  OplLayer opl_;
  BipolarLayer bipolar_;
  std::vector<GanglionLayer> ganglia_;
};

/// Runs the fixed-point pipeline over a stream. The stream's geometry and fps
/// override those in `params`.
RunRecord run_fixed(const FrameStream& stream, const RetinaParams& params,
                    const RecordOptions& options = {});

}  // namespace nretina
