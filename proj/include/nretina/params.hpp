#pragma once

#include <map>
#include <string>
#include <vector>

#include "nretina/bipolar.hpp"
#include "nretina/fixedpoint.hpp"
#include "nretina/ganglion.hpp"
#include "nretina/opl.hpp"
#include "nretina/plane.hpp"

namespace nretina {

/// Which ganglion polarities are simulated.
enum class Channels { On, Off, Both };

/// Full model configuration. Defaults follow the primate parameter set
/// (floating-point values) at 128x128, 200 fps.
struct RetinaParams {
  OplParams opl;
  BipolarParams bipolar;
  GanglionParams ganglion;
  FixedPointFormat format;
  Geometry geometry{128, 128};
  double fps = 200.0;
  double pixels_per_degree = 20.0;
  Channels channels = Channels::Both;

  void validate() const;

  /// Copy with every real-valued model constant floored into `fmt`
  /// (spatial and time constants keep at least one LSB). Geometry, fps,
  /// pixels_per_degree and the integer settings are untouched.
  RetinaParams quantized(FixedPointFormat fmt) const;
  RetinaParams quantized() const { return quantized(format); }

  /// Copy with the stream's geometry and fps. bipolar.dt becomes 1/fps when
  /// the frame rate changes and is kept otherwise, so a quantized dt survives.
  RetinaParams with_stream(Geometry g, double fps) const;

  std::vector<Polarity> polarities() const;
  GanglionParams ganglion_for(Polarity p) const;
};

/// Flat `key=value` config. Keys mirror the parameter names (sigma_c, tau_c,
/// ..., frac_bits, total_bits, pixels_per_degree, width, height, fps); `xi`
/// accepts 1, -1 or `both`. `#` starts a comment. Unknown keys and malformed
/// values throw ConfigError.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RetinaParams parse_config(const std::string& text, RetinaParams base = {});

/// Ordered (name, value) list of every real-valued model constant.
std::vector<std::pair<std::string, double>> model_constants(const RetinaParams& p);

std::string format_config(const RetinaParams& p);

}  // namespace nretina
