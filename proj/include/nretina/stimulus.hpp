#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nretina/plane.hpp"

namespace nretina {

/// Ordered luminance frames in [0, 1] with a fixed geometry and frame rate.
struct FrameStream {
  Geometry geometry;
  double fps = 200.0;
  std::vector<RealFrame> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  double dt() const { return 1.0 / fps; }

  /// Throws std::invalid_argument on a geometry mismatch, a sample outside
  /// [0, 1], a non-positive fps or an empty geometry.
  void validate() const;
};

struct ChirpSpec {
  double baseline = 0.5;
  double baseline_duration = 0.5;
  double pulse_low = 0.0;
  double pulse_high = 1.0;
  // OFF, ON, OFF segment lengths.
  double pulse_durations[3] = {0.5, 0.5, 0.5};

  double freq_start = 1.0;
  double freq_end = 10.0;
  double freq_sweep_amplitude = 0.25;
  double freq_sweep_duration = 2.0;

  double amp_sweep_freq = 5.0;
  double amp_sweep_max = 0.5;
  double amp_sweep_duration = 2.0;

  /// Anything after the amplitude sweep is held at baseline.
  double total_duration = 7.0;

  void validate() const;
  /// Luminance at time t (seconds), clamped to [0, 1].
  double luminance(double t) const;
};

/// Number of frames covering `duration` seconds at `fps`.
std::size_t frame_count(double duration, double fps);

/// Index of the frame containing time t.
std::size_t frame_index(double t, double fps);

FrameStream make_chirp(const ChirpSpec& spec, Geometry geometry, double fps);

/// `low` everywhere, `high` on frames [floor(t_on*fps), floor(t_off*fps)).
FrameStream make_pulse(double low, double high, double t_on, double t_off, double duration,
                       Geometry geometry, double fps);

/// All-zero frames except frame floor(t_hit*fps), which is uniform at amplitude.
FrameStream make_impulse(double amplitude, double t_hit, double duration, Geometry geometry,
                         double fps);

/// Spatially uniform sinusoid mean + amplitude*sin(2*pi*freq*t).
FrameStream make_flicker(double mean, double amplitude, double freq, double duration,
                         Geometry geometry, double fps);

// ---------------------------------------------------------------------------
// Frame containers

class VideoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class VideoGeometryMismatch : public VideoError {
 public:
  using VideoError::VideoError;
};
class TruncatedVideo : public VideoError {
 public:
  using VideoError::VideoError;
};
class UnsupportedDepth : public VideoError {
 public:
  using VideoError::VideoError;
};

/// Sidecar header next to raw data and PGM sequences: `width height fps bitdepth`.
struct StreamHeader {
  Geometry geometry;
  double fps = 200.0;
  int bitdepth = 8;
};

StreamHeader read_stream_header(const std::filesystem::path& path);
void write_stream_header(const std::filesystem::path& path, const StreamHeader& header);

/// Loads frames from
///  * a directory of P5 files (sorted by name) with optional `stream.hdr`,
///  * a single file holding one or more concatenated P5 images,
///  * a headerless raw file `foo` with sidecar `foo.hdr`.
/// Samples are divided by the container maximum (maxval, or 2^bitdepth - 1).
/// `fps` is taken from the sidecar when present, else `default_fps`.
FrameStream load_video(const std::filesystem::path& path,
                       std::optional<Geometry> expected_geometry = std::nullopt,
                       double default_fps = 200.0);

/// Writes `dir/frame_NNNNN.pgm` plus `dir/stream.hdr`. Samples are rounded to
/// the nearest code of the chosen depth (8 or 16).
void save_frames(const FrameStream& stream, const std::filesystem::path& dir, int bitdepth = 8);

/// Headerless big-endian (16-bit) or byte (8-bit) concatenation plus `path.hdr`.
void save_raw(const FrameStream& stream, const std::filesystem::path& path, int bitdepth = 8);

}  // namespace nretina
