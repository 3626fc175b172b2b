#include "nretina/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nretina/io.hpp"

namespace nretina {

namespace {

// Slack for t*fps products that land a few ulps below an integer.
constexpr double kIndexEps = 1e-9;

void require_stream_args(Geometry g, double fps) {
  if (g.width <= 0 || g.height <= 0) {
    throw std::invalid_argument("stimulus geometry must be non-empty, got " + to_string(g));
  }
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
}

template <typename Fn>
FrameStream uniform_stream(Geometry g, double fps, std::size_t n, Fn&& value_at_frame) {
  FrameStream s;
  s.geometry = g;
  s.fps = fps;
  s.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.frames.emplace_back(g, std::clamp(value_at_frame(i), 0.0, 1.0));
  }
  return s;
}

}  // namespace

void FrameStream::validate() const {
  require_stream_args(geometry, fps);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    require_geometry(geometry, frames[i].geometry());
    for (const double v : frames[i].data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("frame " + std::to_string(i) +
                                    " has a luminance sample outside [0, 1]");
      }
    }
  }
}

std::size_t frame_count(double duration, double fps) {
  return static_cast<std::size_t>(std::llround(duration * fps));
}

std::size_t frame_index(double t, double fps) {
  return static_cast<std::size_t>(std::floor(t * fps + kIndexEps));
}

void ChirpSpec::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(baseline) || !in_unit(pulse_low) || !in_unit(pulse_high)) {
    throw std::invalid_argument("chirp levels must lie in [0, 1]");
  }
  for (const double d : pulse_durations) {
    if (!(d > 0.0)) throw std::invalid_argument("chirp pulse durations must be positive");
  }
  if (!(baseline_duration > 0.0) || !(freq_sweep_duration > 0.0) ||
      !(amp_sweep_duration > 0.0) || !(total_duration > 0.0)) {
    throw std::invalid_argument("chirp durations must be positive");
  }
  if (freq_start < 0.0 || freq_start > freq_end) {
    throw std::invalid_argument("chirp frequency sweep needs 0 <= f_start <= f_end");
  }
  if (amp_sweep_freq < 0.0) throw std::invalid_argument("chirp amplitude-sweep frequency < 0");
  const double headroom = std::min(baseline, 1.0 - baseline);
  if (freq_sweep_amplitude < 0.0 || amp_sweep_max < 0.0 ||
      freq_sweep_amplitude > headroom + 1e-12 || amp_sweep_max > headroom + 1e-12) {
    throw std::invalid_argument("chirp oscillation amplitudes must keep samples in [0, 1]");
  }
}

double ChirpSpec::luminance(double t) const {
  using std::numbers::pi;
  double edge = baseline_duration;
  if (t < edge) return baseline;
  const double levels[3] = {pulse_low, pulse_high, pulse_low};
  for (int i = 0; i < 3; ++i) {
    if (t < edge + pulse_durations[i]) return levels[i];
    edge += pulse_durations[i];
  }
  if (t < edge + freq_sweep_duration) {
    const double u = t - edge;
    const double phase =
        2.0 * pi * (freq_start * u + (freq_end - freq_start) * u * u / (2.0 * freq_sweep_duration));
    return std::clamp(baseline + freq_sweep_amplitude * std::sin(phase), 0.0, 1.0);
  }
  edge += freq_sweep_duration;
  if (t < edge + amp_sweep_duration) {
    const double u = t - edge;
    const double amp = amp_sweep_max * u / amp_sweep_duration;
    return std::clamp(baseline + amp * std::sin(2.0 * pi * amp_sweep_freq * u), 0.0, 1.0);
  }
  return baseline;
}

FrameStream make_chirp(const ChirpSpec& spec, Geometry geometry, double fps) {
  require_stream_args(geometry, fps);
  spec.validate();
  return uniform_stream(geometry, fps, frame_count(spec.total_duration, fps), [&](std::size_t i) {
    return spec.luminance(static_cast<double>(i) / fps);
  });
}

FrameStream make_pulse(double low, double high, double t_on, double t_off, double duration,
                       Geometry geometry, double fps) {
  require_stream_args(geometry, fps);
  if (!(0.0 <= low && low <= high && high <= 1.0)) {
    throw std::invalid_argument("pulse needs 0 <= low <= high <= 1");
  }
  if (!(0.0 <= t_on && t_on < t_off && t_off <= duration)) {
    throw std::invalid_argument("pulse needs 0 <= t_on < t_off <= duration");
  }
  const std::size_t on = frame_index(t_on, fps);
  const std::size_t off = frame_index(t_off, fps);
  return uniform_stream(geometry, fps, frame_count(duration, fps),
                        [&](std::size_t i) { return (i >= on && i < off) ? high : low; });
}

FrameStream make_impulse(double amplitude, double t_hit, double duration, Geometry geometry,
                         double fps) {
  require_stream_args(geometry, fps);
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
    throw std::invalid_argument("impulse amplitude must lie in [0, 1]");
  }
  const std::size_t n = frame_count(duration, fps);
  if (!(t_hit >= 0.0) || frame_index(t_hit, fps) >= n) {
    throw std::invalid_argument("impulse time lies outside the stream duration");
  }
  const std::size_t hit = frame_index(t_hit, fps);
  return uniform_stream(geometry, fps, n,
                        [&](std::size_t i) { return i == hit ? amplitude : 0.0; });
}

FrameStream make_flicker(double mean, double amplitude, double freq, double duration,
                         Geometry geometry, double fps) {
  require_stream_args(geometry, fps);
  if (amplitude < 0.0 || mean - amplitude < 0.0 || mean + amplitude > 1.0) {
    throw std::invalid_argument("flicker must stay within [0, 1]");
  }
  if (!(duration > 0.0)) throw std::invalid_argument("flicker duration must be positive");
  return uniform_stream(geometry, fps, frame_count(duration, fps), [&](std::size_t i) {
    return mean + amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fps);
  });
}

// ---------------------------------------------------------------------------

StreamHeader read_stream_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw VideoError("cannot open stream header " + path.string());
  StreamHeader h;
  if (!(in >> h.geometry.width >> h.geometry.height >> h.fps >> h.bitdepth)) {
    throw VideoError("malformed stream header " + path.string() +
                     " (expected `width height fps bitdepth`)");
  }
  if (h.geometry.width <= 0 || h.geometry.height <= 0 || !(h.fps > 0.0)) {
    throw VideoError("stream header " + path.string() + " has invalid geometry or fps");
  }
  if (h.bitdepth != 8 && h.bitdepth != 16) {
    throw UnsupportedDepth("unsupported bit depth " + std::to_string(h.bitdepth));
  }
  return h;
}

void write_stream_header(const std::filesystem::path& path, const StreamHeader& h) {
  std::ostringstream os;
  os.precision(17);
  os << h.geometry.width << " " << h.geometry.height << " " << h.fps << " " << h.bitdepth << "\n";
  io::write_file_atomic(path, os.str());
}

namespace {

RealFrame to_real_frame(const io::PgmImage& img) {
  RealFrame f(img.pixels.geometry());
  const double scale = 1.0 / img.maxval;
  auto src = img.pixels.data();
  auto dst = f.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = std::min(1.0, src[i] * scale);
  }
  return f;
}

void append_pgm_images(std::istream& in, const std::string& name, FrameStream& out) {
  while (auto img = io::read_pgm(in)) {
    RealFrame f = to_real_frame(*img);
    if (out.frames.empty() && out.geometry.pixels() == 0) out.geometry = f.geometry();
    if (!(f.geometry() == out.geometry)) {
      throw VideoGeometryMismatch(name + ": frame geometry " + to_string(f.geometry()) +
                                  " differs from " + to_string(out.geometry));
    }
    out.frames.push_back(std::move(f));
  }
}

FrameStream load_raw(const std::filesystem::path& path) {
  auto hdr_path = path;
  hdr_path += ".hdr";
  const StreamHeader h = read_stream_header(hdr_path);
  const std::string bytes = io::read_file(path);
  const std::size_t sample_bytes = h.bitdepth == 16 ? 2 : 1;
  const std::size_t frame_bytes = h.geometry.pixels() * sample_bytes;
  if (bytes.size() % frame_bytes != 0) {
    throw TruncatedVideo(path.string() + ": " + std::to_string(bytes.size()) +
                         " bytes is not a whole number of " + std::to_string(frame_bytes) +
                         "-byte frames");
  }
  FrameStream s;
  s.geometry = h.geometry;
  s.fps = h.fps;
  const double scale = 1.0 / ((1 << h.bitdepth) - 1);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t off = 0; off < bytes.size(); off += frame_bytes) {
    RealFrame f(h.geometry);
    auto d = f.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const unsigned v = sample_bytes == 2 ? (p[off + 2 * i] << 8) | p[off + 2 * i + 1]
                                           : p[off + i];
      d[i] = v * scale;
    }
    s.frames.push_back(std::move(f));
  }
  return s;
}

}  // namespace

FrameStream load_video(const std::filesystem::path& path, std::optional<Geometry> expected,
                       double default_fps) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw VideoError("no such file or directory: " + path.string());

  FrameStream s;
  s.fps = default_fps;
  if (fs::is_directory(path)) {
    if (fs::exists(path / "stream.hdr")) {
      const StreamHeader h = read_stream_header(path / "stream.hdr");
      s.fps = h.fps;
      s.geometry = h.geometry;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      append_pgm_images(in, f.string(), s);
    }
  } else if (path.extension() == ".pgm") {
    std::ifstream in(path, std::ios::binary);
    append_pgm_images(in, path.string(), s);
  } else {
    s = load_raw(path);
  }

  if (expected && !(s.geometry == *expected)) {
    throw VideoGeometryMismatch(path.string() + ": expected geometry " + to_string(*expected) +
                                ", file has " + to_string(s.geometry));
  }
  return s;
}

namespace {

std::uint16_t encode_sample(double v, int maxval) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
}

}  // namespace

void save_frames(const FrameStream& stream, const std::filesystem::path& dir, int bitdepth) {
  if (bitdepth != 8 && bitdepth != 16) {
    throw UnsupportedDepth("unsupported bit depth " + std::to_string(bitdepth));
  }
  std::filesystem::create_directories(dir);
  const int maxval = (1 << bitdepth) - 1;
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    const RealFrame& f = stream.frames[i];
    Plane<std::uint16_t> px(f.geometry());
    auto src = f.data();
    auto dst = px.data();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = encode_sample(src[k], maxval);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05zu.pgm", i);
    io::write_file_atomic(dir / name, io::encode_pgm(px, maxval));
  }
  write_stream_header(dir / "stream.hdr", {stream.geometry, stream.fps, bitdepth});
}

void save_raw(const FrameStream& stream, const std::filesystem::path& path, int bitdepth) {
  if (bitdepth != 8 && bitdepth != 16) {
    throw UnsupportedDepth("unsupported bit depth " + std::to_string(bitdepth));
  }
  const int maxval = (1 << bitdepth) - 1;
  std::string bytes;
  for (const auto& f : stream.frames) {
    for (const double v : f.data()) {
      const auto code = encode_sample(v, maxval);
      if (bitdepth == 16) bytes.push_back(static_cast<char>(code >> 8));
      bytes.push_back(static_cast<char>(code & 0xff));
    }
  }
  io::write_file_atomic(path, bytes);
  auto hdr = path;
  hdr += ".hdr";
  write_stream_header(hdr, {stream.geometry, stream.fps, bitdepth});
}

}  // namespace nretina
