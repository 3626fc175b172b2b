#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nretina/ganglion.hpp"
#include "nretina/opl.hpp"
#include "nretina/plane.hpp"

namespace nretina {

/// Signal taps exposed by both pipelines.
enum class Layer { Center, Surround, Opl, Bipolar, GangOn, GangOff, VmOn, VmOff };

inline constexpr std::array<Layer, 8> kAllLayers = {
    Layer::Center, Layer::Surround, Layer::Opl,  Layer::Bipolar,
    Layer::GangOn, Layer::GangOff,  Layer::VmOn, Layer::VmOff};

/// File-friendly names: C, S, I_OPL, V_Bip, I_Gang_ON, I_Gang_OFF, V_m_ON, V_m_OFF.
std::string_view layer_name(Layer l);
std::optional<Layer> parse_layer(std::string_view name);

inline Layer current_layer(Polarity p) { return p == Polarity::On ? Layer::GangOn : Layer::GangOff; }
inline Layer membrane_layer(Polarity p) { return p == Polarity::On ? Layer::VmOn : Layer::VmOff; }

/// Output of one frame of either pipeline.
template <typename T>
struct StageFrames {
  struct Channel {
    Polarity polarity;
    Plane<T> current;
    Plane<T> membrane;
  };

  OplFrames<T> opl;
  Plane<T> bipolar;
  std::vector<Channel> channels;
  std::vector<SpikeEvent> spikes;

  const Plane<T>* layer(Layer l) const;
};

template <typename T>
const Plane<T>* StageFrames<T>::layer(Layer l) const {
  switch (l) {
    case Layer::Center:
      return &opl.center;
    case Layer::Surround:
      return &opl.surround;
    case Layer::Opl:
      return &opl.current;
    case Layer::Bipolar:
      return &bipolar;
    default:
      break;
  }
  for (const auto& ch : channels) {
    if (l == current_layer(ch.polarity)) return &ch.current;
    if (l == membrane_layer(ch.polarity)) return &ch.membrane;
  }
  return nullptr;
}

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline Pixel center_pixel(Geometry g) { return {g.width / 2, g.height / 2}; }

struct RecordOptions {
  /// Defaults to the frame center.
  std::optional<Pixel> probe;
  /// Keep every frame of every layer (memory heavy; meant for small streams).
  bool full_frames = false;
  std::vector<std::size_t> snapshot_frames;
};

/// Probe from `opts` (default: center); throws std::out_of_range outside `g`.
Pixel checked_probe(const RecordOptions& opts, Geometry g);

/// Everything a run produces, in real units.
struct RunRecord {
  Geometry geometry;
  double fps = 0.0;
  std::size_t frames = 0;
  Pixel probe;
  std::map<Layer, std::vector<double>> traces;
  std::map<Layer, std::vector<RealFrame>> stacks;
  std::map<std::pair<Layer, std::size_t>, RealFrame> snapshots;
  std::vector<SpikeEvent> spikes;
  /// Saturation events per stage (fixed-point runs only).
  std::map<std::string, std::uint64_t> saturations;
  double wall_seconds = 0.0;

  std::vector<SpikeEvent> spikes_of(Polarity p) const;
  const std::vector<double>& trace(Layer l) const;
};

/// Real-valued view of a frame for recording.
inline const RealFrame& as_real(const RealFrame& f, const FixedPointFormat*) { return f; }
RealFrame as_real(const RawFrame& f, const FixedPointFormat* fmt);

/// Appends one frame's outputs to `rec`.
template <typename T>
void record_frame(RunRecord& rec, const RecordOptions& opts, std::size_t index,
                  const StageFrames<T>& out, const FixedPointFormat* fmt) {
  const double scale = fmt ? fmt->lsb() : 1.0;
  for (const Layer l : kAllLayers) {
    const Plane<T>* plane = out.layer(l);
    if (!plane) continue;
    rec.traces[l].push_back(static_cast<double>((*plane)(rec.probe.x, rec.probe.y)) * scale);
    const bool snap = std::find(opts.snapshot_frames.begin(), opts.snapshot_frames.end(), index) !=
                      opts.snapshot_frames.end();
    if (opts.full_frames || snap) {
      RealFrame real = as_real(*plane, fmt);
      if (snap) rec.snapshots[{l, index}] = real;
      if (opts.full_frames) rec.stacks[l].push_back(std::move(real));
    }
  }
  rec.spikes.insert(rec.spikes.end(), out.spikes.begin(), out.spikes.end());
  rec.frames = index + 1;
}

}  // namespace nretina
