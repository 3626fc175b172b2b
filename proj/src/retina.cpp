#include "nretina/retina.hpp"

#include <chrono>

namespace nretina {

namespace {

std::vector<GanglionLayer> make_ganglia(const RetinaParams& p) {
  std::vector<GanglionLayer> out;
  for (const Polarity pol : p.polarities()) {
    out.emplace_back(p.ganglion_for(pol), p.geometry, p.fps, p.format);
  }
  return out;
}

}  // namespace

FixedRetina::FixedRetina(const RetinaParams& params)
    : format_((params.validate(), params.format)),
      geometry_(params.geometry),
      input_math_(params.format),
      opl_(params.opl, params.geometry, params.fps, params.pixels_per_degree, params.format),
      bipolar_(params.bipolar, params.geometry, params.fps, params.pixels_per_degree,
               params.format),
      ganglia_(make_ganglia(params)) {}

RawFrame FixedRetina::quantize_input(const RealFrame& luminance) {
  require_geometry(geometry_, luminance.geometry());
  RawFrame out(geometry_);
  auto src = luminance.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = input_math_.from_real(src[i]);
  return out;
}

StageFrames<std::int64_t> FixedRetina::step(const RealFrame& luminance) {
  return step_raw(quantize_input(luminance));
}

StageFrames<std::int64_t> FixedRetina::step_raw(const RawFrame& luminance) {
  StageFrames<std::int64_t> out;
  out.opl = opl_.step(luminance);
  out.bipolar = bipolar_.step(out.opl.current);
  for (auto& g : ganglia_) {
    RawFrame current = g.current_step(out.bipolar);
    LifOutput lif = g.lif_step(current);
    out.spikes.insert(out.spikes.end(), lif.spikes.begin(), lif.spikes.end());
    out.channels.push_back({g.polarity(), std::move(current), std::move(lif.v_m)});
  }
  return out;
}

void FixedRetina::reset() {
  opl_.reset();
  bipolar_.reset();
  for (auto& g : ganglia_) g.reset();
  input_math_.reset_saturations();
}

std::map<std::string, std::uint64_t> FixedRetina::saturations() const {
  std::map<std::string, std::uint64_t> out;
  out["input"] = input_math_.saturations();
  out["opl"] = opl_.saturations();
  out["bipolar"] = bipolar_.saturations();
  for (const auto& g : ganglia_) {
    out[std::string("ganglion_") + std::string(to_string(g.polarity()))] = g.saturations();
  }
  return out;
}

RunRecord run_fixed(const FrameStream& stream, const RetinaParams& params,
                    const RecordOptions& options) {
  const RetinaParams p = params.with_stream(stream.geometry, stream.fps);
  FixedRetina retina(p);
  RunRecord rec;
  rec.geometry = stream.geometry;
  rec.fps = stream.fps;
  rec.probe = checked_probe(options, stream.geometry);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.frames.size(); ++i) {
    record_frame(rec, options, i, retina.step(stream.frames[i]), &retina.format());
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.saturations = retina.saturations();
  return rec;
}

}  // namespace nretina
