#include "nretina/record.hpp"

#include <cmath>
#include <stdexcept>

namespace nretina {

namespace {

constexpr std::array<std::pair<Layer, std::string_view>, 8> kNames = {{
    {Layer::Center, "C"},
    {Layer::Surround, "S"},
    {Layer::Opl, "I_OPL"},
    {Layer::Bipolar, "V_Bip"},
    {Layer::GangOn, "I_Gang_ON"},
    {Layer::GangOff, "I_Gang_OFF"},
    {Layer::VmOn, "V_m_ON"},
    {Layer::VmOff, "V_m_OFF"},
}};

}  // namespace

std::string_view layer_name(Layer l) {
  for (const auto& [layer, name] : kNames) {
    if (layer == l) return name;
  }
  return "?";
}

std::optional<Layer> parse_layer(std::string_view name) {
  for (const auto& [layer, n] : kNames) {
    if (n == name) return layer;
  }
  return std::nullopt;
}

std::vector<SpikeEvent> RunRecord::spikes_of(Polarity p) const {
  std::vector<SpikeEvent> out;
  for (const auto& s : spikes) {
    if (s.polarity == p) out.push_back(s);
  }
  return out;
}

const std::vector<double>& RunRecord::trace(Layer l) const {
  const auto it = traces.find(l);
  if (it == traces.end()) {
    throw std::out_of_range("run has no trace for layer " + std::string(layer_name(l)));
  }
  return it->second;
}

Pixel checked_probe(const RecordOptions& opts, Geometry g) {
  const Pixel p = opts.probe.value_or(center_pixel(g));
  if (p.x < 0 || p.y < 0 || p.x >= g.width || p.y >= g.height) {
    throw std::out_of_range("probe pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") outside " + to_string(g));
  }
  return p;
}

RealFrame as_real(const RawFrame& f, const FixedPointFormat* fmt) {
  RealFrame out(f.geometry());
  const int frac = fmt ? fmt->frac_bits : 0;
  auto src = f.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::ldexp(static_cast<double>(src[i]), -frac);
  return out;
}

}  // namespace nretina
