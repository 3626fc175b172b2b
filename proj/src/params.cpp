#include "nretina/params.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "nretina/quantized.hpp"

namespace nretina {

namespace {

struct RealField {
  const char* name;
  double& (*ref)(RetinaParams&);
  // Spatial/time constants that must stay strictly positive after quantization.
  bool positive;
};

#define NRETINA_FIELD(key, expr, pos) \
  RealField { key, [](RetinaParams& p) -> double& { return p.expr; }, pos }

const std::vector<RealField>& real_fields() {
  static const std::vector<RealField> fields = {
      NRETINA_FIELD("sigma_c", opl.sigma_c, true),
      NRETINA_FIELD("tau_c", opl.tau_c, true),
      NRETINA_FIELD("tau_u", opl.tau_u, true),
      NRETINA_FIELD("w_c", opl.w_c, false),
      NRETINA_FIELD("sigma_s", opl.sigma_s, true),
      NRETINA_FIELD("tau_s", opl.tau_s, true),
      NRETINA_FIELD("lambda_opl", opl.lambda_opl, false),
      NRETINA_FIELD("omega_opl", opl.omega_opl, false),
      NRETINA_FIELD("sigma_a", bipolar.sigma_a, true),
      NRETINA_FIELD("tau_a", bipolar.tau_a, true),
      NRETINA_FIELD("g0_a", bipolar.g0_a, true),
      NRETINA_FIELD("lambda_a", bipolar.lambda_a, false),
      NRETINA_FIELD("inputamp", bipolar.inputamp, false),
      NRETINA_FIELD("dt", bipolar.dt, true),
      NRETINA_FIELD("tau_g", ganglion.tau_g, true),
      NRETINA_FIELD("w_g", ganglion.w_g, false),
      NRETINA_FIELD("lambda_g", ganglion.lambda_g, false),
      NRETINA_FIELD("i0_g", ganglion.i0_g, true),
      NRETINA_FIELD("v0_g", ganglion.v0_g, false),
      NRETINA_FIELD("g_leak", ganglion.g_leak, false),
      NRETINA_FIELD("tau_step", ganglion.tau_step, true),
      NRETINA_FIELD("v_threshold", ganglion.v_threshold, true),
  };
  return fields;
}

#undef NRETINA_FIELD

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void RetinaParams::validate() const {
  opl.validate();
  bipolar.validate();
  ganglion.validate();
  format.validate();
  if (geometry.width <= 0 || geometry.height <= 0) {
    throw std::invalid_argument("geometry must be non-empty");
  }
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (!(pixels_per_degree > 0.0)) throw std::invalid_argument("pixels_per_degree must be positive");
}

RetinaParams RetinaParams::quantized(FixedPointFormat fmt) const {
  RetinaParams q = *this;
  for (const auto& f : real_fields()) {
    double& v = f.ref(q);
    v = f.positive ? quantized_positive(v, fmt) : quantized_value(v, fmt);
  }
  q.format = fmt;
  return q;
}

RetinaParams RetinaParams::with_stream(Geometry g, double new_fps) const {
  RetinaParams p = *this;
  p.geometry = g;
  if (new_fps != fps) p.bipolar.dt = 1.0 / new_fps;
  p.fps = new_fps;
  return p;
}

std::vector<Polarity> RetinaParams::polarities() const {
  switch (channels) {
    case Channels::On:
      return {Polarity::On};
    case Channels::Off:
      return {Polarity::Off};
    case Channels::Both:
      break;
  }
  return {Polarity::On, Polarity::Off};
}

GanglionParams RetinaParams::ganglion_for(Polarity p) const {
  GanglionParams g = ganglion;
  g.xi = p == Polarity::On ? +1 : -1;
  return g;
}

RetinaParams parse_config(const std::string& text, RetinaParams p) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool fps_set = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    bool handled = false;
    for (const auto& f : real_fields()) {
      if (key == f.name) {
        if (key == std::string("dt")) {
          throw ConfigError("dt is derived from fps; set fps instead");
        }
        f.ref(p) = parse_double(key, value);
        handled = true;
        break;
      }
    }
    if (handled) continue;
    if (key == "xi") {
      if (value == "both") {
        p.channels = Channels::Both;
      } else {
        const int xi = parse_int(key, value);
        if (xi != 1 && xi != -1) throw ConfigError("xi must be 1, -1 or both");
        p.channels = xi > 0 ? Channels::On : Channels::Off;
      }
    } else if (key == "refr") {
      p.ganglion.refr = parse_int(key, value);
    } else if (key == "frac_bits") {
      p.format.frac_bits = parse_int(key, value);
    } else if (key == "total_bits") {
      p.format.total_bits = parse_int(key, value);
    } else if (key == "pixels_per_degree") {
      p.pixels_per_degree = parse_double(key, value);
    } else if (key == "width") {
      p.geometry.width = parse_int(key, value);
    } else if (key == "height") {
      p.geometry.height = parse_int(key, value);
    } else if (key == "fps") {
      p.fps = parse_double(key, value);
      fps_set = true;
    } else {
      throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  if (fps_set) p.bipolar.dt = 1.0 / p.fps;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return p;
}

std::vector<std::pair<std::string, double>> model_constants(const RetinaParams& p) {
  RetinaParams copy = p;
  std::vector<std::pair<std::string, double>> out;
  for (const auto& f : real_fields()) out.emplace_back(f.name, f.ref(copy));
  return out;
}

std::string format_config(const RetinaParams& p) {
  std::ostringstream os;
  for (const auto& [name, value] : model_constants(p)) {
    if (name == "dt") continue;  // derived from fps
    os << name << "=" << format_double(value) << "\n";
  }
  os << "xi=" << (p.channels == Channels::Both ? "both" : p.channels == Channels::On ? "1" : "-1")
     << "\n";
  os << "refr=" << p.ganglion.refr << "\n";
  os << "frac_bits=" << p.format.frac_bits << "\n";
  os << "total_bits=" << p.format.total_bits << "\n";
  os << "pixels_per_degree=" << format_double(p.pixels_per_degree) << "\n";
  os << "width=" << p.geometry.width << "\n";
  os << "height=" << p.geometry.height << "\n";
  os << "fps=" << format_double(p.fps) << "\n";
  return os.str();
}

}  // namespace nretina
