#include "nretina/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "nretina/io.hpp"
#include "nretina/reference_model.hpp"
#include "nretina/retina.hpp"
#include "nretina/stimulus.hpp"

namespace nretina::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string trace_file(Layer l) { return "trace_" + std::string(layer_name(l)) + ".csv"; }

std::string snapshot_file(Layer l, std::size_t frame) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%s_%05zu.pgm", std::string(layer_name(l)).c_str(), frame);
  return buf;
}

std::string trace_csv(const std::vector<double>& values) {
  std::ostringstream os;
  os << "frame,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << i << "," << num(values[i]) << "\n";
  return os.str();
}

/// Linear map of the frame range onto 16-bit codes; the range goes in a comment.
std::string snapshot_pgm(const RealFrame& f) {
  const auto data = f.data();
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Plane<std::uint16_t> pixels(f.geometry());
  auto dst = pixels.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    dst[i] = hi > lo ? static_cast<std::uint16_t>(std::lround((data[i] - lo) / (hi - lo) * 65535.0))
                     : 0;
  }
  return io::encode_pgm(pixels, 65535, "range " + num(lo) + " " + num(hi));
}

std::string manifest_text(const RunRecord& rec, const RetinaParams& requested,
                          const ManifestInfo& info, const std::vector<std::string>& files) {
  const RetinaParams quantized = requested.quantized();
  std::ostringstream os;
  os << "mode=" << info.mode << "\n";
  os << "input=" << info.input << "\n";
  os << "width=" << rec.geometry.width << "\n";
  os << "height=" << rec.geometry.height << "\n";
  os << "fps=" << num(rec.fps) << "\n";
  os << "frames=" << rec.frames << "\n";
  os << "probe.x=" << rec.probe.x << "\n";
  os << "probe.y=" << rec.probe.y << "\n";
  os << "format=" << requested.format.to_string() << "\n";
  os << "format.total_bits=" << requested.format.total_bits << "\n";
  os << "format.frac_bits=" << requested.format.frac_bits << "\n";
  if (info.mode == "reference") os << "reference.params=" << info.reference_params << "\n";
  const auto req = model_constants(requested);
  const auto q = model_constants(quantized);
  for (std::size_t i = 0; i < req.size(); ++i) {
    os << "param." << req[i].first << ".requested=" << num(req[i].second) << "\n";
    os << "param." << q[i].first << ".quantized=" << num(q[i].second) << "\n";
  }
  os << "param.refr=" << requested.ganglion.refr << "\n";
  os << "param.pixels_per_degree=" << num(requested.pixels_per_degree) << "\n";
  os << "channels="
     << (requested.channels == Channels::Both ? "both"
                                               : requested.channels == Channels::On ? "ON" : "OFF")
     << "\n";
  for (const auto& [stage, count] : rec.saturations) os << "saturation." << stage << "=" << count << "\n";
  os << "spikes=" << rec.spikes.size() << "\n";
  for (std::size_t i = 0; i < files.size(); ++i) os << "output." << i << "=" << files[i] << "\n";
  os << "wall_seconds=" << num(rec.wall_seconds) << "\n";
  os << "throughput_fps="
     << num(rec.wall_seconds > 0 ? static_cast<double>(rec.frames) / rec.wall_seconds : 0.0) << "\n";
  return os.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::optional<Pixel> parse_probe(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("--probe expects X,Y");
  try {
    return Pixel{std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw UsageError("--probe expects X,Y");
  }
}

RetinaParams load_params(const std::string& config_path) {
  if (config_path.empty()) return RetinaParams{};
  return parse_config(io::read_file(config_path));
}

// --- subcommands -----------------------------------------------------------

struct StimulusArgs {
  std::string kind;
  std::string out;
  int width = 128;
  int height = 128;
  double fps = 200.0;
  double duration = -1.0;
  double low = 0.0;
  double high = 1.0;
  double t_on = 0.5;
  double t_off = 1.0;
  double amplitude = -1.0;
  double t_hit = 0.1;
  double mean = 0.5;
  double freq = 2.0;
  int bitdepth = 8;
  std::string container = "pgm";
};

int do_stimulus(const StimulusArgs& a, std::ostream& out) {
  const Geometry g{a.width, a.height};
  FrameStream s;
  if (a.kind == "chirp") {
    ChirpSpec spec;
    if (a.duration > 0) spec.total_duration = a.duration;
    s = make_chirp(spec, g, a.fps);
  } else if (a.kind == "pulse") {
    s = make_pulse(a.low, a.high, a.t_on, a.t_off, a.duration > 0 ? a.duration : 2.0, g, a.fps);
  } else if (a.kind == "impulse") {
    s = make_impulse(a.amplitude >= 0 ? a.amplitude : 1.0, a.t_hit,
                     a.duration > 0 ? a.duration : 1.0, g, a.fps);
  } else if (a.kind == "flicker") {
    s = make_flicker(a.mean, a.amplitude >= 0 ? a.amplitude : 0.25, a.freq,
                     a.duration > 0 ? a.duration : 2.0, g, a.fps);
  } else {
    throw UsageError("unknown stimulus kind '" + a.kind + "'");
  }
  if (a.container == "pgm") {
    save_frames(s, a.out, a.bitdepth);
  } else {
    save_raw(s, a.out, a.bitdepth);
  }
  out << "wrote " << s.size() << " frames (" << to_string(g) << " @ " << num(a.fps) << " fps) to "
      << a.out << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string input;
  std::string config;
  std::string mode = "both";
  std::string out;
  std::string probe;
  std::vector<std::size_t> snapshots;
  std::string reference_params = "requested";
};

int do_run(const RunArgs& a, std::ostream& out) {
  const RetinaParams base = load_params(a.config);
  const FrameStream stream = load_video(a.input, std::nullopt, base.fps);
  if (stream.empty()) throw UsageError("input stream '" + a.input + "' has no frames");
  stream.validate();
  RecordOptions opts;
  opts.probe = parse_probe(a.probe);
  opts.snapshot_frames = a.snapshots;
  for (const std::size_t f : a.snapshots) {
    if (f >= stream.size()) {
      throw UsageError("snapshot frame " + std::to_string(f) + " beyond stream length " +
                       std::to_string(stream.size()));
    }
  }
  const RetinaParams params = base.with_stream(stream.geometry, stream.fps);
  checked_probe(opts, stream.geometry);

  // Both pipelines finish before anything is written, so a failure leaves no
  // partial output behind.
  std::vector<std::pair<ManifestInfo, RunRecord>> runs;
  if (a.mode == "fixed" || a.mode == "both") {
    runs.emplace_back(ManifestInfo{"fixed", a.input, {}}, run_fixed(stream, params, opts));
  }
  if (a.mode == "reference" || a.mode == "both") {
    const RetinaParams ref_params =
        a.reference_params == "quantized" ? params.quantized() : params;
    runs.emplace_back(ManifestInfo{"reference", a.input, a.reference_params},
                      run_reference(stream, ref_params, opts));
  }
  for (const auto& [info, rec] : runs) {
    const fs::path dir = fs::path(a.out) / info.mode;
    write_run(rec, params, info, dir);
    out << info.mode << ": " << rec.frames << " frames, " << rec.spikes.size() << " spikes, "
        << std::lround(rec.wall_seconds > 0 ? rec.frames / rec.wall_seconds : 0.0) << " fps -> "
        << dir.string() << "\n";
  }
  return kExitOk;
}

struct CompareArgs {
  std::string a;
  std::string b;
  std::string out;
  std::vector<std::string> min_ve;
  int max_lag = 0;
  double min_spikes = 0.9;
  int slack = 1;
  bool no_gate = false;
};

int do_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  Thresholds t;
  t.max_abs_lag = a.max_lag;
  t.min_spike_agreement = a.min_spikes;
  t.slack = a.slack;
  for (const auto& spec : a.min_ve) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--min-ve expects STAGE=VALUE");
    const std::string stage = spec.substr(0, eq);
    if (!parse_layer(stage)) throw UsageError("unknown stage '" + stage + "'");
    try {
      t.min_variance_explained[stage] = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--min-ve expects STAGE=VALUE");
    }
  }
  const ComparisonReport report = compare_runs(a.a, a.b, t.slack);
  out << report.to_text();
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    io::write_file_atomic(fs::path(a.out) / "report.txt", report.to_text());
    io::write_file_atomic(fs::path(a.out) / "report.csv", report.to_csv());
  }
  if (a.no_gate) return kExitOk;
  const auto failures = threshold_failures(report, t);
  for (const auto& f : failures) err << "threshold failed: " << f << "\n";
  return failures.empty() ? kExitOk : kExitThreshold;
}

int do_params(const std::string& config, std::ostream& out) {
  const RetinaParams p = load_params(config);
  const auto req = model_constants(p);
  const auto q = model_constants(p.quantized());
  out << "# format " << p.format.to_string() << "\n";
  out << "name,requested,quantized\n";
  for (std::size_t i = 0; i < req.size(); ++i) {
    out << req[i].first << "," << num(req[i].second) << "," << num(q[i].second) << "\n";
  }
  return kExitOk;
}

}  // namespace

bool is_volatile_manifest_key(const std::string& key) {
  return key == "wall_seconds" || key == "throughput_fps" || key == "timestamp";
}

void write_run(const RunRecord& rec, const RetinaParams& requested, const ManifestInfo& info,
               const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  for (const auto& [layer, values] : rec.traces) {
    files.push_back(trace_file(layer));
    io::write_file_atomic(dir / files.back(), trace_csv(values));
  }
  files.push_back("spikes.csv");
  io::write_file_atomic(dir / files.back(), spikes_csv(rec.spikes));
  for (const auto& [key, frame] : rec.snapshots) {
    files.push_back(snapshot_file(key.first, key.second));
    io::write_file_atomic(dir / files.back(), snapshot_pgm(frame));
  }
  io::write_file_atomic(dir / "manifest.txt", manifest_text(rec, requested, info, files));
}

std::string spikes_csv(const std::vector<SpikeEvent>& spikes) {
  std::ostringstream os;
  os << "frame,x,y,polarity\n";
  for (const auto& s : spikes) {
    os << s.frame << "," << s.x << "," << s.y << "," << to_string(s.polarity) << "\n";
  }
  return os.str();
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
  const fs::path file = dir / "manifest.txt";
  if (!fs::exists(file)) throw UsageError("no manifest.txt in " + dir.string());
  std::map<std::string, std::string> out;
  for (const auto& line : split_lines(io::read_file(file))) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::vector<double> read_trace(const fs::path& file) {
  const auto lines = split_lines(io::read_file(file));
  if (lines.empty() || lines[0] != "frame,value") {
    throw UsageError(file.string() + ": expected header 'frame,value'");
  }
  std::vector<double> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) throw UsageError(file.string() + ": malformed line");
    out.push_back(std::stod(lines[i].substr(comma + 1)));
  }
  return out;
}

std::vector<SpikeEvent> read_spikes(const fs::path& file) {
  const auto lines = split_lines(io::read_file(file));
  if (lines.empty() || lines[0] != "frame,x,y,polarity") {
    throw UsageError(file.string() + ": expected header 'frame,x,y,polarity'");
  }
  std::vector<SpikeEvent> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream in(lines[i]);
    std::string f, x, y, pol;
    std::getline(in, f, ',');
    std::getline(in, x, ',');
    std::getline(in, y, ',');
    std::getline(in, pol);
    const auto p = parse_polarity(pol);
    if (!p) throw UsageError(file.string() + ": bad polarity '" + pol + "'");
    out.push_back({std::stoi(f), std::stoi(x), std::stoi(y), *p});
  }
  return out;
}

ComparisonReport compare_runs(const fs::path& a, const fs::path& b, int slack) {
  const auto ma = read_manifest(a);
  const auto mb = read_manifest(b);
  for (const char* key : {"width", "height", "frames", "probe.x", "probe.y"}) {
    if (ma.at(key) != mb.at(key)) {
      throw UsageError(std::string("runs differ in ") + key + ": " + ma.at(key) + " vs " +
                       mb.at(key));
    }
  }
  ComparisonReport report;
  for (const Layer l : kAllLayers) {
    const fs::path fa = a / trace_file(l);
    const fs::path fb = b / trace_file(l);
    if (!fs::exists(fa) || !fs::exists(fb)) continue;
    const auto ta = read_trace(fa);
    const auto tb = read_trace(fb);
    if (ta.size() != tb.size()) throw UsageError("trace lengths differ for " + std::string(layer_name(l)));
    if (ta.size() < 2) continue;
    report.stages[std::string(layer_name(l))] = compare_traces(ta, tb);
  }
  const auto sa = read_spikes(a / "spikes.csv");
  const auto sb = read_spikes(b / "spikes.csv");
  for (const Polarity p : {Polarity::On, Polarity::Off}) {
    std::vector<SpikeEvent> pa, pb;
    std::copy_if(sa.begin(), sa.end(), std::back_inserter(pa),
                 [&](const SpikeEvent& s) { return s.polarity == p; });
    std::copy_if(sb.begin(), sb.end(), std::back_inserter(pb),
                 [&](const SpikeEvent& s) { return s.polarity == p; });
    const std::string name(to_string(p));
    report.spike_agreement[name] = spike_agreement(pa, pb, slack);
    report.spike_agreement[name + ".reverse"] = spike_agreement(pb, pa, slack);
  }
  return report;
}

std::vector<std::string> threshold_failures(const ComparisonReport& report, const Thresholds& t) {
  std::vector<std::string> out;
  for (const auto& [stage, floor] : t.min_variance_explained) {
    const auto it = report.stages.find(stage);
    if (it == report.stages.end()) continue;
    const double ve = it->second.variance_explained;
    if (!(ve >= floor)) {
      out.push_back(stage + " variance explained " + num(ve) + " < " + num(floor));
    }
  }
  for (const auto& stage : t.zero_lag_stages) {
    const auto it = report.stages.find(stage);
    if (it == report.stages.end()) continue;
    if (std::abs(it->second.best_lag) > t.max_abs_lag) {
      out.push_back(stage + " lag " + std::to_string(it->second.best_lag));
    }
  }
  for (const auto& [pol, v] : report.spike_agreement) {
    if (!(v >= t.min_spike_agreement)) {
      out.push_back(pol + " spike agreement " + num(v) + " < " + num(t.min_spike_agreement));
    }
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fixed-point retina emulator and double-precision reference model", "retina"};
  app.require_subcommand(1);

  StimulusArgs st;
  auto* stim = app.add_subcommand("stimulus", "Generate a stimulus stream");
  stim->add_option("kind", st.kind, "chirp | pulse | impulse | flicker")
      ->required()
      ->check(CLI::IsMember({"chirp", "pulse", "impulse", "flicker"}));
  stim->add_option("--out", st.out, "Output directory (pgm) or file (raw)")->required();
  stim->add_option("--width", st.width)->capture_default_str();
  stim->add_option("--height", st.height)->capture_default_str();
  stim->add_option("--fps", st.fps)->capture_default_str();
  stim->add_option("--duration", st.duration, "Seconds (kind-specific default)");
  stim->add_option("--low", st.low, "Pulse low level")->capture_default_str();
  stim->add_option("--high", st.high, "Pulse high level")->capture_default_str();
  stim->add_option("--t-on", st.t_on, "Pulse onset (s)")->capture_default_str();
  stim->add_option("--t-off", st.t_off, "Pulse offset (s)")->capture_default_str();
  stim->add_option("--amplitude", st.amplitude, "Impulse or flicker amplitude");
  stim->add_option("--t-hit", st.t_hit, "Impulse time (s)")->capture_default_str();
  stim->add_option("--mean", st.mean, "Flicker mean")->capture_default_str();
  stim->add_option("--freq", st.freq, "Flicker frequency (Hz)")->capture_default_str();
  stim->add_option("--bitdepth", st.bitdepth)->check(CLI::IsMember({8, 16}))->capture_default_str();
  stim->add_option("--container", st.container)
      ->check(CLI::IsMember({"pgm", "raw"}))
      ->capture_default_str();

  RunArgs ra;
  auto* runc = app.add_subcommand("run", "Run the fixed-point and/or reference pipeline");
  runc->add_option("--input", ra.input, "PGM directory, multi-image PGM or raw file")->required();
  runc->add_option("--config", ra.config, "key=value parameter file");
  runc->add_option("--mode", ra.mode)
      ->check(CLI::IsMember({"fixed", "reference", "both"}))
      ->capture_default_str();
  runc->add_option("--out", ra.out, "Output directory")->required();
  runc->add_option("--probe", ra.probe, "Probe pixel X,Y (default: center)");
  runc->add_option("--snapshot", ra.snapshots, "Frame index for full-frame PGM16 dumps");
  runc->add_option("--reference-params", ra.reference_params,
                   "Run the reference on requested or quantized constants")
      ->check(CLI::IsMember({"requested", "quantized"}))
      ->capture_default_str();

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Compare two run directories");
  cmp->add_option("reference", ca.a, "Reference run directory")->required();
  cmp->add_option("test", ca.b, "Test run directory")->required();
  cmp->add_option("--out", ca.out, "Write report.txt and report.csv here");
  cmp->add_option("--min-ve", ca.min_ve, "Override a variance-explained floor, STAGE=VALUE");
  cmp->add_option("--max-lag", ca.max_lag, "Largest accepted |lag|")->capture_default_str();
  cmp->add_option("--min-spike-agreement", ca.min_spikes)->capture_default_str();
  cmp->add_option("--slack", ca.slack, "Spike matching slack in frames")->capture_default_str();
  cmp->add_flag("--no-gate", ca.no_gate, "Report only, never fail on thresholds");

  std::string params_config;
  auto* par = app.add_subcommand("params", "Print requested and quantized model constants");
  par->add_option("--config", params_config, "key=value parameter file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stim) return do_stimulus(st, out);
    if (*runc) return do_run(ra, out);
    if (*cmp) return do_compare(ca, out, err);
    if (*par) return do_params(params_config, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nretina::cli
