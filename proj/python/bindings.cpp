#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nretina/cli.hpp"
#include "nretina/fixedpoint.hpp"
#include "nretina/metrics.hpp"
#include "nretina/params.hpp"
#include "nretina/reference_model.hpp"
#include "nretina/retina.hpp"
#include "nretina/stimulus.hpp"

namespace py = pybind11;
using namespace nretina;

namespace {

using Video = py::array_t<double, py::array::c_style | py::array::forcecast>;

Video to_array(const FrameStream& s) {
  Video out({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.geometry.height),
             static_cast<py::ssize_t>(s.geometry.width)});
  double* dst = out.mutable_data();
  for (const auto& f : s.frames) dst = std::copy(f.data().begin(), f.data().end(), dst);
  return out;
}

FrameStream from_array(const Video& video, double fps) {
  if (video.ndim() != 3) throw std::invalid_argument("video must have shape (frames, height, width)");
  FrameStream s;
  s.fps = fps;
  s.geometry = {static_cast<int>(video.shape(2)), static_cast<int>(video.shape(1))};
  const double* src = video.data();
  for (py::ssize_t n = 0; n < video.shape(0); ++n) {
    RealFrame f(s.geometry);
    std::copy(src, src + f.size(), f.data().begin());
    src += f.size();
    s.frames.push_back(std::move(f));
  }
  s.validate();
  return s;
}

py::dict to_dict(const RunRecord& rec) {
  py::dict traces;
  for (const auto& [layer, values] : rec.traces) {
    py::array_t<double> trace(std::vector<py::ssize_t>{static_cast<py::ssize_t>(values.size())});
    std::copy(values.begin(), values.end(), trace.mutable_data());
    traces[py::str(std::string(layer_name(layer)))] = trace;
  }
  py::array_t<int> spikes({static_cast<py::ssize_t>(rec.spikes.size()), py::ssize_t{4}});
  auto s = spikes.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rec.spikes.size(); ++i) {
    const auto& e = rec.spikes[i];
    s(i, 0) = e.frame;
    s(i, 1) = e.x;
    s(i, 2) = e.y;
    s(i, 3) = e.polarity == Polarity::On ? 1 : -1;
  }
  py::dict out;
  out["traces"] = traces;
  out["spikes"] = spikes;
  out["probe"] = py::make_tuple(rec.probe.x, rec.probe.y);
  out["frames"] = rec.frames;
  out["saturations"] = rec.saturations;
  out["wall_seconds"] = rec.wall_seconds;
  return out;
}

std::vector<SpikeEvent> to_spikes(const py::array_t<int, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 4) throw std::invalid_argument("spikes must have shape (n, 4)");
  auto r = a.unchecked<2>();
  std::vector<SpikeEvent> out;
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    out.push_back({r(i, 0), r(i, 1), r(i, 2), r(i, 3) > 0 ? Polarity::On : Polarity::Off});
  }
  return out;
}

RetinaParams params_for(const std::string& config, const FrameStream& s) {
  return parse_config(config).with_stream(s.geometry, s.fps);
}

}  // namespace

PYBIND11_MODULE(_nretina, m) {
  m.doc() = "Fixed-point retina emulator and double-precision reference";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DegenerateKernel>(m, "DegenerateKernel", PyExc_ValueError);

  m.def(
      "quantize",
      [](double x, int total_bits, int frac_bits) {
        const FixedPointValue v = quantize(x, FixedPointFormat{total_bits, frac_bits});
        return py::make_tuple(v.raw(), v.to_real(), v.saturated());
      },
      py::arg("x"), py::arg("total_bits") = 19, py::arg("frac_bits") = 10,
      "Returns (raw, value, saturated).");

  m.def(
      "chirp",
      [](int width, int height, double fps, double duration) {
        ChirpSpec spec;
        spec.total_duration = duration;
        return to_array(make_chirp(spec, {width, height}, fps));
      },
      py::arg("width") = 128, py::arg("height") = 128, py::arg("fps") = 200.0,
      py::arg("duration") = 7.0);
  m.def(
      "pulse",
      [](double low, double high, double t_on, double t_off, double duration, int width,
         int height, double fps) {
        return to_array(make_pulse(low, high, t_on, t_off, duration, {width, height}, fps));
      },
      py::arg("low"), py::arg("high"), py::arg("t_on"), py::arg("t_off"), py::arg("duration"),
      py::arg("width"), py::arg("height"), py::arg("fps") = 200.0);

  m.def(
      "run_fixed",
      [](const Video& video, double fps, const std::string& config) {
        const FrameStream s = from_array(video, fps);
        return to_dict(run_fixed(s, params_for(config, s)));
      },
      py::arg("video"), py::arg("fps") = 200.0, py::arg("config") = "");
  m.def(
      "run_reference",
      [](const Video& video, double fps, const std::string& config, bool quantized) {
        const FrameStream s = from_array(video, fps);
        RetinaParams p = params_for(config, s);
        if (quantized) p = p.quantized();
        return to_dict(run_reference(s, p));
      },
      py::arg("video"), py::arg("fps") = 200.0, py::arg("config") = "",
      py::arg("quantized") = false);

  m.def(
      "variance_explained",
      [](const std::vector<double>& ref, const std::vector<double>& test) {
        return variance_explained(ref, test);
      },
      py::arg("ref"), py::arg("test"));
  m.def(
      "xcorr_peak_lag",
      [](const std::vector<double>& ref, const std::vector<double>& test, int max_lag) {
        return xcorr_peak_lag(ref, test, max_lag);
      },
      py::arg("ref"), py::arg("test"), py::arg("max_lag") = 10);
  m.def(
      "spike_agreement",
      [](const py::array_t<int, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<int, py::array::c_style | py::array::forcecast>& b,
         int slack) { return spike_agreement(to_spikes(a), to_spikes(b), slack); },
      py::arg("a"), py::arg("b"), py::arg("slack") = 1);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (code, stdout, stderr).");
}
