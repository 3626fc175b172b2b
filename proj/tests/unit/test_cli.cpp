#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "nretina/cli.hpp"
#include "nretina/io.hpp"
#include "nretina/stimulus.hpp"
#include "oracles.hpp"

using namespace nretina;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result retina(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nretina_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

/// Small pulse stimulus shared by the run/compare tests.
fs::path pulse_input(const fs::path& root) {
  const fs::path in = root / "pulse";
  const Result r = retina({"stimulus", "pulse", "--out", in.string(), "--width", "12", "--height",
                           "10", "--duration", "0.6", "--t-on", "0.1", "--t-off", "0.4"});
  REQUIRE(r.code == 0);
  return in;
}

}  // namespace

TEST_CASE("stimulus: default chirp is 1400 frames with a sidecar header") {
  const fs::path root = scratch("chirp");
  const fs::path out = root / "chirp";
  const Result r = retina({"stimulus", "chirp", "--out", out.string(), "--width", "4", "--height", "4"});
  CHECK(r.code == 0);
  CHECK(count_files(out, ".pgm") == 1400);
  CHECK(fs::exists(out / "stream.hdr"));
  const FrameStream s = load_video(out);
  CHECK(s.size() == 1400);
  CHECK(s.fps == 200.0);
  CHECK(s.geometry == Geometry{4, 4});
}

TEST_CASE("stimulus: raw container and 16-bit depth") {
  const fs::path root = scratch("raw");
  const fs::path out = root / "clip.raw";
  CHECK(retina({"stimulus", "flicker", "--out", out.string(), "--width", "5", "--height", "3",
                "--duration", "0.5", "--container", "raw", "--bitdepth", "16"})
            .code == 0);
  const FrameStream s = load_video(out);
  CHECK(s.size() == 100);
  CHECK(s.geometry == Geometry{5, 3});
}

TEST_CASE("stimulus: invalid stimulus parameters exit with status 1") {
  const fs::path root = scratch("badstim");
  const Result bad_pulse = retina({"stimulus", "pulse", "--out", (root / "p").string(), "--t-on",
                                   "0.5", "--t-off", "0.5"});
  CHECK(bad_pulse.code == cli::kExitUsage);
  CHECK(bad_pulse.err.find("error:") != std::string::npos);
  CHECK_FALSE(fs::exists(root / "p"));
  CHECK(retina({"stimulus", "spiral", "--out", (root / "s").string()}).code == cli::kExitUsage);
  CHECK(retina({"stimulus", "chirp"}).code == cli::kExitUsage);
  CHECK(retina({}).code == cli::kExitUsage);
  CHECK(retina({"--help"}).code == cli::kExitOk);
}

TEST_CASE("run: both modes write traces, spikes, snapshots and manifests") {
  const fs::path root = scratch("run");
  const fs::path in = pulse_input(root);
  const fs::path out = root / "out";
  const Result r = retina({"run", "--input", in.string(), "--out", out.string(), "--snapshot", "10",
                           "--snapshot", "50"});
  REQUIRE(r.code == 0);
  for (const char* mode : {"fixed", "reference"}) {
    const fs::path dir = out / mode;
    for (const char* layer : {"C", "S", "I_OPL", "V_Bip", "I_Gang_ON", "I_Gang_OFF", "V_m_ON", "V_m_OFF"}) {
      const auto trace = cli::read_trace(dir / (std::string("trace_") + layer + ".csv"));
      CHECK(trace.size() == 120);
      for (std::size_t f : {10, 50}) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%s_%05zu.pgm", layer, f);
        std::ifstream pgm(dir / name, std::ios::binary);
        const auto img = io::read_pgm(pgm);
        REQUIRE(img.has_value());
        CHECK(img->maxval == 65535);
        CHECK(img->pixels.geometry() == Geometry{12, 10});
        CHECK(img->comment.rfind("range ", 0) == 0);
      }
    }
    const std::string spikes = io::read_file(dir / "spikes.csv");
    CHECK(spikes.rfind("frame,x,y,polarity\n", 0) == 0);
    const auto m = cli::read_manifest(dir);
    CHECK(m.at("mode") == mode);
    CHECK(m.at("frames") == "120");
    CHECK(m.at("probe.x") == "6");
    CHECK(m.at("probe.y") == "5");
    CHECK(m.count("wall_seconds") == 1);
    CHECK(m.count("output.0") == 1);
  }
  CHECK(cli::read_manifest(out / "fixed").count("saturation.opl") == 1);
}

TEST_CASE("run: manifest echoes requested and quantized parameters") {
  const fs::path root = scratch("manifest");
  const fs::path in = pulse_input(root);
  const fs::path cfg = root / "p.cfg";
  io::write_file_atomic(cfg, "sigma_c=0.06\nlambda_a=3.3\n");
  REQUIRE(retina({"run", "--input", in.string(), "--out", (root / "o").string(), "--mode", "fixed",
                  "--config", cfg.string()})
              .code == 0);
  const auto m = cli::read_manifest(root / "o" / "fixed");
  CHECK(std::stod(m.at("param.sigma_c.requested")) == 0.06);
  CHECK(std::stod(m.at("param.lambda_a.requested")) == 3.3);
  int seen = 0;
  for (const auto& [key, value] : m) {
    const std::string suffix = ".requested";
    if (key.size() < suffix.size() || key.compare(key.size() - suffix.size(), suffix.size(), suffix)) continue;
    const std::string name = key.substr(0, key.size() - suffix.size());
    const double req = std::stod(value);
    const double q = std::stod(m.at(name + ".quantized"));
    const double floored = oracle::floor_raw(req, 10) / 1024.0;
    CHECK(q == ((req > 0.0 && floored == 0.0) ? 1.0 / 1024.0 : floored));
    ++seen;
  }
  CHECK(seen >= 20);
}

TEST_CASE("run: identical invocations produce identical files apart from timing keys") {
  const fs::path root = scratch("determinism");
  const fs::path in = pulse_input(root);
  for (const char* o : {"a", "b"}) {
    REQUIRE(retina({"run", "--input", in.string(), "--out", (root / o).string(), "--snapshot", "5"})
                .code == 0);
  }
  for (const char* mode : {"fixed", "reference"}) {
    for (const auto& e : fs::directory_iterator(root / "a" / mode)) {
      const fs::path other = root / "b" / mode / e.path().filename();
      REQUIRE(fs::exists(other));
      if (e.path().filename() == "manifest.txt") {
        auto ma = cli::read_manifest(root / "a" / mode);
        auto mb = cli::read_manifest(root / "b" / mode);
        std::erase_if(ma, [](const auto& kv) { return cli::is_volatile_manifest_key(kv.first); });
        std::erase_if(mb, [](const auto& kv) { return cli::is_volatile_manifest_key(kv.first); });
        CHECK(ma == mb);
      } else {
        CHECK(io::read_file(e.path()) == io::read_file(other));
      }
    }
  }
}

TEST_CASE("run: failures leave no partial output") {
  const fs::path root = scratch("runerr");
  fs::create_directories(root / "empty");
  const Result empty = retina({"run", "--input", (root / "empty").string(), "--out", (root / "o1").string()});
  CHECK(empty.code == cli::kExitUsage);
  CHECK_FALSE(fs::exists(root / "o1"));

  const fs::path in = pulse_input(root);
  const fs::path cfg = root / "bad.cfg";
  io::write_file_atomic(cfg, "sigma_c=oops\n");
  CHECK(retina({"run", "--input", in.string(), "--out", (root / "o2").string(), "--config", cfg.string()})
            .code == cli::kExitUsage);
  CHECK_FALSE(fs::exists(root / "o2"));
  CHECK(retina({"run", "--input", in.string(), "--out", (root / "o3").string(), "--probe", "40,2"})
            .code == cli::kExitUsage);
  CHECK(retina({"run", "--input", in.string(), "--out", (root / "o4").string(), "--snapshot", "500"})
            .code == cli::kExitUsage);
  CHECK(retina({"run", "--input", (root / "missing").string(), "--out", (root / "o5").string()})
            .code == cli::kExitUsage);
  for (const char* o : {"o3", "o4", "o5"}) CHECK_FALSE(fs::exists(root / o));
}

TEST_CASE("compare: identical runs score perfectly and write both report files") {
  const fs::path root = scratch("cmp_same");
  const fs::path in = pulse_input(root);
  REQUIRE(retina({"run", "--input", in.string(), "--out", (root / "o").string(), "--mode", "fixed"}).code == 0);
  const fs::path d = root / "o" / "fixed";
  const Result r = retina({"compare", d.string(), d.string(), "--out", (root / "rep").string()});
  CHECK(r.code == cli::kExitOk);
  const ComparisonReport rep = cli::compare_runs(d, d);
  CHECK(rep.stages.size() == 8);
  for (const auto& [stage, c] : rep.stages) {
    CHECK(c.variance_explained == 1.0);
    CHECK(c.best_lag == 0);
    CHECK(c.rms_error == 0.0);
  }
  for (const auto& [key, v] : rep.spike_agreement) CHECK(v == 1.0);
  CHECK(rep.spike_agreement.count("ON.reverse") == 1);
  CHECK(io::read_file(root / "rep" / "report.txt") == rep.to_text());
  CHECK(io::read_file(root / "rep" / "report.csv") == rep.to_csv());
}

TEST_CASE("compare: threshold failures exit 2, --no-gate reports only") {
  const fs::path root = scratch("cmp_gate");
  const fs::path in = pulse_input(root);
  REQUIRE(retina({"run", "--input", in.string(), "--out", (root / "o").string()}).code == 0);
  const std::string ref = (root / "o" / "reference").string();
  const std::string fix = (root / "o" / "fixed").string();
  const Result strict = retina({"compare", ref, fix, "--min-ve", "I_OPL=1.5"});
  CHECK(strict.code == cli::kExitThreshold);
  CHECK(strict.err.find("I_OPL variance explained") != std::string::npos);
  CHECK(retina({"compare", ref, fix, "--min-ve", "I_OPL=1.5", "--no-gate"}).code == cli::kExitOk);
  CHECK(retina({"compare", ref, fix, "--min-ve", "NOPE=0.5"}).code == cli::kExitUsage);
}

TEST_CASE("compare: incompatible runs are rejected") {
  const fs::path root = scratch("cmp_bad");
  const fs::path in = pulse_input(root);
  const fs::path shorter = root / "short";
  REQUIRE(retina({"stimulus", "pulse", "--out", shorter.string(), "--width", "12", "--height", "10",
                  "--duration", "0.5", "--t-on", "0.1", "--t-off", "0.4"})
              .code == 0);
  REQUIRE(retina({"run", "--input", in.string(), "--out", (root / "a").string(), "--mode", "fixed"}).code == 0);
  REQUIRE(retina({"run", "--input", shorter.string(), "--out", (root / "b").string(), "--mode", "fixed"}).code == 0);
  const Result r = retina({"compare", (root / "a" / "fixed").string(), (root / "b" / "fixed").string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("frames") != std::string::npos);
  CHECK(retina({"compare", (root / "a").string(), (root / "b").string()}).code == cli::kExitUsage);
}

TEST_CASE("threshold_failures checks every configured floor") {
  ComparisonReport rep;
  rep.stages["I_OPL"] = {0.96, 0, 0.0, true};
  rep.stages["V_Bip"] = {0.98, 0, 0.0, true};
  rep.stages["S"] = {0.5, 2, 0.0, true};
  rep.spike_agreement["ON"] = 0.95;
  rep.spike_agreement["OFF.reverse"] = 0.85;
  const auto f = cli::threshold_failures(rep, cli::Thresholds{});
  REQUIRE(f.size() == 3);
  CHECK(f[0].find("V_Bip") != std::string::npos);
  CHECK(f[1].find("S lag 2") != std::string::npos);
  CHECK(f[2].find("OFF.reverse") != std::string::npos);
  rep.stages["I_Gang_ON"] = {std::nan(""), 0, 0.0, false};
  CHECK(cli::threshold_failures(rep, cli::Thresholds{}).size() == 4);
}

TEST_CASE("params prints requested and quantized constants") {
  const Result r = retina({"params"});
  CHECK(r.code == 0);
  CHECK(r.out.find("name,requested,quantized\n") != std::string::npos);
  CHECK(r.out.find("sigma_c,0.050000000000000003,0.0498046875\n") != std::string::npos);
  CHECK(r.out.find("tau_c,0.01,0.009765625\n") != std::string::npos);
}

TEST_CASE("spike CSV round trip") {
  const std::vector<SpikeEvent> s{{0, 1, 2, Polarity::On}, {3, 0, 0, Polarity::Off}};
  const fs::path root = scratch("spikes");
  io::write_file_atomic(root / "spikes.csv", cli::spikes_csv(s));
  CHECK(cli::read_spikes(root / "spikes.csv") == s);
  CHECK(cli::spikes_csv(s) == "frame,x,y,polarity\n0,1,2,ON\n3,0,0,OFF\n");
}

TEST_CASE("installed executable follows the exit-code contract") {
  const char* bin = std::getenv("RETINA_BIN");
  if (!bin) return;
  const fs::path root = scratch("exe");
  const std::string quiet = " > /dev/null 2>&1";
  const auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(bin) + " " + args + quiet).c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("--help") == 0);
  CHECK(status("stimulus pulse --out " + (root / "p").string() + " --t-on 0.5 --t-off 0.2") == 1);
  CHECK(status("stimulus impulse --out " + (root / "i").string() + " --width 8 --height 8") == 0);
  CHECK(status("run --input " + (root / "i").string() + " --out " + (root / "o").string()) == 0);
  const std::string ref = (root / "o" / "reference").string();
  CHECK(status("compare " + ref + " " + ref) == 0);
  CHECK(status("compare " + ref + " " + ref + " --min-ve V_Bip=2") == 2);
}
