#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nretina/metrics.hpp"
#include "nretina/params.hpp"
#include "nretina/record.hpp"

namespace nretina::cli {

/// Exit codes of the `retina` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitThreshold = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Descriptive fields written at the top of a manifest.
struct ManifestInfo {
  std::string mode;
  std::string input;
  std::string reference_params = "requested";
};

/// Writes traces, spikes, snapshots and manifest of one run into `dir`
/// (created if needed). Every file is written atomically.
void write_run(const RunRecord& rec, const RetinaParams& requested, const ManifestInfo& info,
               const std::filesystem::path& dir);

/// Manifest lines that legitimately differ between identical invocations.
bool is_volatile_manifest_key(const std::string& key);

std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir);
std::vector<double> read_trace(const std::filesystem::path& file);
std::vector<SpikeEvent> read_spikes(const std::filesystem::path& file);
std::string spikes_csv(const std::vector<SpikeEvent>& spikes);

struct Thresholds {
  std::map<std::string, double> min_variance_explained = {
      {"I_OPL", 0.95}, {"V_Bip", 0.99}, {"I_Gang_ON", 0.99}, {"I_Gang_OFF", 0.99}};
  std::vector<std::string> zero_lag_stages = {"C",     "S",         "I_OPL",
                                              "V_Bip", "I_Gang_ON", "I_Gang_OFF"};
  int max_abs_lag = 0;
  double min_spike_agreement = 0.9;
  int slack = 1;
};

/// Compares two run directories (`a` is the reference side). Spike agreement
/// is reported per polarity as the fraction of `a` spikes matched in `b`
/// (key "ON") and of `b` spikes matched in `a` (key "ON.reverse"). Throws
/// UsageError when geometry, frame count or probe differ.
ComparisonReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                              int slack = 1);

/// Human-readable descriptions of every failed threshold (empty when all pass).
std::vector<std::string> threshold_failures(const ComparisonReport& report, const Thresholds& t);

}  // namespace nretina::cli
