#include "nretina/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace nretina {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw MetricUndefined("trace lengths differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

double variance_explained(std::span<const double> ref, std::span<const double> test) {
  require_same_length(ref, test);
  if (ref.size() < 2) throw MetricUndefined("variance explained needs at least 2 samples");
  const double m = mean(ref);
  double residual = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    residual += (ref[i] - test[i]) * (ref[i] - test[i]);
    total += (ref[i] - m) * (ref[i] - m);
  }
  if (total == 0.0) throw MetricUndefined("reference trace is constant");
  return 1.0 - residual / total;
}

int xcorr_peak_lag(std::span<const double> ref, std::span<const double> test, int max_lag) {
  require_same_length(ref, test);
  const int n = static_cast<int>(ref.size());
  if (max_lag < 0 || 2 * max_lag >= n) {
    throw MetricUndefined("max_lag must satisfy 0 <= max_lag < length / 2");
  }
  const double mr = mean(ref);
  const double mt = mean(test);
  double er = 0.0;
  double et = 0.0;
  for (int i = 0; i < n; ++i) {
    er += (ref[i] - mr) * (ref[i] - mr);
    et += (test[i] - mt) * (test[i] - mt);
  }
  if (er == 0.0 || et == 0.0) throw MetricUndefined("cross-correlation of a zero-variance trace");
  const double norm = std::sqrt(er * et);
  const auto corr = [&](int lag) {
    double acc = 0.0;
    for (int t = std::max(0, -lag); t < std::min(n, n - lag); ++t) {
      acc += (ref[t] - mr) * (test[t + lag] - mt);
    }
    return acc / norm;
  };
  int best = 0;
  double best_corr = corr(0);
  for (int k = 1; k <= max_lag; ++k) {
    for (const int lag : {-k, k}) {
      const double c = corr(lag);
      if (c > best_corr) {
        best_corr = c;
        best = lag;
      }
    }
  }
  return best;
}

double spike_agreement(const std::vector<SpikeEvent>& a, const std::vector<SpikeEvent>& b,
                       int slack) {
  if (a.empty()) return 1.0;
  using Key = std::tuple<int, int, Polarity>;
  std::map<Key, std::vector<int>> in_a;
  std::map<Key, std::vector<int>> in_b;
  for (const auto& s : a) in_a[{s.x, s.y, s.polarity}].push_back(s.frame);
  for (const auto& s : b) in_b[{s.x, s.y, s.polarity}].push_back(s.frame);
  std::size_t matched = 0;
  for (auto& [key, frames_a] : in_a) {
    const auto it = in_b.find(key);
    if (it == in_b.end()) continue;
    std::vector<int>& frames_b = it->second;
    std::sort(frames_a.begin(), frames_a.end());
    std::sort(frames_b.begin(), frames_b.end());
    std::size_t j = 0;
    for (const int f : frames_a) {
      while (j < frames_b.size() && frames_b[j] < f - slack) ++j;
      if (j < frames_b.size() && frames_b[j] <= f + slack) {
        ++matched;
        ++j;
      }
    }
  }
  return static_cast<double>(matched) / static_cast<double>(a.size());
}

double rms_error(std::span<const double> ref, std::span<const double> test) {
  require_same_length(ref, test);
  if (ref.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) acc += (ref[i] - test[i]) * (ref[i] - test[i]);
  return std::sqrt(acc / static_cast<double>(ref.size()));
}

TraceComparison compare_traces(std::span<const double> ref, std::span<const double> test,
                               int max_lag) {
  require_same_length(ref, test);
  const int n = static_cast<int>(ref.size());
  if (max_lag < 0) max_lag = std::min(50, (n - 1) / 2);
  TraceComparison out;
  out.rms_error = rms_error(ref, test);
  if (std::equal(ref.begin(), ref.end(), test.begin())) {
    out.variance_explained = 1.0;
    return out;
  }
  try {
    out.variance_explained = variance_explained(ref, test);
  } catch (const MetricUndefined&) {
    out.variance_explained = std::numeric_limits<double>::quiet_NaN();
    out.defined = false;
  }
  try {
    out.best_lag = xcorr_peak_lag(ref, test, max_lag);
  } catch (const MetricUndefined&) {
    out.defined = false;
  }
  return out;
}

std::string ComparisonReport::to_text() const {
  std::ostringstream os;
  for (const auto& [stage, c] : stages) {
    os << stage << ".variance_explained=" << fmt(c.variance_explained) << "\n";
    os << stage << ".best_lag=" << c.best_lag << "\n";
    os << stage << ".rms_error=" << fmt(c.rms_error) << "\n";
  }
  for (const auto& [pol, v] : spike_agreement) os << "spikes." << pol << ".agreement=" << fmt(v) << "\n";
  return os.str();
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream os;
  os << "stage,variance_explained,best_lag,rms_error\n";
  for (const auto& [stage, c] : stages) {
    os << stage << "," << fmt(c.variance_explained) << "," << c.best_lag << "," << fmt(c.rms_error)
       << "\n";
  }
  return os.str();
}

}  // namespace nretina
