#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nretina/ganglion.hpp"

namespace nretina {

/// Raised when a metric is undefined for its inputs (constant reference,
/// zero-variance trace, mismatched lengths).
class MetricUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// 1 - sum((ref - test)^2) / sum((ref - mean(ref))^2).
double variance_explained(std::span<const double> ref, std::span<const double> test);

/// Lag in [-max_lag, max_lag] maximizing the mean-removed cross-correlation
/// sum_t ref[t] * test[t + lag], normalized by the zero-lag energies. Ties go
/// to the smallest |lag|, then to the negative lag.
int xcorr_peak_lag(std::span<const double> ref, std::span<const double> test, int max_lag);

/// Fraction of spikes in `a` matched one-to-one by a spike in `b` at the same
/// pixel and polarity within +/- slack frames. Matching is greedy in time
/// order per pixel, taking the earliest unused candidate. An empty `a` scores 1.
double spike_agreement(const std::vector<SpikeEvent>& a, const std::vector<SpikeEvent>& b,
                       int slack);

double rms_error(std::span<const double> ref, std::span<const double> test);

struct TraceComparison {
  double variance_explained = 0.0;
  int best_lag = 0;
  double rms_error = 0.0;
  /// False when the traces differ and one has zero variance. An undefined
  /// variance explained is NaN and an undefined lag is 0.
  bool defined = true;
};

/// max_lag defaults to min(50, (n - 1) / 2). Identical traces always score
/// 1 / lag 0, including constant ones.
TraceComparison compare_traces(std::span<const double> ref, std::span<const double> test,
                               int max_lag = -1);

/// Per-stage comparison plus spike agreement, serializable as key=value text
/// and as CSV.
struct ComparisonReport {
  std::map<std::string, TraceComparison> stages;
  std::map<std::string, double> spike_agreement;

  std::string to_text() const;
  std::string to_csv() const;
};

}  // namespace nretina
