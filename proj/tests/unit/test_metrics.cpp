#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nretina/metrics.hpp"

using namespace nretina;

namespace {

/// Brute-force greedy matcher: for each spike of `a` in frame order, take the
/// earliest unused spike of `b` at the same pixel and polarity within slack.
double agreement_oracle(std::vector<SpikeEvent> a, const std::vector<SpikeEvent>& b, int slack) {
  if (a.empty()) return 1.0;
  std::stable_sort(a.begin(), a.end(), [](const auto& l, const auto& r) { return l.frame < r.frame; });
  std::vector<bool> used(b.size(), false);
  int matched = 0;
  for (const auto& s : a) {
    int best = -1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto& t = b[j];
      if (used[j] || t.x != s.x || t.y != s.y || t.polarity != s.polarity) continue;
      if (std::abs(t.frame - s.frame) > slack) continue;
      if (best < 0 || t.frame < b[best].frame) best = static_cast<int>(j);
    }
    if (best >= 0) {
      used[best] = true;
      ++matched;
    }
  }
  return static_cast<double>(matched) / a.size();
}

std::vector<double> sine(int n, double period, int shift = 0) {
  std::vector<double> v(n);
  for (int t = 0; t < n; ++t) v[t] = std::sin(2 * std::numbers::pi * (t - shift) / period);
  return v;
}

}  // namespace

TEST_CASE("variance explained matches the definition") {
  const std::vector<double> ref{1, 2, 3, 4, 5};
  const std::vector<double> test{1.1, 1.9, 3.2, 3.8, 5.0};
  // mean 3, total 10, residual 0.01+0.01+0.04+0.04 = 0.10
  CHECK(variance_explained(ref, test) == doctest::Approx(0.99));
  CHECK(variance_explained(ref, ref) == 1.0);
  const std::vector<double> flat(5, 3.0);
  CHECK(variance_explained(ref, flat) == doctest::Approx(0.0));
  CHECK(variance_explained(ref, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-3.0));
  CHECK_THROWS_AS(variance_explained(flat, ref), MetricUndefined);
  CHECK_THROWS_AS(variance_explained(ref, std::vector<double>{1, 2}), MetricUndefined);
}

TEST_CASE("variance explained over random traces agrees with a direct computation") {
  std::mt19937 rng(71);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(50), t(50);
    for (int i = 0; i < 50; ++i) {
      r[i] = d(rng);
      t[i] = r[i] + 0.3 * d(rng);
    }
    double m = 0.0;
    for (double v : r) m += v / 50.0;
    double res = 0.0, tot = 0.0;
    for (int i = 0; i < 50; ++i) {
      res += (r[i] - t[i]) * (r[i] - t[i]);
      tot += (r[i] - m) * (r[i] - m);
    }
    CHECK(variance_explained(r, t) == doctest::Approx(1.0 - res / tot).epsilon(1e-12));
    CHECK(variance_explained(r, t) <= 1.0);
  }
}

TEST_CASE("xcorr peak lag recovers a known delay") {
  const auto ref = sine(400, 97.0);
  for (int d : {-7, -1, 0, 3, 12}) {
    CHECK(xcorr_peak_lag(ref, sine(400, 97.0, d), 20) == d);
  }
  // Noise does not move a clear peak.
  std::mt19937 rng(72);
  std::normal_distribution<double> noise(0.0, 0.05);
  auto delayed = sine(400, 97.0, 5);
  for (double& v : delayed) v += noise(rng);
  CHECK(xcorr_peak_lag(ref, delayed, 20) == 5);
}

TEST_CASE("xcorr ties go to the smaller lag magnitude, then the negative lag") {
  // Alternating trace: lags -1 and +1 score identically and lag 0 is worst.
  std::vector<double> ref(20);
  for (int t = 0; t < 20; ++t) ref[t] = t % 2 ? 1.0 : -1.0;
  std::vector<double> test(20);
  for (int t = 0; t < 20; ++t) test[t] = -ref[t];
  const int lag = xcorr_peak_lag(ref, test, 3);
  CHECK(lag == -1);
  CHECK(xcorr_peak_lag(ref, ref, 3) == 0);
  CHECK_THROWS_AS(xcorr_peak_lag(ref, ref, 10), MetricUndefined);
  CHECK_THROWS_AS(xcorr_peak_lag(std::vector<double>(20, 1.0), ref, 3), MetricUndefined);
}

TEST_CASE("spike agreement on hand-built cases") {
  using P = Polarity;
  const std::vector<SpikeEvent> a{{10, 1, 1, P::On}, {20, 1, 1, P::On}, {30, 2, 1, P::Off}};
  CHECK(spike_agreement(a, a, 0) == 1.0);
  CHECK(spike_agreement({}, a, 1) == 1.0);
  CHECK(spike_agreement(a, {}, 1) == 0.0);
  // Shifted by one frame: matched only with slack >= 1.
  std::vector<SpikeEvent> shifted = a;
  for (auto& s : shifted) ++s.frame;
  CHECK(spike_agreement(a, shifted, 0) == 0.0);
  CHECK(spike_agreement(a, shifted, 1) == 1.0);
  // Polarity and pixel must match.
  const std::vector<SpikeEvent> wrong{{10, 1, 1, P::Off}, {20, 2, 1, P::On}};
  CHECK(spike_agreement(a, wrong, 5) == 0.0);
  // One-to-one: two spikes of a cannot share one spike of b.
  const std::vector<SpikeEvent> twin{{10, 0, 0, P::On}, {11, 0, 0, P::On}};
  const std::vector<SpikeEvent> single{{10, 0, 0, P::On}};
  CHECK(spike_agreement(twin, single, 1) == 0.5);
  CHECK(spike_agreement(single, twin, 1) == 1.0);
}

TEST_CASE("spike agreement equals the brute-force greedy matcher on random trains") {
  std::mt19937 rng(73);
  std::uniform_int_distribution<int> frame(0, 60);
  std::uniform_int_distribution<int> pix(0, 2);
  std::uniform_int_distribution<int> pol(0, 1);
  std::uniform_int_distribution<int> count(0, 40);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<SpikeEvent> a, b;
    const auto fill = [&](std::vector<SpikeEvent>& v) {
      for (int k = count(rng); k > 0; --k) {
        v.push_back({frame(rng), pix(rng), pix(rng), pol(rng) ? Polarity::On : Polarity::Off});
      }
    };
    fill(a);
    fill(b);
    for (int slack : {0, 1, 3}) {
      CHECK(spike_agreement(a, b, slack) == doctest::Approx(agreement_oracle(a, b, slack)));
    }
  }
}

TEST_CASE("rms error and compare_traces") {
  const std::vector<double> r{0, 1, 0, -1, 0, 1, 0, -1};
  std::vector<double> t = r;
  t[2] = 0.5;
  CHECK(rms_error(r, t) == doctest::Approx(std::sqrt(0.25 / 8)));
  const auto c = compare_traces(r, t);
  CHECK(c.defined);
  CHECK(c.best_lag == 0);
  CHECK(c.variance_explained == doctest::Approx(1.0 - 0.25 / 4.0));
  // Identical constant traces are a perfect match.
  const std::vector<double> flat(8, 0.25);
  const auto same = compare_traces(flat, flat);
  CHECK(same.defined);
  CHECK(same.variance_explained == 1.0);
  // A constant reference against a different trace is undefined.
  const auto undefined = compare_traces(flat, r);
  CHECK_FALSE(undefined.defined);
  CHECK(std::isnan(undefined.variance_explained));
  CHECK_THROWS_AS(compare_traces(r, std::span<const double>(flat).subspan(0, 3)), MetricUndefined);
}

TEST_CASE("report serialization") {
  ComparisonReport rep;
  rep.stages["I_OPL"] = TraceComparison{0.975, -1, 0.002, true};
  rep.spike_agreement["ON"] = 0.9;
  const std::string text = rep.to_text();
  CHECK(text.find("I_OPL.variance_explained=0.975\n") != std::string::npos);
  CHECK(text.find("I_OPL.best_lag=-1\n") != std::string::npos);
  CHECK(text.find("I_OPL.rms_error=0.002\n") != std::string::npos);
  CHECK(text.find("spikes.ON.agreement=0.9\n") != std::string::npos);
  CHECK(rep.to_csv() == "stage,variance_explained,best_lag,rms_error\nI_OPL,0.975,-1,0.002\n");
}

TEST_CASE("alternating reference with one flipped sample has a closed-form score") {
  // ref = 0,1,0,1,... (n = 20): mean 0.5, total variance sum 20 * 0.25 = 5.
  // Flipping one sample adds a squared residual of 1.
  std::vector<double> ref(20);
  for (int t = 0; t < 20; ++t) ref[t] = t % 2;
  std::vector<double> test = ref;
  test[7] = 1.0 - test[7];
  CHECK(variance_explained(ref, test) == doctest::Approx(1.0 - 1.0 / 5.0));
}

TEST_CASE("a zero-filled delay of three frames is found at lag +3") {
  std::mt19937 rng(74);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> ref(200);
  for (double& v : ref) v = d(rng);
  std::vector<double> test(200, 0.0);
  for (int t = 3; t < 200; ++t) test[t] = ref[t - 3];
  CHECK(xcorr_peak_lag(ref, test, 10) == 3);
  const auto c = compare_traces(ref, test, 10);
  CHECK(c.best_lag == 3);
  CHECK(std::abs(c.best_lag) <= 10);
}

TEST_CASE("spike shifted by exactly the slack matches, one frame more does not") {
  const std::vector<SpikeEvent> a{{40, 3, 4, Polarity::On}};
  for (int slack : {0, 1, 2, 5}) {
    const std::vector<SpikeEvent> at{{40 + slack, 3, 4, Polarity::On}};
    const std::vector<SpikeEvent> beyond{{40 + slack + 1, 3, 4, Polarity::On}};
    const std::vector<SpikeEvent> before{{40 - slack - 1, 3, 4, Polarity::On}};
    CHECK(spike_agreement(a, at, slack) == 1.0);
    CHECK(spike_agreement(a, beyond, slack) == 0.0);
    CHECK(spike_agreement(a, before, slack) == 0.0);
  }
}

TEST_CASE("spike agreement is symmetric for equal-size trains") {
  std::mt19937 rng(75);
  std::uniform_int_distribution<int> frame(0, 40);
  std::uniform_int_distribution<int> pix(0, 1);
  std::uniform_int_distribution<int> count(1, 30);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = count(rng);
    std::vector<SpikeEvent> a, b;
    for (int k = 0; k < n; ++k) {
      a.push_back({frame(rng), pix(rng), pix(rng), Polarity::On});
      b.push_back({frame(rng), pix(rng), pix(rng), Polarity::On});
    }
    for (int slack : {0, 1, 2}) CHECK(spike_agreement(a, b, slack) == spike_agreement(b, a, slack));
  }
}
