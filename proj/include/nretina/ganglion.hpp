#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "nretina/fixedpoint.hpp"
#include "nretina/plane.hpp"
#include "nretina/temporal.hpp"

namespace nretina {

enum class Polarity { On, Off };

inline std::string_view to_string(Polarity p) { return p == Polarity::On ? "ON" : "OFF"; }
std::optional<Polarity> parse_polarity(std::string_view s);

struct SpikeEvent {
  int frame = 0;
  int x = 0;
  int y = 0;
  Polarity polarity = Polarity::On;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

struct GanglionParams {
  double tau_g = 0.020;
  /// Weight of the ganglion high-pass T_G. Below 1 so sustained bipolar
  /// signals (tonic mode) still reach the spiking stage.
  double w_g = 0.5;
  int xi = +1;
  double lambda_g = 5.0;
  double i0_g = 0.008;
  double v0_g = 0.0;
  double g_leak = 0.1;
  /// LIF integration step, in milliseconds of simulated time per frame.
  double tau_step = 5.0;
  /// Refractory period in frames.
  int refr = 2;
  double v_threshold = 1.0;

  Polarity polarity() const { return xi > 0 ? Polarity::On : Polarity::Off; }
  void validate(bool allow_zero_time = false) const;
};

/// N(v) = i0 / (1 - lambda (v - v0) / i0) for v < v0, i0 + lambda (v - v0) otherwise.
double static_nonlinearity(double v, const GanglionParams& p);

/// Ganglion current branch rule: the linear branch is taken for x > 0, the
/// saturating branch otherwise (coincides with the v0 boundary when v0 == 0).
double ganglion_current(double x, const GanglionParams& p);

template <typename T>
struct LifResult {
  Plane<T> v_m;
  std::vector<SpikeEvent> spikes;
};
using LifOutput = LifResult<std::int64_t>;

/// Fixed-point inner plexiform layer and LIF spiking for one polarity.
class GanglionLayer {
 public:
  GanglionLayer(const GanglionParams& params, Geometry geometry, double fps, FixedPointFormat fmt);

  /// I_Gang = N(xi * T_G(V_Bip)).
  RawFrame current_step(const RawFrame& v_bip);

  /// Per pixel: V += (I - gL V) tau; counter -= 1; V = 0 where counter >= 0.5;
  /// spike where V > threshold; spiking pixels reset to 0 and reload the
  /// counter; negative counters clamp to 0. Events are row-major.
  LifOutput lif_step(const RawFrame& current);

  void reset();
  int frame_index() const { return frame_; }
  std::uint64_t saturations() const { return math_->saturations(); }
  const std::vector<int>& refractory() const { return refractory_; }
  const RawFrame& membrane() const { return v_m_; }
  Polarity polarity() const { return polarity_; }

  /// Fixed-point N(x) with the Table-style branch rule of ganglion_current.
  std::int64_t nonlinearity(std::int64_t x);

 private:
  std::unique_ptr<FixedMath> math_;
  Geometry geometry_;
  Polarity polarity_;
  FixedHighPass transient_;
  std::int64_t lambda_;
  std::int64_t i0_;
  std::int64_t v0_;
  std::int64_t leak_;
  std::int64_t tau_;
  std::int64_t threshold_;
  int refr_;
  RawFrame v_m_;
  std::vector<int> refractory_;
  int frame_ = 0;
};

}  // namespace nretina
