#include "nretina/fixedpoint.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace nretina {

namespace {

void require_same_format(const FixedPointValue& a, const FixedPointValue& b) {
  if (!(a.format() == b.format())) {
    throw FormatMismatch("fixed-point operands have different formats: " +
                         a.format().to_string() + " vs " + b.format().to_string());
  }
}

template <typename Op>
FixedPointValue apply(const FixedPointValue& a, const FixedPointValue& b, Op op) {
  require_same_format(a, b);
  FixedMath math(a.format());
  const std::int64_t raw = op(math, a.raw(), b.raw());
  return FixedPointValue(raw, a.format(),
                         a.saturated() || b.saturated() || math.saturations() > 0);
}

}  // namespace

void FixedPointFormat::validate() const {
  if (total_bits < 2 || total_bits > 64) {
    throw std::invalid_argument("total_bits must be in [2, 64], got " +
                                std::to_string(total_bits));
  }
  if (frac_bits < 0 || frac_bits >= total_bits) {
    throw std::invalid_argument("frac_bits must be in [0, total_bits), got " +
                                std::to_string(frac_bits));
  }
}

std::int64_t FixedPointFormat::max_raw() const {
  if (total_bits == 64) return INT64_MAX;
  return (std::int64_t{1} << (total_bits - 1)) - 1;
}

std::int64_t FixedPointFormat::min_raw() const {
  if (total_bits == 64) return INT64_MIN;
  return -(std::int64_t{1} << (total_bits - 1));
}

double FixedPointFormat::lsb() const { return std::ldexp(1.0, -frac_bits); }
double FixedPointFormat::max_value() const {
  return std::ldexp(static_cast<double>(max_raw()), -frac_bits);
}
double FixedPointFormat::min_value() const {
  return std::ldexp(static_cast<double>(min_raw()), -frac_bits);
}

std::string FixedPointFormat::to_string() const {
  std::ostringstream os;
  os << "Q" << (total_bits - frac_bits) << "." << frac_bits;
  return os.str();
}

FixedPointValue::FixedPointValue(std::int64_t raw, FixedPointFormat format, bool saturated)
    : raw_(raw), format_(format), saturated_(saturated) {
  format_.validate();
  if (raw < format_.min_raw() || raw > format_.max_raw()) {
    throw std::out_of_range("raw mantissa " + std::to_string(raw) + " does not fit " +
                            format_.to_string());
  }
}

double FixedPointValue::to_real() const {
  return std::ldexp(static_cast<double>(raw_), -format_.frac_bits);
}

FixedPointValue quantize(double x, FixedPointFormat fmt) {
  FixedMath math(fmt);
  const std::int64_t raw = math.from_real(x);
  return FixedPointValue(raw, fmt, math.saturations() > 0);
}

FixedPointValue fxp_add(const FixedPointValue& a, const FixedPointValue& b) {
  return apply(a, b, [](FixedMath& m, auto x, auto y) { return m.add(x, y); });
}

FixedPointValue fxp_sub(const FixedPointValue& a, const FixedPointValue& b) {
  return apply(a, b, [](FixedMath& m, auto x, auto y) { return m.sub(x, y); });
}

FixedPointValue fxp_mul(const FixedPointValue& a, const FixedPointValue& b) {
  return apply(a, b, [](FixedMath& m, auto x, auto y) { return m.mul(x, y); });
}

FixedPointValue fxp_div(const FixedPointValue& a, const FixedPointValue& b) {
  if (b.raw() <= 0) throw std::domain_error("fxp_div: divisor must be positive");
  return apply(a, b, [](FixedMath& m, auto x, auto y) { return m.div(x, y); });
}

FixedPointValue fxp_exp_neg(const FixedPointValue& x) {
  if (x.raw() < 0) throw std::domain_error("fxp_exp_neg: argument must be >= 0");
  FixedMath math(x.format());
  return FixedPointValue(math.exp_neg(x.raw()), x.format(), x.saturated());
}

namespace detail {

const std::array<std::int64_t, 257>& exp_neg_table() {
  static const auto table = [] {
    std::array<std::int64_t, 257> t{};
    for (int k = 0; k <= 256; ++k) {
      t[k] = static_cast<std::int64_t>(
          std::floor(std::ldexp(std::exp(-k / 32.0), kTableFracBits)));
    }
    return t;
  }();
  return table;
}

const std::array<std::int64_t, 257>& reciprocal_table() {
  static const auto table = [] {
    std::array<std::int64_t, 257> t{};
    for (int k = 0; k <= 256; ++k) {
      t[k] = static_cast<std::int64_t>(
          std::floor(std::ldexp(256.0 / (256.0 + k), kTableFracBits)));
    }
    return t;
  }();
  return table;
}

}  // namespace detail

FixedMath::FixedMath(FixedPointFormat fmt) : fmt_(fmt) {
  fmt_.validate();
  frac_ = fmt_.frac_bits;
  one_ = fmt_.one_raw();
  lo_ = fmt_.min_raw();
  hi_ = fmt_.max_raw();
  narrow_ = fmt_.total_bits <= 32;
  small_acc_ = fmt_.total_bits <= 28;
}

std::int64_t FixedMath::div(std::int64_t num, std::int64_t den) {
  const auto& table = detail::reciprocal_table();
  const int exponent = std::bit_width(static_cast<std::uint64_t>(den)) - 1;
  // Mantissa of den normalized to [1, 2) with 16 fractional bits.
  const auto u = static_cast<std::int64_t>(detail::shift_floor(den, exponent - 16));
  const int idx = static_cast<int>((u >> 8) - 256);
  const std::int64_t rem = u & 0xff;
  const __int128 recip =
      table[idx] + detail::shift_floor(static_cast<__int128>(table[idx + 1] - table[idx]) * rem, 8);
  return saturate(
      detail::shift_floor(static_cast<__int128>(num) * recip,
                          detail::kTableFracBits + exponent - frac_));
}

std::int64_t FixedMath::exp_neg(std::int64_t x) const {
  const auto& table = detail::exp_neg_table();
  const __int128 pos = static_cast<__int128>(x) * 32;
  const __int128 idx = pos >> frac_;
  if (idx >= 256) return 0;
  const __int128 rem = pos - (idx << frac_);
  const auto i = static_cast<int>(idx);
  const __int128 y =
      table[i] + detail::shift_floor(static_cast<__int128>(table[i + 1] - table[i]) * rem, frac_);
  return static_cast<std::int64_t>(detail::shift_floor(y, detail::kTableFracBits - frac_));
}

std::int64_t FixedMath::from_real(double x) {
  if (std::isnan(x)) {
    ++saturations_;
    return 0;
  }
  const double scaled = std::floor(std::ldexp(x, frac_));
  if (scaled >= static_cast<double>(hi_)) {
    if (scaled > static_cast<double>(hi_)) ++saturations_;
    return hi_;
  }
  if (scaled <= static_cast<double>(lo_)) {
    if (scaled < static_cast<double>(lo_)) ++saturations_;
    return lo_;
  }
  return static_cast<std::int64_t>(scaled);
}

double FixedMath::to_real(std::int64_t raw) const {
  return std::ldexp(static_cast<double>(raw), -frac_);
}

}  // namespace nretina
