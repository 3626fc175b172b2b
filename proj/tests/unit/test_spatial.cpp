#include <doctest.h>

#include <cmath>
#include <random>

#include "nretina/spatial.hpp"
#include "oracles.hpp"

using namespace nretina;

namespace {

const FixedPointFormat kQ{19, 10};

RawFrame random_raw(std::mt19937& rng, Geometry g, std::int64_t lo, std::int64_t hi) {
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  RawFrame f(g);
  for (auto& v : f.data()) v = d(rng);
  return f;
}

std::vector<double> random_weights(std::mt19937& rng, int size) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  for (double& v : w) v = d(rng);
  return w;
}

}  // namespace

TEST_CASE("gaussian_kernel is normalized, symmetric and matches a direct evaluation") {
  for (int size : {3, 5}) {
    for (double sigma_deg : {0.02, 0.05, 0.15, 0.4}) {
      const Kernel k = gaussian_kernel(sigma_deg, 20.0, size);
      CHECK(k.size == size);
      CHECK(k.sum() == doctest::Approx(1.0).epsilon(1e-12));
      const auto ref = oracle::gaussian(sigma_deg * 20.0, size);
      for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
          CHECK(k(i, j) == doctest::Approx(ref[i * size + j]).epsilon(1e-12));
          CHECK(k(i, j) == k(j, i));
          CHECK(k(i, j) == k(size - 1 - i, j));
        }
      }
    }
  }
  CHECK_THROWS_AS(gaussian_kernel(0.05, 20.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kernel(0.0, 20.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kernel(0.05, -1.0, 3), std::invalid_argument);
}

TEST_CASE("default center kernel at 20 px/deg has sigma of one pixel") {
  const Kernel k = gaussian_kernel(0.05, 20.0, 3);
  const double e = std::exp(-0.5);
  const double e2 = std::exp(-1.0);
  const double total = 1.0 + 4.0 * e + 4.0 * e2;
  CHECK(k(1, 1) == doctest::Approx(1.0 / total).epsilon(1e-14));
  CHECK(k(0, 1) == doctest::Approx(e / total).epsilon(1e-14));
  CHECK(k(0, 0) == doctest::Approx(e2 / total).epsilon(1e-14));
}

TEST_CASE("quantize_kernel floors each weight and rejects all-zero kernels") {
  const Kernel k = gaussian_kernel(0.15, 20.0, 5);
  const FixedKernel q = quantize_kernel(k, kQ);
  REQUIRE(q.weights.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) CHECK(q.weights[i] == oracle::floor_raw(k.weights[i], 10));
  // A very broad 5x5 Gaussian has every tap below 2^-4.
  CHECK_THROWS_AS(quantize_kernel(gaussian_kernel(0.15, 20.0, 5), FixedPointFormat{10, 4}),
                  DegenerateKernel);
}

TEST_CASE("real streaming correlation equals the direct quadruple loop bit for bit") {
  std::mt19937 rng(21);
  for (int size : {1, 3, 5, 7}) {
    for (const Geometry g : {Geometry{7, 7}, Geometry{13, 9}, Geometry{9, 16}, Geometry{32, 32}}) {
      Kernel k;
      k.size = size;
      k.weights = random_weights(rng, size);
      const RealFrame f = oracle::random_frame(rng, g, -1.0, 1.0);
      CHECK(conv2d_stream(f, k) == oracle::correlate(f, size, k.weights));
    }
  }
}

TEST_CASE("fixed streaming correlation equals the single-floor mantissa oracle") {
  std::mt19937 rng(22);
  for (const FixedPointFormat fmt : {kQ, FixedPointFormat{16, 8}, FixedPointFormat{40, 20}}) {
    FixedMath math(fmt);
    for (int size : {3, 5}) {
      for (const Geometry g : {Geometry{5, 5}, Geometry{11, 6}, Geometry{24, 17}}) {
        FixedKernel k;
        k.size = size;
        k.format = fmt;
        std::uniform_int_distribution<std::int64_t> wd(-(std::int64_t{1} << fmt.frac_bits),
                                                       std::int64_t{1} << fmt.frac_bits);
        for (int i = 0; i < size * size; ++i) k.weights.push_back(wd(rng));
        const RawFrame f = random_raw(rng, g, fmt.min_raw() / 8, fmt.max_raw() / 8);
        const RawFrame expect =
            oracle::correlate_raw(f, size, k.weights, fmt.frac_bits, fmt.min_raw(), fmt.max_raw());
        CHECK(conv2d_stream(f, k, math) == expect);
      }
    }
  }
}

TEST_CASE("correlation orientation: a delta reproduces the flipped kernel") {
  Kernel k;
  k.size = 3;
  k.weights = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  RealFrame f(Geometry{5, 5});
  f(2, 2) = 1.0;
  const RealFrame out = conv2d_stream(f, k);
  // out(x, y) = sum k(i, j) f(x + j - 1, y + i - 1); the delta sits at
  // j = 3 - x, i = 3 - y.
  for (int y = 1; y <= 3; ++y) {
    for (int x = 1; x <= 3; ++x) CHECK(out(x, y) == k(3 - y, 3 - x));
  }
  CHECK(out(0, 0) == 0.0);
}

TEST_CASE("zero padding: constant input gives the partial kernel sum at borders") {
  const Kernel k = gaussian_kernel(0.05, 20.0, 3);
  const RealFrame out = conv2d_stream(RealFrame(Geometry{6, 4}, 1.0), k);
  CHECK(out(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
  const double corner = k(1, 1) + k(1, 2) + k(2, 1) + k(2, 2);
  CHECK(out(0, 0) == doctest::Approx(corner).epsilon(1e-12));
  CHECK(out(5, 3) == doctest::Approx(corner).epsilon(1e-12));
}

TEST_CASE("one convolver serves frames of different widths") {
  std::mt19937 rng(23);
  Kernel k;
  k.size = 5;
  k.weights = random_weights(rng, 5);
  LineBufferConvolver<RealArith> conv(5, k.weights);
  for (const Geometry g : {Geometry{8, 8}, Geometry{20, 6}, Geometry{8, 8}, Geometry{5, 30}}) {
    const RealFrame f = oracle::random_frame(rng, g);
    CHECK(conv.run(f, RealArith{}) == oracle::correlate(f, 5, k.weights));
  }
}

TEST_CASE("convolver argument checks") {
  const std::vector<double> w(9, 0.0);
  CHECK_THROWS_AS(LineBufferConvolver<RealArith>(4, std::vector<double>(16)), std::invalid_argument);
  CHECK_THROWS_AS(LineBufferConvolver<RealArith>(3, std::vector<double>(8)), std::invalid_argument);
  LineBufferConvolver<RealArith> conv(3, w);
  CHECK_THROWS_AS(conv.run(RealFrame(Geometry{2, 8}), RealArith{}), std::invalid_argument);
  FixedMath math(kQ);
  FixedKernel k = quantize_kernel(gaussian_kernel(0.05, 20.0, 3), FixedPointFormat{16, 8});
  CHECK_THROWS_AS(conv2d_stream(RawFrame(Geometry{8, 8}), k, math), FormatMismatch);
}

TEST_CASE("fixed correlation saturates instead of wrapping") {
  FixedMath math(kQ);
  FixedKernel k;
  k.size = 3;
  k.format = kQ;
  k.weights.assign(9, 1024);  // all ones
  const RawFrame f(Geometry{4, 4}, kQ.max_raw());
  const RawFrame out = conv2d_stream(f, k, math);
  for (auto v : out.data()) CHECK(v == kQ.max_raw());
  CHECK(math.saturations() > 0);
}
