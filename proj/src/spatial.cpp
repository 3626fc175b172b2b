#include "nretina/spatial.hpp"

#include <cmath>
#include <numeric>

namespace nretina {

double Kernel::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

Kernel gaussian_kernel(double sigma_deg, double pixels_per_degree, int size) {
  if (size != 3 && size != 5) throw std::invalid_argument("Gaussian kernel size must be 3 or 5");
  if (!(sigma_deg > 0.0) || !(pixels_per_degree > 0.0)) {
    throw std::invalid_argument("sigma and pixels_per_degree must be positive");
  }
  const double sigma_px = sigma_deg * pixels_per_degree;
  const int c = (size - 1) / 2;
  Kernel k;
  k.size = size;
  k.weights.resize(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double d2 = (i - c) * (i - c) + (j - c) * (j - c);
      // d2 == 0 keeps the center at exactly 1 even when sigma_px underflows.
      k.weights[i * size + j] = d2 == 0.0 ? 1.0 : std::exp(-d2 / (2.0 * sigma_px * sigma_px));
    }
  }
  const double total = k.sum();
  if (!std::isfinite(total) || total <= 0.0) {
    throw DegenerateKernel("Gaussian kernel normalization is not finite");
  }
  for (double& w : k.weights) w /= total;
  return k;
}

FixedKernel quantize_kernel(const Kernel& k, FixedPointFormat fmt) {
  FixedMath math(fmt);
  FixedKernel q;
  q.size = k.size;
  q.format = fmt;
  q.weights.reserve(k.weights.size());
  std::int64_t total = 0;
  for (const double w : k.weights) {
    q.weights.push_back(math.from_real(w));
    total += q.weights.back();
  }
  if (total == 0) {
    throw DegenerateKernel("every kernel weight is below one LSB of " + fmt.to_string());
  }
  return q;
}

RealFrame conv2d_stream(const RealFrame& frame, const Kernel& k) {
  LineBufferConvolver<RealArith> conv(k.size, k.weights);
  return conv.run(frame, RealArith{});
}

RawFrame conv2d_stream(const RawFrame& frame, const FixedKernel& k, FixedMath& math) {
  if (!(k.format == math.format())) {
    throw FormatMismatch("kernel format " + k.format.to_string() + " differs from datapath " +
                         math.format().to_string());
  }
  LineBufferConvolver<FixedArith> conv(k.size, k.weights);
  return conv.run(frame, FixedArith{&math});
}

}  // namespace nretina
