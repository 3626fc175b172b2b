#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "nretina/arith.hpp"
#include "nretina/fixedpoint.hpp"
#include "nretina/plane.hpp"

namespace nretina {

class DegenerateKernel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square correlation kernel, row-major weights.
struct Kernel {
  int size = 1;
  std::vector<double> weights{1.0};

  double operator()(int row, int col) const { return weights[row * size + col]; }
  double sum() const;
};

struct FixedKernel {
  int size = 1;
  std::vector<std::int64_t> weights;
  FixedPointFormat format;
};

/// Normalized size x size Gaussian with sigma_px = sigma_deg * pixels_per_degree.
/// size must be 3 or 5.
Kernel gaussian_kernel(double sigma_deg, double pixels_per_degree, int size);

/// Floors every weight into `fmt`. Throws DegenerateKernel when all weights
/// vanish (the normalized Gaussian is flatter than one LSB per tap).
FixedKernel quantize_kernel(const Kernel& k, FixedPointFormat fmt);

/// Raster-order streaming correlator with zero padding.
///
/// Holds `size - 1` line buffers of one row each and a size x size register
/// window. Samples enter one at a time in raster order over an extended raster
/// of (H + half) x (W + half) positions, where positions outside the frame feed
/// zeros. After each position the window covers rows R-2h..R and columns
/// C-2h..C, so the output for pixel (C-h, R-h) is produced as soon as sample
/// (C, R) arrives. The window is cleared at the start of each row and line
/// buffers read as zero above row 0 and below row H-1, which yields exactly the
/// zero-padded neighborhood.
///
/// Multiply-accumulate order is kernel row-major, matching a direct
/// correlation loop over (i, j), so results are bit-identical to it in any
/// arithmetic policy. Products are summed in the policy's wide accumulator
/// and rounded once per output sample.
template <typename Arith>
class LineBufferConvolver {
 public:
  using T = typename Arith::value_type;

  LineBufferConvolver(int size, std::span<const T> weights)
      : size_(size), half_((size - 1) / 2), weights_(weights.begin(), weights.end()) {
    if (size < 1 || size % 2 == 0) throw std::invalid_argument("kernel size must be odd");
    if (weights_.size() != static_cast<std::size_t>(size) * size) {
      throw std::invalid_argument("kernel weight count does not match size");
    }
    window_.assign(weights_.size() * 2, T{});
    column_.assign(size, T{});
    line_ptr_.assign(size, nullptr);
  }

  int size() const { return size_; }

  Plane<T> run(const Plane<T>& frame, const Arith& arith) {
    const int W = frame.width();
    const int H = frame.height();
    if (W < size_ || H < size_) {
      throw std::invalid_argument("frame smaller than the convolution kernel");
    }
    const int lines = size_ - 1;
    if (width_ != W) {
      width_ = W;
      rows_.assign(static_cast<std::size_t>(std::max(lines, 1)) * W, T{});
    }
    switch (size_) {
      case 3:
        return dispatch<3>(frame, arith);
      case 5:
        return dispatch<5>(frame, arith);
      default:
        return dispatch<0>(frame, arith);
    }
  }

 private:
  std::size_t slot(int row) const {
    return static_cast<std::size_t>(row % (size_ - 1));
  }

  // Picks the accumulator: int64 when the fixed-point format guarantees the
  // sum cannot overflow it, otherwise the policy's wide type.
  template <int S>
  Plane<T> dispatch(const Plane<T>& frame, const Arith& arith) {
    if constexpr (std::is_same_v<Arith, FixedArith>) {
      if (arith.math->small_accumulator()) return run_sized<S, std::int64_t>(frame, arith);
    }
    return run_sized<S, typename Arith::acc_type>(frame, arith);
  }

  // S is the kernel size when known at compile time, 0 otherwise.
  template <int S, typename Acc>
  Plane<T> run_sized(const Plane<T>& frame, const Arith& arith) {
    const int n = S > 0 ? S : size_;
    const int half = (n - 1) / 2;
    const int lines = n - 1;
    const int W = frame.width();
    const int H = frame.height();
    Plane<T> out(frame.geometry());
    for (int R = 0; R < H + half; ++R) {
      std::fill(window_.begin(), window_.end(), T{});
      int head = 0;
      for (int k = 0; k < lines; ++k) {
        const int r = R - lines + k;
        line_ptr_[k] = (r >= 0 && r < H) ? &rows_[slot(r) * W] : nullptr;
      }
      const T* live = R < H ? &frame(0, R) : nullptr;
      T* store = (R < H && lines > 0) ? &rows_[slot(R) * W] : nullptr;
      for (int C = 0; C < W + half; ++C) {
        const bool in_row = C < W;
        // Column entering the window: rows R-2h .. R-1 from the line buffers,
        // then the live sample.
        for (int k = 0; k < lines; ++k) {
          column_[k] = (line_ptr_[k] && in_row) ? line_ptr_[k][C] : T{};
        }
        const T sample = (live && in_row) ? live[C] : T{};
        column_[lines] = sample;
        if (store && in_row) store[C] = sample;

        // Each window row is a ring stored twice over: the newest column goes
        // to slots head and head + size, so the `size` columns from oldest to
        // newest are always contiguous at [head + 1, head + size].
        head = head + 1 == n ? 0 : head + 1;
        for (int i = 0; i < n; ++i) {
          T* wrow = &window_[static_cast<std::size_t>(i) * 2 * n];
          wrow[head] = column_[i];
          wrow[head + n] = column_[i];
        }
        if (R >= half && C >= half) {
          Acc acc{};
          const T* w = weights_.data();
          for (int i = 0; i < n; ++i) {
            const T* wrow = &window_[static_cast<std::size_t>(i) * 2 * n + head + 1];
            for (int j = 0; j < n; ++j) acc += static_cast<Acc>(w[i * n + j]) * wrow[j];
          }
          out(C - half, R - half) = arith.narrow(acc);
        }
      }
    }
    return out;
  }

  int size_;
  int half_;
  int width_ = -1;
  std::vector<T> weights_;
  std::vector<T> rows_;
  std::vector<T> window_;
  std::vector<T> column_;
  std::vector<const T*> line_ptr_;
};

RealFrame conv2d_stream(const RealFrame& frame, const Kernel& k);
RawFrame conv2d_stream(const RawFrame& frame, const FixedKernel& k, FixedMath& math);

}  // namespace nretina
