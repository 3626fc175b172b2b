#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nretina {

struct Geometry {
  int width = 0;
  int height = 0;

  std::size_t pixels() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

inline std::string to_string(const Geometry& g) {
  return std::to_string(g.width) + "x" + std::to_string(g.height);
}

/// Row-major 2-D array of samples.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(Geometry g, T fill = T{}) : geometry_(g), data_(g.pixels(), fill) {
    if (g.width < 0 || g.height < 0) throw std::invalid_argument("negative plane geometry");
  }
  Plane(int width, int height, T fill = T{}) : Plane(Geometry{width, height}, fill) {}

  const Geometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::span<T> row(int y) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width(), width());
  }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width(), width());
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry_.width) +
           static_cast<std::size_t>(x);
  }

  Geometry geometry_;
  std::vector<T> data_;
};

using RealFrame = Plane<double>;
/// Fixed-point frame: raw mantissas, format carried by the owning stage.
using RawFrame = Plane<std::int64_t>;

class GeometryMismatch : public std::invalid_argument {
 public:
  GeometryMismatch(const Geometry& expected, const Geometry& got)
      : std::invalid_argument("geometry mismatch: expected " + to_string(expected) + ", got " +
                              to_string(got)) {}
};

inline void require_geometry(const Geometry& expected, const Geometry& got) {
  if (!(expected == got)) throw GeometryMismatch(expected, got);
}

}  // namespace nretina
