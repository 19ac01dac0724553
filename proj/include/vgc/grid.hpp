#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vgc/error.hpp"

namespace vgc {

/// Extent of a voxel grid. x is the sagittal index, y coronal, z axial.
/// 2D images use z = 1.
struct Dims {
  std::uint32_t x = 1;
  std::uint32_t y = 1;
  std::uint32_t z = 1;

  [[nodiscard]] constexpr std::size_t count() const {
    return std::size_t{x} * y * z;
  }
  [[nodiscard]] constexpr bool is_2d() const { return z == 1; }
  /// Number of axes with extent > 1 (at least 1).
  [[nodiscard]] constexpr int active_axes() const {
    int n = (x > 1) + (y > 1) + (z > 1);
    return n == 0 ? 1 : n;
  }
  [[nodiscard]] std::uint32_t operator[](int axis) const {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" +
         std::to_string(d.z);
}

/// Dense scalar grid with linear index (z*Y + y)*X + x (x fastest).
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  explicit Grid(Dims dims, T fill = T{}) : dims_(checked(dims)) {
    data_.assign(dims_.count(), fill);
  }

  Grid(Dims dims, std::vector<T> data)
      : dims_(checked(dims)), data_(std::move(data)) {
    if (data_.size() != dims_.count()) {
      throw ParameterError("grid data length " + std::to_string(data_.size()) +
                           " does not match dims " + to_string(dims_));
    }
  }

  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::size_t index(std::uint32_t x, std::uint32_t y,
                                  std::uint32_t z = 0) const {
    return (std::size_t{z} * dims_.y + y) * dims_.x + x;
  }

  T& operator()(std::uint32_t x, std::uint32_t y, std::uint32_t z = 0) {
    return data_[index(x, y, z)];
  }
  const T& operator()(std::uint32_t x, std::uint32_t y,
                      std::uint32_t z = 0) const {
    return data_[index(x, y, z)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] std::span<T> values() { return data_; }
  [[nodiscard]] std::span<const T> values() const { return data_; }
  [[nodiscard]] const std::vector<T>& vector() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static Dims checked(Dims d) {
    if (d.x == 0 || d.y == 0 || d.z == 0) {
      throw ParameterError("grid dims must be positive, got " + to_string(d));
    }
    return d;
  }

  Dims dims_{};
  std::vector<T> data_;
};

using Volume = Grid<float>;
using Image2D = Grid<float>;
using BinaryVolume = Grid<std::uint8_t>;
using BinaryImage2D = Grid<std::uint8_t>;
using LabelMap = Grid<std::uint32_t>;

}  // namespace vgc
