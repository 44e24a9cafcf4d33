#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace isochr {

/// Sample counts along x, y, z.
struct Extent3 {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  constexpr std::size_t count() const noexcept { return x * y * z; }
  constexpr std::size_t operator[](int axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Extent3&, const Extent3&) = default;
};

/// Integer lattice coordinate (sample or block index space).
struct Index3 {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  constexpr std::size_t operator[](int axis) const noexcept {
    return axis == 0 ? x : (axis == 1 ? y : z);
  }
  friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

using Vec3 = std::array<double, 3>;

/// Linear offset in row-major order with x fastest.
constexpr std::size_t linear_index(const Extent3& e, std::size_t x, std::size_t y,
                                   std::size_t z) noexcept {
  return x + e.x * (y + e.y * z);
}

/// Non-owning view of a 3D sample grid.
struct FieldView {
  Extent3 dims;
  std::span<const double> values;

  double operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return values[linear_index(dims, x, y, z)];
  }
};

/// Owning 3D sample grid; used for region windows and reconstructions.
struct Field3 {
  Extent3 dims;
  std::vector<double> values;

  Field3() = default;
  Field3(Extent3 d, std::vector<double> v) : dims(d), values(std::move(v)) {}
  explicit Field3(Extent3 d) : dims(d), values(d.count(), 0.0) {}

  double& operator()(std::size_t x, std::size_t y, std::size_t z) noexcept {
    return values[linear_index(dims, x, y, z)];
  }
  double operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return values[linear_index(dims, x, y, z)];
  }
  FieldView view() const noexcept { return {dims, values}; }

  friend bool operator==(const Field3&, const Field3&) = default;
};

/// Copies the box [origin, origin + extent) out of a larger grid.
Field3 extract_window(const FieldView& src, const Index3& origin, const Extent3& extent);

}  // namespace isochr
