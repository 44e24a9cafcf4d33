#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "isochr/field.hpp"

namespace isochr {

enum class DType : std::uint8_t { f32 = 1, f64 = 2 };
enum class Endian : std::uint8_t { little = 0, big = 1 };

constexpr std::size_t dtype_size(DType t) noexcept { return t == DType::f32 ? 4 : 8; }
std::string_view to_string(DType t) noexcept;
DType parse_dtype(std::string_view s);
Endian parse_endian(std::string_view s);

/// Immutable 3D scalar field. Samples are stored as doubles in row-major
/// order with x fastest; every sample is finite. The dtype records the
/// width the data was ingested at so streaming costs count original bytes.
class Volume {
 public:
  Volume(Extent3 dims, std::vector<double> values, Vec3 spacing = {1.0, 1.0, 1.0},
         DType source_dtype = DType::f64);

  const Extent3& dims() const noexcept { return dims_; }
  const Vec3& spacing() const noexcept { return spacing_; }
  DType source_dtype() const noexcept { return dtype_; }
  std::span<const double> values() const noexcept { return values_; }
  double vmin() const noexcept { return vmin_; }
  double vmax() const noexcept { return vmax_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Bytes of the field at its ingested width.
  std::size_t original_bytes() const noexcept { return values_.size() * dtype_size(dtype_); }

  double operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return values_[linear_index(dims_, x, y, z)];
  }
  FieldView view() const noexcept { return {dims_, values_}; }

 private:
  Extent3 dims_;
  Vec3 spacing_;
  DType dtype_;
  std::vector<double> values_;
  double vmin_ = 0.0;
  double vmax_ = 0.0;
};

Volume load_raw(const std::filesystem::path& path, Extent3 dims, DType dtype,
                Endian endianness = Endian::little);

void save_raw(const Volume& volume, const std::filesystem::path& path, DType dtype,
              Endian endianness = Endian::little);

/// Signed distance to a sphere: value = |p - center| - radius, with p the
/// lattice coordinate scaled by unit spacing.
Volume gen_sphere(Extent3 dims, Vec3 center, double radius);

/// Sum of `num_modes` unit-amplitude plane waves
///   sin(2*pi*(fx*x/nx + fy*y/ny + fz*z/nz) + phase)
/// with integer frequencies in [-3, 3] (not all zero) and phases in
/// [0, 2*pi). Parameters come from std::mt19937_64 seeded with `seed`;
/// each draw maps raw 64-bit output to a real via (bits >> 11) * 2^-53, so
/// the parameter sequence is identical on every conforming platform.
Volume gen_smooth_random(Extent3 dims, std::uint64_t seed, int num_modes);

}  // namespace isochr
