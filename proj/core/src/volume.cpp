#include "isochr/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "isochr/error.hpp"

namespace isochr {

namespace {

constexpr bool host_is_little = std::endian::native == std::endian::little;

template <class U>
U byteswap(U v) noexcept {
  U out = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out = static_cast<U>((out << 8) | (v & 0xff));
    v = static_cast<U>(v >> 8);
  }
  return out;
}

template <class Float, class Bits>
Float decode_sample(const unsigned char* p, bool swap) {
  Bits bits;
  std::memcpy(&bits, p, sizeof(Bits));
  if (swap) bits = byteswap(bits);
  return std::bit_cast<Float>(bits);
}

template <class Float, class Bits>
void encode_sample(Float v, unsigned char* p, bool swap) {
  auto bits = std::bit_cast<Bits>(v);
  if (swap) bits = byteswap(bits);
  std::memcpy(p, &bits, sizeof(Bits));
}

// Uniform real in [0, 1) from one raw 64-bit draw.
double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string_view to_string(DType t) noexcept { return t == DType::f32 ? "f32" : "f64"; }

DType parse_dtype(std::string_view s) {
  if (s == "f32" || s == "float32" || s == "float") return DType::f32;
  if (s == "f64" || s == "float64" || s == "double") return DType::f64;
  throw ParameterError("unknown dtype '" + std::string(s) + "' (expected f32|f64)");
}

Endian parse_endian(std::string_view s) {
  if (s == "little" || s == "le") return Endian::little;
  if (s == "big" || s == "be") return Endian::big;
  throw ParameterError("unknown endianness '" + std::string(s) + "' (expected little|big)");
}

Volume::Volume(Extent3 dims, std::vector<double> values, Vec3 spacing, DType source_dtype)
    : dims_(dims), spacing_(spacing), dtype_(source_dtype), values_(std::move(values)) {
  if (dims_.x == 0 || dims_.y == 0 || dims_.z == 0)
    throw ParameterError("volume dims must be positive");
  if (values_.size() != dims_.count())
    throw ParameterError("volume has " + std::to_string(values_.size()) +
                         " samples but dims imply " + std::to_string(dims_.count()));
  for (double s : spacing_)
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("spacing must be positive");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) throw NonFiniteError(i);
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  vmin_ = *lo;
  vmax_ = *hi;
}

Volume load_raw(const std::filesystem::path& path, Extent3 dims, DType dtype, Endian endianness) {
  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec) throw IoError(path.string(), ec.message());
  const std::uintmax_t expected = dims.count() * dtype_size(dtype);
  if (actual != expected) throw SizeMismatchError(expected, actual);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<unsigned char> bytes(expected);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(expected));
  if (!in) throw IoError(path.string(), "short read");

  const bool swap = (endianness == Endian::little) != host_is_little;
  std::vector<double> values(dims.count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (dtype == DType::f32)
      values[i] = decode_sample<float, std::uint32_t>(&bytes[i * 4], swap);
    else
      values[i] = decode_sample<double, std::uint64_t>(&bytes[i * 8], swap);
  }
  return Volume(dims, std::move(values), {1.0, 1.0, 1.0}, dtype);
}

void save_raw(const Volume& volume, const std::filesystem::path& path, DType dtype,
              Endian endianness) {
  const bool swap = (endianness == Endian::little) != host_is_little;
  const std::size_t width = dtype_size(dtype);
  std::vector<unsigned char> bytes(volume.size() * width);
  const auto values = volume.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (dtype == DType::f32)
      encode_sample<float, std::uint32_t>(static_cast<float>(values[i]), &bytes[i * 4], swap);
    else
      encode_sample<double, std::uint64_t>(values[i], &bytes[i * 8], swap);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

Volume gen_sphere(Extent3 dims, Vec3 center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
  std::vector<double> values(dims.count());
  for (std::size_t z = 0; z < dims.z; ++z)
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const double dx = static_cast<double>(x) - center[0];
        const double dy = static_cast<double>(y) - center[1];
        const double dz = static_cast<double>(z) - center[2];
        values[linear_index(dims, x, y, z)] = std::sqrt(dx * dx + dy * dy + dz * dz) - radius;
      }
  return Volume(dims, std::move(values));
}

Volume gen_smooth_random(Extent3 dims, std::uint64_t seed, int num_modes) {
  if (num_modes < 1) throw ParameterError("num_modes must be >= 1");
  struct Mode {
    double fx, fy, fz, phase;
  };
  std::mt19937_64 rng(seed);
  auto draw_freq = [&rng] { return static_cast<double>(static_cast<int>(unit_real(rng) * 7.0) - 3); };
  std::vector<Mode> modes;
  modes.reserve(static_cast<std::size_t>(num_modes));
  for (int m = 0; m < num_modes; ++m) {
    Mode mode{};
    do {
      mode.fx = draw_freq();
      mode.fy = draw_freq();
      mode.fz = draw_freq();
    } while (mode.fx == 0.0 && mode.fy == 0.0 && mode.fz == 0.0);
    mode.phase = 2.0 * std::numbers::pi * unit_real(rng);
    modes.push_back(mode);
  }

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> values(dims.count());
  for (std::size_t z = 0; z < dims.z; ++z)
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const double u = static_cast<double>(x) / static_cast<double>(dims.x);
        const double v = static_cast<double>(y) / static_cast<double>(dims.y);
        const double w = static_cast<double>(z) / static_cast<double>(dims.z);
        double sum = 0.0;
        for (const Mode& m : modes) sum += std::sin(two_pi * (m.fx * u + m.fy * v + m.fz * w) + m.phase);
        values[linear_index(dims, x, y, z)] = sum;
      }
  return Volume(dims, std::move(values));
}

Field3 extract_window(const FieldView& src, const Index3& origin, const Extent3& extent) {
  if (origin.x + extent.x > src.dims.x || origin.y + extent.y > src.dims.y ||
      origin.z + extent.z > src.dims.z)
    throw ParameterError("window exceeds source grid");
  Field3 out(extent);
  for (std::size_t z = 0; z < extent.z; ++z)
    for (std::size_t y = 0; y < extent.y; ++y) {
      const std::size_t s = linear_index(src.dims, origin.x, origin.y + y, origin.z + z);
      std::copy_n(src.values.begin() + static_cast<std::ptrdiff_t>(s), extent.x,
                  out.values.begin() + static_cast<std::ptrdiff_t>(linear_index(extent, 0, y, z)));
    }
  return out;
}

}  // namespace isochr
