#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "isochr/field.hpp"

namespace isochr {

/// Which samples contribute distances to the topology-preserving bound.
enum class BoundMode : std::uint8_t {
  /// Endpoints of axis-aligned edges with s0 < k < s1 only.
  paper_edges = 0,
  /// Every sample, |s - k|. Guarantees case codes survive any perturbation
  /// strictly smaller than the minimum.
  strict_vertices = 1,
};

std::string_view to_string(BoundMode m) noexcept;
BoundMode parse_bound_mode(std::string_view s);

/// 1 - 2^-20: shrinks the selected distance so bounded errors stay strictly
/// short of the isovalue.
inline constexpr double kDefaultSafetyFactor = 1.0 - 0x1.0p-20;
inline constexpr double kDefaultLooseFraction = 0.01;

/// Ascending distances between samples and an isovalue.
struct DistanceArray {
  std::vector<double> distances;
  BoundMode source_mode = BoundMode::strict_vertices;
  double isovalue = 0.0;
};

struct BoundSpec {
  double error_bound = 0.0;
  double accuracy = 1.0;
  std::size_t n_selected = 0;  // 1-based rank into D; 0 when D was empty
  double safety_factor = kDefaultSafetyFactor;
  bool lossless_required = false;
  bool fallback = false;  // true when the loose bound was used
};

/// Knobs shared by every bound computation of one archive.
struct BoundPolicy {
  double accuracy = 1.0;
  BoundMode mode = BoundMode::strict_vertices;
  double safety_factor = kDefaultSafetyFactor;
  /// Absolute bound for regions with no distances or no served candidates.
  double loose_bound = 0.0;
};

DistanceArray collect_distances(const FieldView& samples, double k, BoundMode mode);

/// 1-based rank n = max(1, 1 + floor((1 - accuracy) * count)), clamped to count.
std::size_t selection_rank(double accuracy, std::size_t count);

BoundSpec select_bound(const DistanceArray& d, double accuracy, double safety_factor,
                       double loose_bound);

/// Minimum of select_bound over every served candidate; the loose bound when
/// `served` is empty. Selects with nth_element instead of a full sort.
BoundSpec region_bound(const FieldView& samples, std::span<const double> served,
                       const BoundPolicy& policy);

/// loose_fraction * (vmax - vmin).
double loose_bound_for_range(double vmin, double vmax, double loose_fraction);

}  // namespace isochr
