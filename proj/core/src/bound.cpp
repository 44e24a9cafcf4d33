#include "isochr/bound.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isochr/error.hpp"

namespace isochr {

namespace {

void validate(double accuracy, double safety_factor) {
  if (!(accuracy > 0.0 && accuracy <= 1.0)) throw ParameterError("accuracy must lie in (0, 1]");
  if (!(safety_factor > 0.0 && safety_factor < 1.0))
    throw ParameterError("safety factor must lie in (0, 1)");
}

// Appends the unsorted distance multiset for one isovalue.
void gather(const FieldView& f, double k, BoundMode mode, std::vector<double>& out) {
  if (mode == BoundMode::strict_vertices) {
    out.reserve(out.size() + f.values.size());
    for (double s : f.values) out.push_back(std::abs(s - k));
    return;
  }
  auto edge = [&](double a, double b) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    if (lo < k && k < hi) {
      out.push_back(k - lo);
      out.push_back(hi - k);
    }
  };
  const Extent3 e = f.dims;
  for (std::size_t z = 0; z < e.z; ++z)
    for (std::size_t y = 0; y < e.y; ++y)
      for (std::size_t x = 0; x < e.x; ++x) {
        const double s = f(x, y, z);
        if (x + 1 < e.x) edge(s, f(x + 1, y, z));
        if (y + 1 < e.y) edge(s, f(x, y + 1, z));
        if (z + 1 < e.z) edge(s, f(x, y, z + 1));
      }
}

BoundSpec from_selected(double selected, std::size_t n, double accuracy, double safety_factor) {
  BoundSpec spec;
  spec.accuracy = accuracy;
  spec.safety_factor = safety_factor;
  spec.n_selected = n;
  spec.lossless_required = selected == 0.0;
  spec.error_bound = selected * safety_factor;
  return spec;
}

BoundSpec fallback_spec(double accuracy, double safety_factor, double loose_bound) {
  BoundSpec spec;
  spec.accuracy = accuracy;
  spec.safety_factor = safety_factor;
  spec.error_bound = loose_bound;
  spec.fallback = true;
  return spec;
}

}  // namespace

std::string_view to_string(BoundMode m) noexcept {
  return m == BoundMode::paper_edges ? "paper" : "strict";
}

BoundMode parse_bound_mode(std::string_view s) {
  if (s == "paper" || s == "paper_edges" || s == "edges") return BoundMode::paper_edges;
  if (s == "strict" || s == "strict_vertices" || s == "vertices") return BoundMode::strict_vertices;
  throw ParameterError("unknown bound mode '" + std::string(s) + "' (expected strict|paper)");
}

DistanceArray collect_distances(const FieldView& samples, double k, BoundMode mode) {
  DistanceArray d;
  d.source_mode = mode;
  d.isovalue = k;
  gather(samples, k, mode, d.distances);
  std::sort(d.distances.begin(), d.distances.end());
  return d;
}

std::size_t selection_rank(double accuracy, std::size_t count) {
  const double slack = std::floor((1.0 - accuracy) * static_cast<double>(count));
  std::size_t n = 1 + static_cast<std::size_t>(std::max(0.0, slack));
  return std::min(std::max<std::size_t>(n, 1), std::max<std::size_t>(count, 1));
}

BoundSpec select_bound(const DistanceArray& d, double accuracy, double safety_factor,
                       double loose_bound) {
  validate(accuracy, safety_factor);
  if (d.distances.empty()) return fallback_spec(accuracy, safety_factor, loose_bound);
  const std::size_t n = selection_rank(accuracy, d.distances.size());
  return from_selected(d.distances[n - 1], n, accuracy, safety_factor);
}

BoundSpec region_bound(const FieldView& samples, std::span<const double> served,
                       const BoundPolicy& policy) {
  validate(policy.accuracy, policy.safety_factor);
  if (served.empty()) return fallback_spec(policy.accuracy, policy.safety_factor, policy.loose_bound);

  BoundSpec best;
  bool have = false;
  std::vector<double> scratch;
  for (double k : served) {
    scratch.clear();
    gather(samples, k, policy.mode, scratch);
    BoundSpec spec;
    if (scratch.empty()) {
      spec = fallback_spec(policy.accuracy, policy.safety_factor, policy.loose_bound);
    } else {
      const std::size_t n = selection_rank(policy.accuracy, scratch.size());
      double selected;
      if (n == 1) {
        selected = *std::min_element(scratch.begin(), scratch.end());
      } else {
        auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(n - 1);
        std::nth_element(scratch.begin(), nth, scratch.end());
        selected = *nth;
      }
      spec = from_selected(selected, n, policy.accuracy, policy.safety_factor);
    }
    if (!have || spec.error_bound < best.error_bound) {
      best = spec;
      have = true;
    }
  }
  return best;
}

double loose_bound_for_range(double vmin, double vmax, double loose_fraction) {
  if (!(loose_fraction >= 0.0)) throw ParameterError("loose fraction must be non-negative");
  return loose_fraction * (vmax - vmin);
}

}  // namespace isochr
