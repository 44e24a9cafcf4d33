#pragma once

// Independent reference implementations used as test oracles. Nothing in
// here calls into the library code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "isochr/field.hpp"
#include "mc_table.hpp"

namespace isochr::testing {

struct RefTriangle {
  std::array<Vec3, 3> v;
};

/// Classic per-cell marching cubes written directly against the table's
/// own corner numbering: no case-code remapping, no vertex sharing, and
/// the interpolation runs from the table's first edge endpoint.
inline std::vector<RefTriangle> reference_marching_cubes(const FieldView& f, double k,
                                                         const Vec3& spacing = {1, 1, 1},
                                                         const Vec3& origin = {0, 0, 0}) {
  static constexpr int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                       {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  static constexpr int edge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                      {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  std::vector<RefTriangle> out;
  for (std::size_t z = 0; z + 1 < f.dims.z; ++z)
    for (std::size_t y = 0; y + 1 < f.dims.y; ++y)
      for (std::size_t x = 0; x + 1 < f.dims.x; ++x) {
        double val[8];
        Vec3 pos[8];
        int index = 0;
        for (int j = 0; j < 8; ++j) {
          const std::size_t px = x + corner[j][0], py = y + corner[j][1], pz = z + corner[j][2];
          val[j] = f.values[px + f.dims.x * (py + f.dims.y * pz)];
          pos[j] = {origin[0] + spacing[0] * double(px), origin[1] + spacing[1] * double(py),
                    origin[2] + spacing[2] * double(pz)};
          if (val[j] < k) index |= 1 << j;
        }
        const auto& row = detail::kTriTable[index];
        for (int t = 0; row[t] != -1; t += 3) {
          RefTriangle tri;
          for (int v = 0; v < 3; ++v) {
            const int a = edge[row[t + v]][0], b = edge[row[t + v]][1];
            const double mu = val[b] == val[a] ? 0.0 : (k - val[a]) / (val[b] - val[a]);
            for (int d = 0; d < 3; ++d) tri.v[v][d] = pos[a][d] + mu * (pos[b][d] - pos[a][d]);
          }
          out.push_back(tri);
        }
      }
  return out;
}

/// Brute-force extrema over a box of a flat field.
inline std::pair<double, double> brute_range(const FieldView& f, const Index3& o, const Extent3& e) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t z = o.z; z < o.z + e.z; ++z)
    for (std::size_t y = o.y; y < o.y + e.y; ++y)
      for (std::size_t x = o.x; x < o.x + e.x; ++x) {
        const double v = f(x, y, z);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  return {lo, hi};
}

/// True iff the cell's corners include values on both sides of k (>= convention).
inline bool cell_straddles(const FieldView& f, std::size_t x, std::size_t y, std::size_t z, double k) {
  bool in = false, out = false;
  for (int i = 0; i < 8; ++i) {
    const double v = f(x + (i & 1), y + ((i >> 1) & 1), z + ((i >> 2) & 1));
    (v >= k ? in : out) = true;
  }
  return in && out;
}

struct ObjData {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;  // 0-based
  int comment_lines = 0;
};

/// Minimal OBJ reader: `v` and triangular `f` records, `#` comments.
inline ObjData read_obj(const std::string& path) {
  ObjData data;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "#") {
      ++data.comment_lines;
    } else if (tag == "v") {
      Vec3 v{};
      ss >> v[0] >> v[1] >> v[2];
      data.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<std::uint32_t, 3> f{};
      ss >> f[0] >> f[1] >> f[2];
      for (auto& i : f) --i;
      data.faces.push_back(f);
    }
  }
  return data;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace isochr::testing
