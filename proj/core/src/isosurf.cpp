#include "isochr/isosurf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <unordered_map>

#include "isochr/error.hpp"
#include "mc_table.hpp"
#include "parallel.hpp"

namespace isochr {

namespace {

// Table corner j -> cell corner index (cx + 2cy + 4cz).
constexpr std::array<int, 8> kTableCorner = {0, 1, 3, 2, 4, 5, 7, 6};

// Table edge -> (table corner a, table corner b).
constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

constexpr std::array<int, 3> corner_offset(int cell_corner) noexcept {
  return {cell_corner & 1, (cell_corner >> 1) & 1, (cell_corner >> 2) & 1};
}

// Lower endpoint offset and axis of a table edge within the cell.
struct EdgeGeom {
  std::array<int, 3> lo;
  int axis;
};

constexpr std::array<EdgeGeom, 12> make_edge_geom() {
  std::array<EdgeGeom, 12> g{};
  for (int e = 0; e < 12; ++e) {
    auto a = corner_offset(kTableCorner[kEdgeCorners[e][0]]);
    auto b = corner_offset(kTableCorner[kEdgeCorners[e][1]]);
    for (int d = 0; d < 3; ++d) {
      if (a[d] != b[d]) g[e].axis = d;
      g[e].lo[d] = a[d] < b[d] ? a[d] : b[d];
    }
  }
  return g;
}

constexpr auto kEdgeGeom = make_edge_geom();

// Case code -> table row: table bit j is set when corner j is outside.
constexpr std::array<std::uint8_t, 256> make_table_index() {
  std::array<std::uint8_t, 256> lut{};
  for (int code = 0; code < 256; ++code) {
    int idx = 0;
    for (int j = 0; j < 8; ++j)
      if (((code >> kTableCorner[j]) & 1) == 0) idx |= 1 << j;
    lut[code] = static_cast<std::uint8_t>(idx);
  }
  return lut;
}

constexpr auto kTableIndex = make_table_index();

struct SlabMesh {
  std::vector<Vec3> vertices;
  std::vector<std::uint64_t> keys;
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

void extract_slab(const FieldView& f, const Vec3& spacing, const Vec3& origin, double k,
                  std::size_t z_begin, std::size_t z_end, SlabMesh& out) {
  const Extent3 d = f.dims;
  std::unordered_map<std::uint64_t, std::uint32_t> seen;
  std::array<double, 8> c{};
  for (std::size_t z = z_begin; z < z_end; ++z)
    for (std::size_t y = 0; y + 1 < d.y; ++y)
      for (std::size_t x = 0; x + 1 < d.x; ++x) {
        for (int i = 0; i < 8; ++i) c[i] = f(x + (i & 1), y + ((i >> 1) & 1), z + ((i >> 2) & 1));
        const std::uint8_t code = cell_case(c, k);
        if (code == 0 || code == 255) continue;
        const auto& row = detail::kTriTable[kTableIndex[code]];
        for (int t = 0; row[t] != -1; t += 3) {
          std::array<std::uint32_t, 3> tri{};
          for (int v = 0; v < 3; ++v) {
            const EdgeGeom& g = kEdgeGeom[row[t + v]];
            const std::size_t lx = x + g.lo[0], ly = y + g.lo[1], lz = z + g.lo[2];
            const std::uint64_t key = linear_index(d, lx, ly, lz) * 3 + g.axis;
            auto [it, inserted] = seen.try_emplace(key, static_cast<std::uint32_t>(out.vertices.size()));
            if (inserted) {
              const double s0 = f(lx, ly, lz);
              const double s1 = f(lx + (g.axis == 0), ly + (g.axis == 1), lz + (g.axis == 2));
              const double t_edge = s1 == s0 ? 0.0 : (k - s0) / (s1 - s0);
              Vec3 p{static_cast<double>(lx), static_cast<double>(ly), static_cast<double>(lz)};
              p[g.axis] += t_edge;
              out.vertices.push_back({origin[0] + spacing[0] * p[0], origin[1] + spacing[1] * p[1],
                                      origin[2] + spacing[2] * p[2]});
              out.keys.push_back(key);
            }
            tri[v] = it->second;
          }
          out.triangles.push_back(tri);
        }
      }
}

}  // namespace

std::uint8_t cell_case(const std::array<double, 8>& corners, double k) noexcept {
  std::uint8_t code = 0;
  for (int i = 0; i < 8; ++i)
    if (corners[i] >= k) code = static_cast<std::uint8_t>(code | (1u << i));
  return code;
}

int case_triangle_count(std::uint8_t code) noexcept {
  const auto& row = detail::kTriTable[kTableIndex[code]];
  int n = 0;
  while (n < 16 && row[n] != -1) ++n;
  return n / 3;
}

bool case_table_consistent() noexcept {
  for (int code = 0; code < 256; ++code) {
    const auto& row = detail::kTriTable[kTableIndex[code]];
    int n = 0;
    while (n < 16 && row[n] != -1) ++n;
    if (n % 3 != 0) return false;
    if ((code == 0 || code == 255) && n != 0) return false;
    if (code != 0 && code != 255 && n == 0) return false;
    for (int i = 0; i < n; ++i) {
      if (row[i] < 0 || row[i] > 11) return false;
      const int a = kTableCorner[kEdgeCorners[row[i]][0]];
      const int b = kTableCorner[kEdgeCorners[row[i]][1]];
      if (((code >> a) & 1) == ((code >> b) & 1)) return false;
    }
  }
  return true;
}

TriangleMesh marching_cubes(const FieldView& samples, const Vec3& spacing, const Vec3& origin,
                            double k, unsigned workers) {
  const Extent3 d = samples.dims;
  TriangleMesh mesh;
  if (d.x < 2 || d.y < 2 || d.z < 2) return mesh;
  const std::size_t cells_z = d.z - 1;
  workers = detail::clamp_workers(workers, cells_z);

  std::vector<SlabMesh> slabs(workers);
  detail::parallel_chunks(cells_z, workers, [&](std::size_t b, std::size_t e, unsigned w) {
    extract_slab(samples, spacing, origin, k, b, e, slabs[w]);
  });

  if (workers == 1) {
    mesh.vertices = std::move(slabs[0].vertices);
    mesh.triangles = std::move(slabs[0].triangles);
    return mesh;
  }

  // Seam merge: slabs in z order; a vertex whose edge key already exists
  // (shared face between slabs) maps to the earlier index.
  std::unordered_map<std::uint64_t, std::uint32_t> global;
  for (SlabMesh& slab : slabs) {
    std::vector<std::uint32_t> remap(slab.vertices.size());
    for (std::size_t i = 0; i < slab.vertices.size(); ++i) {
      auto [it, inserted] =
          global.try_emplace(slab.keys[i], static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back(slab.vertices[i]);
      remap[i] = it->second;
    }
    for (const auto& t : slab.triangles) mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  }
  return mesh;
}

CaseField case_field(const FieldView& samples, double k) {
  const Extent3 d = samples.dims;
  CaseField cf;
  if (d.x < 2 || d.y < 2 || d.z < 2) return cf;
  cf.cell_dims = {d.x - 1, d.y - 1, d.z - 1};
  cf.codes.resize(cf.cell_dims.count());
  std::array<double, 8> c{};
  for (std::size_t z = 0; z < cf.cell_dims.z; ++z)
    for (std::size_t y = 0; y < cf.cell_dims.y; ++y)
      for (std::size_t x = 0; x < cf.cell_dims.x; ++x) {
        for (int i = 0; i < 8; ++i) c[i] = samples(x + (i & 1), y + ((i >> 1) & 1), z + ((i >> 2) & 1));
        cf.codes[linear_index(cf.cell_dims, x, y, z)] = cell_case(c, k);
      }
  return cf;
}

TopologyReport verify_topology(const FieldView& original, const FieldView& reconstructed, double k) {
  if (!(original.dims == reconstructed.dims))
    throw DimsMismatchError("original and reconstructed fields have different dims");
  const CaseField a = case_field(original, k);
  const CaseField b = case_field(reconstructed, k);
  TopologyReport report;
  report.total_cells = a.codes.size();
  for (std::size_t i = 0; i < a.codes.size(); ++i) {
    if (a.codes[i] == b.codes[i]) continue;
    if (report.differing_cells++ == 0) {
      const Extent3& cd = a.cell_dims;
      report.first_diff = Index3{i % cd.x, (i / cd.x) % cd.y, i / (cd.x * cd.y)};
    }
  }
  report.preserved_fraction =
      report.total_cells == 0
          ? 1.0
          : static_cast<double>(report.total_cells - report.differing_cells) /
                static_cast<double>(report.total_cells);
  return report;
}

double mesh_area(const TriangleMesh& mesh) noexcept {
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const Vec3 n{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    area += 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  }
  return area;
}

void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(path.string().c_str(), "w"),
                                                     &std::fclose);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  std::FILE* f = out.get();
  std::fprintf(f, "# isochr isosurface: %zu vertices, %zu triangles\n", mesh.vertices.size(),
               mesh.triangles.size());
  for (const Vec3& v : mesh.vertices) std::fprintf(f, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
  for (const auto& t : mesh.triangles)
    std::fprintf(f, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
  if (std::ferror(f)) throw IoError(path.string(), "write failed");
}

}  // namespace isochr
