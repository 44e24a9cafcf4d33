#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "isochr/error.hpp"
#include "isochr/isosurf.hpp"
#include "isochr/volume.hpp"
#include "support/oracles.hpp"

using namespace isochr;
namespace fs = std::filesystem;

TEST(CellCase, BitDefinition) {
  std::array<double, 8> c{};
  c.fill(0.0);
  EXPECT_EQ(cell_case(c, 0.5), 0);
  c.fill(1.0);
  EXPECT_EQ(cell_case(c, 0.5), 255);
  c.fill(0.0);
  c[3] = 1.0;
  EXPECT_EQ(cell_case(c, 0.5), 0b00001000);
  c.fill(0.5);
  EXPECT_EQ(cell_case(c, 0.5), 255);  // ties are inside
}

TEST(CaseTable, ConsistentWithStraddlingEdges) {
  EXPECT_TRUE(case_table_consistent());
  EXPECT_EQ(case_triangle_count(0), 0);
  EXPECT_EQ(case_triangle_count(255), 0);
  EXPECT_EQ(case_triangle_count(1), 1);
  EXPECT_EQ(case_triangle_count(254), 1);
}

TEST(MarchingCubes, UniformFieldBelowIsoIsEmpty) {
  const std::vector<double> v(27, -1.0);
  EXPECT_TRUE(marching_cubes({{3, 3, 3}, v}, 0.0).empty());
}

TEST(MarchingCubes, LinearRampVerticesExact) {
  std::vector<double> v(3 * 2 * 2);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 3; ++x) v[x + 3 * (y + 2 * z)] = static_cast<double>(x);
  const auto mesh = marching_cubes({{3, 2, 2}, v}, 0.5);
  ASSERT_FALSE(mesh.empty());
  EXPECT_EQ(mesh.vertices.size(), 4u);
  for (const Vec3& p : mesh.vertices) EXPECT_EQ(p[0], 0.5);
}

TEST(MarchingCubes, SphereAreaAndReferenceCount) {
  const Volume v = gen_sphere({64, 64, 64}, {31.5, 31.5, 31.5}, 20.0);
  const auto mesh = marching_cubes(v.view(), 0.0);
  const double exact = 4.0 * std::numbers::pi * 400.0;
  EXPECT_NEAR(mesh_area(mesh), exact, 0.05 * exact);
  EXPECT_EQ(mesh.triangles.size(), isochr::testing::reference_marching_cubes(v.view(), 0.0).size());
}

TEST(MarchingCubes, VerticesLieOnStraddlingEdges) {
  const Volume v = gen_smooth_random({12, 12, 12}, 31, 5);
  const double k = 0.2;
  const auto mesh = marching_cubes(v.view(), k);
  for (const Vec3& p : mesh.vertices) {
    int off_lattice = 0, axis = 0;
    for (int d = 0; d < 3; ++d)
      if (p[d] != std::floor(p[d])) {
        ++off_lattice;
        axis = d;
      }
    ASSERT_LE(off_lattice, 1);
    std::array<std::size_t, 3> lo{static_cast<std::size_t>(std::floor(p[0])),
                                  static_cast<std::size_t>(std::floor(p[1])),
                                  static_cast<std::size_t>(std::floor(p[2]))};
    if (off_lattice == 0) {
      // t == 0 or 1: the vertex is itself a sample; nothing more to check.
      continue;
    }
    auto hi = lo;
    ++hi[axis];
    const double s0 = v(lo[0], lo[1], lo[2]);
    const double s1 = v(hi[0], hi[1], hi[2]);
    EXPECT_NE(s0 >= k, s1 >= k);
  }
}

TEST(MarchingCubes, SharedEdgesDeduplicated) {
  const Volume v = gen_sphere({10, 10, 10}, {4.5, 4.5, 4.5}, 3.2);
  const auto mesh = marching_cubes(v.view(), 0.0);
  // Closed surface away from the boundary: Euler characteristic 2.
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) edges.insert(std::minmax(t[i], t[(i + 1) % 3]));
  const long chi = static_cast<long>(mesh.vertices.size()) - static_cast<long>(edges.size()) +
                   static_cast<long>(mesh.triangles.size());
  EXPECT_EQ(chi, 2);
}

TEST(MarchingCubes, WorkerCountInvariant) {
  const Volume v = gen_smooth_random({23, 19, 29}, 8, 6);
  const auto one = marching_cubes(v.view(), {0.5, 1, 2}, {1, 2, 3}, 0.1, 1);
  for (unsigned w : {2u, 3u, 7u, 0u}) {
    const auto many = marching_cubes(v.view(), {0.5, 1, 2}, {1, 2, 3}, 0.1, w);
    EXPECT_EQ(one.vertices, many.vertices);
    EXPECT_EQ(one.triangles, many.triangles);
  }
}

TEST(CaseField, ConstantAtIsovalueIsAllInside) {
  const std::vector<double> v(27, 2.0);
  const auto cf = case_field({{3, 3, 3}, v}, 2.0);
  EXPECT_EQ(cf.cell_dims, (Extent3{2, 2, 2}));
  for (auto c : cf.codes) EXPECT_EQ(c, 255);
}

TEST(CaseField, SphereSignStructure) {
  const Volume v = gen_sphere({32, 32, 32}, {15.5, 15.5, 15.5}, 8.0);
  const auto cf = case_field(v.view(), 0.0);
  EXPECT_EQ(cf(0, 0, 0), 255);     // far outside the sphere: value >= 0
  EXPECT_EQ(cf(15, 15, 15), 0);    // deep inside: value < 0
}

TEST(CaseField, MatchesPerCellRecomputation) {
  const Volume v = gen_smooth_random({11, 9, 10}, 19, 4);
  const double k = -0.3;
  const auto cf = case_field(v.view(), k);
  std::array<std::size_t, 256> hist_a{}, hist_b{};
  for (auto c : cf.codes) ++hist_a[c];
  for (std::size_t z = 0; z + 1 < 10; ++z)
    for (std::size_t y = 0; y + 1 < 9; ++y)
      for (std::size_t x = 0; x + 1 < 11; ++x) {
        int code = 0;
        for (int dz = 0; dz < 2; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              if (v(x + dx, y + dy, z + dz) >= k) code |= 1 << (dx + 2 * dy + 4 * dz);
        ++hist_b[code];
      }
  EXPECT_EQ(hist_a, hist_b);
}

TEST(VerifyTopology, IdenticalFieldsPreserveEverything) {
  const Volume v = gen_smooth_random({8, 8, 8}, 2, 3);
  const auto r = verify_topology(v.view(), v.view(), 0.0);
  EXPECT_EQ(r.preserved_fraction, 1.0);
  EXPECT_EQ(r.differing_cells, 0u);
  EXPECT_EQ(r.total_cells, 343u);
  EXPECT_FALSE(r.first_diff.has_value());
}

TEST(VerifyTopology, PerturbedEndpointIsLocated) {
  const Volume v = gen_sphere({16, 16, 16}, {7.5, 7.5, 7.5}, 5.0);
  const double k = 0.0;
  std::vector<double> moved(v.values().begin(), v.values().end());
  // First inside sample (scan order) with an outside x-neighbour.
  Index3 hit{};
  bool found = false;
  for (std::size_t z = 0; z < 16 && !found; ++z)
    for (std::size_t y = 0; y < 16 && !found; ++y)
      for (std::size_t x = 1; x + 1 < 16 && !found; ++x)
        if (v(x, y, z) < k && v(x + 1, y, z) >= k) {
          hit = {x + 1, y, z};
          found = true;
        }
  ASSERT_TRUE(found);
  const double d = v(hit.x, hit.y, hit.z) - k;
  moved[linear_index(v.dims(), hit.x, hit.y, hit.z)] -= 2.0 * d + 1e-3;
  const auto r = verify_topology(v.view(), {v.dims(), moved}, k);
  EXPECT_LT(r.preserved_fraction, 1.0);
  ASSERT_TRUE(r.first_diff.has_value());
  const Index3 expect{hit.x - 1, hit.y == 0 ? 0 : hit.y - 1, hit.z == 0 ? 0 : hit.z - 1};
  EXPECT_EQ(*r.first_diff, expect);
}

TEST(VerifyTopology, DimsMismatch) {
  const std::vector<double> a(8, 0.0), b(12, 0.0);
  EXPECT_THROW(verify_topology({{2, 2, 2}, a}, {{3, 2, 2}, b}, 0.0), DimsMismatchError);
}

TEST(ExportObj, EmptyMeshWritesHeaderOnly) {
  const auto p = fs::temp_directory_path() / "isochr_empty.obj";
  export_obj(TriangleMesh{}, p);
  const auto data = isochr::testing::read_obj(p.string());
  EXPECT_EQ(data.comment_lines, 1);
  EXPECT_TRUE(data.vertices.empty());
  EXPECT_TRUE(data.faces.empty());
  fs::remove(p);
}

TEST(ExportObj, SingleTriangle) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  const auto p = fs::temp_directory_path() / "isochr_tri.obj";
  export_obj(m, p);
  const auto data = isochr::testing::read_obj(p.string());
  EXPECT_EQ(data.vertices.size(), 3u);
  ASSERT_EQ(data.faces.size(), 1u);
  EXPECT_EQ(data.faces[0], (std::array<std::uint32_t, 3>{0, 1, 2}));
  fs::remove(p);
}

TEST(ExportObj, RoundtripThroughReader) {
  const Volume v = gen_smooth_random({10, 10, 10}, 4, 4);
  const auto mesh = marching_cubes(v.view(), {0.1, 0.2, 0.3}, {0, 0, 0}, 0.05);
  const auto p = fs::temp_directory_path() / "isochr_rt.obj";
  export_obj(mesh, p);
  const auto data = isochr::testing::read_obj(p.string());
  EXPECT_EQ(data.vertices, mesh.vertices);
  EXPECT_EQ(data.faces, mesh.triangles);
  fs::remove(p);
}
