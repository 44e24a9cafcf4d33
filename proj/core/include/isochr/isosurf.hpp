#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "isochr/field.hpp"

namespace isochr {

// Inside/outside convention shared with the bound module: a sample is
// inside iff value >= k.

/// Per-cell 8-bit marching-cubes case codes. Bit i of a code is set iff
/// corner i = cx + 2*cy + 4*cz of the cell has value >= k.
struct CaseField {
  Extent3 cell_dims;
  std::vector<std::uint8_t> codes;

  std::uint8_t operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return codes[linear_index(cell_dims, x, y, z)];
  }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const noexcept { return triangles.empty(); }
};

std::uint8_t cell_case(const std::array<double, 8>& corners, double k) noexcept;

/// Number of triangles the embedded table emits for a case code.
int case_triangle_count(std::uint8_t code) noexcept;

/// Checks every table row against the straddling-edge set of its case.
bool case_table_consistent() noexcept;

/// Extracts the k-isosurface. Cells are scanned z-outer, x-inner; each
/// cell emits its table triangles in order, and a vertex is created on
/// first use of its lattice edge, so shared edges yield one vertex.
/// Vertex world position is origin + spacing * (lattice point + t * axis).
/// `workers` split the z range into slabs; output is identical for any count.
TriangleMesh marching_cubes(const FieldView& samples, const Vec3& spacing, const Vec3& origin,
                            double k, unsigned workers = 1);

inline TriangleMesh marching_cubes(const FieldView& samples, double k) {
  return marching_cubes(samples, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, k);
}

CaseField case_field(const FieldView& samples, double k);

struct TopologyReport {
  double preserved_fraction = 1.0;
  std::size_t differing_cells = 0;
  std::size_t total_cells = 0;
  std::optional<Index3> first_diff;  // first differing cell in scan order
};

/// Compares case codes cell by cell. Throws DimsMismatchError.
TopologyReport verify_topology(const FieldView& original, const FieldView& reconstructed, double k);

double mesh_area(const TriangleMesh& mesh) noexcept;

/// ASCII OBJ: comment header, `v x y z` lines, then 1-based `f i j k` lines.
void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace isochr
