#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isochr/field.hpp"
#include "isochr/volume.hpp"

namespace isochr {

/// One unit of the domain decomposition. A block owns the unit cells
/// [block_coords * block_size, block_coords * block_size + block_size)
/// clipped to the volume; its sample window also carries the one-sample
/// ghost layer on the high faces so every owned cell has all 8 corners.
struct BlockMeta {
  std::size_t block_id = 0;
  Index3 block_coords;
  Index3 sample_origin;
  Extent3 sample_extent;
  double vmin = 0.0;
  double vmax = 0.0;

  friend bool operator==(const BlockMeta&, const BlockMeta&) = default;
};

/// Block counts per axis for a volume of `dims` samples.
Extent3 block_grid(const Extent3& dims, std::size_t block_size);

/// Per-candidate relevance under the span test vmin <= k <= vmax.
struct IsoIndex {
  std::vector<double> candidates;
  std::vector<std::vector<std::size_t>> relevant;  // sorted block ids, one list per candidate

  /// Relevance key of one block: bit c set iff the block is relevant to candidate c.
  std::vector<bool> key_of(const BlockMeta& block) const;
};

/// Axis-aligned box of whole blocks with a shared relevance key.
struct Region {
  std::size_t region_id = 0;
  Index3 block_lo;  // inclusive
  Index3 block_hi;  // inclusive
  Index3 sample_origin;
  Extent3 sample_extent;
  std::vector<bool> relevance;  // one entry per candidate

  std::size_t block_count() const noexcept {
    return (block_hi.x - block_lo.x + 1) * (block_hi.y - block_lo.y + 1) *
           (block_hi.z - block_lo.z + 1);
  }
  bool contains_block(const Index3& b) const noexcept {
    return b.x >= block_lo.x && b.x <= block_hi.x && b.y >= block_lo.y && b.y <= block_hi.y &&
           b.z >= block_lo.z && b.z <= block_hi.z;
  }
  bool relevant_to_any() const noexcept;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Splits the cell grid into blocks of `block_size` cells per axis. Block
/// ids follow lexicographic (z, y, x) order. `workers` threads scan
/// extrema; 0 means hardware concurrency. Output does not depend on it.
std::vector<BlockMeta> decompose(const Volume& volume, std::size_t block_size,
                                 unsigned workers = 1);

/// Throws ParameterError unless candidates are non-empty, finite and
/// strictly increasing.
IsoIndex build_index(std::span<const BlockMeta> blocks, std::span<const double> candidates);

/// Greedy rectangular merge of blocks sharing the same relevance key.
/// Seeds are visited in block-id order; each seed grows along +x, then the
/// run grows along +y, then the slab along +z, absorbing only unclaimed
/// blocks with the seed's key. Region ids follow seed order.
std::vector<Region> merge_regions(std::span<const BlockMeta> blocks, const IsoIndex& index);

}  // namespace isochr
