#include "isochr/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isochr/error.hpp"
#include "parallel.hpp"

namespace isochr {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

Extent3 block_grid(const Extent3& dims, std::size_t block_size) {
  if (block_size < 2) throw ParameterError("block_size must be >= 2");
  if (dims.x < 2 || dims.y < 2 || dims.z < 2)
    throw ParameterError("volume needs at least 2 samples per axis to decompose");
  return {ceil_div(dims.x - 1, block_size), ceil_div(dims.y - 1, block_size),
          ceil_div(dims.z - 1, block_size)};
}

std::vector<BlockMeta> decompose(const Volume& volume, std::size_t block_size, unsigned workers) {
  const Extent3 dims = volume.dims();
  const Extent3 grid = block_grid(dims, block_size);
  std::vector<BlockMeta> blocks(grid.count());

  for (std::size_t bz = 0; bz < grid.z; ++bz)
    for (std::size_t by = 0; by < grid.y; ++by)
      for (std::size_t bx = 0; bx < grid.x; ++bx) {
        BlockMeta& b = blocks[linear_index(grid, bx, by, bz)];
        b.block_id = linear_index(grid, bx, by, bz);
        b.block_coords = {bx, by, bz};
        b.sample_origin = {bx * block_size, by * block_size, bz * block_size};
        // owned cells plus one ghost sample on the high side
        b.sample_extent = {std::min(block_size + 1, dims.x - b.sample_origin.x),
                           std::min(block_size + 1, dims.y - b.sample_origin.y),
                           std::min(block_size + 1, dims.z - b.sample_origin.z)};
      }

  const FieldView field = volume.view();
  detail::parallel_chunks(blocks.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      BlockMeta& b = blocks[i];
      double lo = field(b.sample_origin.x, b.sample_origin.y, b.sample_origin.z);
      double hi = lo;
      for (std::size_t z = 0; z < b.sample_extent.z; ++z)
        for (std::size_t y = 0; y < b.sample_extent.y; ++y) {
          const std::size_t row =
              linear_index(dims, b.sample_origin.x, b.sample_origin.y + y, b.sample_origin.z + z);
          for (std::size_t x = 0; x < b.sample_extent.x; ++x) {
            const double v = field.values[row + x];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
        }
      b.vmin = lo;
      b.vmax = hi;
    }
  });
  return blocks;
}

std::vector<bool> IsoIndex::key_of(const BlockMeta& block) const {
  std::vector<bool> key(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    key[c] = block.vmin <= candidates[c] && candidates[c] <= block.vmax;
  return key;
}

bool Region::relevant_to_any() const noexcept {
  return std::find(relevance.begin(), relevance.end(), true) != relevance.end();
}

IsoIndex build_index(std::span<const BlockMeta> blocks, std::span<const double> candidates) {
  if (candidates.empty()) throw ParameterError("at least one candidate isovalue is required");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!std::isfinite(candidates[i])) throw ParameterError("candidate isovalues must be finite");
    if (i > 0 && !(candidates[i - 1] < candidates[i]))
      throw ParameterError("candidate isovalues must be strictly increasing");
  }
  IsoIndex index;
  index.candidates.assign(candidates.begin(), candidates.end());
  index.relevant.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double k = candidates[c];
    for (const BlockMeta& b : blocks)
      if (b.vmin <= k && k <= b.vmax) index.relevant[c].push_back(b.block_id);
    std::sort(index.relevant[c].begin(), index.relevant[c].end());
  }
  return index;
}

std::vector<Region> merge_regions(std::span<const BlockMeta> blocks, const IsoIndex& index) {
  if (blocks.empty()) return {};
  Extent3 grid{0, 0, 0};
  for (const BlockMeta& b : blocks) {
    grid.x = std::max(grid.x, b.block_coords.x + 1);
    grid.y = std::max(grid.y, b.block_coords.y + 1);
    grid.z = std::max(grid.z, b.block_coords.z + 1);
  }
  if (grid.count() != blocks.size())
    throw ParameterError("blocks do not form a complete block grid");

  // Dense lookup by block coordinate.
  std::vector<const BlockMeta*> at(grid.count(), nullptr);
  for (const BlockMeta& b : blocks) at[linear_index(grid, b.block_coords.x, b.block_coords.y, b.block_coords.z)] = &b;

  // Intern relevance keys as small integers.
  std::vector<std::vector<bool>> keys;
  std::vector<std::size_t> group(grid.count());
  for (std::size_t i = 0; i < at.size(); ++i) {
    auto key = index.key_of(*at[i]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(std::move(key));
      it = keys.end() - 1;
    }
    group[i] = static_cast<std::size_t>(it - keys.begin());
  }

  std::vector<bool> claimed(grid.count(), false);
  auto open = [&](std::size_t x, std::size_t y, std::size_t z, std::size_t g) {
    const std::size_t i = linear_index(grid, x, y, z);
    return !claimed[i] && group[i] == g;
  };

  std::vector<Region> regions;
  for (std::size_t z0 = 0; z0 < grid.z; ++z0)
    for (std::size_t y0 = 0; y0 < grid.y; ++y0)
      for (std::size_t x0 = 0; x0 < grid.x; ++x0) {
        const std::size_t seed = linear_index(grid, x0, y0, z0);
        if (claimed[seed]) continue;
        const std::size_t g = group[seed];

        std::size_t x1 = x0;
        while (x1 + 1 < grid.x && open(x1 + 1, y0, z0, g)) ++x1;

        std::size_t y1 = y0;
        auto row_open = [&](std::size_t y, std::size_t z) {
          for (std::size_t x = x0; x <= x1; ++x)
            if (!open(x, y, z, g)) return false;
          return true;
        };
        while (y1 + 1 < grid.y && row_open(y1 + 1, z0)) ++y1;

        std::size_t z1 = z0;
        auto slab_open = [&](std::size_t z) {
          for (std::size_t y = y0; y <= y1; ++y)
            if (!row_open(y, z)) return false;
          return true;
        };
        while (z1 + 1 < grid.z && slab_open(z1 + 1)) ++z1;

        for (std::size_t z = z0; z <= z1; ++z)
          for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) claimed[linear_index(grid, x, y, z)] = true;

        const BlockMeta& lo = *at[seed];
        const BlockMeta& hi = *at[linear_index(grid, x1, y1, z1)];
        Region r;
        r.region_id = regions.size();
        r.block_lo = {x0, y0, z0};
        r.block_hi = {x1, y1, z1};
        r.sample_origin = lo.sample_origin;
        r.sample_extent = {hi.sample_origin.x + hi.sample_extent.x - lo.sample_origin.x,
                           hi.sample_origin.y + hi.sample_extent.y - lo.sample_origin.y,
                           hi.sample_origin.z + hi.sample_extent.z - lo.sample_origin.z};
        r.relevance = keys[g];
        regions.push_back(std::move(r));
      }
  return regions;
}

}  // namespace isochr
