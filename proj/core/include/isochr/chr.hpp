#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isochr/blocking.hpp"
#include "isochr/bound.hpp"
#include "isochr/codec.hpp"
#include "isochr/volume.hpp"

namespace isochr {

inline constexpr char kChrMagic[4] = {'C', 'H', 'R', '1'};
inline constexpr std::uint16_t kChrVersion = 1;

struct ChrHeader {
  std::uint16_t version = kChrVersion;
  Extent3 dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  DType original_dtype = DType::f64;
  std::uint32_t block_size = 0;
  double vmin = 0.0;
  double vmax = 0.0;
  double safety_factor = kDefaultSafetyFactor;
  double loose_fraction = kDefaultLooseFraction;

  friend bool operator==(const ChrHeader&, const ChrHeader&) = default;
};

/// Region table row. `payload_offset` is absolute within the serialized
/// archive; `payload_length` covers the whole serialized CompressedBlock.
struct RegionEntry {
  std::uint32_t region_id = 0;
  Index3 block_lo;
  Index3 block_hi;
  Index3 sample_origin;
  Extent3 sample_extent;
  std::vector<bool> relevance;
  BoundMode bound_mode = BoundMode::strict_vertices;
  double accuracy = 1.0;
  double error_bound = 0.0;
  std::uint64_t payload_offset = 0;
  std::uint64_t payload_length = 0;

  bool relevant_to_any() const noexcept;
  friend bool operator==(const RegionEntry&, const RegionEntry&) = default;
};

/// Compressed hierarchical representation: header, candidate isovalues,
/// region table and one compressed payload per region.
struct ChrArchive {
  ChrHeader header;
  std::vector<double> candidates;
  std::vector<RegionEntry> regions;
  std::vector<CompressedBlock> payloads;  // parallel to regions

  /// Bytes before the first payload (header, candidates, region table).
  std::size_t table_bytes() const noexcept;
  /// Total serialized size including the trailing checksum.
  std::size_t total_bytes() const noexcept;

  /// Assigns payload offsets/lengths from the deterministic layout.
  void layout();

  std::vector<std::uint8_t> serialize() const;
  static ChrArchive parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const ChrArchive&, const ChrArchive&) = default;
};

struct ChrOptions {
  std::size_t block_size = 64;
  double accuracy = 1.0;
  BoundMode bound_mode = BoundMode::strict_vertices;
  double safety_factor = kDefaultSafetyFactor;
  double loose_fraction = kDefaultLooseFraction;
  /// Throw instead of warning when a candidate lies outside [vmin, vmax].
  bool reject_out_of_range = false;
  unsigned workers = 1;
  const Codec* codec = nullptr;  // nullptr selects default_codec()
};

/// decompose -> build_index -> merge_regions -> region_bound -> compress.
/// Warnings (e.g. out-of-range candidates) are appended to `warnings`.
ChrArchive build_chr(const Volume& volume, std::span<const double> candidates,
                     const ChrOptions& options, std::vector<std::string>* warnings = nullptr);

void write_chr(const ChrArchive& archive, const std::filesystem::path& path);
ChrArchive read_chr(const std::filesystem::path& path);

struct RequestOptions {
  double accuracy = 1.0;
  bool drop_pruned = true;
  /// Resolve isovalues to the nearest candidate (ties go to the smaller one).
  bool snap = false;
  unsigned workers = 1;
};

struct CoverageReport {
  std::vector<double> requested;
  std::vector<double> resolved;
  std::vector<std::size_t> candidate_indices;
  bool snapped = false;
  std::size_t regions_selected = 0;
  std::size_t regions_total = 0;
  std::size_t bytes_touched = 0;  // table bytes + selected payloads
  std::size_t bytes_total = 0;
};

struct ReconstructedRegion {
  RegionEntry entry;
  Field3 samples;
};

struct ReconstructionSet {
  std::vector<ReconstructedRegion> regions;  // archive region order
  CoverageReport report;
};

/// Index of the candidate matching k exactly (or the nearest with snap).
/// Throws NoSuchIsovalueError.
std::size_t resolve_candidate(std::span<const double> candidates, double k, bool snap);

/// Selects regions relevant to any of the requested isovalues (all regions
/// when drop_pruned is false) and decompresses them. Throws
/// InsufficientAccuracyError when a selected region was stored at lower
/// accuracy than requested.
ReconstructionSet request(const ChrArchive& archive, std::span<const double> isovalues,
                          const RequestOptions& options);

inline ReconstructionSet request(const ChrArchive& archive, double k, const RequestOptions& options) {
  return request(archive, std::span<const double>(&k, 1), options);
}

/// Reassembles the full grid; a sample shared by several windows is taken
/// from the region owning the lowest-coordinate block containing it.
/// Requires every region (drop_pruned = false).
Field3 stitch(const ChrArchive& archive, const ReconstructionSet& set);

}  // namespace isochr
