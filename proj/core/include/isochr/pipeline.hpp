#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "isochr/bound.hpp"
#include "isochr/chr.hpp"
#include "isochr/isosurf.hpp"
#include "isochr/volume.hpp"

namespace isochr {

/// Bandwidth-only WAN model; defaults to 1 Gbps with no latency.
struct StreamModel {
  double bandwidth_bps = 1e9;
  double latency_s = 0.0;
};

/// latency + bytes * 8 / bandwidth.
double simulate_stream(std::size_t bytes, const StreamModel& model);

struct TimingBreakdown {
  double accuracy = 1.0;
  std::size_t block_size = 0;
  BoundMode bound_mode = BoundMode::strict_vertices;

  double compress_s = 0.0;
  double stream_s = 0.0;
  double decompress_s = 0.0;
  double extract_s = 0.0;
  double total_s = 0.0;

  double baseline_stream_s = 0.0;
  double baseline_extract_s = 0.0;
  double baseline_total_s = 0.0;

  std::size_t bytes_original = 0;
  std::size_t bytes_streamed = 0;
  double speedup = 0.0;
  /// Speedup with compression excluded, for one archive serving many requests.
  double speedup_amortized = 0.0;
  bool compress_amortized = false;  // compress_s zeroed, see BenchmarkOptions

  double preserved_fraction = 1.0;  // minimum over candidates
  double error_bound_min = 0.0;     // over regions relevant to some candidate
  double error_bound_max = 0.0;
  std::vector<double> region_bounds;  // every region, archive order

  bool topology_loss() const noexcept { return preserved_fraction < 1.0; }
};

struct BenchmarkOptions {
  std::vector<double> accuracies{1.0, 0.99, 0.95, 0.80};
  std::vector<std::size_t> block_sizes{64, 128};
  StreamModel model;
  BoundMode bound_mode = BoundMode::strict_vertices;
  double safety_factor = kDefaultSafetyFactor;
  double loose_fraction = kDefaultLooseFraction;
  int repetitions = 3;  // wall times are medians over this many runs
  unsigned workers = 1;
  /// Leave compression out of the treatment total: compress_s is reported
  /// as 0 and speedup equals speedup_amortized.
  bool amortize_compress = false;
};

/// Extracts the isosurface of candidate `candidate_index` from the regions
/// of `set` relevant to it, each region meshed in its own window.
TriangleMesh extract_from_set(const ChrArchive& archive, const ReconstructionSet& set,
                              std::size_t candidate_index, unsigned workers = 1);

/// One breakdown per (block size, accuracy), block sizes outer.
/// Baseline: stream the original bytes, extract every candidate from the
/// original field. Treatment: build the archive, stream the bytes a
/// drop-pruned request for all candidates touches, decompress them and
/// extract every candidate from the reconstructed regions.
std::vector<TimingBreakdown> run_benchmark(const Volume& volume, std::span<const double> candidates,
                                           const BenchmarkOptions& options);

enum class ReportFormat { table, json, csv };
ReportFormat parse_report_format(std::string_view s);

/// Leading report columns, in order.
std::span<const std::string_view> report_columns() noexcept;

void emit_report(std::span<const TimingBreakdown> rows, ReportFormat format, std::ostream& out);
void emit_report(std::span<const TimingBreakdown> rows, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace isochr
