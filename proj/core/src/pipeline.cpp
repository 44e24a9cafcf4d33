#include "isochr/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "isochr/error.hpp"

namespace isochr {

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double median_seconds(int repetitions, Fn&& fn) {
  std::vector<double> times;
  for (int r = 0; r < std::max(1, repetitions); ++r) {
    const auto t0 = Clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

constexpr std::array<std::string_view, 12> kColumns = {
    "accuracy",   "block_size", "compress_s",       "stream_s",
    "decompress_s", "extract_s", "total_s",         "baseline_total_s",
    "speedup",    "preserved_fraction", "bytes_original", "bytes_streamed"};

constexpr std::array<std::string_view, 8> kExtraColumns = {
    "baseline_stream_s", "baseline_extract_s", "speedup_amortized", "compress_amortized",
    "error_bound_min",   "error_bound_max",    "bound_mode",        "topology_loss"};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> row_cells(const TimingBreakdown& b) {
  return {fmt_double(b.accuracy),
          std::to_string(b.block_size),
          fmt_double(b.compress_s),
          fmt_double(b.stream_s),
          fmt_double(b.decompress_s),
          fmt_double(b.extract_s),
          fmt_double(b.total_s),
          fmt_double(b.baseline_total_s),
          fmt_double(b.speedup),
          fmt_double(b.preserved_fraction),
          std::to_string(b.bytes_original),
          std::to_string(b.bytes_streamed),
          fmt_double(b.baseline_stream_s),
          fmt_double(b.baseline_extract_s),
          fmt_double(b.speedup_amortized),
          b.compress_amortized ? "true" : "false",
          fmt_double(b.error_bound_min),
          fmt_double(b.error_bound_max),
          std::string(to_string(b.bound_mode)),
          b.topology_loss() ? "true" : "false"};
}

std::vector<std::string_view> all_columns() {
  std::vector<std::string_view> cols(kColumns.begin(), kColumns.end());
  cols.insert(cols.end(), kExtraColumns.begin(), kExtraColumns.end());
  return cols;
}

}  // namespace

double simulate_stream(std::size_t bytes, const StreamModel& model) {
  if (!(model.bandwidth_bps > 0.0)) throw ParameterError("bandwidth must be positive");
  if (!(model.latency_s >= 0.0)) throw ParameterError("latency must be non-negative");
  return model.latency_s + static_cast<double>(bytes) * 8.0 / model.bandwidth_bps;
}

TriangleMesh extract_from_set(const ChrArchive& archive, const ReconstructionSet& set,
                              std::size_t candidate_index, unsigned workers) {
  const double k = archive.candidates.at(candidate_index);
  const Vec3& sp = archive.header.spacing;
  TriangleMesh mesh;
  for (const ReconstructedRegion& rr : set.regions) {
    if (!rr.entry.relevance[candidate_index]) continue;
    const Index3& o = rr.entry.sample_origin;
    const Vec3 origin{sp[0] * static_cast<double>(o.x), sp[1] * static_cast<double>(o.y),
                      sp[2] * static_cast<double>(o.z)};
    TriangleMesh part = marching_cubes(rr.samples.view(), sp, origin, k, workers);
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.insert(mesh.vertices.end(), part.vertices.begin(), part.vertices.end());
    for (const auto& t : part.triangles) mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return mesh;
}

std::vector<TimingBreakdown> run_benchmark(const Volume& volume, std::span<const double> candidates,
                                           const BenchmarkOptions& options) {
  for (double a : options.accuracies)
    if (!(a > 0.0 && a <= 1.0)) throw ParameterError("accuracies must lie in (0, 1]");
  if (candidates.empty()) throw ParameterError("benchmark needs at least one isovalue");

  const std::size_t bytes_original = volume.original_bytes();
  const double baseline_stream = simulate_stream(bytes_original, options.model);
  const double baseline_extract = median_seconds(options.repetitions, [&] {
    for (double k : candidates)
      (void)marching_cubes(volume.view(), volume.spacing(), {0.0, 0.0, 0.0}, k, options.workers);
  });

  std::vector<TimingBreakdown> rows;
  for (std::size_t block_size : options.block_sizes) {
    for (double accuracy : options.accuracies) {
      ChrOptions chr;
      chr.block_size = block_size;
      chr.accuracy = accuracy;
      chr.bound_mode = options.bound_mode;
      chr.safety_factor = options.safety_factor;
      chr.loose_fraction = options.loose_fraction;
      chr.workers = options.workers;

      ChrArchive archive;
      std::vector<std::uint8_t> wire;
      TimingBreakdown b;
      b.compress_s = median_seconds(options.repetitions, [&] {
        archive = build_chr(volume, candidates, chr);
        wire = archive.serialize();
      });

      RequestOptions req;
      req.accuracy = accuracy;
      req.drop_pruned = true;
      req.workers = options.workers;
      ReconstructionSet set;
      b.decompress_s = median_seconds(options.repetitions, [&] {
        set = request(ChrArchive::parse(wire), candidates, req);
      });
      b.extract_s = median_seconds(options.repetitions, [&] {
        for (std::size_t c : set.report.candidate_indices)
          (void)extract_from_set(archive, set, c, options.workers);
      });

      b.accuracy = accuracy;
      b.block_size = block_size;
      b.bound_mode = options.bound_mode;
      b.bytes_original = bytes_original;
      b.bytes_streamed = set.report.bytes_touched;
      b.stream_s = simulate_stream(b.bytes_streamed, options.model);
      if (options.amortize_compress) {
        b.compress_s = 0.0;
        b.compress_amortized = true;
      }
      b.total_s = b.compress_s + b.stream_s + b.decompress_s + b.extract_s;
      b.baseline_stream_s = baseline_stream;
      b.baseline_extract_s = baseline_extract;
      b.baseline_total_s = baseline_stream + baseline_extract;
      b.speedup = b.baseline_total_s / b.total_s;
      b.speedup_amortized = b.baseline_total_s / (b.total_s - b.compress_s);

      // Topology measured on the stitched full reconstruction.
      RequestOptions full = req;
      full.drop_pruned = false;
      const Field3 stitched = stitch(archive, request(archive, candidates, full));
      b.preserved_fraction = 1.0;
      for (double k : candidates)
        b.preserved_fraction = std::min(
            b.preserved_fraction, verify_topology(volume.view(), stitched.view(), k).preserved_fraction);

      b.error_bound_min = std::numeric_limits<double>::infinity();
      b.error_bound_max = 0.0;
      for (const RegionEntry& r : archive.regions) {
        b.region_bounds.push_back(r.error_bound);
        if (!r.relevant_to_any()) continue;
        b.error_bound_min = std::min(b.error_bound_min, r.error_bound);
        b.error_bound_max = std::max(b.error_bound_max, r.error_bound);
      }
      if (b.error_bound_min > b.error_bound_max) b.error_bound_min = b.error_bound_max = 0.0;
      rows.push_back(std::move(b));
    }
  }
  return rows;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "table") return ReportFormat::table;
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw ParameterError("unknown report format '" + std::string(s) + "' (expected table|json|csv)");
}

std::span<const std::string_view> report_columns() noexcept { return kColumns; }

void emit_report(std::span<const TimingBreakdown> rows, ReportFormat format, std::ostream& out) {
  const auto cols = all_columns();
  switch (format) {
    case ReportFormat::csv: {
      for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
      out << '\n';
      for (const auto& b : rows) {
        const auto cells = row_cells(b);
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
      }
      break;
    }
    case ReportFormat::json: {
      nlohmann::ordered_json doc;
      doc["columns"] = nlohmann::ordered_json::array();
      for (auto c : cols) doc["columns"].push_back(std::string(c));
      doc["rows"] = nlohmann::ordered_json::array();
      bool any_loss = false;
      for (const auto& b : rows) {
        nlohmann::ordered_json r;
        r["accuracy"] = b.accuracy;
        r["block_size"] = b.block_size;
        r["compress_s"] = b.compress_s;
        r["stream_s"] = b.stream_s;
        r["decompress_s"] = b.decompress_s;
        r["extract_s"] = b.extract_s;
        r["total_s"] = b.total_s;
        r["baseline_total_s"] = b.baseline_total_s;
        r["speedup"] = b.speedup;
        r["preserved_fraction"] = b.preserved_fraction;
        r["bytes_original"] = b.bytes_original;
        r["bytes_streamed"] = b.bytes_streamed;
        r["baseline_stream_s"] = b.baseline_stream_s;
        r["baseline_extract_s"] = b.baseline_extract_s;
        r["speedup_amortized"] = b.speedup_amortized;
        r["compress_amortized"] = b.compress_amortized;
        r["error_bound_min"] = b.error_bound_min;
        r["error_bound_max"] = b.error_bound_max;
        r["bound_mode"] = std::string(to_string(b.bound_mode));
        r["topology_loss"] = b.topology_loss();
        any_loss = any_loss || b.topology_loss();
        doc["rows"].push_back(std::move(r));
      }
      doc["topology_loss_flagged"] = any_loss;
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::table: {
      std::vector<std::vector<std::string>> grid;
      grid.emplace_back(cols.begin(), cols.end());
      for (const auto& b : rows) grid.push_back(row_cells(b));
      std::vector<std::size_t> width(cols.size(), 0);
      for (const auto& r : grid)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
      for (std::size_t ri = 0; ri < grid.size(); ++ri) {
        for (std::size_t i = 0; i < grid[ri].size(); ++i) {
          out << (i ? "  " : "");
          out << std::string(width[i] - grid[ri][i].size(), ' ') << grid[ri][i];
        }
        if (ri > 0 && rows[ri - 1].topology_loss()) out << "  <-- topology loss";
        out << '\n';
      }
      break;
    }
  }
}

void emit_report(std::span<const TimingBreakdown> rows, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  emit_report(rows, format, out);
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace isochr
