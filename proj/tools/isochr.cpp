#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isochr/blocking.hpp"
#include "isochr/bound.hpp"
#include "isochr/chr.hpp"
#include "isochr/error.hpp"
#include "isochr/isosurf.hpp"
#include "isochr/pipeline.hpp"
#include "isochr/volume.hpp"

using namespace isochr;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParameterError("not a number: '" + s + "'");
  return v;
}

std::size_t to_count(const std::string& s) {
  const double v = to_double(s);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ParameterError("not a non-negative integer: '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::vector<double> doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s)) out.push_back(to_double(t));
  return out;
}

Extent3 parse_dims(const std::string& s) {
  const auto parts = split(s);
  if (parts.size() != 3) throw ParameterError("--dims expects NX,NY,NZ");
  return {to_count(parts[0]), to_count(parts[1]), to_count(parts[2])};
}

// Options shared by every command that reads a raw volume.
struct RawInput {
  std::string path;
  std::string dims;
  std::string dtype = "f64";
  std::string endian = "little";

  void add(CLI::App* cmd, const char* flag = "--in") {
    cmd->add_option(flag, path, "headerless raw volume")->required();
    cmd->add_option("--dims", dims, "NX,NY,NZ")->required();
    cmd->add_option("--dtype", dtype, "f32|f64")->capture_default_str();
    cmd->add_option("--endian", endian, "little|big")->capture_default_str();
  }
  Volume load() const { return load_raw(path, parse_dims(dims), parse_dtype(dtype), parse_endian(endian)); }
};

std::string idx(const Index3& i) {
  return std::to_string(i.x) + "," + std::to_string(i.y) + "," + std::to_string(i.z);
}
std::string ext(const Extent3& e) {
  return std::to_string(e.x) + "x" + std::to_string(e.y) + "x" + std::to_string(e.z);
}
std::string mask(const std::vector<bool>& m) {
  std::string s;
  for (bool b : m) s += b ? '1' : '0';
  return s.empty() ? "-" : s;
}

void print_regions(const std::vector<RegionEntry>& regions, bool with_payload) {
  std::printf("%6s  %-12s %-12s %-12s %-12s %-10s %6s %12s", "id", "block_lo", "block_hi", "origin",
              "extent", "relevance", "mode", "error_bound");
  if (with_payload) std::printf(" %12s %10s", "offset", "length");
  std::printf("\n");
  for (const auto& r : regions) {
    std::printf("%6u  %-12s %-12s %-12s %-12s %-10s %6s %12.6g", r.region_id, idx(r.block_lo).c_str(),
                idx(r.block_hi).c_str(), idx(r.sample_origin).c_str(), ext(r.sample_extent).c_str(),
                mask(r.relevance).c_str(), std::string(to_string(r.bound_mode)).c_str(), r.error_bound);
    if (with_payload)
      std::printf(" %12llu %10llu", static_cast<unsigned long long>(r.payload_offset),
                  static_cast<unsigned long long>(r.payload_length));
    std::printf("\n");
  }
}

ReportFormat format_for(const std::string& path, const std::string& requested) {
  if (!requested.empty()) return parse_report_format(requested);
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".json") return ReportFormat::json;
  if (ext == ".csv") return ReportFormat::csv;
  return ReportFormat::table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isochr: topology-preserving isosurface compression"};
  app.require_subcommand(1);
  unsigned workers = 1;
  app.add_option("-j,--workers", workers, "worker threads (0 = all cores)")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic raw volume");
  std::string gen_kind = "sphere", gen_dims, gen_out, gen_dtype = "f64", gen_center;
  std::uint64_t gen_seed = 0;
  double gen_radius = -1.0;
  int gen_modes = 4;
  gen->add_option("--kind", gen_kind, "sphere|random")->capture_default_str();
  gen->add_option("--dims", gen_dims, "NX,NY,NZ")->required();
  gen->add_option("--seed", gen_seed, "random field seed")->capture_default_str();
  gen->add_option("--modes", gen_modes, "random field plane waves")->capture_default_str();
  gen->add_option("--radius", gen_radius, "sphere radius (default: min extent / 3)");
  gen->add_option("--center", gen_center, "sphere center CX,CY,CZ (default: volume middle)");
  gen->add_option("--dtype", gen_dtype, "f32|f64")->capture_default_str();
  gen->add_option("--out", gen_out)->required();

  // plan
  auto* plan = app.add_subcommand("plan", "print block and region statistics");
  RawInput plan_in;
  plan_in.add(plan);
  std::size_t plan_bs = 64;
  std::string plan_ks;
  plan->add_option("--block-size", plan_bs)->capture_default_str();
  plan->add_option("--isovalues", plan_ks, "k1,k2,...")->required();

  // compress
  auto* comp = app.add_subcommand("compress", "build a CHR archive");
  RawInput comp_in;
  comp_in.add(comp);
  std::string comp_ks, comp_out, comp_mode = "strict";
  ChrOptions copt;
  comp->add_option("--isovalues", comp_ks, "k1,k2,...")->required();
  comp->add_option("--accuracy", copt.accuracy)->capture_default_str();
  comp->add_option("--block-size", copt.block_size)->capture_default_str();
  comp->add_option("--bound-mode", comp_mode, "strict|paper")->capture_default_str();
  comp->add_option("--safety-factor", copt.safety_factor)->capture_default_str();
  comp->add_option("--loose-fraction", copt.loose_fraction)->capture_default_str();
  comp->add_flag("--reject-out-of-range", copt.reject_out_of_range,
                 "fail on isovalues outside the data range");
  comp->add_option("--out", comp_out)->required();

  // inspect
  auto* insp = app.add_subcommand("inspect", "print archive header, candidates and regions");
  std::string insp_path;
  insp->add_option("file", insp_path)->required();

  // extract
  auto* extr = app.add_subcommand("extract", "extract one isosurface from an archive");
  std::string ex_chr, ex_out, ex_report;
  double ex_k = 0.0, ex_acc = 1.0;
  bool ex_snap = false, ex_drop = false;
  extr->add_option("--chr", ex_chr)->required();
  extr->add_option("--isovalue", ex_k)->required();
  auto* ex_acc_opt = extr->add_option("--accuracy", ex_acc, "default: the archive's stored accuracy");
  extr->add_flag("--snap", ex_snap, "use the nearest stored isovalue");
  extr->add_flag("--drop-pruned", ex_drop, "leave regions no candidate needs out of the byte count");
  extr->add_option("--out", ex_out, "mesh.obj")->required();
  extr->add_option("--report", ex_report, "coverage report (json)");

  // verify
  auto* ver = app.add_subcommand("verify", "compare cell cases of original and reconstruction");
  std::string ver_orig, ver_chr, ver_dtype, ver_endian = "little";
  double ver_k = 0.0;
  ver->add_option("--orig", ver_orig, "original raw volume")->required();
  ver->add_option("--chr", ver_chr)->required();
  ver->add_option("--isovalue", ver_k)->required();
  ver->add_option("--dtype", ver_dtype, "f32|f64 (default: as recorded in the archive)");
  ver->add_option("--endian", ver_endian)->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "time the streaming pipeline against the raw baseline");
  RawInput bench_in;
  bench_in.add(bench);
  std::string b_ks, b_acc = "1.0,0.99,0.95,0.80", b_bs = "64,128", b_out, b_fmt, b_mode = "strict";
  double b_gbps = 1.0;
  BenchmarkOptions bopt;
  bench->add_option("--isovalues", b_ks, "k1,k2,...")->required();
  bench->add_option("--accuracies", b_acc)->capture_default_str();
  bench->add_option("--block-sizes", b_bs)->capture_default_str();
  bench->add_option("--bandwidth-gbps", b_gbps)->capture_default_str();
  bench->add_option("--latency", bopt.model.latency_s, "seconds")->capture_default_str();
  bench->add_option("--bound-mode", b_mode, "strict|paper")->capture_default_str();
  bench->add_option("--safety-factor", bopt.safety_factor)->capture_default_str();
  bench->add_option("--loose-fraction", bopt.loose_fraction)->capture_default_str();
  bench->add_option("--repetitions", bopt.repetitions)->capture_default_str();
  bench->add_flag("--amortize-compress", bopt.amortize_compress,
                  "leave compression out of the treatment total");
  bench->add_option("--out", b_out, "report path (.json, .csv, else table)");
  bench->add_option("--format", b_fmt, "table|json|csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const Extent3 d = parse_dims(gen_dims);
      std::optional<Volume> v;
      if (gen_kind == "sphere") {
        Vec3 c{(static_cast<double>(d.x) - 1) / 2, (static_cast<double>(d.y) - 1) / 2,
               (static_cast<double>(d.z) - 1) / 2};
        if (!gen_center.empty()) {
          const auto cc = doubles(gen_center);
          if (cc.size() != 3) throw ParameterError("--center expects CX,CY,CZ");
          c = {cc[0], cc[1], cc[2]};
        }
        const double r =
            gen_radius > 0 ? gen_radius : static_cast<double>(std::min({d.x, d.y, d.z})) / 3.0;
        v.emplace(gen_sphere(d, c, r));
      } else if (gen_kind == "random") {
        v.emplace(gen_smooth_random(d, gen_seed, gen_modes));
      } else {
        throw ParameterError("unknown --kind '" + gen_kind + "' (expected sphere|random)");
      }
      save_raw(*v, gen_out, parse_dtype(gen_dtype));
      std::printf("wrote %s: %s %s, range [%.9g, %.9g]\n", gen_out.c_str(), ext(d).c_str(),
                  gen_dtype.c_str(), v->vmin(), v->vmax());
    } else if (*plan) {
      const Volume v = plan_in.load();
      const auto ks = doubles(plan_ks);
      const auto blocks = decompose(v, plan_bs, workers);
      const IsoIndex index = build_index(blocks, ks);
      const auto regions = merge_regions(blocks, index);
      const Extent3 g = block_grid(v.dims(), plan_bs);
      std::printf("volume   %s  range [%.9g, %.9g]\n", ext(v.dims()).c_str(), v.vmin(), v.vmax());
      std::printf("blocks   %s = %zu (block size %zu)\n", ext(g).c_str(), blocks.size(), plan_bs);
      for (std::size_t c = 0; c < index.candidates.size(); ++c)
        std::printf("k=%-12.9g relevant blocks %zu / %zu\n", index.candidates[c], index.relevant[c].size(),
                    blocks.size());
      std::size_t pruned = 0;
      for (const auto& r : regions) pruned += r.relevant_to_any() ? 0 : 1;
      std::printf("regions  %zu (%zu pruned)\n\n", regions.size(), pruned);
      std::printf("%6s  %-12s %-12s %-12s %-12s %7s %-10s\n", "id", "block_lo", "block_hi", "origin", "extent",
                  "blocks", "relevance");
      for (const auto& r : regions)
        std::printf("%6zu  %-12s %-12s %-12s %-12s %7zu %-10s\n", r.region_id, idx(r.block_lo).c_str(),
                    idx(r.block_hi).c_str(), idx(r.sample_origin).c_str(), ext(r.sample_extent).c_str(),
                    r.block_count(), mask(r.relevance).c_str());
    } else if (*comp) {
      const Volume v = comp_in.load();
      copt.bound_mode = parse_bound_mode(comp_mode);
      copt.workers = workers;
      std::vector<std::string> warnings;
      const auto ks = doubles(comp_ks);
      const ChrArchive a = build_chr(v, ks, copt, &warnings);
      for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      write_chr(a, comp_out);
      std::printf("wrote %s: %zu regions, %zu bytes (original %zu, ratio %.3f)\n", comp_out.c_str(),
                  a.regions.size(), a.total_bytes(), v.original_bytes(),
                  static_cast<double>(v.original_bytes()) / static_cast<double>(a.total_bytes()));
    } else if (*insp) {
      const ChrArchive a = read_chr(insp_path);
      const auto& h = a.header;
      std::printf("version        %u\n", h.version);
      std::printf("dims           %s\n", ext(h.dims).c_str());
      std::printf("spacing        %.9g %.9g %.9g\n", h.spacing[0], h.spacing[1], h.spacing[2]);
      std::printf("dtype          %s\n", std::string(to_string(h.original_dtype)).c_str());
      std::printf("block size     %u\n", h.block_size);
      std::printf("value range    [%.17g, %.17g]\n", h.vmin, h.vmax);
      std::printf("safety factor  %.17g\n", h.safety_factor);
      std::printf("loose fraction %.17g\n", h.loose_fraction);
      std::printf("table bytes    %zu\n", a.table_bytes());
      std::printf("total bytes    %zu\n", a.total_bytes());
      std::printf("candidates    ");
      for (double k : a.candidates) std::printf(" %.17g", k);
      std::printf("\n\n");
      print_regions(a.regions, true);
    } else if (*extr) {
      const ChrArchive a = read_chr(ex_chr);
      if (!*ex_acc_opt)
        for (const auto& r : a.regions) ex_acc = std::min(ex_acc, r.accuracy);
      RequestOptions ro;
      ro.accuracy = ex_acc;
      ro.snap = ex_snap;
      ro.drop_pruned = ex_drop;
      ro.workers = workers;
      const ReconstructionSet set = request(a, ex_k, ro);
      const std::size_t c = set.report.candidate_indices.at(0);
      const TriangleMesh mesh = extract_from_set(a, set, c, workers);
      export_obj(mesh, ex_out);
      const auto& rep = set.report;
      if (rep.snapped)
        std::fprintf(stderr, "note: isovalue %.17g snapped to %.17g\n", ex_k, rep.resolved.at(0));
      std::printf("wrote %s: %zu vertices, %zu triangles from %zu/%zu regions, %zu of %zu bytes touched\n",
                  ex_out.c_str(), mesh.vertices.size(), mesh.triangles.size(), rep.regions_selected,
                  rep.regions_total, rep.bytes_touched, rep.bytes_total);
      if (!ex_report.empty()) {
        nlohmann::ordered_json j;
        j["requested"] = ex_k;
        j["resolved"] = rep.resolved.at(0);
        j["snapped"] = rep.snapped;
        j["accuracy"] = ex_acc;
        j["drop_pruned"] = ex_drop;
        j["regions_selected"] = rep.regions_selected;
        j["regions_total"] = rep.regions_total;
        j["bytes_touched"] = rep.bytes_touched;
        j["bytes_total"] = rep.bytes_total;
        j["vertices"] = mesh.vertices.size();
        j["triangles"] = mesh.triangles.size();
        j["area"] = mesh_area(mesh);
        std::ofstream out(ex_report, std::ios::trunc);
        if (!out) throw IoError(ex_report, "cannot open for writing");
        out << j.dump(2) << '\n';
        if (!out) throw IoError(ex_report, "write failed");
      }
    } else if (*ver) {
      const ChrArchive a = read_chr(ver_chr);
      const DType dt = ver_dtype.empty() ? a.header.original_dtype : parse_dtype(ver_dtype);
      const Volume orig = load_raw(ver_orig, a.header.dims, dt, parse_endian(ver_endian));
      // whole field, at whatever accuracy was stored
      RequestOptions ro;
      ro.drop_pruned = false;
      ro.workers = workers;
      for (const auto& r : a.regions) ro.accuracy = std::min(ro.accuracy, r.accuracy);
      const Field3 full = stitch(a, request(a, ver_k, ro));
      const TopologyReport t = verify_topology(orig.view(), full.view(), ver_k);
      std::printf("preserved_fraction %.17g\n", t.preserved_fraction);
      std::printf("differing_cells %zu / %zu\n", t.differing_cells, t.total_cells);
      if (t.first_diff) std::printf("first_diff %s\n", idx(*t.first_diff).c_str());
    } else if (*bench) {
      const Volume v = bench_in.load();
      const auto ks = doubles(b_ks);
      bopt.accuracies = doubles(b_acc);
      bopt.block_sizes.clear();
      for (const auto& s : split(b_bs)) bopt.block_sizes.push_back(to_count(s));
      if (!(b_gbps > 0)) throw ParameterError("--bandwidth-gbps must be positive");
      bopt.model.bandwidth_bps = b_gbps * 1e9;
      bopt.bound_mode = parse_bound_mode(b_mode);
      bopt.workers = workers;
      const auto rows = run_benchmark(v, ks, bopt);
      if (b_out.empty()) {
        emit_report(rows, b_fmt.empty() ? ReportFormat::table : parse_report_format(b_fmt), std::cout);
      } else {
        emit_report(rows, format_for(b_out, b_fmt), b_out);
        emit_report(rows, ReportFormat::table, std::cout);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "isochr: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "isochr: %s\n", e.what());
    return 1;
  }
  return 0;
}
