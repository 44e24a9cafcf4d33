// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isochr/blocking.hpp"
#include "isochr/chr.hpp"
#include "isochr/codec.hpp"
#include "isochr/error.hpp"
#include "isochr/isosurf.hpp"
#include "isochr/pipeline.hpp"
#include "isochr/volume.hpp"
#include "support/oracles.hpp"

using namespace isochr;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void fail(const std::string& why) {
    pass = false;
    failures.push_back(why);
  }
  void check(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct NamedField {
  std::string name;
  Volume volume;
  double k;
};

// The 64^3 benchmark fields: a sphere and three smooth random fields cut at
// their median.
const std::vector<NamedField>& small_fields() {
  static const std::vector<NamedField> fields = [] {
    std::vector<NamedField> f;
    f.push_back({"sphere64", gen_sphere({64, 64, 64}, {31.5, 31.5, 31.5}, 20.0), 0.0});
    for (std::uint64_t seed : {1, 2, 3}) {
      Volume v = gen_smooth_random({64, 64, 64}, seed, 4);
      const double k = testing::median_of({v.values().begin(), v.values().end()});
      f.push_back({"random64/seed" + std::to_string(seed), std::move(v), k});
    }
    return f;
  }();
  return fields;
}

// 128^3 sphere benchmark, run once and shared by the criteria that read it.
struct BigBench {
  std::vector<TimingBreakdown> rows;
  double seconds = 0.0;
  std::string table;
};

const BigBench& big_bench() {
  static const BigBench b = [] {
    BigBench out;
    const Volume v = gen_sphere({128, 128, 128}, {63.5, 63.5, 63.5}, 40.0);
    BenchmarkOptions o;
    o.workers = 0;
    const std::vector<double> ks = {0.0};
    const auto t0 = Clock::now();
    out.rows = run_benchmark(v, ks, o);
    out.seconds = seconds_since(t0);
    std::ostringstream s;
    emit_report(out.rows, ReportFormat::table, s);
    out.table = s.str();
    return out;
  }();
  return b;
}

std::vector<TimingBreakdown> bench_small(const NamedField& f, BoundMode mode) {
  BenchmarkOptions o;
  o.bound_mode = mode;
  o.repetitions = 1;
  o.workers = 0;
  const std::vector<double> ks = {f.k};
  return run_benchmark(f.volume, ks, o);
}

// ---------------------------------------------------------------------------

void topology_oracle(Outcome& r) {
  const auto t0 = Clock::now();
  for (const auto& f : small_fields()) {
    for (std::size_t bs : {16, 64}) {
      ChrOptions o;
      o.block_size = bs;
      o.workers = 0;
      const std::vector<double> ks = {f.k};
      const auto wire = build_chr(f.volume, ks, o).serialize();
      const ChrArchive a = ChrArchive::parse(wire);
      RequestOptions ro;
      ro.drop_pruned = false;
      const Field3 full = stitch(a, request(a, ks, ro));
      const TopologyReport t = verify_topology(f.volume.view(), full.view(), f.k);
      r.detail << f.name << "/bs" << bs << "=" << t.preserved_fraction << " ";
      r.check(t.preserved_fraction == 1.0, f.name + " bs" + std::to_string(bs) + " lost " +
                                               std::to_string(t.differing_cells) + " cells");
    }
  }
  const double s = seconds_since(t0);
  r.detail << "(" << s << " s)";
  r.check(s <= 30.0, "runtime above 30 s");
}

void paper_mode(Outcome& r) {
  for (const auto& f : small_fields()) {
    const auto rows = bench_small(f, BoundMode::paper_edges);
    std::ostringstream table;
    emit_report(rows, ReportFormat::table, table);
    const std::string text = table.str();
    std::size_t flagged = 0, below = 0;
    for (const auto& b : rows) {
      if (b.accuracy == 1.0 && b.block_size == rows.front().block_size)
        r.detail << f.name << "@1.0=" << b.preserved_fraction << " ";
      below += b.preserved_fraction < 1.0 ? 1 : 0;
      flagged += b.topology_loss() ? 1 : 0;
    }
    std::size_t marks = 0;
    for (std::size_t p = text.find("topology loss"); p != std::string::npos; p = text.find("topology loss", p + 1))
      ++marks;
    r.check(flagged == below && marks == below, f.name + ": rows below 1.0 not all flagged");
  }
}

void codec_bound(Outcome& r) {
  const auto t0 = Clock::now();
  std::size_t checked = 0, violations = 0, escapes = 0;
  for (int i = 0; i < 20; ++i) {
    Volume v = [&] {
      if (i % 2 == 0) return gen_smooth_random({32, 32, 32}, 100 + i, 1 + i % 6);
      std::mt19937_64 rng(500 + i);
      std::vector<double> vals(32 * 32 * 32);
      std::uniform_real_distribution<double> u(-1e3, 1e3);
      for (double& x : vals) x = u(rng);
      return Volume({32, 32, 32}, std::move(vals));
    }();
    const double range = v.vmax() - v.vmin();
    for (double rel : {1e-1, 1e-2, 1e-3}) {
      const double e = rel * range;
      const auto wire = compress(v.view(), e).serialize();
      const Field3 back = decompress(CompressedBlock::parse(wire));
      escapes += back.values.size() != v.size();
      for (std::size_t j = 0; j < v.size(); ++j) {
        ++checked;
        if (!(std::abs(back.values[j] - v.values()[j]) <= e)) ++violations;
      }
    }
  }
  const double s = seconds_since(t0);
  r.detail << checked << " samples, " << violations << " violations (" << s << " s)";
  r.check(escapes == 0, "size mismatch after decode");
  r.check(violations == 0, "bound violated");
  r.check(s <= 10.0, "runtime above 10 s");
}

void relaxation(Outcome& r) {
  auto one = [&](const std::string& name, const std::vector<TimingBreakdown>& rows) {
    std::map<std::size_t, std::vector<const TimingBreakdown*>> by_bs;
    for (const auto& b : rows) by_bs[b.block_size].push_back(&b);
    for (auto& [bs, list] : by_bs) {
      std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->accuracy > b->accuracy; });
      const std::string tag = name + "/bs" + std::to_string(bs);
      r.detail << tag << " [";
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& b = *list[i];
        r.detail << (i ? " " : "") << b.accuracy << ":" << b.bytes_streamed << "B,pf=" << b.preserved_fraction;
        if (b.accuracy == 1.0) r.check(b.preserved_fraction == 1.0, tag + " preserved_fraction(1.0) < 1");
        if (i == 0) continue;
        const auto& prev = *list[i - 1];
        r.check(b.region_bounds.size() == prev.region_bounds.size(), tag + " region layout changed");
        for (std::size_t j = 0; j < b.region_bounds.size() && j < prev.region_bounds.size(); ++j)
          if (b.region_bounds[j] < prev.region_bounds[j]) {
            r.fail(tag + " bound shrank at accuracy " + std::to_string(b.accuracy));
            break;
          }
        r.check(b.bytes_streamed <= prev.bytes_streamed,
                tag + " bytes grew at accuracy " + std::to_string(b.accuracy));
      }
      r.detail << "] ";
    }
  };
  for (const auto& f : small_fields()) one(f.name, bench_small(f, BoundMode::strict_vertices));
  one("sphere128", big_bench().rows);
}

// Triangle soups compared as multisets of vertex triples, tolerance 1e-9.
bool same_triangles(const TriangleMesh& mesh, const std::vector<testing::RefTriangle>& ref, std::string& why) {
  if (mesh.triangles.size() != ref.size()) {
    why = "count " + std::to_string(mesh.triangles.size()) + " vs " + std::to_string(ref.size());
    return false;
  }
  using Tri = std::array<Vec3, 3>;
  auto centroid_x = [](const Tri& t) { return (t[0][0] + t[1][0] + t[2][0]) / 3.0; };
  std::vector<Tri> want;
  for (const auto& t : ref) want.push_back(t.v);
  std::sort(want.begin(), want.end(), [&](const Tri& a, const Tri& b) { return centroid_x(a) < centroid_x(b); });
  std::vector<bool> used(want.size(), false);
  auto close = [](const Vec3& a, const Vec3& b) {
    return std::abs(a[0] - b[0]) <= 1e-9 && std::abs(a[1] - b[1]) <= 1e-9 && std::abs(a[2] - b[2]) <= 1e-9;
  };
  auto same_set = [&](const Tri& a, const Tri& b) {
    for (int s = 0; s < 3; ++s)
      if (close(a[0], b[s]) && close(a[1], b[(s + 1) % 3]) && close(a[2], b[(s + 2) % 3])) return true;
    return false;
  };
  for (const auto& t : mesh.triangles) {
    const Tri got{mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const double cx = centroid_x(got);
    auto it = std::lower_bound(want.begin(), want.end(), cx - 1e-8,
                               [&](const Tri& a, double v) { return centroid_x(a) < v; });
    bool found = false;
    for (; it != want.end() && centroid_x(*it) <= cx + 1e-8; ++it) {
      const auto j = static_cast<std::size_t>(it - want.begin());
      if (!used[j] && same_set(got, *it)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      why = "unmatched triangle near x=" + std::to_string(cx);
      return false;
    }
  }
  return true;
}

void mc_oracle(Outcome& r) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> mag(0.05, 1.0);
  int cases_ok = 0;
  for (int code = 0; code < 256; ++code) {
    std::vector<double> vals(8);
    for (int i = 0; i < 8; ++i) vals[i] = (code >> i & 1) ? mag(rng) : -mag(rng);
    const FieldView f{{2, 2, 2}, vals};
    std::string why;
    if (same_triangles(marching_cubes(f, 0.0), testing::reference_marching_cubes(f, 0.0), why))
      ++cases_ok;
    else
      r.fail("case " + std::to_string(code) + ": " + why);
  }
  int grids_ok = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 g(1000 + seed);
    std::vector<double> vals(8 * 8 * 8);
    // every fifth grid is integer-valued so exact ties at k occur
    if (seed % 5 == 0)
      for (double& v : vals) v = static_cast<double>(static_cast<int>(g() % 3) - 1);
    else
      for (double& v : vals) v = std::uniform_real_distribution<double>(-1, 1)(g);
    const FieldView f{{8, 8, 8}, vals};
    std::string why;
    if (same_triangles(marching_cubes(f, 0.0), testing::reference_marching_cubes(f, 0.0), why))
      ++grids_ok;
    else
      r.fail("grid seed " + std::to_string(seed) + ": " + why);
  }
  const Volume s = gen_sphere({64, 64, 64}, {31.5, 31.5, 31.5}, 20.0);
  const double area = mesh_area(marching_cubes(s.view(), 0.0));
  const double exact = 4.0 * std::numbers::pi * 400.0;
  const double rel = std::abs(area - exact) / exact;
  r.detail << cases_ok << "/256 cases, " << grids_ok << "/100 grids, sphere area rel err " << rel;
  r.check(rel <= 0.05, "sphere area off by more than 5%");
}

void decomposition(Outcome& r) {
  std::mt19937_64 rng(4242);
  int ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Extent3 d{3 + rng() % 40, 3 + rng() % 40, 3 + rng() % 40};
    const std::size_t bs = 2 + rng() % 11;
    const Volume v = gen_smooth_random(d, rng(), 1 + static_cast<int>(rng() % 6));
    std::vector<double> ks;
    for (std::size_t c = 0, n = 1 + rng() % 4; c < n; ++c)
      ks.push_back(v.vmin() + (v.vmax() - v.vmin()) * std::uniform_real_distribution<double>(0.05, 0.95)(rng));
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const std::string tag = "trial " + std::to_string(trial);
    const auto blocks = decompose(v, bs, 1);
    const IsoIndex idx = build_index(blocks, ks);
    const auto regions = merge_regions(blocks, idx);
    const bool before = r.pass;

    // each cell covered once
    std::vector<int> cover((d.x - 1) * (d.y - 1) * (d.z - 1), 0);
    std::vector<std::size_t> owner(cover.size(), 0);
    for (const auto& b : blocks)
      for (std::size_t z = b.sample_origin.z; z + 1 < b.sample_origin.z + b.sample_extent.z; ++z)
        for (std::size_t y = b.sample_origin.y; y + 1 < b.sample_origin.y + b.sample_extent.y; ++y)
          for (std::size_t x = b.sample_origin.x; x + 1 < b.sample_origin.x + b.sample_extent.x; ++x) {
            const std::size_t c = x + (d.x - 1) * (y + (d.y - 1) * z);
            ++cover[c];
            owner[c] = b.block_id;
          }
    r.check(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }), tag + ": cells not tiled once");

    // regions partition blocks
    std::vector<int> in_region(blocks.size(), 0);
    std::vector<std::size_t> region_of(blocks.size(), 0);
    for (const auto& reg : regions)
      for (const auto& b : blocks)
        if (reg.contains_block(b.block_coords)) {
          ++in_region[b.block_id];
          region_of[b.block_id] = reg.region_id;
        }
    r.check(std::all_of(in_region.begin(), in_region.end(), [](int c) { return c == 1; }),
            tag + ": regions do not partition blocks");

    // straddling cells are in blocks (and regions) relevant to that candidate
    for (std::size_t c = 0; c < idx.candidates.size(); ++c) {
      const auto& rel = idx.relevant[c];
      for (std::size_t z = 0; z + 1 < d.z; ++z)
        for (std::size_t y = 0; y + 1 < d.y; ++y)
          for (std::size_t x = 0; x + 1 < d.x; ++x) {
            if (!testing::cell_straddles(v.view(), x, y, z, idx.candidates[c])) continue;
            const std::size_t b = owner[x + (d.x - 1) * (y + (d.y - 1) * z)];
            if (!std::binary_search(rel.begin(), rel.end(), b) || !regions[region_of[b]].relevance[c]) {
              r.fail(tag + ": straddling cell outside relevant block");
              z = d.z;
              y = d.y;
              break;
            }
          }
    }

    for (unsigned w : {2u, 3u, 8u}) {
      const auto bw = decompose(v, bs, w);
      r.check(bw == blocks && merge_regions(bw, build_index(bw, ks)) == regions,
              tag + ": output depends on worker count");
    }
    if (r.pass == before) ++ok;
  }
  r.detail << ok << "/50 configurations";
}

void format(Outcome& r) {
  const Volume v = gen_smooth_random({40, 36, 30}, 9, 5);
  const std::vector<double> ks = {-0.5, 0.25, 1.0};
  ChrOptions o;
  o.block_size = 8;
  o.accuracy = 0.95;
  const ChrArchive a = build_chr(v, ks, o);
  const auto path = std::filesystem::temp_directory_path() / "isochr_acceptance.chr";
  write_chr(a, path);
  r.check(read_chr(path) == a, "roundtrip not structurally equal");
  std::filesystem::remove(path);

  // every position, several flips each
  const Volume small = gen_sphere({17, 17, 17}, {8.25, 8.25, 8.25}, 5.0);
  ChrOptions os;
  os.block_size = 8;
  const auto bytes = build_chr(small, std::vector<double>{0.0}, os).serialize();
  std::size_t tried = 0, missed = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i)
    for (std::uint8_t flip : {0x01, 0x80, 0xff, 0x5a}) {
      auto bad = bytes;
      bad[i] ^= flip;
      ++tried;
      try {
        (void)ChrArchive::parse(bad);
        ++missed;
      } catch (const Error&) {
      }
    }
  r.check(missed == 0, std::to_string(missed) + " corruptions accepted");

  ChrOptions o4 = o;
  o4.workers = 4;
  const bool same = a.serialize() == build_chr(v, ks, o).serialize() && a.serialize() == build_chr(v, ks, o4).serialize();
  r.check(same, "rebuild not byte-identical");
  r.detail << "roundtrip ok, " << tried << " corruptions / " << missed << " missed, rebuild "
           << (same ? "identical" : "differs");
}

void stream_model(Outcome& r) {
  const double s = simulate_stream(1'000'000'000, StreamModel{1e9, 0.0});
  const double rel = std::abs(s - 8.0) / 8.0;
  r.detail << "simulate_stream(1e9 B, 1 Gbps) = " << s << " s";
  r.check(rel <= 1e-12, "not 8.0 s");
}

void speedup(Outcome& r) {
  const BigBench& b = big_bench();
  std::map<std::size_t, std::map<double, double>> sp;
  for (const auto& row : b.rows) {
    r.check(row.total_s == row.compress_s + row.stream_s + row.decompress_s + row.extract_s, "total != sum of parts");
    r.check(row.speedup == row.baseline_total_s / row.total_s, "speedup != ratio");
    r.check(row.baseline_total_s == row.baseline_stream_s + row.baseline_extract_s, "baseline total != parts");
    r.check(row.stream_s == simulate_stream(row.bytes_streamed, StreamModel{}), "stream_s inconsistent");
    r.check(row.speedup > 1.0, "speedup <= 1 at accuracy " + std::to_string(row.accuracy));
    sp[row.block_size][row.accuracy] = row.speedup;
  }
  for (auto& [bs, m] : sp) {
    r.detail << "bs" << bs << " [";
    for (auto it = m.rbegin(); it != m.rend(); ++it) r.detail << it->first << ":" << it->second << "x ";
    r.detail << "] ";
    r.check(m.count(0.8) && m.count(1.0) && m.at(0.8) >= m.at(1.0) - 0.05,
            "relaxation hurt speedup at block size " + std::to_string(bs));
  }
  r.detail << "(" << b.seconds << " s)";
  r.check(b.seconds <= 120.0, "runtime above 2 min");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 topology preserved at accuracy 1.0 (strict)", topology_oracle},
      {"2 paper-mode preserved_fraction reported and flagged", paper_mode},
      {"3 codec error bound", codec_bound},
      {"4 relaxation monotonicity", relaxation},
      {"5 marching cubes vs reference", mc_oracle},
      {"6 decomposition and merge invariants", decomposition},
      {"7 CHR roundtrip, corruption, determinism", format},
      {"8 streaming model arithmetic", stream_model},
      {"9 end-to-end speedup on 128^3 sphere", speedup},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome r;
    try {
      fn(r);
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    failed += r.pass ? 0 : 1;
    std::printf("%s [%s] %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.str().c_str());
    for (const auto& why : r.failures) std::printf("     - %s\n", why.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n\n128^3 sphere, 1 Gbps:\n%s", failed, criteria.size(),
              big_bench().table.c_str());
  return failed == 0 ? 0 : 1;
}
