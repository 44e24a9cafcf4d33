#include "isochr/chr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "bytes.hpp"
#include "isochr/error.hpp"
#include "parallel.hpp"

namespace isochr {

namespace {

constexpr std::size_t kFixedHeaderBytes = 4 + 2 + 3 * 4 + 3 * 8 + 1 + 4 + 8 + 8 + 8 + 8;
constexpr std::size_t kChecksumBytes = 4;

std::size_t mask_bytes(std::size_t candidates) { return (candidates + 7) / 8; }

std::size_t region_row_bytes(std::size_t candidates) {
  return 4 + 4 * 3 * 4 + mask_bytes(candidates) + 1 + 8 + 8 + 8 + 8;
}

void put_index3(std::vector<std::uint8_t>& out, std::size_t x, std::size_t y, std::size_t z) {
  detail::put_u32(out, static_cast<std::uint32_t>(x));
  detail::put_u32(out, static_cast<std::uint32_t>(y));
  detail::put_u32(out, static_cast<std::uint32_t>(z));
}

Index3 get_index3(detail::Reader& in) {
  Index3 v;
  v.x = in.u32();
  v.y = in.u32();
  v.z = in.u32();
  return v;
}

// First owned sample of a region along one axis.
std::size_t owned_begin(std::size_t block_lo, std::size_t origin) {
  return block_lo == 0 ? origin : origin + 1;
}

}  // namespace

bool RegionEntry::relevant_to_any() const noexcept {
  return std::find(relevance.begin(), relevance.end(), true) != relevance.end();
}

std::size_t ChrArchive::table_bytes() const noexcept {
  return kFixedHeaderBytes + 4 + 8 * candidates.size() + 4 +
         regions.size() * region_row_bytes(candidates.size());
}

std::size_t ChrArchive::total_bytes() const noexcept {
  std::size_t n = table_bytes() + kChecksumBytes;
  for (const auto& p : payloads) n += p.serialized_size();
  return n;
}

void ChrArchive::layout() {
  if (payloads.size() != regions.size()) throw FormatError("region/payload count mismatch");
  std::uint64_t offset = table_bytes();
  for (std::size_t i = 0; i < regions.size(); ++i) {
    regions[i].payload_offset = offset;
    regions[i].payload_length = payloads[i].serialized_size();
    offset += regions[i].payload_length;
  }
}

std::vector<std::uint8_t> ChrArchive::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(total_bytes());
  out.insert(out.end(), std::begin(kChrMagic), std::end(kChrMagic));
  detail::put_u16(out, header.version);
  put_index3(out, header.dims.x, header.dims.y, header.dims.z);
  for (double s : header.spacing) detail::put_f64(out, s);
  detail::put_u8(out, static_cast<std::uint8_t>(header.original_dtype));
  detail::put_u32(out, header.block_size);
  detail::put_f64(out, header.vmin);
  detail::put_f64(out, header.vmax);
  detail::put_f64(out, header.safety_factor);
  detail::put_f64(out, header.loose_fraction);

  detail::put_u32(out, static_cast<std::uint32_t>(candidates.size()));
  for (double k : candidates) detail::put_f64(out, k);

  detail::put_u32(out, static_cast<std::uint32_t>(regions.size()));
  for (const RegionEntry& r : regions) {
    detail::put_u32(out, r.region_id);
    put_index3(out, r.block_lo.x, r.block_lo.y, r.block_lo.z);
    put_index3(out, r.block_hi.x, r.block_hi.y, r.block_hi.z);
    put_index3(out, r.sample_origin.x, r.sample_origin.y, r.sample_origin.z);
    put_index3(out, r.sample_extent.x, r.sample_extent.y, r.sample_extent.z);
    std::vector<std::uint8_t> mask(mask_bytes(candidates.size()), 0);
    for (std::size_t c = 0; c < r.relevance.size(); ++c)
      if (r.relevance[c]) mask[c / 8] = static_cast<std::uint8_t>(mask[c / 8] | (1u << (c % 8)));
    out.insert(out.end(), mask.begin(), mask.end());
    detail::put_u8(out, static_cast<std::uint8_t>(r.bound_mode));
    detail::put_f64(out, r.accuracy);
    detail::put_f64(out, r.error_bound);
    detail::put_u64(out, r.payload_offset);
    detail::put_u64(out, r.payload_length);
  }
  for (const auto& p : payloads) p.serialize_into(out);
  detail::put_u32(out, crc32(out));
  return out;
}

ChrArchive ChrArchive::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kChrMagic, 4) != 0)
    throw BadMagicError("not a CHR archive (bad magic)");
  detail::Reader in(bytes);
  in.take(4);
  ChrArchive a;
  a.header.version = in.u16();
  if (a.header.version != kChrVersion) throw VersionMismatchError(a.header.version, kChrVersion);
  if (bytes.size() < kFixedHeaderBytes + 8 + kChecksumBytes)
    throw FormatError("archive truncated: " + std::to_string(bytes.size()) + " bytes");

  const std::size_t body = bytes.size() - kChecksumBytes;
  detail::Reader tail(bytes.subspan(body));
  if (crc32(bytes.first(body)) != tail.u32())
    throw ChecksumError("archive checksum mismatch (corrupt or truncated file)");

  a.header.dims = {in.u32(), in.u32(), in.u32()};
  for (double& s : a.header.spacing) s = in.f64();
  const std::uint8_t dtype = in.u8();
  if (dtype != static_cast<std::uint8_t>(DType::f32) && dtype != static_cast<std::uint8_t>(DType::f64))
    throw FormatError("unknown dtype tag in archive header");
  a.header.original_dtype = static_cast<DType>(dtype);
  a.header.block_size = in.u32();
  a.header.vmin = in.f64();
  a.header.vmax = in.f64();
  a.header.safety_factor = in.f64();
  a.header.loose_fraction = in.f64();

  const std::uint32_t m = in.u32();
  if (static_cast<std::size_t>(m) * 8 > in.remaining()) throw FormatError("candidate list truncated");
  a.candidates.resize(m);
  for (double& k : a.candidates) k = in.f64();

  const std::uint32_t n = in.u32();
  if (static_cast<std::size_t>(n) * region_row_bytes(m) > in.remaining())
    throw FormatError("region table truncated");
  a.regions.resize(n);
  for (RegionEntry& r : a.regions) {
    r.region_id = in.u32();
    r.block_lo = get_index3(in);
    r.block_hi = get_index3(in);
    r.sample_origin = get_index3(in);
    const Index3 ext = get_index3(in);
    r.sample_extent = {ext.x, ext.y, ext.z};
    auto mask = in.take(mask_bytes(m));
    r.relevance.resize(m);
    for (std::size_t c = 0; c < m; ++c) r.relevance[c] = (mask[c / 8] >> (c % 8)) & 1;
    const std::uint8_t mode = in.u8();
    if (mode > 1) throw FormatError("unknown bound mode tag");
    r.bound_mode = static_cast<BoundMode>(mode);
    r.accuracy = in.f64();
    r.error_bound = in.f64();
    r.payload_offset = in.u64();
    r.payload_length = in.u64();
  }

  std::uint64_t expected = in.pos();
  for (const RegionEntry& r : a.regions) {
    if (r.payload_offset != expected || r.payload_length > body - expected)
      throw FormatError("region " + std::to_string(r.region_id) + " payload outside file bounds");
    a.payloads.push_back(CompressedBlock::parse(
        bytes.subspan(static_cast<std::size_t>(r.payload_offset), static_cast<std::size_t>(r.payload_length))));
    if (!(a.payloads.back().header.dims == r.sample_extent))
      throw FormatError("region " + std::to_string(r.region_id) + " payload dims mismatch");
    expected += r.payload_length;
  }
  if (expected != body) throw FormatError("unexpected trailing bytes before checksum");
  return a;
}

ChrArchive build_chr(const Volume& volume, std::span<const double> candidates,
                     const ChrOptions& options, std::vector<std::string>* warnings) {
  for (double k : candidates) {
    if (std::isfinite(k) && (k < volume.vmin() || k > volume.vmax())) {
      const std::string msg = "candidate isovalue " + std::to_string(k) + " lies outside the value range [" +
                              std::to_string(volume.vmin()) + ", " + std::to_string(volume.vmax()) + "]";
      if (options.reject_out_of_range) throw ParameterError(msg);
      if (warnings) warnings->push_back(msg);
    }
  }
  if (options.block_size > std::numeric_limits<std::uint32_t>::max())
    throw ParameterError("block size too large");

  const auto blocks = decompose(volume, options.block_size, options.workers);
  const IsoIndex index = build_index(blocks, candidates);
  const auto regions = merge_regions(blocks, index);

  ChrArchive a;
  a.header.dims = volume.dims();
  a.header.spacing = volume.spacing();
  a.header.original_dtype = volume.source_dtype();
  a.header.block_size = static_cast<std::uint32_t>(options.block_size);
  a.header.vmin = volume.vmin();
  a.header.vmax = volume.vmax();
  a.header.safety_factor = options.safety_factor;
  a.header.loose_fraction = options.loose_fraction;
  a.candidates = index.candidates;

  BoundPolicy policy;
  policy.accuracy = options.accuracy;
  policy.mode = options.bound_mode;
  policy.safety_factor = options.safety_factor;
  policy.loose_bound = loose_bound_for_range(volume.vmin(), volume.vmax(), options.loose_fraction);

  const Codec& codec = options.codec ? *options.codec : default_codec();
  a.regions.resize(regions.size());
  a.payloads.resize(regions.size());
  const FieldView field = volume.view();
  detail::parallel_chunks(regions.size(), options.workers, [&](std::size_t b, std::size_t e, unsigned) {
    std::vector<double> served, unserved;
    for (std::size_t i = b; i < e; ++i) {
      const Region& r = regions[i];
      const Field3 window = extract_window(field, r.sample_origin, r.sample_extent);
      served.clear();
      unserved.clear();
      for (std::size_t c = 0; c < r.relevance.size(); ++c)
        (r.relevance[c] ? served : unserved).push_back(index.candidates[c]);
      BoundSpec bound = region_bound(window.view(), served, policy);
      // strict: no sample may cross a candidate this region doesn't serve,
      // otherwise stitching grows surface that was never there
      if (options.bound_mode == BoundMode::strict_vertices && !unserved.empty()) {
        BoundPolicy exact = policy;
        exact.accuracy = 1.0;
        const BoundSpec guard = region_bound(window.view(), unserved, exact);
        if (guard.lossless_required || guard.error_bound < bound.error_bound) bound = guard;
      }

      RegionEntry& entry = a.regions[i];
      entry.region_id = static_cast<std::uint32_t>(r.region_id);
      entry.block_lo = r.block_lo;
      entry.block_hi = r.block_hi;
      entry.sample_origin = r.sample_origin;
      entry.sample_extent = r.sample_extent;
      entry.relevance = r.relevance;
      entry.bound_mode = options.bound_mode;
      entry.accuracy = options.accuracy;
      entry.error_bound = bound.lossless_required ? 0.0 : bound.error_bound;
      a.payloads[i] = codec.compress(window.view(), entry.error_bound, volume.source_dtype());
    }
  });
  a.layout();
  return a;
}

void write_chr(const ChrArchive& archive, const std::filesystem::path& path) {
  const auto bytes = archive.serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

ChrArchive read_chr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ChrArchive::parse(bytes);
}

std::size_t resolve_candidate(std::span<const double> candidates, double k, bool snap) {
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (candidates[c] == k) return c;
  if (!snap || candidates.empty() || !std::isfinite(k)) throw NoSuchIsovalueError(k);
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    // strict < keeps the smaller candidate on ties (candidates ascend)
    if (std::abs(candidates[c] - k) < std::abs(candidates[best] - k)) best = c;
  return best;
}

ReconstructionSet request(const ChrArchive& archive, std::span<const double> isovalues,
                          const RequestOptions& options) {
  if (!(options.accuracy > 0.0 && options.accuracy <= 1.0))
    throw ParameterError("accuracy must lie in (0, 1]");
  if (isovalues.empty()) throw ParameterError("request needs at least one isovalue");

  ReconstructionSet set;
  CoverageReport& rep = set.report;
  for (double k : isovalues) {
    const std::size_t c = resolve_candidate(archive.candidates, k, options.snap);
    rep.requested.push_back(k);
    rep.resolved.push_back(archive.candidates[c]);
    rep.candidate_indices.push_back(c);
    if (archive.candidates[c] != k) rep.snapped = true;
  }

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < archive.regions.size(); ++i) {
    const RegionEntry& r = archive.regions[i];
    bool take = !options.drop_pruned;
    for (std::size_t c : rep.candidate_indices) take = take || r.relevance[c];
    if (!take) continue;
    if (r.accuracy < options.accuracy) throw InsufficientAccuracyError(options.accuracy, r.accuracy);
    selected.push_back(i);
  }

  rep.regions_total = archive.regions.size();
  rep.regions_selected = selected.size();
  rep.bytes_total = archive.total_bytes();
  rep.bytes_touched = archive.table_bytes();
  for (std::size_t i : selected) rep.bytes_touched += archive.regions[i].payload_length;

  set.regions.resize(selected.size());
  detail::parallel_chunks(selected.size(), options.workers, [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t j = b; j < e; ++j) {
      const std::size_t i = selected[j];
      set.regions[j].entry = archive.regions[i];
      set.regions[j].samples = decompress(archive.payloads[i]);
    }
  });
  return set;
}

Field3 stitch(const ChrArchive& archive, const ReconstructionSet& set) {
  if (set.regions.size() != archive.regions.size())
    throw ParameterError("stitching needs every region (request with drop_pruned = false)");
  Field3 out(archive.header.dims);
  for (const ReconstructedRegion& rr : set.regions) {
    const RegionEntry& r = rr.entry;
    const Index3& o = r.sample_origin;
    const Extent3& e = r.sample_extent;
    const std::size_t x0 = owned_begin(r.block_lo.x, o.x) - o.x;
    const std::size_t y0 = owned_begin(r.block_lo.y, o.y) - o.y;
    const std::size_t z0 = owned_begin(r.block_lo.z, o.z) - o.z;
    for (std::size_t z = z0; z < e.z; ++z)
      for (std::size_t y = y0; y < e.y; ++y)
        for (std::size_t x = x0; x < e.x; ++x) out(o.x + x, o.y + y, o.z + z) = rr.samples(x, y, z);
  }
  return out;
}

}  // namespace isochr
