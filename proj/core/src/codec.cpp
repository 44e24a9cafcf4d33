#include "isochr/codec.hpp"

#include <zlib.h>

#include <cmath>
#include <limits>
#include <string>

#include "bytes.hpp"
#include "isochr/error.hpp"

namespace isochr {

namespace {

// Token tags in the low two bits of each varint.
constexpr std::uint64_t kTagValue = 0;   // zigzag(q) << 2
constexpr std::uint64_t kTagZeros = 1;   // run length << 2
constexpr std::uint64_t kTagEscape = 2;  // followed by 8 raw bytes

std::uint64_t zigzag(std::int64_t v) noexcept {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t unzigzag(std::uint64_t v) noexcept {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

void check_finite(const FieldView& samples) {
  for (std::size_t i = 0; i < samples.values.size(); ++i)
    if (!std::isfinite(samples.values[i])) throw NonFiniteError(i);
}

void check_dims(const FieldView& samples) {
  if (samples.values.size() != samples.dims.count())
    throw ParameterError("sample count does not match dims");
  constexpr std::size_t lim = std::numeric_limits<std::uint32_t>::max();
  if (samples.dims.x > lim || samples.dims.y > lim || samples.dims.z > lim)
    throw ParameterError("block dims exceed 32-bit range");
}

// Lorenzo prediction over the reconstructed field; out-of-range reads are 0.
struct Predictor {
  const Field3& rec;

  double operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    const bool hx = x > 0, hy = y > 0, hz = z > 0;
    double p = 0.0;
    if (hx) p += rec(x - 1, y, z);
    if (hy) p += rec(x, y - 1, z);
    if (hz) p += rec(x, y, z - 1);
    if (hx && hy) p -= rec(x - 1, y - 1, z);
    if (hx && hz) p -= rec(x - 1, y, z - 1);
    if (hy && hz) p -= rec(x, y - 1, z - 1);
    if (hx && hy && hz) p += rec(x - 1, y - 1, z - 1);
    return p;
  }
};

class TokenWriter {
 public:
  explicit TokenWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void value(std::int64_t q) {
    if (q == 0) {
      ++zeros_;
      return;
    }
    flush();
    detail::put_varint(out_, (zigzag(q) << 2) | kTagValue);
  }
  void escape(double raw) {
    flush();
    detail::put_varint(out_, kTagEscape);
    detail::put_f64(out_, raw);
  }
  void flush() {
    if (zeros_ == 0) return;
    detail::put_varint(out_, (zeros_ << 2) | kTagZeros);
    zeros_ = 0;
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint64_t zeros_ = 0;
};

CompressedBlock finish(CodecId id, const FieldView& samples, double error_bound, DType dtype,
                       std::vector<std::uint8_t> payload) {
  CompressedBlock block;
  block.header.codec_id = static_cast<std::uint8_t>(id);
  block.header.dims = samples.dims;
  block.header.error_bound = error_bound;
  block.header.original_dtype = dtype;
  block.header.payload_length = payload.size();
  block.header.checksum = crc32(payload);
  block.payload = std::move(payload);
  return block;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  constexpr std::size_t chunk = std::size_t{1} << 30;
  for (std::size_t off = 0; off < bytes.size(); off += chunk) {
    const std::size_t n = std::min(chunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

void CompressedBlock::serialize_into(std::vector<std::uint8_t>& out) const {
  detail::put_u8(out, header.codec_id);
  detail::put_u32(out, static_cast<std::uint32_t>(header.dims.x));
  detail::put_u32(out, static_cast<std::uint32_t>(header.dims.y));
  detail::put_u32(out, static_cast<std::uint32_t>(header.dims.z));
  detail::put_f64(out, header.error_bound);
  detail::put_u8(out, static_cast<std::uint8_t>(header.original_dtype));
  detail::put_u64(out, header.payload_length);
  detail::put_u32(out, header.checksum);
  out.insert(out.end(), payload.begin(), payload.end());
}

std::vector<std::uint8_t> CompressedBlock::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size());
  serialize_into(out);
  return out;
}

CompressedBlock CompressedBlock::parse(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  CompressedBlock block;
  block.header.codec_id = in.u8();
  block.header.dims.x = in.u32();
  block.header.dims.y = in.u32();
  block.header.dims.z = in.u32();
  block.header.error_bound = in.f64();
  const std::uint8_t dtype = in.u8();
  if (dtype != static_cast<std::uint8_t>(DType::f32) && dtype != static_cast<std::uint8_t>(DType::f64))
    throw FormatError("unknown dtype tag " + std::to_string(dtype));
  block.header.original_dtype = static_cast<DType>(dtype);
  block.header.payload_length = in.u64();
  block.header.checksum = in.u32();
  if (block.header.payload_length != in.remaining())
    throw FormatError("payload length " + std::to_string(block.header.payload_length) +
                      " does not match " + std::to_string(in.remaining()) + " available bytes");
  auto payload = in.take(static_cast<std::size_t>(block.header.payload_length));
  block.payload.assign(payload.begin(), payload.end());
  return block;
}

CompressedBlock VerbatimCodec::compress(const FieldView& samples, double error_bound,
                                        DType original_dtype) const {
  check_dims(samples);
  check_finite(samples);
  if (!(error_bound >= 0.0) || !std::isfinite(error_bound))
    throw ParameterError("error bound must be finite and non-negative");
  std::vector<std::uint8_t> payload;
  payload.reserve(samples.values.size() * 8);
  for (double v : samples.values) detail::put_f64(payload, v);
  return finish(CodecId::verbatim, samples, error_bound, original_dtype, std::move(payload));
}

Field3 VerbatimCodec::decode(const CompressedBlock& block) const {
  const Extent3 dims = block.header.dims;
  if (block.payload.size() != dims.count() * 8)
    throw FormatError("verbatim payload size does not match dims");
  detail::Reader in(block.payload);
  Field3 out(dims);
  for (double& v : out.values) v = in.f64();
  return out;
}

CompressedBlock LorenzoCodec::compress(const FieldView& samples, double error_bound,
                                       DType original_dtype) const {
  check_dims(samples);
  check_finite(samples);
  if (!(error_bound >= 0.0) || !std::isfinite(error_bound))
    throw ParameterError("error bound must be finite and non-negative");
  if (error_bound == 0.0) return VerbatimCodec{}.compress(samples, 0.0, original_dtype);

  const Extent3 dims = samples.dims;
  const double bin = 2.0 * error_bound;
  Field3 rec(dims);
  const Predictor predict{rec};

  std::vector<std::uint8_t> payload;
  payload.reserve(dims.count() / 4 + 16);
  TokenWriter tokens(payload);
  const std::size_t verbatim_size = dims.count() * 8;

  for (std::size_t z = 0; z < dims.z; ++z)
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const std::size_t i = linear_index(dims, x, y, z);
        const double value = samples.values[i];
        const double pred = predict(x, y, z);
        const double qr = std::round((value - pred) / bin);
        bool escaped = !(std::abs(qr) <= static_cast<double>(kEscapeThreshold));
        std::int64_t q = 0;
        double recon = value;
        if (!escaped) {
          q = static_cast<std::int64_t>(qr);
          recon = pred + static_cast<double>(q) * bin;
          escaped = !(std::abs(value - recon) <= error_bound);
        }
        if (escaped) {
          tokens.escape(value);
          rec.values[i] = value;
        } else {
          tokens.value(q);
          rec.values[i] = recon;
        }
      }
  tokens.flush();

  if (payload.size() > verbatim_size)
    return VerbatimCodec{}.compress(samples, error_bound, original_dtype);
  return finish(CodecId::lorenzo, samples, error_bound, original_dtype, std::move(payload));
}

Field3 LorenzoCodec::decode(const CompressedBlock& block) const {
  const Extent3 dims = block.header.dims;
  const double error_bound = block.header.error_bound;
  if (!(error_bound > 0.0) || !std::isfinite(error_bound))
    throw FormatError("lorenzo block carries an invalid error bound");
  const double bin = 2.0 * error_bound;

  Field3 rec(dims);
  const Predictor predict{rec};
  detail::Reader in(block.payload);
  std::uint64_t zeros = 0;

  for (std::size_t z = 0; z < dims.z; ++z)
    for (std::size_t y = 0; y < dims.y; ++y)
      for (std::size_t x = 0; x < dims.x; ++x) {
        const std::size_t i = linear_index(dims, x, y, z);
        const double pred = predict(x, y, z);
        if (zeros > 0) {
          --zeros;
          rec.values[i] = pred + 0.0 * bin;
          continue;
        }
        const std::uint64_t token = in.varint();
        switch (token & 3) {
          case kTagValue: {
            const std::int64_t q = unzigzag(token >> 2);
            rec.values[i] = pred + static_cast<double>(q) * bin;
            break;
          }
          case kTagZeros:
            zeros = token >> 2;
            if (zeros == 0) throw FormatError("empty zero run");
            --zeros;
            rec.values[i] = pred + 0.0 * bin;
            break;
          case kTagEscape:
            rec.values[i] = in.f64();
            break;
          default:
            throw FormatError("unknown token tag");
        }
      }
  if (zeros != 0 || !in.done()) throw FormatError("trailing data in lorenzo payload");
  return rec;
}

const Codec* find_codec(std::uint8_t codec_id) noexcept {
  static const VerbatimCodec verbatim;
  static const LorenzoCodec lorenzo;
  switch (codec_id) {
    case static_cast<std::uint8_t>(CodecId::verbatim):
      return &verbatim;
    case static_cast<std::uint8_t>(CodecId::lorenzo):
      return &lorenzo;
    default:
      return nullptr;
  }
}

const Codec& default_codec() noexcept {
  return *find_codec(static_cast<std::uint8_t>(CodecId::lorenzo));
}

Field3 decompress(const CompressedBlock& block) {
  if (block.payload.size() != block.header.payload_length)
    throw FormatError("payload length does not match header");
  if (crc32(block.payload) != block.header.checksum)
    throw ChecksumError("compressed block checksum mismatch");
  const Codec* codec = find_codec(block.header.codec_id);
  if (codec == nullptr) throw UnsupportedCodecError(block.header.codec_id);
  return codec->decode(block);
}

}  // namespace isochr
