#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "isochr/field.hpp"
#include "isochr/volume.hpp"

namespace isochr {

enum class CodecId : std::uint8_t {
  verbatim = 0,  // raw little-endian f64 samples, bit-exact
  lorenzo = 1,   // closed-loop 3D Lorenzo prediction + linear quantization
};

struct CompressedHeader {
  std::uint8_t codec_id = 0;
  Extent3 dims;
  double error_bound = 0.0;
  DType original_dtype = DType::f64;
  std::uint64_t payload_length = 0;
  std::uint32_t checksum = 0;  // CRC-32 of the payload

  friend bool operator==(const CompressedHeader&, const CompressedHeader&) = default;
};

struct CompressedBlock {
  CompressedHeader header;
  std::vector<std::uint8_t> payload;

  /// Serialized header size in bytes.
  static constexpr std::size_t kHeaderBytes = 1 + 3 * 4 + 8 + 1 + 8 + 4;

  std::size_t serialized_size() const noexcept { return kHeaderBytes + payload.size(); }
  std::vector<std::uint8_t> serialize() const;
  void serialize_into(std::vector<std::uint8_t>& out) const;
  /// Parses one block; validates payload length but not the checksum.
  static CompressedBlock parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const CompressedBlock&, const CompressedBlock&) = default;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

/// Error-bounded compressor. Implementations must guarantee
///   max_i |decompress(compress(x, e))_i - x_i| <= e
/// for every finite x and e >= 0.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual CodecId id() const noexcept = 0;
  virtual std::string_view name() const noexcept = 0;
  virtual CompressedBlock compress(const FieldView& samples, double error_bound,
                                   DType original_dtype = DType::f64) const = 0;
  /// Decodes a block carrying this codec's id. Checksum already verified.
  virtual Field3 decode(const CompressedBlock& block) const = 0;
};

class VerbatimCodec final : public Codec {
 public:
  CodecId id() const noexcept override { return CodecId::verbatim; }
  std::string_view name() const noexcept override { return "verbatim"; }
  CompressedBlock compress(const FieldView& samples, double error_bound,
                           DType original_dtype = DType::f64) const override;
  Field3 decode(const CompressedBlock& block) const override;
};

/// Prediction-based codec. Each sample is predicted from its 7 causal
/// neighbours in the reconstructed field (out-of-range neighbours read as
/// 0), the residual is quantized to q = round(r / 2e) with ties away from
/// zero, and the sample reconstructs to pred + q * 2e. The q stream is
/// zigzag + varint coded with zero runs collapsed; samples with |q| > 2^30
/// or whose reconstruction would miss the bound are escaped verbatim.
/// Emits a verbatim block when e == 0 or when that would be smaller.
class LorenzoCodec final : public Codec {
 public:
  static constexpr std::int64_t kEscapeThreshold = std::int64_t{1} << 30;

  CodecId id() const noexcept override { return CodecId::lorenzo; }
  std::string_view name() const noexcept override { return "lorenzo"; }
  CompressedBlock compress(const FieldView& samples, double error_bound,
                           DType original_dtype = DType::f64) const override;
  Field3 decode(const CompressedBlock& block) const override;
};

/// Built-in codec for an id, or nullptr.
const Codec* find_codec(std::uint8_t codec_id) noexcept;

/// Default codec used by archive construction.
const Codec& default_codec() noexcept;

/// Verifies the checksum, then dispatches on codec_id.
/// Throws ChecksumError or UnsupportedCodecError.
Field3 decompress(const CompressedBlock& block);

inline CompressedBlock compress(const FieldView& samples, double error_bound,
                                DType original_dtype = DType::f64) {
  return default_codec().compress(samples, error_bound, original_dtype);
}

}  // namespace isochr
