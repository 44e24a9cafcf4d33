#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "isochr/codec.hpp"
#include "isochr/error.hpp"
#include "isochr/volume.hpp"

using namespace isochr;

namespace {

double max_abs_error(const FieldView& a, const Field3& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

std::size_t cap_bytes(std::size_t n) { return n * 8 + (n + 7) / 8; }

}  // namespace

TEST(Codec, ConstantFieldCompressesToAFewBytes) {
  const std::vector<double> vals(32 * 32 * 32, 3.25);
  const FieldView f{{32, 32, 32}, vals};
  const auto block = compress(f, 0.1);
  EXPECT_EQ(block.header.codec_id, static_cast<std::uint8_t>(CodecId::lorenzo));
  EXPECT_LT(block.payload.size(), 512u);
  EXPECT_LE(max_abs_error(f, decompress(block)), 0.1);
}

TEST(Codec, ZeroBoundIsVerbatimAndBitExact) {
  const Volume v = gen_smooth_random({9, 7, 5}, 1, 3);
  const auto block = compress(v.view(), 0.0);
  EXPECT_EQ(block.header.codec_id, static_cast<std::uint8_t>(CodecId::verbatim));
  const Field3 back = decompress(block);
  EXPECT_EQ(std::memcmp(back.values.data(), v.values().data(), v.size() * 8), 0);
}

TEST(Codec, SmoothFieldWithinBoundExhaustive) {
  const Volume v = gen_smooth_random({32, 32, 32}, 12, 8);
  const auto block = compress(v.view(), 0.01);
  EXPECT_LE(max_abs_error(v.view(), decompress(block)), 0.01);
  EXPECT_LT(block.payload.size(), v.size() * 8);
}

TEST(Codec, HeaderRecordsInputs) {
  const Volume v = gen_smooth_random({5, 6, 7}, 2, 2);
  const auto block = compress(v.view(), 0.125, DType::f32);
  EXPECT_EQ(block.header.dims, (Extent3{5, 6, 7}));
  EXPECT_EQ(block.header.error_bound, 0.125);
  EXPECT_EQ(block.header.original_dtype, DType::f32);
  EXPECT_EQ(block.header.payload_length, block.payload.size());
  EXPECT_EQ(block.header.checksum, crc32(block.payload));
}

TEST(Codec, FlippedPayloadByteIsDetected) {
  const Volume v = gen_smooth_random({16, 16, 16}, 4, 4);
  const auto block = compress(v.view(), 0.01);
  for (std::size_t pos = 0; pos < block.payload.size(); pos += 1 + block.payload.size() / 37) {
    auto bad = block;
    bad.payload[pos] ^= 0x10;
    EXPECT_THROW(decompress(bad), ChecksumError);
  }
}

TEST(Codec, UnknownCodecIdRejected) {
  const Volume v = gen_smooth_random({4, 4, 4}, 4, 2);
  auto block = compress(v.view(), 0.01);
  block.header.codec_id = 9;
  EXPECT_THROW(decompress(block), UnsupportedCodecError);
}

TEST(Codec, Deterministic) {
  const Volume v = gen_smooth_random({20, 20, 20}, 5, 5);
  EXPECT_EQ(compress(v.view(), 0.003).serialize(), compress(v.view(), 0.003).serialize());
}

TEST(Codec, SerializeParseRoundtrip) {
  const Volume v = gen_smooth_random({10, 11, 12}, 6, 5);
  const auto block = compress(v.view(), 0.02);
  const auto bytes = block.serialize();
  EXPECT_EQ(bytes.size(), block.serialized_size());
  EXPECT_EQ(CompressedBlock::parse(bytes), block);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(CompressedBlock::parse(truncated), FormatError);
}

TEST(Codec, RejectsNonFiniteAndNegativeBound) {
  std::vector<double> vals(8, 1.0);
  vals[6] = NAN;
  try {
    (void)compress({{2, 2, 2}, vals}, 0.1);
    FAIL();
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.index(), 6u);
  }
  vals[6] = 1.0;
  EXPECT_THROW(compress({{2, 2, 2}, vals}, -0.1), ParameterError);
}

TEST(Codec, EscapesHugeResiduals) {
  // Alternating 0 / 1e12 with a tiny bound forces |q| past 2^30.
  std::vector<double> vals(64);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = (i % 3 == 0) ? 1e12 : -7.5;
  const FieldView f{{4, 4, 4}, vals};
  const auto block = LorenzoCodec{}.compress(f, 1e-6);
  const Field3 back = decompress(block);
  EXPECT_LE(max_abs_error(f, back), 1e-6);
  EXPECT_LE(block.payload.size(), cap_bytes(vals.size()));
}

// Hard bound, size cap and idempotence over random fields.
TEST(Codec, BoundAndSizeCapProperty) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const Extent3 dims{2 + rng() % 20, 1 + rng() % 20, 1 + rng() % 20};
    std::vector<double> vals(dims.count());
    if (trial % 3 == 0) {
      std::normal_distribution<double> noise(0.0, 100.0);
      for (double& x : vals) x = noise(rng);
    } else {
      const Volume v = gen_smooth_random(dims, rng(), 7);
      vals.assign(v.values().begin(), v.values().end());
    }
    const FieldView f{dims, vals};
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double range = *hi - *lo;
    for (double rel : {1e-1, 1e-2, 1e-3, 1e-9}) {
      const double e = rel * range;
      const auto block = compress(f, e);
      const Field3 back = decompress(block);
      ASSERT_LE(max_abs_error(f, back), e);
      ASSERT_LE(block.payload.size(), cap_bytes(vals.size()));
      const Field3 again = decompress(compress(back.view(), e));
      ASSERT_LE(max_abs_error(back.view(), again), e);
    }
  }
}

TEST(Codec, LargerBoundSmallerPayloadOnSmoothField) {
  const Volume v = gen_smooth_random({32, 32, 32}, 77, 6);
  std::size_t previous = SIZE_MAX;
  for (double e : {1e-6, 1e-4, 1e-2, 1e-1}) {
    const std::size_t size = compress(v.view(), e).payload.size();
    RecordProperty("payload_e" + std::to_string(e), static_cast<int>(size));
    EXPECT_LE(size, previous);
    previous = size;
  }
}
