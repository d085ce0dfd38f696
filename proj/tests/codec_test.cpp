// Copyright 2026 The Shardhouse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "shardhouse/codec.h"

#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "shardhouse/errors.h"
#include "support/fixtures.h"

namespace shardhouse {
namespace {

ColumnCodec make(ColumnKind kind, std::int64_t p, bool is_signed = true) {
  ColumnCodec c;
  c.kind = kind;
  c.width = default_width(kind, p);
  c.is_signed = is_signed;
  return c;
}

Value round_trip(const Value& v, const ColumnCodec& codec, const SharingConfig& cfg) {
  return blocks_to_value(value_to_blocks(v, codec, cfg), codec, cfg);
}

TEST(CodecTest, DefaultWidthsCoverNaturalDomains) {
  EXPECT_EQ(default_width(ColumnKind::kInteger, 13), 9);   // 13^9 > 2^32 > 13^8
  EXPECT_EQ(default_width(ColumnKind::kInteger, 251), 5);
  EXPECT_EQ(default_width(ColumnKind::kInteger, 99991), 2);
  EXPECT_EQ(default_width(ColumnKind::kCharacter, 13), 6);  // 13^6 > 0x110000
  EXPECT_EQ(default_width(ColumnKind::kDate, 251), 3);
  EXPECT_EQ(default_width(ColumnKind::kBoolean, 13), 0);
}

TEST(CodecTest, DigitsRoundTrip) {
  std::mt19937_64 rng(3);
  for (std::int64_t p : {13, 251, 99991}) {
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t v = rng() >> 33;
      const int w = default_width(ColumnKind::kInteger, p);
      const auto d = int_to_digits(v, p, w);
      EXPECT_EQ(static_cast<int>(d.size()), w);
      EXPECT_EQ(digits_to_int(d, p), v);
    }
  }
  EXPECT_THROW(int_to_digits(169, 13, 2), RangeError);
  EXPECT_THROW(digits_to_int(std::vector<std::int64_t>{13}, 13), RangeError);
}

TEST(CodecTest, ZigzagInterleavesSigns) {
  EXPECT_EQ(zigzag_encode(0), 0u);
  EXPECT_EQ(zigzag_encode(-1), 1u);
  EXPECT_EQ(zigzag_encode(1), 2u);
  EXPECT_EQ(zigzag_encode(-2), 3u);
  for (std::int64_t x : {std::int64_t{0}, std::int64_t{-5}, std::int64_t{123456789},
                         std::numeric_limits<std::int64_t>::min(),
                         std::numeric_limits<std::int64_t>::max()}) {
    EXPECT_EQ(zigzag_decode(zigzag_encode(x)), x);
  }
}

TEST(CodecTest, ScalarKindsRoundTrip) {
  const auto cfg = testing::config_for(4, 3, 251);
  EXPECT_EQ(std::get<std::int64_t>(round_trip(std::int64_t{-42}, make(ColumnKind::kInteger, 251), cfg)), -42);

  auto real = make(ColumnKind::kReal, 251);
  real.scale = 2;
  const auto d = std::get<Decimal>(round_trip(Decimal{-1234, 2}, real, cfg));
  EXPECT_EQ(d.units, -1234);
  EXPECT_EQ(d.scale, 2);

  const Date day = parse_date("1997-12-31");
  EXPECT_EQ(std::get<Date>(round_trip(day, make(ColumnKind::kDate, 251), cfg)), day);
  const Date old = parse_date("1901-02-03");
  EXPECT_EQ(std::get<Date>(round_trip(old, make(ColumnKind::kDate, 251), cfg)), old);

  EXPECT_EQ(std::get<std::string>(round_trip(std::string("\xc3\xa9"), make(ColumnKind::kCharacter, 251), cfg)),
            "\xc3\xa9");
}

TEST(CodecTest, StringsUseOneUnitPerCharacter) {
  const auto cfg = testing::example_config();
  ColumnCodec c;
  c.kind = ColumnKind::kString;
  c.width = 2;
  const auto enc = value_to_blocks(std::string("Ring"), c, cfg);
  ASSERT_EQ(enc.blocks.size(), 4u);
  // 'R' = 82 = 4 + 6*13
  EXPECT_EQ(enc.blocks[0].digits, (std::vector<std::int64_t>{4, 6}));
  EXPECT_EQ(std::get<std::string>(blocks_to_value(enc, c, cfg)), "Ring");
  EXPECT_TRUE(value_to_blocks(std::string(), c, cfg).blocks.empty());
  EXPECT_EQ(std::get<std::string>(round_trip(std::string(), c, cfg)), "");
  EXPECT_THROW(value_to_blocks(std::string("\xc3\xa9"), c, cfg), RangeError);
}

TEST(CodecTest, PaddedStringsHaveFixedLength) {
  const auto cfg = testing::config_for(3, 3, 251);
  ColumnCodec c;
  c.kind = ColumnKind::kString;
  c.width = 1;
  c.pad = true;
  c.max_len = 6;
  validate_codec(c, 251);
  const auto a = value_to_blocks(std::string("ab"), c, cfg);
  const auto b = value_to_blocks(std::string("abcdef"), c, cfg);
  EXPECT_EQ(a.blocks.size(), b.blocks.size());
  EXPECT_EQ(static_cast<int>(a.blocks.size()), c.fixed_blocks(cfg.t));
  EXPECT_EQ(std::get<std::string>(blocks_to_value(a, c, cfg)), "ab");
  EXPECT_THROW(value_to_blocks(std::string("abcdefg"), c, cfg), RangeError);
}

TEST(CodecTest, UnsignedRejectsNegatives) {
  const auto cfg = testing::config_for(4, 3, 251);
  const auto u = make(ColumnKind::kInteger, 251, false);
  EXPECT_TRUE(u.additive());
  EXPECT_FALSE(make(ColumnKind::kInteger, 251).additive());
  EXPECT_THROW(value_to_blocks(std::int64_t{-1}, u, cfg), RangeError);
}

TEST(CodecTest, OverflowIsRangeError) {
  const auto cfg = testing::example_config();
  ColumnCodec c;
  c.kind = ColumnKind::kInteger;
  c.width = 2;
  c.is_signed = false;
  EXPECT_NO_THROW(value_to_blocks(std::int64_t{168}, c, cfg));
  EXPECT_THROW(value_to_blocks(std::int64_t{169}, c, cfg), RangeError);
}

TEST(CodecTest, NullAndPlainForms) {
  const auto cfg = testing::example_config();
  auto c = make(ColumnKind::kInteger, 13);
  EXPECT_THROW(value_to_blocks(Value{}, c, cfg), SchemaError);
  c.nullable = true;
  EXPECT_EQ(value_to_blocks(Value{}, c, cfg).form, EncodedValue::Form::kNull);
  ColumnCodec b;
  b.kind = ColumnKind::kBoolean;
  const auto enc = value_to_blocks(true, b, cfg);
  EXPECT_EQ(enc.form, EncodedValue::Form::kPlain);
  EXPECT_EQ(std::get<bool>(blocks_to_value(enc, b, cfg)), true);
}

TEST(CodecTest, TamperedPaddingIsCorruption) {
  const auto cfg = testing::config_for(3, 3, 13);
  auto c = make(ColumnKind::kInteger, 13, false);
  c.width = 3;  // two blocks, last slot padded
  auto enc = value_to_blocks(std::int64_t{100}, c, cfg);
  ASSERT_EQ(enc.blocks.size(), 2u);
  enc.blocks[1].digits[1] = 0;
  EXPECT_THROW(blocks_to_value(enc, c, cfg), CorruptionError);
}

TEST(CodecTest, ValidateCodecChecksTextWidth) {
  ColumnCodec c;
  c.kind = ColumnKind::kString;
  c.width = 1;
  EXPECT_THROW(validate_codec(c, 13), SchemaError);
  c.width = 2;
  EXPECT_NO_THROW(validate_codec(c, 13));
  c.pad = true;
  EXPECT_THROW(validate_codec(c, 13), SchemaError);  // no max_len
}

TEST(CodecTest, ParseAndCoerce) {
  auto c = make(ColumnKind::kReal, 251);
  c.scale = 2;
  const auto v = std::get<Decimal>(parse_typed("12.345", c));
  EXPECT_EQ(v.units, 1235);
  EXPECT_EQ(std::get<Decimal>(coerce_to(std::int64_t{3}, c)).units, 300);
  EXPECT_THROW(coerce_to(std::string("x"), c), QueryError);
  auto d = make(ColumnKind::kDate, 251);
  EXPECT_EQ(std::get<Date>(coerce_to(std::string("1970-01-02"), d)).days, 1);
  auto n = make(ColumnKind::kInteger, 251);
  n.nullable = true;
  EXPECT_TRUE(is_null(parse_typed("", n)));
  EXPECT_THROW(parse_typed("1x", make(ColumnKind::kInteger, 251)), SchemaError);
  EXPECT_THROW(parse_kind("blob"), SchemaError);
}

TEST(CodecTest, Utf8RoundTrip) {
  const std::string s = "a\xc3\xa9\xe2\x82\xac\xf0\x9f\x98\x80";
  const auto cps = utf8_decode(s);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[3], 0x1F600u);
  EXPECT_EQ(utf8_encode(cps), s);
}

}  // namespace
}  // namespace shardhouse
