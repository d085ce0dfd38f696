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


#include "shardhouse/value.h"

#include <gtest/gtest.h>

#include "shardhouse/bigint.h"
#include "shardhouse/errors.h"

namespace shardhouse {
namespace {

TEST(ValueTest, DatesRoundTrip) {
  EXPECT_EQ(parse_date("1970-01-01").days, 0);
  EXPECT_EQ(parse_date("2000-03-01").days, 11017);
  EXPECT_EQ(format_date(Date{-1}), "1969-12-31");
  for (int d = -800000; d < 800000; d += 997) EXPECT_EQ(parse_date(format_date(Date{d})).days, d);
  EXPECT_THROW(parse_date("1997-13-01"), QueryError);
  EXPECT_THROW(parse_date("1997-02-30"), QueryError);
  EXPECT_THROW(parse_date("yesterday"), QueryError);
}

TEST(ValueTest, DecimalParsingRoundsHalfAway) {
  EXPECT_EQ(parse_decimal("1.005", 2).units, 101);
  EXPECT_EQ(parse_decimal("-1.005", 2).units, -101);
  EXPECT_EQ(parse_decimal("7", 2).units, 700);
  EXPECT_EQ(rescale(Decimal{15, 1}, 0).units, 2);
  EXPECT_EQ(rescale(Decimal{-15, 1}, 0).units, -2);
  EXPECT_EQ(format_decimal(Decimal{-5, 2}), "-0.05");
}

TEST(ValueTest, CompareWithPromotion) {
  EXPECT_EQ(compare_values(std::int64_t{2}, Decimal{200, 2}), 0);
  EXPECT_LT(compare_values(std::int64_t{2}, 2.5), 0);
  EXPECT_LT(compare_values(Value{}, std::int64_t{-9}), 0);
  EXPECT_EQ(compare_values(Date{1}, std::string("1970-01-02")), 0);
  EXPECT_THROW(compare_values(std::string("a"), std::int64_t{1}), QueryError);
  EXPECT_TRUE(values_equal(Value{}, Value{}));
}

TEST(ValueTest, Arithmetic) {
  const auto s = add_values(Decimal{150, 2}, std::int64_t{2});
  EXPECT_EQ(compare_values(s, Decimal{350, 2}), 0);
  EXPECT_EQ(std::get<std::int64_t>(sub_values(std::int64_t{5}, std::int64_t{7})), -2);
  EXPECT_EQ(compare_values(mul_values(Decimal{15, 1}, Decimal{2, 0}), std::int64_t{3}), 0);
  EXPECT_TRUE(is_null(add_values(Value{}, std::int64_t{1})));
  EXPECT_DOUBLE_EQ(to_double(div_values(std::int64_t{1}, std::int64_t{4})), 0.25);
}

TEST(BigIntTest, DecimalText) {
  const BigInt v = from_decimal("-123456789012345678901234567890");
  EXPECT_EQ(to_decimal(v), "-123456789012345678901234567890");
  EXPECT_THROW(from_decimal(""), ProtocolError);
  EXPECT_THROW(from_decimal("12a"), ProtocolError);
  EXPECT_EQ(byte_length(BigInt(0)), 1u);
  EXPECT_EQ(byte_length(BigInt(255)), 1u);
  EXPECT_EQ(byte_length(BigInt(256)), 2u);
  EXPECT_EQ(byte_length(BigInt(-65536)), 3u);
}

}  // namespace
}  // namespace shardhouse
