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


#include "shardhouse/sql.h"

#include <gtest/gtest.h>

#include "shardhouse/errors.h"

namespace shardhouse {
namespace {

TEST(SqlTest, FullStatement) {
  const auto s = parse_sql(
      "SELECT DISTINCT c.region, SUM(o.amount * 2) AS total FROM orders o JOIN customer c "
      "ON o.cust = c.id WHERE o.day >= DATE '1997-01-01' AND c.region IN (1, 2) "
      "GROUP BY c.region HAVING COUNT(*) > 3 ORDER BY total DESC, c.region LIMIT 5");
  EXPECT_TRUE(s.distinct);
  ASSERT_EQ(s.items.size(), 2u);
  EXPECT_EQ(s.items[1].alias, "total");
  EXPECT_TRUE(s.items[1].expr->contains_aggregate());
  ASSERT_EQ(s.from.size(), 2u);
  EXPECT_EQ(s.from[0].alias, "o");
  EXPECT_EQ(s.from[1].name, "customer");
  EXPECT_EQ(s.where.size(), 3u);  // ON clause joins the WHERE conjuncts
  EXPECT_EQ(s.group_by.size(), 1u);
  EXPECT_EQ(s.having.size(), 1u);
  ASSERT_EQ(s.order_by.size(), 2u);
  EXPECT_TRUE(s.order_by[0].desc);
  EXPECT_EQ(s.limit, 5);
  EXPECT_TRUE(s.is_aggregate());
}

TEST(SqlTest, OperatorPrecedence) {
  const auto s = parse_sql("SELECT a + b * c - d / e FROM t");
  EXPECT_EQ(s.items[0].expr->text(), "((a + (b * c)) - (d / e))");
}

TEST(SqlTest, CommaJoinAndStar) {
  const auto s = parse_sql("select * from a, b where a.x = b.y");
  EXPECT_TRUE(s.star);
  EXPECT_EQ(s.from.size(), 2u);
  EXPECT_FALSE(s.is_aggregate());
}

TEST(SqlTest, PredicateForms) {
  const auto s = parse_sql(
      "SELECT x FROM t WHERE a BETWEEN 1 AND 3 AND b NOT IN ('u', 'v') AND c LIKE 'ab%' "
      "AND d IS NOT NULL AND e = NULL AND f <> 2.5 AND (g = 1 OR h = 2)");
  ASSERT_EQ(s.where.size(), 7u);
  EXPECT_EQ(s.where[0].kind, Condition::Kind::kBetween);
  EXPECT_EQ(s.where[1].kind, Condition::Kind::kIn);
  EXPECT_TRUE(s.where[1].negated);
  EXPECT_EQ(s.where[2].kind, Condition::Kind::kLike);
  EXPECT_EQ(s.where[3].kind, Condition::Kind::kIsNull);
  EXPECT_TRUE(s.where[3].negated);
  EXPECT_EQ(s.where[4].kind, Condition::Kind::kIsNull);
  EXPECT_FALSE(s.where[4].negated);
  EXPECT_EQ(s.where[5].cmp, "<>");
  EXPECT_EQ(s.where[6].kind, Condition::Kind::kOr);
}

TEST(SqlTest, PrefixNotPushedToLeaves) {
  const auto s = parse_sql("SELECT x FROM t WHERE NOT a < 3 AND NOT (b = 1 OR c LIKE 'z%')");
  ASSERT_FALSE(s.where.empty());
  EXPECT_EQ(s.where[0].kind, Condition::Kind::kCompare);
  EXPECT_EQ(s.where[0].cmp, ">=");
  std::vector<const Condition*> leaves;
  for (std::size_t i = 1; i < s.where.size(); ++i) {
    if (s.where[i].kind == Condition::Kind::kAnd) {
      for (const auto& ch : s.where[i].children) leaves.push_back(&ch);
    } else {
      leaves.push_back(&s.where[i]);
    }
  }
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_EQ(leaves[0]->cmp, "<>");
  EXPECT_EQ(leaves[1]->kind, Condition::Kind::kLike);
  EXPECT_TRUE(leaves[1]->negated);
  const auto twice = parse_sql("SELECT x FROM t WHERE NOT NOT a IN (1, 2)");
  EXPECT_FALSE(twice.where.at(0).negated);
}

TEST(SqlTest, OrOfEqualitiesBecomesIn) {
  const auto s = parse_sql("SELECT x FROM t WHERE (c = 'A' OR c = 'B' OR c = 'C')");
  ASSERT_EQ(s.where.size(), 1u);
  EXPECT_EQ(s.where[0].kind, Condition::Kind::kIn);
  EXPECT_EQ(s.where[0].list.size(), 3u);
}

TEST(SqlTest, Literals) {
  const auto s = parse_sql("SELECT 'it''s', -4, 1.50, DATE '1998-02-03', TRUE, NULL FROM t");
  EXPECT_EQ(std::get<std::string>(s.items[0].expr->literal), "it's");
  EXPECT_EQ(std::get<std::int64_t>(s.items[1].expr->literal), -4);
  EXPECT_EQ(std::get<Decimal>(s.items[2].expr->literal).units, 150);
  EXPECT_EQ(format_date(std::get<Date>(s.items[3].expr->literal)), "1998-02-03");
  EXPECT_EQ(std::get<bool>(s.items[4].expr->literal), true);
  EXPECT_TRUE(is_null(s.items[5].expr->literal));
}

TEST(SqlTest, Errors) {
  EXPECT_THROW(parse_sql("SELECT FROM t"), QueryError);
  EXPECT_THROW(parse_sql("SELECT a FROM"), QueryError);
  EXPECT_THROW(parse_sql("SELECT a FROM t WHERE"), QueryError);
  EXPECT_THROW(parse_sql("SELECT a FROM t LIMIT x"), QueryError);
  EXPECT_THROW(parse_sql("SELECT 'open FROM t"), QueryError);
  EXPECT_THROW(parse_sql("UPDATE t SET a = 1"), QueryError);
  EXPECT_THROW(parse_sql("SELECT a FROM t extra garbage"), QueryError);
}

TEST(SqlTest, TrailingSemicolonAndCase) {
  EXPECT_NO_THROW(parse_sql("select count(*) from t;"));
  const auto s = parse_sql("SELECT Sum(x) FROM t");
  EXPECT_EQ(s.items[0].expr->func, "SUM");
}

}  // namespace
}  // namespace shardhouse
