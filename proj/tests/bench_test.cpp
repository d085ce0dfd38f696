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


#include "shardhouse/bench.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "shardhouse/errors.h"
#include "shardhouse/sql.h"
#include "support/fixtures.h"
#include "support/oracle.h"

namespace shardhouse {
namespace {

namespace fs = std::filesystem;

TEST(BenchTest, FlatGeneratorIsSeeded) {
  const auto a = gen_flat(1000, 5);
  EXPECT_EQ(a, gen_flat(1000, 5));
  EXPECT_NE(a, gen_flat(1000, 6));
  EXPECT_EQ(a.size(), 1000u);
  const auto tables = tables_from_sidecar(flat_sidecar());
  ASSERT_EQ(tables.size(), 1u);
  EXPECT_TRUE(tables[0].column("value").codec.additive());
}

TEST(BenchTest, SsbShapeAndDeterminism) {
  const auto d = gen_ssb(3, 251, 2000);
  ASSERT_EQ(d.tables.size(), 5u);
  EXPECT_EQ(d.tables.back().name, "lineorder");
  EXPECT_EQ(d.rows.at("lineorder").size(), 2000u);
  EXPECT_EQ(d.rows.at("date").size(), 2557u);
  EXPECT_EQ(d.queries.size(), 13u);
  const auto again = gen_ssb(3, 251, 2000).rows.at("lineorder");
  const auto& first = d.rows.at("lineorder");
  ASSERT_EQ(again.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    ASSERT_EQ(again[i].size(), first[i].size());
    for (std::size_t j = 0; j < first[i].size(); ++j)
      ASSERT_TRUE(values_equal(again[i][j], first[i][j])) << i << "," << j;
  }
  for (const auto& q : d.queries) EXPECT_NO_THROW(parse_sql(q.sql)) << q.name;
  for (const auto& q : random_ssb_queries(d, 60, 1)) EXPECT_NO_THROW(parse_sql(q.sql)) << q.sql;
  // Text columns get the narrowest width holding 7-bit text.
  const auto side = tables_from_sidecar(ssb_sidecar(13));
  EXPECT_EQ(side[0].column("c_name").codec.width, 2);
}

TEST(BenchTest, SsbWriteProducesLoadableFiles) {
  const fs::path dir = fs::temp_directory_path() / "shardhouse_ssb_test";
  fs::remove_all(dir);
  const auto d = gen_ssb(4, 251, 300);
  write_ssb(d, dir);
  for (const auto& t : d.tables) {
    const auto rows = read_csv(dir / (t.name + ".csv"));
    EXPECT_EQ(rows.size(), d.rows.at(t.name).size() + 1) << t.name;
    EXPECT_EQ(rows[0], t.column_names());
  }
  std::ifstream q(dir / "queries.sql");
  std::string text((std::istreambuf_iterator<char>(q)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("-- Q4.3"), std::string::npos);
  fs::remove_all(dir);
}

TEST(BenchTest, SsbTemplatesMatchOracle) {
  const auto d = gen_ssb(8, 251, 1500);
  auto lw = testing::make_warehouse(testing::config_for(4, 3, 251, 8));
  testing::load_ssb(*lw, d);
  testing::SqliteOracle oracle;
  for (const auto& t : d.tables) oracle.load(t, d.rows.at(t.name));
  std::size_t nonempty = 0;
  auto queries = d.queries;
  for (const auto& q : random_ssb_queries(d, 40, 2)) queries.push_back(q);
  for (const auto& q : queries) {
    const auto want = oracle.query(q.sql);
    const auto got = lw->router().query(q.sql);
    std::string why;
    EXPECT_TRUE(testing::same_rows(got, want, 1e-9, &why)) << q.name << ": " << q.sql << "\n" << why;
    if (!want.rows.empty()) ++nonempty;
  }
  EXPECT_GT(nonempty, queries.size() / 2);
}

// Closed form by repeated multiplication, independent of the library.
BigInt power(std::int64_t p, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

TEST(BenchTest, BreachProbabilityClosedForm) {
  for (int t = 2; t <= 6; ++t) {
    for (int x = 0; x < t; ++x) {
      for (std::int64_t p : {13, 251, 99991}) {
        const auto b = breach_probability(x, t, p);
        EXPECT_EQ(b.denominator, power(p, 2 * t - x - 1));
        EXPECT_NEAR(b.value * static_cast<double>(b.denominator), 1.0, 1e-12);
      }
    }
  }
  // x = t - 1 leaves one unknown share and the signature: p^-t.
  EXPECT_EQ(breach_probability(2, 3, 13).denominator, 2197);
  EXPECT_THROW(breach_probability(3, 3, 13), RangeError);
  EXPECT_THROW(breach_probability(-1, 3, 13), RangeError);
}

TEST(BenchTest, DetectionAtSmallPrime) {
  const auto r = detection_experiment(13, 67, 4, 3, 20000, 200000, 9);
  EXPECT_EQ(r.trials, 20000u);
  EXPECT_EQ(r.combined_detected, r.trials);
  EXPECT_GT(r.outer_detected, r.trials * 9 / 10);
  // A wrong block passes the inner check alone about once in p times.
  EXPECT_GT(r.inner_fn_fraction(), 0.25 / 13);
  EXPECT_LT(r.inner_fn_fraction(), 2.0 / 13);
  EXPECT_EQ(r.to_json()["combined_rate"], 1.0);
}

TEST(BenchTest, InjectionPatterns) {
  EXPECT_EQ(parse_pattern("add"), CorruptionPattern::kAddDelta);
  EXPECT_EQ(parse_pattern("sigpreserve"), CorruptionPattern::kSignaturePreserving);
  EXPECT_EQ(pattern_name(CorruptionPattern::kRandomReplace), "replace");
  EXPECT_THROW(parse_pattern("zap"), ConfigError);

  auto lw = testing::make_warehouse(testing::example_config(), testing::example_coefficients());
  lw->share_schema({testing::product_table()});
  lw->load_records("Product", testing::product_rows());
  auto& c = lw->pool().client(2);
  EXPECT_EQ(inject_errors(c, "Product", CorruptionPattern::kAddDelta, 0.0, 1, 1), 0u);
  const std::size_t hit = inject_errors(c, "Product", CorruptionPattern::kSignaturePreserving, 1.0, 0, 1);
  EXPECT_EQ(hit, 19u);
  // Signature-preserving changes pass the outer scan.
  EXPECT_TRUE(lw->verify({2}).at(2).at("Product").empty());
}

TEST(BenchTest, VolumeRatios) {
  for (auto [n, t] : {std::pair{4, 3}, std::pair{3, 3}}) {
    auto lw = testing::make_warehouse(testing::config_for(n, t, 251, 1));
    lw->share_schema(tables_from_sidecar(flat_sidecar()));
    std::vector<Row> rows;
    const auto vals = gen_flat(500, 2);
    for (std::size_t i = 0; i < vals.size(); ++i)
      rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(vals[i])});
    lw->load_records("flat", rows);
    const auto rep = measure_volume(*lw);
    ASSERT_EQ(rep.tables.size(), 1u);
    const auto& v = rep.tables[0];
    EXPECT_EQ(v.rows, 500u);
    EXPECT_EQ(v.integer_shares * static_cast<std::uint64_t>(t - 1), v.integer_digits * static_cast<std::uint64_t>(n));
    EXPECT_EQ(v.csp_bytes.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(v.original_bytes, 500u * 8);  // 4-byte key plus 4-byte value
    EXPECT_FALSE(rep.summary().empty());
  }
}

TEST(BenchTest, ScalingReportShape) {
  const auto rep = run_scaling({{3, 3}, {4, 3}}, 2000, 251, 3, 1);
  ASSERT_EQ(rep.points.size(), 2u);
  for (const auto& pt : rep.points) {
    EXPECT_GT(pt.share_ms, 0);
    EXPECT_GT(pt.reconstruct_ms, 0);
    EXPECT_GT(pt.share_mb_s(), 0);
  }
  EXPECT_GE(rep.reconstruct_spread(3), 0);
  EXPECT_EQ(rep.to_json()["points"].size(), 2u);
}

}  // namespace
}  // namespace shardhouse
