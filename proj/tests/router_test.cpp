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


#include "shardhouse/router.h"

#include <gtest/gtest.h>

#include <random>

#include "shardhouse/bench.h"
#include "shardhouse/errors.h"
#include "support/fixtures.h"
#include "support/oracle.h"

namespace shardhouse {
namespace {

using I = std::int64_t;
using S = std::string;
using nlohmann::json;

const char* kSchema = R"({"tables": [
  {"name": "shop", "primary_key": ["code"],
   "columns": [{"name": "code", "is_key": true, "replace": true},
               {"name": "region", "kind": "string", "max_len": 8},
               {"name": "open", "kind": "boolean"}]},
  {"name": "sale", "primary_key": ["id"],
   "foreign_keys": [{"columns": ["shop"], "table": "shop", "ref_columns": ["code"]}],
   "columns": [{"name": "id", "is_key": true},
               {"name": "shop", "is_key": true},
               {"name": "qty", "kind": "integer", "signed": false, "nullable": true},
               {"name": "price", "kind": "real", "scale": 2, "signed": false},
               {"name": "delta", "kind": "integer"},
               {"name": "day", "kind": "date"},
               {"name": "grade", "kind": "character"},
               {"name": "memo", "kind": "string", "nullable": true}]}
]})";

struct Data {
  std::vector<TableDef> tables;
  std::vector<Row> shops, sales;
};

Data make_data(std::size_t rows) {
  Data d;
  d.tables = tables_from_sidecar(json::parse(kSchema));
  const char* regions[] = {"north", "south", "east", "west"};
  for (int i = 0; i < 12; ++i)
    d.shops.push_back({S("S") + std::to_string(i), S(regions[i % 4]), i % 3 != 0});
  std::mt19937_64 rng(42);
  const char* memos[] = {"rush", "gift", "bulk order", "late"};
  for (std::size_t i = 0; i < rows; ++i) {
    Value qty = (i % 9 == 0) ? Value{} : Value{I(rng() % 20)};
    Value memo = (i % 4 == 0) ? Value{} : Value{S(memos[rng() % 4])};
    d.sales.push_back({I(1000 + i), S("S") + std::to_string(rng() % 12), qty,
                       Decimal{I(rng() % 100000), 2}, I(rng() % 200) - 100,
                       Date{static_cast<std::int32_t>(10000 + rng() % 60)},
                       S(1, static_cast<char>('A' + rng() % 5)), memo});
  }
  return d;
}

class RouterTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Data(make_data(240));
    lw_ = new testing::LocalWarehouse(testing::make_warehouse(testing::config_for(4, 3, 251, 9)));
    (*lw_)->share_schema(data_->tables);
    (*lw_)->load_records("shop", data_->shops);
    (*lw_)->load_records("sale", data_->sales);
    oracle_ = new testing::SqliteOracle();
    oracle_->load((*lw_)->catalog().table("shop"), data_->shops);
    oracle_->load((*lw_)->catalog().table("sale"), data_->sales);
  }
  static void TearDownTestSuite() {
    delete oracle_;
    delete lw_;
    delete data_;
  }
  void TearDown() override {
    for (CspId id : {1, 2, 3, 4}) {
      lw_->revive(id);
      lw_->cluster.transports.at(id)->fail_after(-1);
      (*lw_)->pool().mark_up(id);
    }
  }

  void expect_oracle(const std::string& sql, RouterOptions opts = {}) {
    const ResultSet want = oracle_->query(sql);
    const ResultSet got = (*lw_)->router(opts).query(sql);
    std::string why;
    EXPECT_TRUE(testing::same_rows(got, want, 1e-9, &why))
        << sql << "\n" << why << "\n" << testing::dump(got) << "vs\n" << testing::dump(want);
  }

  static Data* data_;
  static testing::LocalWarehouse* lw_;
  static testing::SqliteOracle* oracle_;
};

Data* RouterTest::data_ = nullptr;
testing::LocalWarehouse* RouterTest::lw_ = nullptr;
testing::SqliteOracle* RouterTest::oracle_ = nullptr;

const char* kQueries[] = {
    "SELECT * FROM sale WHERE id = 1003",
    "SELECT id, qty FROM sale WHERE qty = 7",
    "SELECT id FROM sale WHERE qty IN (1, 2, 3) AND grade = 'B'",
    "SELECT id, day FROM sale WHERE day BETWEEN DATE '1997-05-20' AND DATE '1997-06-01'",
    "SELECT id FROM sale WHERE day < DATE '1997-05-25' AND qty >= 15",
    "SELECT id, memo FROM sale WHERE memo LIKE 'b%'",
    "SELECT id FROM sale WHERE memo = 'late' AND price > 500",
    "SELECT id FROM sale WHERE memo IS NULL AND delta < -90",
    "SELECT id FROM sale WHERE qty <> 4 AND grade >= 'D'",
    "SELECT shop, COUNT(*), SUM(qty), AVG(qty) FROM sale GROUP BY shop",
    "SELECT shop, SUM(price), COUNT(qty) FROM sale WHERE qty = 3 GROUP BY shop",
    "SELECT COUNT(*), SUM(qty), SUM(price) FROM sale",
    "SELECT COUNT(*), SUM(qty) FROM sale WHERE id > 99999",
    "SELECT grade, MIN(price), MAX(delta), SUM(delta) FROM sale GROUP BY grade",
    "SELECT s.region, SUM(x.qty) FROM sale x, shop s WHERE x.shop = s.code AND s.open = TRUE "
    "GROUP BY s.region",
    "SELECT s.code, x.id FROM sale x JOIN shop s ON x.shop = s.code WHERE s.region = 'east' "
    "AND x.qty > 17",
    "SELECT shop, SUM(qty) AS q FROM sale GROUP BY shop HAVING SUM(qty) > 60",
    "SELECT DISTINCT grade FROM sale WHERE shop IN ('S1', 'S2')",
    "SELECT id FROM sale WHERE shop = 'S5' AND qty IS NOT NULL",
    "SELECT id FROM sale WHERE shop = 'NOPE'",
    "SELECT day, COUNT(*) FROM sale WHERE day >= DATE '1997-06-15' GROUP BY day",
};

TEST_F(RouterTest, MatchesOracle) {
  for (const char* q : kQueries) expect_oracle(q);
}

TEST_F(RouterTest, MatchesOracleWithoutPushdown) {
  RouterOptions opts;
  opts.aggregate_pushdown = false;
  opts.semi_joins = false;
  opts.range_cap = 0;
  for (const char* q : kQueries) expect_oracle(q, opts);
}

TEST_F(RouterTest, SurvivesOneDeadCsp) {
  for (CspId dead : {1, 2, 3, 4}) {
    lw_->kill(dead);
    for (const char* q : kQueries) expect_oracle(q);
    lw_->revive(dead);
    (*lw_)->pool().mark_up(dead);
  }
}

TEST_F(RouterTest, TwoDeadIsUnavailable) {
  lw_->kill(1);
  lw_->kill(3);
  EXPECT_THROW((*lw_)->router().query("SELECT COUNT(*) FROM sale"), UnavailableError);
  EXPECT_THROW((*lw_)->router().query("SELECT * FROM sale WHERE qty = 1"), UnavailableError);
}

TEST_F(RouterTest, CspDyingMidQueryIsReplaced) {
  // The shop fetch succeeds, the sale fetch that follows does not.
  lw_->cluster.transports.at(2)->fail_after(1);
  expect_oracle("SELECT s.region, x.id FROM shop s, sale x WHERE x.shop = s.code AND x.qty = 2");
  EXPECT_TRUE((*lw_)->pool().is_down(2));
}

TEST_F(RouterTest, PlacementOfClauses) {
  const auto r = (*lw_)->router();
  auto placement_of = [&](const std::string& sql, std::size_t i = 0) {
    return r.plan(sql).clauses.at(i).placement;
  };
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE id = 3"), Placement::kPushdown);
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE qty = 3"), Placement::kTransform);
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE day BETWEEN DATE '1997-06-20' AND DATE '1997-06-30'"),
            Placement::kTransform);
  // An open-ended date range covers millions of points.
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE day > DATE '1997-06-20'"), Placement::kClient);
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE memo LIKE '%x'"), Placement::kClient);
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE price > 3"), Placement::kClient);
  EXPECT_EQ(placement_of("SELECT id FROM sale WHERE qty <> 3"), Placement::kClient);

  const auto agg = r.plan("SELECT shop, SUM(qty) FROM sale WHERE id > 5 GROUP BY shop");
  EXPECT_EQ(agg.mode, QueryPlan::Mode::kAggregate);
  const auto signed_sum = r.plan("SELECT SUM(delta) FROM sale");
  EXPECT_EQ(signed_sum.mode, QueryPlan::Mode::kFetch);
  const auto keyed = r.plan("SELECT SUM(qty) FROM sale WHERE grade = 'A'");
  EXPECT_EQ(keyed.mode, QueryPlan::Mode::kAggregate);
  ASSERT_TRUE(keyed.aggregate);
  EXPECT_TRUE(keyed.aggregate->key_phase);
  EXPECT_NE(agg.explain().find("aggregate pushdown"), std::string::npos);
}

TEST_F(RouterTest, SurvivesCorruptCsp) {
  // Copy the current shares of CSP 3, corrupt them, query, then restore.
  auto& client = (*lw_)->pool().client(3);
  const auto before = lw_->cluster.stores.at(3)->canonical_dump("sale");
  auto snap = client.snapshot("sale", 0);
  inject_errors(client, "sale", CorruptionPattern::kSignaturePreserving, 0.3, 0, 5);
  EXPECT_NE(lw_->cluster.stores.at(3)->canonical_dump("sale"), before);
  expect_oracle("SELECT id, qty, price, memo FROM sale WHERE qty = 5");
  expect_oracle("SELECT shop, SUM(qty) FROM sale GROUP BY shop");
  client.insert(snap.schema, snap.rows, true);
  EXPECT_EQ(lw_->cluster.stores.at(3)->canonical_dump("sale"), before);
}

TEST_F(RouterTest, UnknownNamesAreQueryErrors) {
  EXPECT_THROW((*lw_)->router().query("SELECT x FROM nope"), QueryError);
  EXPECT_THROW((*lw_)->router().query("SELECT nope FROM sale"), QueryError);
}

TEST(RouterUnitTest, EnumerateRange) {
  ColumnDef c;
  c.codec.kind = ColumnKind::kInteger;
  c.codec.width = 2;
  c.codec.is_signed = false;
  auto pts = enumerate_range(c, 13, Value{I{160}}, false, std::nullopt, true, 100);
  ASSERT_TRUE(pts);
  EXPECT_EQ(pts->size(), 8u);  // 161..168
  pts = enumerate_range(c, 13, std::nullopt, true, Value{Decimal{25, 1}}, true, 100);
  ASSERT_TRUE(pts);
  EXPECT_EQ(pts->size(), 3u);  // 0, 1, 2
  pts = enumerate_range(c, 13, Value{I{5}}, true, Value{I{4}}, true, 100);
  ASSERT_TRUE(pts);
  EXPECT_TRUE(pts->empty());
  EXPECT_FALSE(enumerate_range(c, 13, std::nullopt, true, std::nullopt, true, 100));

  c.codec.is_signed = true;
  pts = enumerate_range(c, 13, std::nullopt, true, Value{I{-83}}, true, 100);
  ASSERT_TRUE(pts);
  EXPECT_EQ(pts->size(), 2u);  // -84, -83

  ColumnDef s;
  s.codec.kind = ColumnKind::kString;
  s.codec.width = 2;
  EXPECT_FALSE(enumerate_range(s, 13, Value{S("a")}, true, Value{S("b")}, true, 100));
}

TEST(RouterUnitTest, RewriteEqualityMatchesStoredShares) {
  auto lw = testing::make_warehouse(testing::example_config(), testing::example_coefficients());
  lw->share_schema({testing::product_table()});
  lw->load_records("Product", testing::product_rows());
  const ColumnDef& price = lw->catalog().table("Product").column("UnitPrice");
  const auto e = rewrite_equality(lw->catalog(), price, Value{I{75}}, 1);
  ASSERT_TRUE(e);
  EXPECT_EQ(*e, std::vector<BigInt>{BigInt(16)});
  EXPECT_FALSE(rewrite_equality(lw->catalog(), price, Value{I{1000}}, 1));
  EXPECT_FALSE(rewrite_equality(lw->catalog(), price, Value{I{-1}}, 1));
}

TEST(RouterUnitTest, ReconstructSumOfTwoPrices) {
  const auto cfg = testing::example_config();
  const auto coeffs = testing::example_coefficients();
  const std::vector<CspId> g = {1, 2, 3};
  const auto ctx = build_reconstruction(g, coeffs);
  ColumnCodec c;
  c.kind = ColumnKind::kInteger;
  c.width = 2;
  c.is_signed = false;
  // 75 + 80 from the per-CSP share sums 16+20, 43+20, 33+24.
  const std::vector<std::vector<BigInt>> sums = {{BigInt(36)}, {BigInt(63)}, {BigInt(57)}};
  EXPECT_EQ(std::get<I>(reconstruct_sum(sums, 2, ctx, c, cfg)), 155);
  const std::vector<std::vector<BigInt>> bad = {{BigInt(39)}, {BigInt(63)}, {BigInt(57)}};
  EXPECT_THROW(reconstruct_sum(bad, 2, ctx, c, cfg), CorruptionError);
}

TEST(CspPoolTest, PreferenceAndHealth) {
  auto cluster = make_local_cluster({1, 2, 3});
  auto& pool = *cluster.pool;
  EXPECT_EQ(pool.ids(), (std::vector<CspId>{1, 2, 3}));
  pool.probe();
  EXPECT_EQ(pool.preferred().size(), 3u);
  cluster.transports.at(2)->set_down(true);
  pool.probe();
  EXPECT_TRUE(pool.is_down(2));
  EXPECT_EQ(pool.preferred(), (std::vector<CspId>{1, 3}));
  cluster.transports.at(2)->set_down(false);
  pool.probe();
  EXPECT_FALSE(pool.is_down(2));
}

}  // namespace
}  // namespace shardhouse
