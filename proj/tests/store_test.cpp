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


#include "shardhouse/store.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "shardhouse/errors.h"

namespace shardhouse {
namespace {

namespace fs = std::filesystem;

SharedTableSchema sales_schema() {
  SharedTableSchema s;
  s.name = "sales";
  s.p2 = 7;
  s.primary_key = {"id"};
  s.columns = {{"id", ColumnRole::kKey, false, 0, ""},
               {"region", ColumnRole::kKey, true, 0, ""},
               {"promo", ColumnRole::kPlain, false, 0, ""},
               {"amount", ColumnRole::kShared, true, 1, "amount_sig"}};
  return s;
}

SharedCell cell(std::int64_t e) { return {{BigInt(e)}, {e % 7}}; }

ShareRow row(std::int64_t id, PlainValue region, bool promo, std::optional<std::int64_t> amount) {
  ShareRow r;
  r.cells.push_back(id);
  if (auto* v = std::get_if<std::int64_t>(&region))
    r.cells.push_back(*v);
  else
    r.cells.push_back(std::monostate{});
  r.cells.push_back(promo);
  if (amount)
    r.cells.push_back(cell(*amount));
  else
    r.cells.push_back(std::monostate{});
  return r;
}

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    store.create_table(sales_schema());
    store.insert_rows("sales", {row(1, std::int64_t{10}, true, 20), row(2, std::int64_t{10}, false, 30),
                                row(3, std::int64_t{20}, true, 44), row(4, std::monostate{}, false, std::nullopt)});
  }
  Store store;
};

TEST_F(StoreTest, SchemaColumnCount) {
  EXPECT_EQ(sales_schema().column_count(), 5);
  EXPECT_EQ(schema_from_json(schema_to_json(sales_schema())), sales_schema());
}

TEST_F(StoreTest, SelectByPlainPredicates) {
  Atom eq{Atom::Op::kEq, {"region"}, "", {{std::int64_t{10}}}, {}};
  EXPECT_EQ(store.select("sales", {}, {eq}).size(), 2u);
  Atom cmp{Atom::Op::kCmp, {"id"}, ">=", {{std::int64_t{3}}}, {}};
  EXPECT_EQ(store.select("sales", {}, {cmp}).size(), 2u);
  Atom in{Atom::Op::kIn, {"id"}, "", {{std::int64_t{1}}, {std::int64_t{4}}, {std::int64_t{9}}}, {}};
  EXPECT_EQ(store.select("sales", {}, {in}).size(), 2u);
  Atom isnull{Atom::Op::kIsNull, {"amount"}, "", {}, {}};
  EXPECT_EQ(store.select("sales", {}, {isnull}).size(), 1u);
  Atom ne{Atom::Op::kNe, {"region"}, "", {{std::int64_t{10}}}, {}};
  // NULL region is neither equal nor unequal.
  EXPECT_EQ(store.select("sales", {}, {ne}).size(), 1u);
  Atom promo{Atom::Op::kEq, {"promo"}, "", {{true}}, {}};
  EXPECT_EQ(store.select("sales", {}, {promo, eq}).size(), 1u);
}

TEST_F(StoreTest, SelectByShareLiterals) {
  Atom eq{Atom::Op::kShareEq, {"amount"}, "", {}, {{BigInt(30)}}};
  const auto rows = store.select("sales", {"id"}, {eq});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(std::get<std::int64_t>(rows[0].cells[0]), 2);
  Atom in{Atom::Op::kShareIn, {"amount"}, "", {}, {{BigInt(20)}, {BigInt(44)}}};
  EXPECT_EQ(store.select("sales", {}, {in}).size(), 2u);
}

TEST_F(StoreTest, SharePredicateOnKeyIsRejected) {
  Atom bad{Atom::Op::kShareEq, {"id"}, "", {}, {{BigInt(1)}}};
  EXPECT_THROW(store.select("sales", {}, {bad}), RemoteError);
  Atom bad2{Atom::Op::kCmp, {"amount"}, "<", {{std::int64_t{1}}}, {}};
  EXPECT_THROW(store.select("sales", {}, {bad2}), RemoteError);
}

TEST_F(StoreTest, AggregateSumsSharesPerGroup) {
  const auto groups = store.aggregate("sales", {"region"}, {"amount"}, {});
  ASSERT_EQ(groups.size(), 3u);  // NULL, 10, 20
  EXPECT_EQ(groups[0].count, 1);
  EXPECT_EQ(groups[0].sums[0].nonnull, 0);
  EXPECT_EQ(groups[1].count, 2);
  EXPECT_EQ(groups[1].sums[0].sums[0], 50);
  EXPECT_EQ(groups[2].sums[0].sums[0], 44);
  EXPECT_THROW(store.aggregate("sales", {"amount"}, {}, {}), RemoteError);
}

TEST_F(StoreTest, DuplicateKeysAndUpsert) {
  EXPECT_THROW(store.insert_rows("sales", {row(1, std::int64_t{10}, true, 21)}), RemoteError);
  EXPECT_EQ(store.insert_rows("sales", {row(1, std::int64_t{11}, true, 21)}, true), 1u);
  Atom eq{Atom::Op::kEq, {"id"}, "", {{std::int64_t{1}}}, {}};
  const auto r = store.select("sales", {"region"}, {eq});
  EXPECT_EQ(std::get<std::int64_t>(r.at(0).cells[0]), 11);
}

TEST_F(StoreTest, RowValidation) {
  ShareRow wrong = row(9, std::int64_t{1}, true, 20);
  wrong.cells.pop_back();
  EXPECT_THROW(store.insert_rows("sales", {wrong}), SchemaError);
  ShareRow nokey = row(9, std::int64_t{1}, true, 20);
  nokey.cells[0] = std::monostate{};
  EXPECT_THROW(store.insert_rows("sales", {nokey}), SchemaError);
  ShareRow two = row(9, std::int64_t{1}, true, 20);
  std::get<SharedCell>(two.cells[3]).shares.push_back(BigInt(1));
  std::get<SharedCell>(two.cells[3]).sigs.push_back(1);
  EXPECT_THROW(store.insert_rows("sales", {two}), SchemaError);
}

TEST_F(StoreTest, OuterVerification) {
  ShareRow bad = row(5, std::int64_t{20}, true, 15);
  std::get<SharedCell>(bad.cells[3]).sigs[0] = 0;  // 15 mod 7 is 1
  store.insert_rows("sales", {bad});
  const auto corrupt = store.scan_verify("sales");
  ASSERT_EQ(corrupt.size(), 1u);
  EXPECT_EQ(corrupt[0].attribute, "amount");
  EXPECT_EQ(std::get<std::int64_t>(corrupt[0].key[0]), 5);
  EXPECT_THROW(store.select("sales", {}, {}), RemoteError);
  Atom other{Atom::Op::kEq, {"id"}, "", {{std::int64_t{1}}}, {}};
  EXPECT_EQ(store.select("sales", {}, {other}).size(), 1u);
  store.set_verify_on_read(false);
  EXPECT_EQ(store.select("sales", {}, {}).size(), 5u);
}

TEST_F(StoreTest, SnapshotChunks) {
  const auto a = store.snapshot("sales", 0, 3);
  EXPECT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.total, 4u);
  ASSERT_TRUE(a.next);
  const auto b = store.snapshot("sales", *a.next, 3);
  EXPECT_EQ(b.rows.size(), 1u);
  EXPECT_FALSE(b.next);
}

TEST_F(StoreTest, HandleReportsErrorsWithSeq) {
  const auto r = store.handle({{"op", "SELECT"}, {"table", "nope"}, {"seq", 17}});
  EXPECT_EQ(r["status"], "error");
  EXPECT_EQ(r["code"], "not_found");
  EXPECT_EQ(r["seq"], 17);
  const auto h = store.handle({{"op", "HEALTH"}, {"seq", 1}});
  EXPECT_EQ(h["status"], "ok");
  const auto bad = store.handle_frame("{not json");
  EXPECT_NE(bad.find("error"), std::string::npos);
}

TEST(StorePersistenceTest, ReplaysLog) {
  const fs::path dir = fs::temp_directory_path() / "shardhouse_store_test";
  fs::remove_all(dir);
  std::string dump;
  {
    Store s(dir);
    s.create_table(sales_schema());
    s.insert_rows("sales", {row(1, std::int64_t{10}, true, 20)});
    s.insert_rows("sales", {row(1, std::int64_t{12}, false, 27)}, true);
    dump = s.canonical_dump("sales");
  }
  Store again(dir);
  EXPECT_EQ(again.tables(), std::vector<std::string>{"sales"});
  EXPECT_EQ(again.canonical_dump("sales"), dump);
  fs::remove_all(dir);
}

TEST(StoreSchemaTest, Validation) {
  auto s = sales_schema();
  s.primary_key = {"amount"};
  EXPECT_THROW(s.validate(), SchemaError);
  s = sales_schema();
  s.columns[3].sig_name = "id";
  EXPECT_THROW(s.validate(), SchemaError);
  s = sales_schema();
  s.p2 = 0;
  EXPECT_THROW(s.validate(), SchemaError);
  Store store;
  store.create_table(sales_schema());
  EXPECT_THROW(store.create_table(sales_schema()), RemoteError);
  EXPECT_NO_THROW(store.create_table(sales_schema(), true));
}

TEST(PredicateWireTest, RoundTrip) {
  Predicate pred = {{Atom::Op::kIn, {"a", "b"}, "", {{std::int64_t{1}, true}}, {}},
                    {Atom::Op::kShareIn, {"c"}, "", {}, {{BigInt(5), BigInt(6)}}},
                    {Atom::Op::kCmp, {"a"}, "<=", {{std::int64_t{4}}}, {}}};
  const auto back = predicate_from_json(predicate_to_json(pred));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].cols, pred[0].cols);
  EXPECT_EQ(back[1].tuples, pred[1].tuples);
  EXPECT_EQ(back[2].cmp, "<=");
  EXPECT_THROW(predicate_from_json(nlohmann::json::parse(R"([{"op":"regex"}])")), ProtocolError);
}

}  // namespace
}  // namespace shardhouse
