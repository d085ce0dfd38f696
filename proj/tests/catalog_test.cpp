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


#include "shardhouse/catalog.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "shardhouse/errors.h"
#include "shardhouse/warehouse.h"
#include "support/fixtures.h"

namespace shardhouse {
namespace {

using nlohmann::json;

const char* kSidecar = R"({
  "tables": [
    {"name": "store", "primary_key": ["code"],
     "columns": [{"name": "code", "is_key": true, "replace": true},
                 {"name": "city", "kind": "string", "max_len": 20}]},
    {"name": "sale", "primary_key": ["id"],
     "foreign_keys": [{"columns": ["store"], "table": "store", "ref_columns": ["code"]}],
     "columns": [{"name": "id", "is_key": true},
                 {"name": "store", "is_key": true},
                 {"name": "price", "kind": "real", "scale": 2, "nullable": true},
                 {"name": "on_sale", "kind": "boolean"},
                 {"name": "day", "kind": "date", "signed": false}]}
  ]})";

TEST(CatalogTest, SidecarResolution) {
  auto tables = tables_from_sidecar(json::parse(kSidecar));
  resolve_tables(tables, {}, 251);
  const auto& sale = tables[1];
  EXPECT_EQ(sale.column("price").codec.width, default_width(ColumnKind::kReal, 251));
  EXPECT_EQ(sale.column("price").sig_name, "price_sig");
  EXPECT_TRUE(sale.column("on_sale").sig_name.empty());
  EXPECT_EQ(tables[0].column("code").key_domain, "store");
  EXPECT_EQ(sale.column("store").key_domain, "store");
  EXPECT_FALSE(sale.column("day").codec.is_signed);
}

TEST(CatalogTest, ResolutionErrors) {
  auto bad = tables_from_sidecar(json::parse(
      R"({"name": "x", "primary_key": ["v"], "columns": [{"name": "v", "kind": "integer"}]})"));
  EXPECT_THROW(resolve_tables(bad, {}, 13), SchemaError);
  auto clash = tables_from_sidecar(json::parse(
      R"({"name": "x", "primary_key": ["k"], "columns": [{"name": "k", "is_key": true},
          {"name": "v", "kind": "integer", "sig_name": "k"}]})"));
  EXPECT_THROW(resolve_tables(clash, {}, 13), SchemaError);
  auto dangling = tables_from_sidecar(json::parse(
      R"({"name": "x", "primary_key": ["k"], "columns": [{"name": "k", "is_key": true}],
          "foreign_keys": [{"columns": ["k"], "table": "ghost"}]})"));
  EXPECT_THROW(resolve_tables(dangling, {}, 13), SchemaError);
  EXPECT_THROW(tables_from_sidecar(json::parse(R"({"name": "x"})")), SchemaError);
}

TEST(CatalogTest, SharedSchemaHidesCodecs) {
  auto cat = new_catalog(testing::example_config(), testing::example_coefficients());
  cat = share_schema(cat, {testing::product_table()});
  const auto s = cat.shared_schema(cat.table("Product"));
  EXPECT_EQ(s.p2, 7);
  EXPECT_EQ(s.column_count(), 8);
  const auto j = schema_to_json(s).dump();
  EXPECT_EQ(j.find("width"), std::string::npos);
  EXPECT_EQ(j.find("string"), std::string::npos);
  EXPECT_EQ(j.find("\"p\""), std::string::npos);
}

TEST(CatalogTest, KeyMapsAreStable) {
  Catalog cat = new_catalog(testing::example_config());
  EXPECT_EQ(cat.map_key("store", "LON"), 1);
  EXPECT_EQ(cat.map_key("store", "PAR"), 2);
  EXPECT_EQ(cat.map_key("store", "LON"), 1);
  EXPECT_EQ(cat.map_key("other", "LON"), 1);
  EXPECT_EQ(cat.find_key("store", "PAR"), 2);
  EXPECT_FALSE(cat.find_key("store", "ROM"));
  EXPECT_EQ(cat.original_key("store", 2), "PAR");
  EXPECT_FALSE(cat.original_key("store", 3));
}

TEST(CatalogTest, JsonAndFileRoundTrip) {
  Catalog cat = new_catalog(testing::config_for(5, 3, 251, 1234567890123ull));
  auto tables = tables_from_sidecar(json::parse(kSidecar));
  cat = share_schema(cat, tables);
  cat.map_key("store", "LON");
  cat.endpoints[2] = "tcp://10.1.2.3:7000";
  cat.cubes.push_back(cube_from_json(json::parse(
      R"({"name": "c", "source": "sale", "dimensions": ["store"],
          "measures": [{"func": "COUNT"}, {"func": "SUM", "source": "price"}]})")));
  EXPECT_EQ(cat.cubes[0].measures[1].name, "SUM_price");

  const Catalog back = Catalog::from_json(cat.to_json());
  EXPECT_EQ(back.to_json(), cat.to_json());
  EXPECT_EQ(back.coeffs, cat.coeffs);
  EXPECT_EQ(back.config.seed, 1234567890123ull);
  EXPECT_EQ(back.original_key("store", 1), "LON");

  const auto path = std::filesystem::temp_directory_path() / "shardhouse_catalog_test.json";
  cat.save(path);
  EXPECT_EQ(Catalog::load(path).to_json(), cat.to_json());
  std::filesystem::remove(path);
}

TEST(CatalogTest, RejectsTamperedCoefficients) {
  Catalog cat = new_catalog(testing::example_config(), testing::example_coefficients());
  auto j = cat.to_json();
  j["coefficients"][1] = j["coefficients"][0];
  EXPECT_THROW(Catalog::from_json(j), ConfigError);
}

}  // namespace
}  // namespace shardhouse
