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


#include "support/fixtures.h"

namespace shardhouse::testing {

SharingConfig example_config() { return config_for(4, 3, 13, 0, 7); }

CoefficientSet example_coefficients() {
  return CoefficientSet({1, 2, 3, 4}, {{1, 0, 2}, {3, 1, 0}, {2, 1, 1}, {0, 2, 1}}, 13);
}

TableDef product_table() {
  auto col = [](std::string name, ColumnKind kind, int width, bool nullable,
                std::string sig) {
    ColumnDef c;
    c.name = std::move(name);
    c.codec.kind = kind;
    c.codec.width = width;
    c.codec.nullable = nullable;
    c.sig_name = std::move(sig);
    return c;
  };
  TableDef t;
  t.name = "Product";
  t.columns = {col("ProdNo", ColumnKind::kKey, 0, false, ""),
               col("ProName", ColumnKind::kString, 2, false, "SigPN"),
               col("ProdDescr", ColumnKind::kString, 2, true, "SigPD"),
               col("CategoryID", ColumnKind::kKey, 0, false, ""),
               col("UnitPrice", ColumnKind::kInteger, 2, false, "SigUP")};
  t.columns[4].codec.is_signed = false;
  t.primary_key = {"ProdNo"};
  return t;
}

std::vector<Row> product_rows() {
  using S = std::string;
  using I = std::int64_t;
  return {{I{124}, S("Shirt"), S("Red"), I{1}, I{75}},
          {I{125}, S("Shoe"), Value{}, I{2}, I{80}},
          {I{126}, S("Ring"), Value{}, I{1}, I{80}}};
}

SharingConfig config_for(int n, int t, std::int64_t p, std::uint64_t seed, std::int64_t p2) {
  SharingConfig c;
  c.n = n;
  c.t = t;
  c.p = p;
  c.p2 = p2;
  c.seed = seed;
  for (int i = 1; i <= n; ++i) c.csp_ids.push_back(i);
  return c;
}

LocalWarehouse make_warehouse(const SharingConfig& config, std::optional<CoefficientSet> coeffs) {
  LocalWarehouse lw;
  lw.cluster = make_local_cluster(config.csp_ids);
  lw.wh = std::make_unique<Warehouse>(new_catalog(config, std::move(coeffs)), lw.cluster.pool);
  return lw;
}

void load_ssb(Warehouse& wh, const SsbDataset& data) {
  wh.share_schema(data.tables);
  for (const auto& t : data.tables) wh.load_records(t.name, data.rows.at(t.name));
}

}  // namespace shardhouse::testing
