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


#pragma once

// Shared fixtures: the small worked example (p = 13, four CSPs) and
// helpers that stand up an in-process warehouse.

#include <memory>
#include <optional>
#include <vector>

#include "shardhouse/bench.h"
#include "shardhouse/catalog.h"
#include "shardhouse/scheme.h"
#include "shardhouse/warehouse.h"

namespace shardhouse::testing {

/// n = 4, t = 3, p = 13, p2 = 7, CSP ids 1..4.
SharingConfig example_config();
/// Rows (1,0,2), (3,1,0), (2,1,1), (0,2,1).
CoefficientSet example_coefficients();

/// Product(ProdNo key, ProName string, ProdDescr nullable string,
/// CategoryID key, UnitPrice unsigned integer); two digits per unit.
TableDef product_table();
/// Products 124 Shirt, 125 Shoe and 126 Ring.
std::vector<Row> product_rows();

/// In-process cluster plus a warehouse on top of it.
struct LocalWarehouse {
  LocalCluster cluster;
  std::unique_ptr<Warehouse> wh;

  Warehouse& operator*() { return *wh; }
  Warehouse* operator->() { return wh.get(); }
  void kill(CspId id) { cluster.transports.at(id)->set_down(true); }
  void revive(CspId id) { cluster.transports.at(id)->set_down(false); }
};

LocalWarehouse make_warehouse(const SharingConfig& config,
                              std::optional<CoefficientSet> coeffs = std::nullopt);

/// Config with ids 1..n and the given seed.
SharingConfig config_for(int n, int t, std::int64_t p, std::uint64_t seed = 7,
                         std::int64_t p2 = 67);

/// Shares every table of `data` and loads its rows.
void load_ssb(Warehouse& wh, const SsbDataset& data);

}  // namespace shardhouse::testing
