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

// Warehouse lifecycle on top of the CSP stores: schema sharing, loading,
// cubes and recovery of a lost CSP.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shardhouse/catalog.h"
#include "shardhouse/engine.h"
#include "shardhouse/router.h"
#include "shardhouse/store.h"
#include "shardhouse/transport.h"

namespace shardhouse {

inline constexpr std::size_t kLoadBatch = 10000;

/// Fresh catalog: validates the config and draws coefficients unless a set
/// is supplied. Every endpoint defaults to "local".
Catalog new_catalog(const SharingConfig& config,
                    std::optional<CoefficientSet> coeffs = std::nullopt);

/// Offline schema sharing: resolves the tables into a copy of `catalog`.
Catalog share_schema(Catalog catalog, std::vector<TableDef> tables);

/// In-process CSPs, optionally persisted under `root/csp<id>`.
struct LocalCluster {
  std::map<CspId, std::shared_ptr<Store>> stores;
  std::map<CspId, std::shared_ptr<InProcessTransport>> transports;
  std::shared_ptr<CspPool> pool;
};
LocalCluster make_local_cluster(const std::vector<CspId>& ids,
                                const std::optional<std::filesystem::path>& root = std::nullopt);

/// Pool for a catalog's endpoints; "local" ones live under `data_root`.
std::shared_ptr<CspPool> connect_pool(const Catalog& catalog, const std::filesystem::path& data_root);

/// Encodes one plaintext row (table column order) into the row stored at
/// CSP k. Replaced keys must already be sequence numbers.
ShareRow encode_row(const Catalog& catalog, const TableDef& table, const Row& stored, CspId k);

struct RecoveryReport {
  CspId csp = 0;
  std::vector<CspId> sources;  // group that supplied the shares
  std::map<std::string, std::size_t> rows;
};

/// Per table, per CSP.
using VerifyReport = std::map<CspId, std::map<std::string, std::vector<CorruptCell>>>;

class Warehouse {
 public:
  Warehouse(Catalog catalog, std::shared_ptr<CspPool> pool,
            std::optional<std::filesystem::path> catalog_path = std::nullopt);

  /// Opens a catalog file; local endpoints resolve under `data_root`, else
  /// SHARDHOUSE_DATA_DIR, else `shards/` next to the catalog.
  static Warehouse open(const std::filesystem::path& catalog_path,
                        const std::optional<std::filesystem::path>& data_root = std::nullopt);
  static std::filesystem::path default_data_root(const std::filesystem::path& catalog_path);

  Catalog& catalog() { return catalog_; }
  const Catalog& catalog() const { return catalog_; }
  CspPool& pool() const { return *pool_; }
  Router router(RouterOptions options = {}) const { return Router(catalog_, *pool_, options); }
  /// Writes the catalog back when it came from a file.
  void save() const;

  /// Adds tables to the catalog and creates them at every CSP.
  std::vector<SharedTableSchema> share_schema(std::vector<TableDef> tables);

  /// Encodes and shares rows at all n CSPs. Every CSP must answer a health
  /// probe first; nothing is written otherwise. Returns inserts per CSP.
  std::map<CspId, std::size_t> load_records(const std::string& table, const std::vector<Row>& rows,
                                            bool upsert = false);
  std::map<CspId, std::size_t> load_csv(const std::string& table, const std::filesystem::path& csv);

  /// Aggregates the source table over every subset of the dimensions and
  /// shares the result as a table. Without staging, SUM and COUNT are
  /// computed on shares and MIN or MAX are refused.
  void build_cube(const CubeSpec& spec, bool staging = true);
  /// Loads `rows` into the cube's source table, then merges their
  /// aggregates into the affected cube cells only. Returns the number of
  /// cells written.
  std::size_t refresh_cube(const std::string& cube, const std::vector<Row>& rows);

  /// Rebuilds every table of CSP k from t healthy peers.
  RecoveryReport recover_csp(CspId k);

  /// Outer-signature scan at the given CSPs (all when empty).
  VerifyReport verify(const std::vector<CspId>& csps = {}) const;

  /// Original row -> stored row: replaced keys become sequence numbers,
  /// allocating new ones.
  Row to_stored(const TableDef& table, const Row& original);

 private:
  void precheck() const;
  std::vector<Row> cube_rows(const CubeSpec& spec, const TableDef& source,
                             const std::vector<Row>& stored_source) const;

  Catalog catalog_;
  std::shared_ptr<CspPool> pool_;
  std::optional<std::filesystem::path> catalog_path_;
};

/// Minimal CSV support: header row, RFC 4180 quoting.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
std::string csv_field(const std::string& text);

}  // namespace shardhouse
