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

// Client catalog: the single trust root of a shared warehouse. It holds the
// sharing parameters, the accepted coefficient matrix, table definitions
// with their codecs, key-replacement maps and cube definitions. It is never
// sent to a CSP.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shardhouse/codec.h"
#include "shardhouse/scheme.h"
#include "shardhouse/store.h"

namespace shardhouse {

struct ColumnDef {
  std::string name;
  ColumnCodec codec;
  bool replace = false;     // key values are swapped for a sequence
  std::string key_domain;   // table whose key map translates this column
  std::string sig_name;     // shared columns only

  bool operator==(const ColumnDef&) const = default;
};

struct ForeignKey {
  std::vector<std::string> columns;
  std::string table;
  std::vector<std::string> ref_columns;

  bool operator==(const ForeignKey&) const = default;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  std::size_t index_of(std::string_view column) const;  // throws SchemaError
  const ColumnDef& column(std::string_view name) const { return columns[index_of(name)]; }
  std::vector<std::string> column_names() const;
  bool operator==(const TableDef&) const = default;
};

struct CubeMeasure {
  std::string name;    // output column
  std::string func;    // SUM COUNT MIN MAX
  std::string source;  // empty for COUNT(*)

  bool operator==(const CubeMeasure&) const = default;
};

struct CubeSpec {
  std::string name;
  std::string source;
  std::vector<std::string> dimensions;  // key columns of the source table
  std::vector<CubeMeasure> measures;

  bool operator==(const CubeSpec&) const = default;
};

/// Sidecar form: {"tables": [...]} or a single table object. Widths left at
/// 0 are filled from p by resolve_widths().
std::vector<TableDef> tables_from_sidecar(const nlohmann::json& j);
nlohmann::json table_to_json(const TableDef& table);
TableDef table_from_json(const nlohmann::json& j);

CubeSpec cube_from_json(const nlohmann::json& j);
nlohmann::json cube_to_json(const CubeSpec& cube);

struct Catalog {
  int version = 1;
  SharingConfig config;
  CoefficientSet coeffs;
  /// "local" (a store directory under the data root) or "tcp://host:port".
  std::map<CspId, std::string> endpoints;
  std::vector<TableDef> tables;
  std::map<std::string, std::int64_t> sequences;  // last value handed out
  std::map<std::string, std::map<std::string, std::int64_t>> key_maps;
  std::vector<CubeSpec> cubes;

  const TableDef& table(std::string_view name) const;  // throws QueryError
  TableDef* find_table(std::string_view name);
  const TableDef* find_table(std::string_view name) const;
  const CubeSpec* find_cube(std::string_view name) const;

  /// Layout of the table at every CSP.
  SharedTableSchema shared_schema(const TableDef& table) const;

  /// Sequence number for an original key value, allocating on first use.
  std::int64_t map_key(const std::string& domain, const std::string& original);
  /// Lookup only; nullopt when the value was never loaded.
  std::optional<std::int64_t> find_key(const std::string& domain, const std::string& original) const;
  /// Reverse lookup for result rows.
  std::optional<std::string> original_key(const std::string& domain, std::int64_t seq) const;

  nlohmann::json to_json() const;
  static Catalog from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Catalog load(const std::filesystem::path& path);

 private:
  // seq -> original, kept in step with key_maps.
  std::map<std::string, std::map<std::int64_t, std::string>> reverse_;
};

/// Fills zero widths from p, validates codecs, names signature columns and
/// derives key domains from replace flags and foreign keys. `existing`
/// holds already-registered tables that foreign keys may reference.
void resolve_tables(std::vector<TableDef>& tables, const std::vector<TableDef>& existing,
                    std::int64_t p);

}  // namespace shardhouse
