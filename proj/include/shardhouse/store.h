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

// One simulated cloud storage provider. It stores share rows, evaluates
// predicates restricted to plaintext keys and share-literal equality, sums
// shares per key group and checks outer signatures. It never sees p, the
// coefficients, codecs or any plaintext non-key value.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "shardhouse/bigint.h"

namespace shardhouse {

/// Rows per SNAPSHOT chunk.
inline constexpr std::size_t kSnapshotChunk = 10000;

enum class ColumnRole { kKey, kPlain, kShared };

struct SharedColumn {
  std::string name;
  ColumnRole role = ColumnRole::kShared;
  bool nullable = false;
  int blocks = 0;        // shared only; 0 when the block count varies per value
  std::string sig_name;  // shared only

  bool operator==(const SharedColumn&) const = default;
};

struct SharedTableSchema {
  std::string name;
  std::vector<SharedColumn> columns;
  std::vector<std::string> primary_key;
  std::int64_t p2 = 0;

  /// Physical columns: shared attributes count twice (shares + signatures).
  int column_count() const;
  std::size_t index_of(std::string_view column) const;  // throws SchemaError
  void validate() const;

  bool operator==(const SharedTableSchema&) const = default;
};

nlohmann::json schema_to_json(const SharedTableSchema& schema);
SharedTableSchema schema_from_json(const nlohmann::json& j);

/// Plaintext key or boolean; monostate is NULL.
using PlainValue = std::variant<std::monostate, std::int64_t, bool>;

nlohmann::json plain_to_json(const PlainValue& v);
PlainValue plain_from_json(const nlohmann::json& j);  // throws ProtocolError

struct PlainLess {
  bool operator()(const PlainValue& a, const PlainValue& b) const;
  bool operator()(const std::vector<PlainValue>& a, const std::vector<PlainValue>& b) const;
};

struct SharedCell {
  std::vector<BigInt> shares;
  std::vector<std::int64_t> sigs;

  bool operator==(const SharedCell&) const = default;
};

using Cell = std::variant<std::monostate, std::int64_t, bool, SharedCell>;

/// Cells follow the attribute order of the schema (or of a projection).
struct ShareRow {
  std::vector<Cell> cells;

  bool operator==(const ShareRow&) const = default;
};

/// Row <-> wire layout. `attrs` lists schema attribute indices in row order.
nlohmann::json row_to_json(const ShareRow& row, const SharedTableSchema& schema,
                           const std::vector<std::size_t>& attrs);
ShareRow row_from_json(const nlohmann::json& j, const SharedTableSchema& schema,
                       const std::vector<std::size_t>& attrs);
std::vector<std::size_t> all_attributes(const SharedTableSchema& schema);

/// One conjunct of a pushdown predicate.
struct Atom {
  enum class Op { kEq, kNe, kCmp, kIn, kIsNull, kNotNull, kShareEq, kShareIn };
  Op op = Op::kEq;
  std::vector<std::string> cols;               // kIn may name several columns
  std::string cmp;                             // kCmp: < <= > >=
  std::vector<std::vector<PlainValue>> values; // kEq/kNe/kCmp: one 1-tuple
  std::vector<std::vector<BigInt>> tuples;     // kShareEq: one tuple; kShareIn: many
};
using Predicate = std::vector<Atom>;

nlohmann::json predicate_to_json(const Predicate& pred);
Predicate predicate_from_json(const nlohmann::json& j);

struct AggregateSum {
  std::int64_t nonnull = 0;
  std::vector<BigInt> sums;  // one per block position
};

struct AggregateGroup {
  std::vector<PlainValue> key;
  std::int64_t count = 0;
  std::vector<AggregateSum> sums;
};

struct CorruptCell {
  std::vector<PlainValue> key;
  std::string attribute;
  std::size_t block = 0;

  bool operator==(const CorruptCell&) const = default;
};

struct SnapshotChunk {
  std::vector<ShareRow> rows;
  std::size_t total = 0;
  std::optional<std::size_t> next;
};

class Store {
 public:
  /// Without a data directory the store is memory-only.
  explicit Store(std::optional<std::filesystem::path> data_dir = std::nullopt);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void create_table(const SharedTableSchema& schema, bool replace = false);
  std::size_t insert_rows(const std::string& table, std::vector<ShareRow> rows,
                          bool upsert = false);
  std::vector<ShareRow> select(const std::string& table, const std::vector<std::string>& projection,
                               const Predicate& pred) const;
  std::vector<AggregateGroup> aggregate(const std::string& table,
                                        const std::vector<std::string>& group_by,
                                        const std::vector<std::string>& sum_columns,
                                        const Predicate& pred) const;
  std::vector<CorruptCell> scan_verify(const std::string& table) const;
  SnapshotChunk snapshot(const std::string& table, std::size_t offset,
                         std::size_t limit = kSnapshotChunk) const;

  std::vector<std::string> tables() const;
  SharedTableSchema schema(const std::string& table) const;
  /// Canonical text of the table (schema + rows in key order); equal
  /// digests mean byte-identical content.
  std::string canonical_dump(const std::string& table) const;

  /// Serves one protocol request. Never throws; failures become error
  /// responses echoing the request's seq.
  nlohmann::json handle(const nlohmann::json& request);
  std::string handle_frame(std::string_view body);

  /// Honest stores refuse to return shares failing the outer check.
  void set_verify_on_read(bool on) { verify_on_read_ = on; }

 private:
  struct Table;
  std::shared_ptr<Table> find(const std::string& name) const;
  void replay();

  std::optional<std::filesystem::path> data_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Table>> tables_;
  bool verify_on_read_ = true;
};

}  // namespace shardhouse
