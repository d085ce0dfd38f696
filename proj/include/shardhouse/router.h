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

// Client-side query planning and execution over t CSPs. Each WHERE conjunct
// is either pushed down as is (plaintext keys), transformed into share
// literals per CSP (equality, IN and enumerable ranges on shared columns) or
// left to the client evaluator after reconstruction.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shardhouse/catalog.h"
#include "shardhouse/engine.h"
#include "shardhouse/sql.h"
#include "shardhouse/transport.h"

namespace shardhouse {

/// The CSPs of one warehouse with their health and observed latency.
class CspPool {
 public:
  explicit CspPool(std::vector<std::shared_ptr<StoreClient>> clients);

  std::vector<CspId> ids() const;
  StoreClient& client(CspId id) const;
  /// Pings every CSP, recording latency; unreachable ones are marked down
  /// and reachable ones up.
  void probe();
  void mark_down(CspId id);
  void mark_up(CspId id);
  bool is_down(CspId id) const;
  /// Healthy CSPs, lowest latency first (millisecond buckets), ties by id.
  std::vector<CspId> preferred() const;

 private:
  struct Entry {
    std::shared_ptr<StoreClient> client;
    double latency_ms = 0;
    bool down = false;
  };
  mutable std::mutex mu_;
  std::map<CspId, Entry> entries_;
};

struct RouterOptions {
  std::size_t range_cap = 10000;   // largest range rewritten into an IN-list
  bool aggregate_pushdown = true;  // SUM/COUNT/AVG on shares at the CSPs
  bool semi_joins = true;          // key IN-lists from already-fetched tables
};

enum class Placement { kPushdown, kTransform, kClient };
std::string placement_name(Placement p);

struct ClauseDecision {
  std::string clause;
  Placement placement = Placement::kClient;
  std::string note;
};

/// A conjunct sent to the CSPs. Shared atoms carry plaintext domain points
/// that are turned into share tuples separately for every CSP.
struct PlannedAtom {
  Atom plain;
  bool shared = false;
  std::string column;
  std::vector<Value> literals;
  std::string text;
};

/// Restricts `column` to the distinct values of `from_column` among the
/// rows already fetched for FROM entry `from_alias`.
struct SemiJoin {
  std::string column;
  std::size_t from_alias = 0;
  std::string from_column;
};

struct TableFetch {
  std::size_t alias = 0;
  std::string table;
  std::vector<std::string> projection;
  std::vector<PlannedAtom> atoms;
  std::vector<SemiJoin> semi_joins;
  std::vector<std::size_t> local_conditions;  // WHERE conjuncts on this entry only
};

struct AggregatePlan {
  struct Source {
    std::string func;
    int sum = -1;  // index into sums; -1 means the row count
  };
  std::vector<std::string> group_by;
  std::vector<std::string> sums;
  std::vector<Source> sources;  // one per collect_aggregates() entry
  bool key_phase = false;       // shared filters are resolved to keys first
};

struct QueryPlan {
  enum class Mode { kFetch, kAggregate };
  SelectStmt stmt;
  std::shared_ptr<const Scope> scope;
  Mode mode = Mode::kFetch;
  std::vector<TableFetch> fetches;  // execution order
  std::optional<AggregatePlan> aggregate;
  std::vector<ClauseDecision> clauses;
  std::vector<CspId> group;  // preferred group when planned

  std::string explain() const;
};

/// Share tuple of `literal` at CSP k, one share per block; nullopt when the
/// literal cannot be encoded in the column (it can then match nothing).
std::optional<std::vector<BigInt>> rewrite_equality(const Catalog& catalog, const ColumnDef& column,
                                                    const Value& literal, CspId k);

/// Domain points of an integer, date or character column between optional
/// bounds; nullopt when the column is not enumerable or the range exceeds
/// `cap`.
std::optional<std::vector<Value>> enumerate_range(const ColumnDef& column, std::int64_t p,
                                                  const std::optional<Value>& lo, bool lo_inclusive,
                                                  const std::optional<Value>& hi, bool hi_inclusive,
                                                  std::size_t cap);

/// Share tuples for every point of a range at CSP k.
std::optional<std::vector<std::vector<BigInt>>> rewrite_range(const Catalog& catalog,
                                                              const ColumnDef& column,
                                                              const Value& lo, const Value& hi,
                                                              CspId k, std::size_t cap);

/// Plaintext sum of an additive column from per-CSP, per-block share sums
/// over `rows` non-NULL cells. `sums[x][b]` belongs to ctx.group[x].
Value reconstruct_sum(const std::vector<std::vector<BigInt>>& sums, std::int64_t rows,
                      const ReconstructionContext& ctx, const ColumnCodec& codec,
                      const SharingConfig& config);

/// One group of a share-space aggregate, keys as stored.
struct GroupTotals {
  std::vector<Value> key;
  std::int64_t count = 0;
  std::vector<std::int64_t> nonnull;  // per summed column
  std::vector<Value> sums;            // NULL when nonnull is 0
};

class Router {
 public:
  Router(const Catalog& catalog, CspPool& pool, RouterOptions options = {});

  QueryPlan plan(const SelectStmt& stmt) const;
  QueryPlan plan(std::string_view sql) const { return plan(parse_sql(sql)); }
  ResultSet execute(const QueryPlan& plan) const;
  ResultSet query(std::string_view sql) const { return execute(plan(sql)); }

  /// Rows of one table in column order with keys as stored; columns outside
  /// the projection are NULL. Shared atoms may over-match: callers apply the
  /// original conditions afterwards.
  std::vector<Row> fetch_table(const std::string& table, const std::vector<std::string>& projection,
                               const std::vector<PlannedAtom>& atoms) const;

  /// SUM and COUNT computed on shares at the CSPs, grouped by key or
  /// boolean columns. `atoms` must select exactly (plain atoms only).
  std::vector<GroupTotals> aggregate_shares(const std::string& table,
                                            const std::vector<std::string>& group_by,
                                            const std::vector<std::string>& sums,
                                            const std::vector<PlannedAtom>& atoms) const;
  /// Stored key -> user-facing value (original text for replaced keys).
  Value present(const ColumnDef& column, const Value& raw) const;

  /// Runs `attempt` on t-subsets of healthy CSPs until one succeeds. CSPs
  /// that fail are excluded; a reconstruction failure moves on to the next
  /// subset.
  void run_on_groups(
      const std::function<void(const std::vector<CspId>&, const ReconstructionContext&)>& attempt)
      const;

  /// Number of times a group had to be abandoned since construction.
  int substitutions() const { return substitutions_; }

 private:
  std::vector<Row> fetch_once(const TableDef& table, const std::vector<std::string>& projection,
                              const std::vector<PlannedAtom>& atoms,
                              const std::vector<CspId>& group,
                              const ReconstructionContext& ctx) const;
  ResultSet execute_fetch(const QueryPlan& plan) const;
  ResultSet execute_aggregate(const QueryPlan& plan) const;

  const Catalog& catalog_;
  CspPool& pool_;
  RouterOptions options_;
  mutable std::atomic<int> substitutions_{0};
};

}  // namespace shardhouse
