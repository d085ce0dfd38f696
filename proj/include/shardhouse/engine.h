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

// Plaintext relational evaluation for the parts of a query that cannot run
// on shares: joins over reconstructed rows, residual filters, grouping on
// non-key columns, MIN/MAX, HAVING, ORDER BY and LIMIT.

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "shardhouse/sql.h"
#include "shardhouse/value.h"

namespace shardhouse {

using Row = std::vector<Value>;

/// Rows of one FROM entry, laid out as Scope::columns(alias index).
struct Relation {
  std::vector<Row> rows;
};

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

/// Name resolution for a statement. Joined rows concatenate the FROM
/// entries in order.
class Scope {
 public:
  using ColumnsOf = std::function<std::vector<std::string>(const std::string& table)>;
  Scope(const SelectStmt& stmt, const ColumnsOf& columns_of);

  std::size_t size() const { return aliases_.size(); }
  const std::string& alias(std::size_t i) const { return aliases_[i]; }
  const std::string& table(std::size_t i) const { return tables_[i]; }
  const std::vector<std::string>& columns(std::size_t i) const { return columns_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t width() const { return width_; }

  struct Ref {
    std::size_t alias = 0;   // FROM position
    std::size_t column = 0;  // within that entry
    std::size_t flat = 0;    // within a joined row
  };
  /// Throws QueryError for unknown or ambiguous columns.
  Ref resolve(const Expr& column) const;
  /// Expression text with every column qualified by its alias.
  std::string canonical(const Expr& e) const;
  /// FROM positions referenced by an expression or condition.
  std::vector<std::size_t> aliases_in(const Expr& e) const;
  std::vector<std::size_t> aliases_in(const Condition& c) const;

 private:
  std::vector<std::string> aliases_, tables_;
  std::vector<std::vector<std::string>> columns_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

/// Three-valued truth.
enum class Truth { kFalse, kTrue, kUnknown };

/// Supplies the value of a node directly (columns, aggregates, grouped
/// expressions) or nullopt to let evaluation recurse.
using ValueOf = std::function<std::optional<Value>(const Expr&)>;
Value eval_expr(const Expr& e, const ValueOf& leaf);
Truth eval_condition(const Condition& c, const ValueOf& leaf);
bool like_match(std::string_view text, std::string_view pattern);

/// Distinct aggregate calls in SELECT, HAVING and ORDER BY.
std::vector<ExprPtr> collect_aggregates(const SelectStmt& stmt, const Scope& scope);

/// One group after aggregation: values of the GROUP BY expressions and of
/// collect_aggregates() in order.
struct GroupRow {
  Row keys;
  Row aggs;
};

/// Full evaluation over plaintext inputs (one Relation per FROM entry).
ResultSet evaluate(const SelectStmt& stmt, const Scope& scope, const std::vector<Relation>& inputs);

/// HAVING, projection, DISTINCT, ORDER BY and LIMIT over groups that were
/// aggregated elsewhere.
ResultSet finish(const SelectStmt& stmt, const Scope& scope, std::vector<GroupRow> groups);

/// Output column labels.
std::vector<std::string> output_columns(const SelectStmt& stmt, const Scope& scope);

}  // namespace shardhouse
