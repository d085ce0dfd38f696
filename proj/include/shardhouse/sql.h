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

// A small SQL subset: SELECT [DISTINCT] ... FROM ... [JOIN ... ON ...]
// [WHERE] [GROUP BY] [HAVING] [ORDER BY] [LIMIT].

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shardhouse/value.h"

namespace shardhouse {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { kColumn, kLiteral, kBinary, kAggregate };
  Kind kind = Kind::kLiteral;
  std::string table;   // kColumn: optional qualifier
  std::string column;  // kColumn
  Value literal;       // kLiteral
  char op = 0;         // kBinary: + - * /
  std::string func;    // kAggregate: SUM COUNT AVG MIN MAX
  ExprPtr lhs;         // kBinary left; kAggregate argument (null for COUNT(*))
  ExprPtr rhs;

  bool is_column() const { return kind == Kind::kColumn; }
  bool is_literal() const { return kind == Kind::kLiteral; }
  /// SQL text; column references keep their qualifier as written.
  std::string text() const;
  bool contains_aggregate() const;
};

ExprPtr make_column(std::string table, std::string column);
ExprPtr make_literal(Value v);

struct Condition {
  enum class Kind { kCompare, kBetween, kIn, kLike, kIsNull, kAnd, kOr };
  Kind kind = Kind::kCompare;
  ExprPtr lhs;
  std::string cmp;  // kCompare: = <> < <= > >=
  ExprPtr rhs;      // kCompare
  ExprPtr lo, hi;   // kBetween
  std::vector<ExprPtr> list;  // kIn
  std::string pattern;        // kLike
  bool negated = false;       // NOT BETWEEN / NOT IN / NOT LIKE / IS NOT NULL
  std::vector<Condition> children;  // kAnd / kOr

  std::string text() const;
};

struct SelectItem {
  ExprPtr expr;
  std::string alias;
};

struct TableRef {
  std::string name;
  std::string alias;  // equals name when none was given
};

struct OrderItem {
  ExprPtr expr;
  bool desc = false;
};

struct SelectStmt {
  bool distinct = false;
  bool star = false;
  std::vector<SelectItem> items;
  std::vector<TableRef> from;
  std::vector<Condition> where;   // conjuncts
  std::vector<ExprPtr> group_by;
  std::vector<Condition> having;  // conjuncts
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;

  bool is_aggregate() const;
};

/// Throws QueryError with the offending position on malformed input.
/// "x = NULL" is read as "x IS NULL"; an OR of equalities on one column
/// becomes an IN list.
SelectStmt parse_sql(std::string_view text);

}  // namespace shardhouse
