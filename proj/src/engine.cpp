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

#include "shardhouse/engine.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "shardhouse/errors.h"

namespace shardhouse {

Scope::Scope(const SelectStmt& stmt, const ColumnsOf& columns_of) {
  for (const auto& ref : stmt.from) {
    if (std::find(aliases_.begin(), aliases_.end(), ref.alias) != aliases_.end()) {
      throw QueryError("duplicate table alias " + ref.alias);
    }
    aliases_.push_back(ref.alias);
    tables_.push_back(ref.name);
    columns_.push_back(columns_of(ref.name));
    offsets_.push_back(width_);
    width_ += columns_.back().size();
  }
}

Scope::Ref Scope::resolve(const Expr& e) const {
  if (!e.is_column()) throw QueryError("expected a column reference, got " + e.text());
  std::optional<Ref> found;
  for (std::size_t a = 0; a < aliases_.size(); ++a) {
    if (!e.table.empty() && e.table != aliases_[a]) continue;
    const auto& cols = columns_[a];
    auto it = std::find(cols.begin(), cols.end(), e.column);
    if (it == cols.end()) continue;
    if (found) throw QueryError("ambiguous column " + e.text());
    Ref r;
    r.alias = a;
    r.column = static_cast<std::size_t>(it - cols.begin());
    r.flat = offsets_[a] + r.column;
    found = r;
  }
  if (!found) throw QueryError("unknown column " + e.text());
  return *found;
}

std::string Scope::canonical(const Expr& e) const {
  switch (e.kind) {
    case Expr::Kind::kColumn: {
      Ref r = resolve(e);
      return aliases_[r.alias] + "." + columns_[r.alias][r.column];
    }
    case Expr::Kind::kLiteral: return e.text();
    case Expr::Kind::kBinary:
      return "(" + canonical(*e.lhs) + " " + e.op + " " + canonical(*e.rhs) + ")";
    case Expr::Kind::kAggregate: return e.func + "(" + (e.lhs ? canonical(*e.lhs) : "*") + ")";
  }
  return "?";
}

std::vector<std::size_t> Scope::aliases_in(const Expr& e) const {
  std::set<std::size_t> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.is_column()) out.insert(resolve(x).alias);
    if (x.lhs) walk(*x.lhs);
    if (x.rhs) walk(*x.rhs);
  };
  walk(e);
  return {out.begin(), out.end()};
}

std::vector<std::size_t> Scope::aliases_in(const Condition& c) const {
  std::set<std::size_t> out;
  auto add = [&](const ExprPtr& e) {
    if (!e) return;
    for (auto a : aliases_in(*e)) out.insert(a);
  };
  add(c.lhs);
  add(c.rhs);
  add(c.lo);
  add(c.hi);
  for (const auto& e : c.list) add(e);
  for (const auto& ch : c.children) {
    for (auto a : aliases_in(ch)) out.insert(a);
  }
  return {out.begin(), out.end()};
}

Value eval_expr(const Expr& e, const ValueOf& leaf) {
  if (auto v = leaf(e)) return *v;
  switch (e.kind) {
    case Expr::Kind::kLiteral: return e.literal;
    case Expr::Kind::kBinary: {
      Value a = eval_expr(*e.lhs, leaf);
      Value b = eval_expr(*e.rhs, leaf);
      switch (e.op) {
        case '+': return add_values(a, b);
        case '-': return sub_values(a, b);
        case '*': return mul_values(a, b);
        default: return div_values(a, b);
      }
    }
    case Expr::Kind::kColumn: throw QueryError("column " + e.text() + " is not available here");
    case Expr::Kind::kAggregate:
      throw QueryError("aggregate " + e.text() + " is not allowed here");
  }
  return {};
}

bool like_match(std::string_view text, std::string_view pattern) {
  // Iterative matcher with single-star backtracking over code units.
  std::size_t t = 0, p = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
      ++t;
      ++p;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

namespace {

Truth from_bool(bool b) { return b ? Truth::kTrue : Truth::kFalse; }

Truth negate(Truth t) {
  if (t == Truth::kUnknown) return t;
  return t == Truth::kTrue ? Truth::kFalse : Truth::kTrue;
}

Truth compare_truth(const Value& a, const std::string& cmp, const Value& b) {
  if (is_null(a) || is_null(b)) return Truth::kUnknown;
  const int c = compare_values(a, b);
  if (cmp == "=") return from_bool(c == 0);
  if (cmp == "<>") return from_bool(c != 0);
  if (cmp == "<") return from_bool(c < 0);
  if (cmp == "<=") return from_bool(c <= 0);
  if (cmp == ">") return from_bool(c > 0);
  return from_bool(c >= 0);
}

}  // namespace

Truth eval_condition(const Condition& c, const ValueOf& leaf) {
  switch (c.kind) {
    case Condition::Kind::kAnd: {
      Truth acc = Truth::kTrue;
      for (const auto& ch : c.children) {
        Truth t = eval_condition(ch, leaf);
        if (t == Truth::kFalse) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
    case Condition::Kind::kOr: {
      Truth acc = Truth::kFalse;
      for (const auto& ch : c.children) {
        Truth t = eval_condition(ch, leaf);
        if (t == Truth::kTrue) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
    case Condition::Kind::kIsNull: {
      const bool null = is_null(eval_expr(*c.lhs, leaf));
      return from_bool(c.negated ? !null : null);
    }
    case Condition::Kind::kCompare:
      return compare_truth(eval_expr(*c.lhs, leaf), c.cmp, eval_expr(*c.rhs, leaf));
    case Condition::Kind::kBetween: {
      Value v = eval_expr(*c.lhs, leaf);
      Truth lo = compare_truth(v, ">=", eval_expr(*c.lo, leaf));
      Truth hi = compare_truth(v, "<=", eval_expr(*c.hi, leaf));
      Truth t = Truth::kTrue;
      if (lo == Truth::kFalse || hi == Truth::kFalse) {
        t = Truth::kFalse;
      } else if (lo == Truth::kUnknown || hi == Truth::kUnknown) {
        t = Truth::kUnknown;
      }
      return c.negated ? negate(t) : t;
    }
    case Condition::Kind::kIn: {
      Value v = eval_expr(*c.lhs, leaf);
      Truth t = Truth::kFalse;
      if (is_null(v)) {
        t = Truth::kUnknown;
      } else {
        for (const auto& item : c.list) {
          Truth m = compare_truth(v, "=", eval_expr(*item, leaf));
          if (m == Truth::kTrue) {
            t = m;
            break;
          }
          if (m == Truth::kUnknown) t = m;
        }
      }
      return c.negated ? negate(t) : t;
    }
    case Condition::Kind::kLike: {
      Value v = eval_expr(*c.lhs, leaf);
      if (is_null(v)) return Truth::kUnknown;
      const auto* s = std::get_if<std::string>(&v);
      if (!s) throw QueryError("LIKE applies to strings only");
      const bool m = like_match(*s, c.pattern);
      return from_bool(c.negated ? !m : m);
    }
  }
  return Truth::kUnknown;
}

std::vector<ExprPtr> collect_aggregates(const SelectStmt& stmt, const Scope& scope) {
  std::vector<ExprPtr> out;
  std::set<std::string> seen;
  std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& e) {
    if (!e) return;
    if (e->kind == Expr::Kind::kAggregate) {
      if (seen.insert(scope.canonical(*e)).second) out.push_back(e);
      return;
    }
    walk(e->lhs);
    walk(e->rhs);
  };
  std::function<void(const Condition&)> walk_cond = [&](const Condition& c) {
    walk(c.lhs);
    walk(c.rhs);
    walk(c.lo);
    walk(c.hi);
    for (const auto& e : c.list) walk(e);
    for (const auto& ch : c.children) walk_cond(ch);
  };
  for (const auto& item : stmt.items) walk(item.expr);
  for (const auto& c : stmt.having) walk_cond(c);
  for (const auto& o : stmt.order_by) walk(o.expr);
  return out;
}

std::vector<std::string> output_columns(const SelectStmt& stmt, const Scope& scope) {
  std::vector<std::string> out;
  if (stmt.star) {
    for (std::size_t a = 0; a < scope.size(); ++a) {
      for (const auto& c : scope.columns(a)) out.push_back(c);
    }
    return out;
  }
  for (const auto& item : stmt.items) {
    out.push_back(!item.alias.empty() ? item.alias
                  : item.expr->is_column() ? item.expr->column
                                           : item.expr->text());
  }
  return out;
}

namespace {

struct RowLess {
  bool operator()(const Row& a, const Row& b) const {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      int c = compare_values(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  }
};

class Accumulator {
 public:
  explicit Accumulator(std::string func) : func_(std::move(func)) {}

  void add_row() { ++rows_; }
  void add(const Value& v) {
    ++rows_;
    if (is_null(v)) return;
    ++count_;
    if (func_ == "SUM" || func_ == "AVG") {
      sum_ = is_null(sum_) ? v : add_values(sum_, v);
    } else if (func_ == "MIN") {
      if (is_null(best_) || compare_values(v, best_) < 0) best_ = v;
    } else if (func_ == "MAX") {
      if (is_null(best_) || compare_values(v, best_) > 0) best_ = v;
    }
  }

  Value result(bool star) const {
    if (func_ == "COUNT") return star ? rows_ : count_;
    if (func_ == "SUM") return sum_;
    if (func_ == "AVG") {
      if (count_ == 0) return std::monostate{};
      return to_double(sum_) / static_cast<double>(count_);
    }
    return best_;
  }

 private:
  std::string func_;
  std::int64_t rows_ = 0;
  std::int64_t count_ = 0;
  Value sum_;
  Value best_;
};

// Value lookup for joined rows with a per-node resolution cache.
class RowLeaf {
 public:
  explicit RowLeaf(const Scope& scope) : scope_(scope) {}

  ValueOf bind(const Row& row) {
    return [this, &row](const Expr& e) -> std::optional<Value> {
      if (e.kind == Expr::Kind::kColumn) return row[flat(e)];
      return std::nullopt;
    };
  }

  std::size_t flat(const Expr& e) {
    auto it = cache_.find(&e);
    if (it != cache_.end()) return it->second;
    std::size_t f = scope_.resolve(e).flat;
    cache_.emplace(&e, f);
    return f;
  }

 private:
  const Scope& scope_;
  std::unordered_map<const Expr*, std::size_t> cache_;
};

// Per-alias row lookup: columns index into that alias' own layout.
class LocalLeaf {
 public:
  explicit LocalLeaf(const Scope& scope) : scope_(scope) {}

  ValueOf bind(const Row& row) {
    return [this, &row](const Expr& e) -> std::optional<Value> {
      if (e.kind != Expr::Kind::kColumn) return std::nullopt;
      auto it = cache_.find(&e);
      if (it == cache_.end()) it = cache_.emplace(&e, scope_.resolve(e).column).first;
      return row[it->second];
    };
  }

 private:
  const Scope& scope_;
  std::unordered_map<const Expr*, std::size_t> cache_;
};

std::vector<Row> join_all(const SelectStmt& stmt, const Scope& scope,
                          const std::vector<Relation>& inputs) {
  const std::size_t n = scope.size();
  if (inputs.size() != n) throw QueryError("engine input count does not match FROM list");
  std::vector<std::vector<const Condition*>> local(n);
  struct Edge {
    std::size_t a, b;
    std::size_t flat_a, flat_b;
  };
  std::vector<Edge> edges;
  std::vector<const Condition*> post;
  for (const auto& c : stmt.where) {
    auto used = scope.aliases_in(c);
    if (used.size() == 1) {
      local[used[0]].push_back(&c);
    } else if (used.size() == 2 && c.kind == Condition::Kind::kCompare && c.cmp == "=" &&
               c.lhs->is_column() && c.rhs->is_column()) {
      auto l = scope.resolve(*c.lhs), r = scope.resolve(*c.rhs);
      edges.push_back({l.alias, r.alias, l.flat, r.flat});
    } else {
      post.push_back(&c);
    }
  }

  std::vector<std::vector<const Row*>> filtered(n);
  for (std::size_t a = 0; a < n; ++a) {
    LocalLeaf leaf(scope);
    for (const auto& row : inputs[a].rows) {
      if (row.size() != scope.columns(a).size()) throw QueryError("engine row width mismatch");
      ValueOf of = leaf.bind(row);
      bool keep = true;
      for (const Condition* c : local[a]) {
        if (eval_condition(*c, of) != Truth::kTrue) {
          keep = false;
          break;
        }
      }
      if (keep) filtered[a].push_back(&row);
    }
  }

  auto place = [&](Row& dst, std::size_t a, const Row& src) {
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(scope.offset(a)));
  };

  std::vector<bool> joined(n, false);
  std::size_t first = 0;
  for (std::size_t a = 1; a < n; ++a) {
    if (filtered[a].size() < filtered[first].size()) first = a;
  }
  std::vector<Row> rows;
  rows.reserve(filtered[first].size());
  for (const Row* r : filtered[first]) {
    Row full(scope.width());
    place(full, first, *r);
    rows.push_back(std::move(full));
  }
  joined[first] = true;

  for (std::size_t step = 1; step < n; ++step) {
    std::optional<std::size_t> pick;
    for (std::size_t a = 0; a < n; ++a) {
      if (joined[a]) continue;
      const bool linked = std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
        return (e.a == a && joined[e.b]) || (e.b == a && joined[e.a]);
      });
      if (linked && (!pick || filtered[a].size() < filtered[*pick].size())) pick = a;
    }
    if (!pick) {
      for (std::size_t a = 0; a < n; ++a) {
        if (!joined[a] && (!pick || filtered[a].size() < filtered[*pick].size())) pick = a;
      }
    }
    const std::size_t a = *pick;
    std::vector<std::pair<std::size_t, std::size_t>> keys;  // (flat in joined, column in a)
    for (const auto& e : edges) {
      if (e.a == a && joined[e.b]) keys.emplace_back(e.flat_b, e.flat_a - scope.offset(a));
      if (e.b == a && joined[e.a]) keys.emplace_back(e.flat_a, e.flat_b - scope.offset(a));
    }
    std::vector<Row> next;
    if (keys.empty()) {
      for (const auto& left : rows) {
        for (const Row* r : filtered[a]) {
          Row full = left;
          place(full, a, *r);
          next.push_back(std::move(full));
        }
      }
    } else {
      std::map<Row, std::vector<const Row*>, RowLess> index;
      for (const Row* r : filtered[a]) {
        Row k;
        bool null = false;
        for (const auto& [jf, col] : keys) {
          null = null || is_null((*r)[col]);
          k.push_back((*r)[col]);
        }
        if (!null) index[std::move(k)].push_back(r);
      }
      for (const auto& left : rows) {
        Row k;
        bool null = false;
        for (const auto& [jf, col] : keys) {
          null = null || is_null(left[jf]);
          k.push_back(left[jf]);
        }
        if (null) continue;
        auto it = index.find(k);
        if (it == index.end()) continue;
        for (const Row* r : it->second) {
          Row full = left;
          place(full, a, *r);
          next.push_back(std::move(full));
        }
      }
    }
    rows = std::move(next);
    joined[a] = true;
  }

  if (!post.empty()) {
    RowLeaf leaf(scope);
    std::vector<Row> kept;
    for (auto& row : rows) {
      ValueOf of = leaf.bind(row);
      bool keep = true;
      for (const Condition* c : post) {
        if (eval_condition(*c, of) != Truth::kTrue) {
          keep = false;
          break;
        }
      }
      if (keep) kept.push_back(std::move(row));
    }
    rows = std::move(kept);
  }
  return rows;
}

struct SortMode {
  std::optional<std::size_t> output;  // sort by an output column
};

std::vector<SortMode> sort_modes(const SelectStmt& stmt, const Scope& scope) {
  std::vector<SortMode> modes;
  std::vector<std::string> item_text;
  for (const auto& item : stmt.items) item_text.push_back(scope.canonical(*item.expr));
  for (const auto& o : stmt.order_by) {
    SortMode m;
    const Expr& e = *o.expr;
    if (e.is_literal()) {
      const auto* k = std::get_if<std::int64_t>(&e.literal);
      const std::size_t width = stmt.star ? scope.width() : stmt.items.size();
      if (!k || *k < 1 || static_cast<std::size_t>(*k) > width) {
        throw QueryError("ORDER BY position out of range");
      }
      m.output = static_cast<std::size_t>(*k - 1);
    } else if (!stmt.star) {
      if (e.is_column() && e.table.empty()) {
        for (std::size_t i = 0; i < stmt.items.size(); ++i) {
          if (stmt.items[i].alias == e.column) m.output = i;
        }
      }
      if (!m.output) {
        std::string text = scope.canonical(e);
        for (std::size_t i = 0; i < item_text.size(); ++i) {
          if (item_text[i] == text) {
            m.output = i;
            break;
          }
        }
      }
    }
    modes.push_back(m);
  }
  return modes;
}

struct OutRow {
  Row values;
  Row sort_keys;
};

ResultSet order_and_limit(const SelectStmt& stmt, const Scope& scope, std::vector<OutRow> out) {
  if (stmt.distinct) {
    std::set<Row, RowLess> seen;
    std::vector<OutRow> uniq;
    for (auto& r : out) {
      if (seen.insert(r.values).second) uniq.push_back(std::move(r));
    }
    out = std::move(uniq);
  }
  if (!stmt.order_by.empty()) {
    std::stable_sort(out.begin(), out.end(), [&](const OutRow& a, const OutRow& b) {
      for (std::size_t i = 0; i < stmt.order_by.size(); ++i) {
        int c = compare_values(a.sort_keys[i], b.sort_keys[i]);
        if (c != 0) return stmt.order_by[i].desc ? c > 0 : c < 0;
      }
      return false;
    });
  }
  ResultSet rs;
  rs.columns = output_columns(stmt, scope);
  std::size_t limit = out.size();
  if (stmt.limit) limit = std::min<std::size_t>(limit, static_cast<std::size_t>(std::max<std::int64_t>(*stmt.limit, 0)));
  for (std::size_t i = 0; i < limit; ++i) rs.rows.push_back(std::move(out[i].values));
  return rs;
}

}  // namespace

ResultSet evaluate(const SelectStmt& stmt, const Scope& scope, const std::vector<Relation>& inputs) {
  std::vector<Row> rows = join_all(stmt, scope, inputs);
  if (stmt.is_aggregate()) {
    if (stmt.star) throw QueryError("SELECT * cannot be combined with aggregation");
    auto aggs = collect_aggregates(stmt, scope);
    RowLeaf leaf(scope);
    std::map<Row, std::vector<Accumulator>, RowLess> groups;
    for (const auto& row : rows) {
      ValueOf of = leaf.bind(row);
      Row key;
      for (const auto& g : stmt.group_by) key.push_back(eval_expr(*g, of));
      auto it = groups.find(key);
      if (it == groups.end()) {
        std::vector<Accumulator> accs;
        for (const auto& a : aggs) accs.emplace_back(a->func);
        it = groups.emplace(std::move(key), std::move(accs)).first;
      }
      for (std::size_t i = 0; i < aggs.size(); ++i) {
        if (aggs[i]->lhs) {
          it->second[i].add(eval_expr(*aggs[i]->lhs, of));
        } else {
          it->second[i].add_row();
        }
      }
    }
    if (groups.empty() && stmt.group_by.empty()) {
      std::vector<Accumulator> accs;
      for (const auto& a : aggs) accs.emplace_back(a->func);
      groups.emplace(Row{}, std::move(accs));
    }
    std::vector<GroupRow> out;
    for (auto& [key, accs] : groups) {
      GroupRow g;
      g.keys = key;
      for (std::size_t i = 0; i < aggs.size(); ++i) g.aggs.push_back(accs[i].result(!aggs[i]->lhs));
      out.push_back(std::move(g));
    }
    return finish(stmt, scope, std::move(out));
  }

  auto modes = sort_modes(stmt, scope);
  RowLeaf leaf(scope);
  std::vector<OutRow> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    ValueOf of = leaf.bind(row);
    OutRow o;
    if (stmt.star) {
      o.values = row;
    } else {
      for (const auto& item : stmt.items) o.values.push_back(eval_expr(*item.expr, of));
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
      o.sort_keys.push_back(modes[i].output ? o.values[*modes[i].output]
                                            : eval_expr(*stmt.order_by[i].expr, of));
    }
    out.push_back(std::move(o));
  }
  return order_and_limit(stmt, scope, std::move(out));
}

ResultSet finish(const SelectStmt& stmt, const Scope& scope, std::vector<GroupRow> groups) {
  auto aggs = collect_aggregates(stmt, scope);
  std::map<std::string, std::size_t> group_pos, agg_pos;
  for (std::size_t i = 0; i < stmt.group_by.size(); ++i) {
    group_pos.emplace(scope.canonical(*stmt.group_by[i]), i);
  }
  for (std::size_t i = 0; i < aggs.size(); ++i) agg_pos.emplace(scope.canonical(*aggs[i]), i);
  // Canonical text per node is cached; nodes outlive this call.
  std::unordered_map<const Expr*, std::string> text_cache;
  auto text_of = [&](const Expr& e) -> const std::string& {
    auto it = text_cache.find(&e);
    if (it == text_cache.end()) it = text_cache.emplace(&e, scope.canonical(e)).first;
    return it->second;
  };
  auto modes = sort_modes(stmt, scope);
  std::vector<OutRow> out;
  for (const auto& g : groups) {
    ValueOf of = [&](const Expr& e) -> std::optional<Value> {
      if (e.kind == Expr::Kind::kLiteral) return std::nullopt;
      const std::string& text = text_of(e);
      if (auto it = group_pos.find(text); it != group_pos.end()) return g.keys.at(it->second);
      if (e.kind == Expr::Kind::kAggregate) return g.aggs.at(agg_pos.at(text));
      if (e.kind == Expr::Kind::kColumn) {
        throw QueryError("column " + e.text() + " must appear in GROUP BY or an aggregate");
      }
      return std::nullopt;
    };
    bool keep = true;
    for (const auto& c : stmt.having) {
      if (eval_condition(c, of) != Truth::kTrue) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    OutRow o;
    for (const auto& item : stmt.items) o.values.push_back(eval_expr(*item.expr, of));
    for (std::size_t i = 0; i < modes.size(); ++i) {
      o.sort_keys.push_back(modes[i].output ? o.values[*modes[i].output]
                                            : eval_expr(*stmt.order_by[i].expr, of));
    }
    out.push_back(std::move(o));
  }
  return order_and_limit(stmt, scope, std::move(out));
}

}  // namespace shardhouse
