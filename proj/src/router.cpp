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

#include "shardhouse/router.h"

#include <algorithm>
#include <charconv>
#include <limits>
#include <unordered_map>
#include <chrono>
#include <future>
#include <sstream>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace {

// A failure attributable to one CSP; the CSP is left out of later groups.
class CspFault : public Error {
 public:
  CspFault(CspId csp, bool down, const std::string& what)
      : Error(what), csp_(csp), down_(down) {}
  CspId csp() const { return csp_; }
  bool down() const { return down_; }

 private:
  CspId csp_;
  bool down_;
};

Value cell_value(const Cell& c) {
  if (auto i = std::get_if<std::int64_t>(&c)) return *i;
  if (auto b = std::get_if<bool>(&c)) return *b;
  return std::monostate{};
}

std::optional<PlainValue> to_plain(const Value& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return PlainValue{*i};
  if (auto b = std::get_if<bool>(&v)) return PlainValue{*b};
  return std::nullopt;
}

std::string key_text(const Value& v) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  return format_value(v);
}

bool has_wildcard(const std::string& pattern) {
  return pattern.find_first_of("%_") != std::string::npos;
}

std::string flip(const std::string& cmp) {
  if (cmp == "<") return ">";
  if (cmp == "<=") return ">=";
  if (cmp == ">") return "<";
  if (cmp == ">=") return "<=";
  return cmp;
}

// Calls fn on every CSP of the group concurrently and gathers the results
// in group order. The first failure (in group order) is rethrown as a
// CspFault naming its CSP.
template <typename T>
std::vector<T> fan_out(const std::vector<CspId>& group, const std::function<T(CspId)>& fn) {
  std::vector<std::future<T>> futures;
  futures.reserve(group.size());
  for (CspId k : group) futures.push_back(std::async(std::launch::async, fn, k));
  std::vector<T> out;
  std::optional<CspFault> fault;
  std::exception_ptr other;
  for (std::size_t x = 0; x < group.size(); ++x) {
    try {
      out.push_back(futures[x].get());
    } catch (const UnavailableError& e) {
      if (!fault) fault.emplace(group[x], true, e.what());
    } catch (const RemoteError& e) {
      if (e.code() == "bad_request" || e.code() == "bad_predicate" || e.code() == "schema") {
        if (!other) other = std::current_exception();
      } else if (!fault) {
        fault.emplace(group[x], false, e.what());
      }
    } catch (const ProtocolError& e) {
      if (!fault) fault.emplace(group[x], false, e.what());
    } catch (...) {
      if (!other) other = std::current_exception();
    }
  }
  if (fault) throw *fault;
  if (other) std::rethrow_exception(other);
  return out;
}

Value decode_cell(const std::vector<const Cell*>& cells, const std::vector<CspId>& group,
                  const ReconstructionContext& ctx, const ColumnCodec& codec,
                  const SharingConfig& config) {
  std::size_t nulls = 0;
  std::vector<const SharedCell*> shared;
  for (const Cell* c : cells) {
    if (std::holds_alternative<std::monostate>(*c)) {
      ++nulls;
    } else if (const auto* sc = std::get_if<SharedCell>(c)) {
      shared.push_back(sc);
    } else {
      throw CorruptionError("plaintext value in a shared column");
    }
  }
  if (nulls == cells.size()) return std::monostate{};
  if (nulls != 0) throw CorruptionError("CSPs disagree on NULL");
  const std::size_t blocks = shared[0]->shares.size();
  EncodedValue ev;
  ev.form = EncodedValue::Form::kBlocks;
  std::vector<BigInt> shares(shared.size());
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t x = 0; x < shared.size(); ++x) {
      if (shared[x]->shares.size() != blocks) throw CorruptionError("CSPs disagree on block count");
      if (outer_signature(shared[x]->shares[b], config.p2) != shared[x]->sigs[b]) {
        throw CspFault(group[x], false,
                       "CSP " + std::to_string(group[x]) + " returned a share failing its outer signature");
      }
      shares[x] = shared[x]->shares[b];
    }
    ev.blocks.push_back(reconstruct_block(shares, ctx, config.p));
  }
  return blocks_to_value(ev, codec, config);
}

Predicate predicate_for(const Catalog& catalog, const TableDef& table,
                        const std::vector<PlannedAtom>& atoms, CspId k) {
  Predicate out;
  for (const auto& a : atoms) {
    if (!a.shared) {
      out.push_back(a.plain);
      continue;
    }
    Atom atom;
    atom.op = Atom::Op::kShareIn;
    atom.cols = {a.column};
    const ColumnDef& col = table.column(a.column);
    for (const auto& lit : a.literals) {
      if (auto tuple = rewrite_equality(catalog, col, lit, k)) atom.tuples.push_back(std::move(*tuple));
    }
    out.push_back(std::move(atom));
  }
  return out;
}

}  // namespace

CspPool::CspPool(std::vector<std::shared_ptr<StoreClient>> clients) {
  for (auto& c : clients) {
    const CspId id = c->id();
    entries_[id].client = std::move(c);
  }
}

std::vector<CspId> CspPool::ids() const {
  std::lock_guard lock(mu_);
  std::vector<CspId> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

StoreClient& CspPool::client(CspId id) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw ConfigError("unknown CSP " + std::to_string(id));
  return *it->second.client;
}

void CspPool::probe() {
  for (CspId id : ids()) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      client(id).health();
    } catch (const Error&) {
      ok = false;
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::lock_guard lock(mu_);
    entries_[id].down = !ok;
    entries_[id].latency_ms = ms;
  }
}

void CspPool::mark_down(CspId id) {
  std::lock_guard lock(mu_);
  entries_.at(id).down = true;
}

void CspPool::mark_up(CspId id) {
  std::lock_guard lock(mu_);
  entries_.at(id).down = false;
}

bool CspPool::is_down(CspId id) const {
  std::lock_guard lock(mu_);
  return entries_.at(id).down;
}

std::vector<CspId> CspPool::preferred() const {
  std::lock_guard lock(mu_);
  std::vector<std::pair<std::int64_t, CspId>> order;
  for (const auto& [id, e] : entries_) {
    if (!e.down) order.emplace_back(static_cast<std::int64_t>(e.latency_ms), id);
  }
  std::sort(order.begin(), order.end());
  std::vector<CspId> out;
  for (const auto& [lat, id] : order) out.push_back(id);
  return out;
}

std::string placement_name(Placement p) {
  switch (p) {
    case Placement::kPushdown: return "pushdown";
    case Placement::kTransform: return "transform";
    case Placement::kClient: return "client";
  }
  return "?";
}

std::optional<std::vector<BigInt>> rewrite_equality(const Catalog& catalog, const ColumnDef& column,
                                                    const Value& literal, CspId k) {
  if (!column.codec.encrypted() || is_null(literal)) return std::nullopt;
  EncodedValue ev;
  try {
    ev = value_to_blocks(coerce_to(literal, column.codec), column.codec, catalog.config);
  } catch (const RangeError&) {
    return std::nullopt;
  } catch (const QueryError&) {
    return std::nullopt;
  }
  if (ev.form != EncodedValue::Form::kBlocks) return std::nullopt;
  const auto& row = catalog.coeffs.row(k);
  std::vector<BigInt> out;
  out.reserve(ev.blocks.size());
  for (const auto& b : ev.blocks) out.push_back(share_value(b, row));
  return out;
}

std::optional<std::vector<Value>> enumerate_range(const ColumnDef& column, std::int64_t p,
                                                  const std::optional<Value>& lo, bool lo_inclusive,
                                                  const std::optional<Value>& hi, bool hi_inclusive,
                                                  std::size_t cap) {
  using i128 = __int128;
  const ColumnCodec& codec = column.codec;
  if (!codec.encrypted()) return std::nullopt;
  const auto capacity = static_cast<i128>(digit_capacity(p, codec.width));
  i128 dom_lo = 0, dom_hi = capacity - 1;
  switch (codec.kind) {
    case ColumnKind::kInteger:
    case ColumnKind::kDate:
      if (codec.is_signed) {
        dom_lo = -(capacity / 2);
        dom_hi = (capacity - 1) / 2;
      }
      break;
    case ColumnKind::kCharacter:
      dom_hi = std::min<i128>(dom_hi, 0x10FFFF);
      break;
    default:
      return std::nullopt;
  }

  // Integral bound for one side; strict bounds step inward.
  auto bound = [&](const Value& v, bool is_lo, bool inclusive) -> std::optional<i128> {
    i128 x = 0;
    bool exact = true;
    if (codec.kind == ColumnKind::kInteger) {
      if (auto i = std::get_if<std::int64_t>(&v)) {
        x = *i;
      } else if (auto d = std::get_if<Decimal>(&v)) {
        i128 pow = 1;
        for (int s = 0; s < d->scale; ++s) pow *= 10;
        i128 q = d->units / pow, r = d->units % pow;
        if (r < 0) {
          q -= 1;
          r += pow;
        }
        exact = r == 0;
        x = (is_lo && !exact) ? q + 1 : q;
      } else {
        return std::nullopt;
      }
    } else if (codec.kind == ColumnKind::kDate) {
      Value c;
      try {
        c = coerce_to(v, codec);
      } catch (const Error&) {
        return std::nullopt;
      }
      x = std::get<Date>(c).days;
    } else {
      const auto* s = std::get_if<std::string>(&v);
      if (!s) return std::nullopt;
      auto cps = utf8_decode(*s);
      if (cps.size() != 1) return std::nullopt;
      x = cps[0];
    }
    if (exact && !inclusive) x += is_lo ? 1 : -1;
    return x;
  };

  i128 from = dom_lo, to = dom_hi;
  if (lo) {
    auto b = bound(*lo, true, lo_inclusive);
    if (!b) return std::nullopt;
    from = std::max(from, *b);
  }
  if (hi) {
    auto b = bound(*hi, false, hi_inclusive);
    if (!b) return std::nullopt;
    to = std::min(to, *b);
  }
  std::vector<Value> out;
  if (from > to) return out;
  if (to - from + 1 > static_cast<i128>(cap)) return std::nullopt;
  for (i128 x = from; x <= to; ++x) {
    switch (codec.kind) {
      case ColumnKind::kInteger: out.emplace_back(static_cast<std::int64_t>(x)); break;
      case ColumnKind::kDate: out.emplace_back(Date{static_cast<std::int32_t>(x)}); break;
      default: {
        if (x >= 0xD800 && x <= 0xDFFF) continue;
        const auto cp = static_cast<std::uint32_t>(x);
        out.emplace_back(utf8_encode(std::span<const std::uint32_t>(&cp, 1)));
      }
    }
  }
  return out;
}

std::optional<std::vector<std::vector<BigInt>>> rewrite_range(const Catalog& catalog,
                                                              const ColumnDef& column,
                                                              const Value& lo, const Value& hi,
                                                              CspId k, std::size_t cap) {
  auto points = enumerate_range(column, catalog.config.p, lo, true, hi, true, cap);
  if (!points) return std::nullopt;
  std::vector<std::vector<BigInt>> out;
  for (const auto& v : *points) {
    if (auto t = rewrite_equality(catalog, column, v, k)) out.push_back(std::move(*t));
  }
  return out;
}

Value reconstruct_sum(const std::vector<std::vector<BigInt>>& sums, std::int64_t rows,
                      const ReconstructionContext& ctx, const ColumnCodec& codec,
                      const SharingConfig& config) {
  if (!codec.additive()) {
    throw QueryError(kind_name(codec.kind) + " column is not additive on shares");
  }
  const std::size_t t = ctx.group.size();
  if (sums.size() != t) throw CorruptionError("share sums from a wrong number of CSPs");
  const std::size_t blocks = sums[0].size();
  const std::size_t slot = t - 1;
  const auto width = static_cast<std::size_t>(codec.width);
  BigInt total = 0;
  BigInt weight = 1;
  std::vector<BigInt> column(t);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t x = 0; x < t; ++x) {
      if (sums[x].size() != blocks) throw CorruptionError("CSPs disagree on block count");
      column[x] = sums[x][b];
    }
    std::vector<BigInt> v = solve_shares(column, ctx);
    BigInt digit_total = 0;
    for (std::size_t i = 0; i < slot; ++i) {
      // Every summed row shifted each digit by +2.
      BigInt d = v[i] - 2 * BigInt(rows);
      digit_total += d;
      if (b * slot + i < width) {
        total += d * weight;
        weight *= config.p;
      }
    }
    BigInt diff = (v[slot] - digit_total) % config.p;
    if (diff != 0) throw CorruptionError("aggregate failed its inner signature check");
  }
  if (total < 0 || total > std::numeric_limits<std::int64_t>::max()) {
    throw RangeError("sum does not fit a 64-bit integer");
  }
  const auto units = total.convert_to<std::int64_t>();
  if (codec.kind == ColumnKind::kReal) return Decimal{units, codec.scale};
  return units;
}

Router::Router(const Catalog& catalog, CspPool& pool, RouterOptions options)
    : catalog_(catalog), pool_(pool), options_(options) {}

Value Router::present(const ColumnDef& column, const Value& raw) const {
  if (column.key_domain.empty()) return raw;
  const auto* seq = std::get_if<std::int64_t>(&raw);
  if (!seq) return raw;
  auto orig = catalog_.original_key(column.key_domain, *seq);
  if (!orig) return raw;
  std::int64_t as_int = 0;
  auto [ptr, ec] = std::from_chars(orig->data(), orig->data() + orig->size(), as_int);
  if (ec == std::errc() && ptr == orig->data() + orig->size() && std::to_string(as_int) == *orig) {
    return as_int;
  }
  return *orig;
}

void Router::run_on_groups(
    const std::function<void(const std::vector<CspId>&, const ReconstructionContext&)>& attempt)
    const {
  const auto t = static_cast<std::size_t>(catalog_.config.t);
  std::set<CspId> excluded;
  std::set<std::vector<CspId>> tried;
  bool integrity = false;
  std::string last_error;
  for (;;) {
    std::vector<CspId> avail;
    for (CspId id : pool_.preferred()) {
      if (!excluded.count(id)) avail.push_back(id);
    }
    if (avail.size() < t) {
      const std::string detail = last_error.empty() ? "" : " (last error: " + last_error + ")";
      if (integrity) {
        throw IntegrityError("no group of " + std::to_string(t) + " CSPs returned verifiable shares" +
                             detail);
      }
      throw UnavailableError("only " + std::to_string(avail.size()) + " healthy CSPs, " +
                             std::to_string(t) + " needed" + detail);
    }
    // First untried t-subset in preference order.
    std::optional<std::vector<CspId>> group;
    std::vector<bool> pick(avail.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(t), true);
    do {
      std::vector<CspId> g;
      for (std::size_t i = 0; i < avail.size(); ++i) {
        if (pick[i]) g.push_back(avail[i]);
      }
      if (!tried.count(g)) {
        group = std::move(g);
        break;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (!group) {
      throw IntegrityError("every group of " + std::to_string(t) +
                           " CSPs failed verification (last error: " + last_error + ")");
    }
    tried.insert(*group);
    try {
      ReconstructionContext ctx = build_reconstruction(*group, catalog_.coeffs);
      attempt(*group, ctx);
      return;
    } catch (const CspFault& f) {
      excluded.insert(f.csp());
      if (f.down()) {
        pool_.mark_down(f.csp());
      } else {
        integrity = true;
      }
      last_error = f.what();
    } catch (const CorruptionError& e) {
      integrity = true;
      last_error = e.what();
    }
    ++substitutions_;
  }
}

std::vector<Row> Router::fetch_once(const TableDef& table, const std::vector<std::string>& projection,
                                    const std::vector<PlannedAtom>& atoms,
                                    const std::vector<CspId>& group,
                                    const ReconstructionContext& ctx) const {
  const SharedTableSchema schema = catalog_.shared_schema(table);
  auto replies = fan_out<std::vector<ShareRow>>(group, [&](CspId k) {
    return pool_.client(k).select(schema, projection, predicate_for(catalog_, table, atoms, k));
  });
  std::vector<std::size_t> pk_pos;
  for (const auto& k : table.primary_key) {
    auto it = std::find(projection.begin(), projection.end(), k);
    if (it == projection.end()) throw QueryError("projection lacks primary key column " + k);
    pk_pos.push_back(static_cast<std::size_t>(it - projection.begin()));
  }
  auto key_of = [&](const ShareRow& r) {
    std::vector<PlainValue> key;
    for (std::size_t i : pk_pos) {
      const Cell& c = r.cells.at(i);
      if (auto v = std::get_if<std::int64_t>(&c)) {
        key.emplace_back(*v);
      } else if (auto b = std::get_if<bool>(&c)) {
        key.emplace_back(*b);
      } else {
        key.emplace_back(std::monostate{});
      }
    }
    return key;
  };
  const std::size_t t = group.size();
  std::vector<std::map<std::vector<PlainValue>, const ShareRow*, PlainLess>> index(t);
  for (std::size_t x = 1; x < t; ++x) {
    for (const auto& r : replies[x]) index[x].emplace(key_of(r), &r);
  }
  const bool plain_only =
      std::none_of(atoms.begin(), atoms.end(), [](const PlannedAtom& a) { return a.shared; });
  if (plain_only) {
    // Key-only filters select the same rows everywhere.
    for (std::size_t x = 1; x < t; ++x) {
      if (replies[x].size() != replies[0].size()) {
        throw CorruptionError("CSPs returned different row sets for " + table.name);
      }
    }
  }
  std::vector<std::size_t> col_idx;
  for (const auto& c : projection) col_idx.push_back(table.index_of(c));
  std::vector<Row> out;
  out.reserve(replies[0].size());
  std::vector<const ShareRow*> members(t);
  std::vector<const Cell*> cells(t);
  for (const auto& r0 : replies[0]) {
    members[0] = &r0;
    bool everywhere = true;
    const auto key = key_of(r0);
    for (std::size_t x = 1; x < t && everywhere; ++x) {
      auto it = index[x].find(key);
      if (it == index[x].end()) {
        everywhere = false;
      } else {
        members[x] = it->second;
      }
    }
    if (!everywhere) {
      if (plain_only) throw CorruptionError("CSPs returned different row sets for " + table.name);
      continue;
    }
    Row row(table.columns.size());
    for (std::size_t j = 0; j < projection.size(); ++j) {
      const ColumnDef& col = table.columns[col_idx[j]];
      for (std::size_t x = 0; x < t; ++x) cells[x] = &members[x]->cells.at(j);
      if (col.codec.encrypted()) {
        row[col_idx[j]] = decode_cell(cells, group, ctx, col.codec, catalog_.config);
      } else {
        for (std::size_t x = 1; x < t; ++x) {
          if (!(*cells[x] == *cells[0])) {
            throw CorruptionError("CSPs disagree on plaintext column " + col.name);
          }
        }
        row[col_idx[j]] = cell_value(*cells[0]);
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Row> Router::fetch_table(const std::string& table_name,
                                     const std::vector<std::string>& projection,
                                     const std::vector<PlannedAtom>& atoms) const {
  const TableDef& table = catalog_.table(table_name);
  std::vector<std::string> proj = projection.empty() ? table.column_names() : projection;
  for (const auto& k : table.primary_key) {
    if (std::find(proj.begin(), proj.end(), k) == proj.end()) proj.push_back(k);
  }
  std::vector<Row> rows;
  run_on_groups([&](const std::vector<CspId>& group, const ReconstructionContext& ctx) {
    rows = fetch_once(table, proj, atoms, group, ctx);
  });
  return rows;
}

namespace {

struct RangeBounds {
  std::optional<Value> lo, hi;
  bool lo_inclusive = true, hi_inclusive = true;
  std::vector<std::size_t> clauses;
  bool usable = true;
};

// Tightens a bound; false when the literal is not comparable.
bool tighten(RangeBounds& r, const std::string& cmp, const Value& v) {
  try {
    if (cmp == ">" || cmp == ">=") {
      const bool incl = cmp == ">=";
      if (!r.lo || compare_values(v, *r.lo) > 0 ||
          (compare_values(v, *r.lo) == 0 && !incl)) {
        r.lo = v;
        r.lo_inclusive = incl;
      }
    } else {
      const bool incl = cmp == "<=";
      if (!r.hi || compare_values(v, *r.hi) < 0 ||
          (compare_values(v, *r.hi) == 0 && !incl)) {
        r.hi = v;
        r.hi_inclusive = incl;
      }
    }
  } catch (const QueryError&) {
    return false;
  }
  return true;
}

void walk_columns(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
  if (!e) return;
  if (e->is_column()) fn(*e);
  walk_columns(e->lhs, fn);
  walk_columns(e->rhs, fn);
}

void walk_condition(const Condition& c, const std::function<void(const Expr&)>& fn) {
  walk_columns(c.lhs, fn);
  walk_columns(c.rhs, fn);
  walk_columns(c.lo, fn);
  walk_columns(c.hi, fn);
  for (const auto& e : c.list) walk_columns(e, fn);
  for (const auto& ch : c.children) walk_condition(ch, fn);
}

}  // namespace

QueryPlan Router::plan(const SelectStmt& stmt) const {
  QueryPlan qp;
  qp.stmt = stmt;
  auto scope = std::make_shared<Scope>(
      stmt, [&](const std::string& t) { return catalog_.table(t).column_names(); });
  qp.scope = scope;
  {
    auto pref = pool_.preferred();
    const auto t = static_cast<std::size_t>(catalog_.config.t);
    qp.group.assign(pref.begin(), pref.begin() + static_cast<std::ptrdiff_t>(std::min(t, pref.size())));
  }
  const std::size_t n = scope->size();
  std::vector<TableFetch> fetch(n);
  std::vector<std::set<std::string>> needed(n);
  for (std::size_t a = 0; a < n; ++a) {
    fetch[a].alias = a;
    fetch[a].table = scope->table(a);
  }
  auto need = [&](const Expr& e) {
    auto r = scope->resolve(e);
    needed[r.alias].insert(scope->columns(r.alias)[r.column]);
  };
  if (stmt.star) {
    for (std::size_t a = 0; a < n; ++a) {
      for (const auto& c : scope->columns(a)) needed[a].insert(c);
    }
  }
  for (const auto& item : stmt.items) walk_columns(item.expr, need);
  for (const auto& c : stmt.where) walk_condition(c, need);
  for (const auto& g : stmt.group_by) walk_columns(g, need);
  for (const auto& c : stmt.having) walk_condition(c, need);
  for (const auto& o : stmt.order_by) {
    // ORDER BY may name an output alias instead of a column.
    try {
      walk_columns(o.expr, need);
    } catch (const QueryError&) {
    }
  }

  struct KeyEdge {
    std::size_t a, b;
    std::string col_a, col_b;
  };
  std::vector<KeyEdge> edges;
  std::map<std::pair<std::size_t, std::string>, RangeBounds> ranges;
  std::vector<std::optional<ClauseDecision>> decisions(stmt.where.size());
  bool residual = false;

  for (std::size_t i = 0; i < stmt.where.size(); ++i) {
    const Condition& c0 = stmt.where[i];
    auto used = scope->aliases_in(c0);
    ClauseDecision d;
    d.clause = c0.text();
    d.placement = Placement::kClient;
    if (used.size() == 1) fetch[used[0]].local_conditions.push_back(i);

    // Normalise "literal op column".
    Condition c = c0;
    if (c.kind == Condition::Kind::kCompare && c.lhs->is_literal() && c.rhs->is_column()) {
      std::swap(c.lhs, c.rhs);
      c.cmp = flip(c.cmp);
    }

    if (used.size() == 2 && c.kind == Condition::Kind::kCompare && c.cmp == "=" &&
        c.lhs->is_column() && c.rhs->is_column()) {
      auto l = scope->resolve(*c.lhs), r = scope->resolve(*c.rhs);
      const ColumnDef& lc = catalog_.table(scope->table(l.alias)).columns[l.column];
      const ColumnDef& rc = catalog_.table(scope->table(r.alias)).columns[r.column];
      if (lc.codec.kind == ColumnKind::kKey && rc.codec.kind == ColumnKind::kKey &&
          lc.key_domain == rc.key_domain) {
        edges.push_back({l.alias, r.alias, lc.name, rc.name});
        d.placement = Placement::kPushdown;
        d.note = "key join";
      } else {
        d.note = "join on shared values needs reconstruction";
      }
      decisions[i] = d;
      if (d.placement == Placement::kClient) residual = true;
      continue;
    }
    if (used.size() != 1 || !c.lhs || !c.lhs->is_column()) {
      d.note = "evaluated on reconstructed rows";
      decisions[i] = d;
      residual = true;
      continue;
    }
    const std::size_t a = used[0];
    const TableDef& table = catalog_.table(scope->table(a));
    const ColumnDef& col = table.columns[scope->resolve(*c.lhs).column];
    auto literals_only = [&]() {
      if (c.rhs && !c.rhs->is_literal()) return false;
      if (c.lo && !c.lo->is_literal()) return false;
      if (c.hi && !c.hi->is_literal()) return false;
      return std::all_of(c.list.begin(), c.list.end(), [](const ExprPtr& e) { return e->is_literal(); });
    };
    auto push_plain = [&](Atom atom, const std::string& note) {
      PlannedAtom pa;
      pa.plain = std::move(atom);
      pa.text = c0.text();
      fetch[a].atoms.push_back(std::move(pa));
      d.placement = Placement::kPushdown;
      d.note = note;
    };
    auto push_shared = [&](std::vector<Value> points, const std::string& note) {
      PlannedAtom pa;
      pa.shared = true;
      pa.column = col.name;
      for (auto& v : points) {
        try {
          Value coerced = coerce_to(v, col.codec);
          value_to_blocks(coerced, col.codec, catalog_.config);
          pa.literals.push_back(std::move(coerced));
        } catch (const Error&) {
          // Outside the column domain: it can match nothing.
        }
      }
      pa.text = c0.text();
      d.note = note + ", " + std::to_string(pa.literals.size()) + " literal(s)";
      fetch[a].atoms.push_back(std::move(pa));
      d.placement = Placement::kTransform;
    };
    auto null_atom = [&]() {
      Atom atom;
      atom.op = c.negated ? Atom::Op::kNotNull : Atom::Op::kIsNull;
      atom.cols = {col.name};
      push_plain(std::move(atom), "NULL test");
    };

    if (c.kind == Condition::Kind::kIsNull) {
      null_atom();
    } else if (!literals_only()) {
      d.note = "compares against a non-literal";
    } else if (col.codec.kind == ColumnKind::kKey || col.codec.kind == ColumnKind::kBoolean) {
      const bool replaced = !col.key_domain.empty();
      auto plain_of = [&](const Value& v) -> std::optional<PlainValue> {
        if (replaced) {
          if (is_null(v)) return std::nullopt;
          auto seq = catalog_.find_key(col.key_domain, key_text(v));
          return PlainValue{seq.value_or(0)};  // sequences start at 1
        }
        if (col.codec.kind == ColumnKind::kBoolean) {
          if (auto b = std::get_if<bool>(&v)) return PlainValue{*b};
          return std::nullopt;
        }
        try {
          Value k = coerce_to(v, col.codec);
          return to_plain(k);
        } catch (const QueryError&) {
          return std::nullopt;
        }
      };
      if (c.kind == Condition::Kind::kCompare) {
        auto v = plain_of(c.rhs->literal);
        const bool ordered = !replaced && col.codec.kind == ColumnKind::kKey;
        if (v && (c.cmp == "=" || c.cmp == "<>" || ordered)) {
          Atom atom;
          atom.op = c.cmp == "=" ? Atom::Op::kEq : c.cmp == "<>" ? Atom::Op::kNe : Atom::Op::kCmp;
          atom.cmp = atom.op == Atom::Op::kCmp ? c.cmp : "";
          atom.cols = {col.name};
          atom.values = {{*v}};
          push_plain(std::move(atom), "plaintext key");
        } else {
          d.note = replaced ? "order of replaced keys is hidden" : "literal outside key domain";
        }
      } else if (c.kind == Condition::Kind::kIn && !c.negated) {
        Atom atom;
        atom.op = Atom::Op::kIn;
        atom.cols = {col.name};
        bool ok = true;
        for (const auto& e : c.list) {
          if (is_null(e->literal)) continue;
          auto v = plain_of(e->literal);
          if (!v) {
            ok = false;
            break;
          }
          atom.values.push_back({*v});
        }
        if (ok) push_plain(std::move(atom), "plaintext key IN-list");
      } else if (c.kind == Condition::Kind::kBetween && !c.negated && !replaced &&
                 col.codec.kind == ColumnKind::kKey) {
        auto lo = plain_of(c.lo->literal), hi = plain_of(c.hi->literal);
        if (lo && hi) {
          Atom ge, le;
          ge.op = le.op = Atom::Op::kCmp;
          ge.cmp = ">=";
          le.cmp = "<=";
          ge.cols = le.cols = {col.name};
          ge.values = {{*lo}};
          le.values = {{*hi}};
          push_plain(std::move(ge), "plaintext key range");
          push_plain(std::move(le), "plaintext key range");
        }
      }
      if (d.placement == Placement::kClient && d.note.empty()) d.note = "not expressible on keys";
    } else {
      // Shared column.
      if (c.kind == Condition::Kind::kCompare && c.cmp == "=") {
        push_shared({c.rhs->literal}, "share equality");
      } else if (c.kind == Condition::Kind::kIn && !c.negated) {
        std::vector<Value> pts;
        for (const auto& e : c.list) {
          if (!is_null(e->literal)) pts.push_back(e->literal);
        }
        push_shared(std::move(pts), "share IN-list");
      } else if (c.kind == Condition::Kind::kLike && !c.negated && !has_wildcard(c.pattern)) {
        push_shared({Value{c.pattern}}, "exact LIKE as share equality");
      } else if ((c.kind == Condition::Kind::kCompare && c.cmp != "<>") ||
                 (c.kind == Condition::Kind::kBetween && !c.negated)) {
        auto& r = ranges[{a, col.name}];
        r.clauses.push_back(i);
        if (c.kind == Condition::Kind::kBetween) {
          r.usable = r.usable && tighten(r, ">=", c.lo->literal) && tighten(r, "<=", c.hi->literal);
        } else {
          r.usable = r.usable && tighten(r, c.cmp, c.rhs->literal);
        }
        continue;  // decided once all bounds on this column are known
      } else if (c.kind == Condition::Kind::kLike) {
        d.note = "LIKE with wildcards requires full reconstruction";
      } else {
        d.note = "not expressible as share equality";
      }
    }
    if (d.placement == Placement::kClient) residual = true;
    decisions[i] = d;
  }

  for (auto& [key, r] : ranges) {
    const auto& [a, column] = key;
    const ColumnDef& col = catalog_.table(scope->table(a)).column(column);
    std::optional<std::vector<Value>> points;
    if (r.usable) {
      points = enumerate_range(col, catalog_.config.p, r.lo, r.lo_inclusive, r.hi, r.hi_inclusive,
                               options_.range_cap);
    }
    std::string text;
    for (std::size_t i : r.clauses) text += (text.empty() ? "" : " AND ") + stmt.where[i].text();
    if (points) {
      PlannedAtom pa;
      pa.shared = true;
      pa.column = column;
      for (auto& v : *points) {
        if (rewrite_equality(catalog_, col, v, catalog_.config.csp_ids[0])) pa.literals.push_back(v);
      }
      pa.text = text;
      const std::string note = "range as share IN-list, " + std::to_string(pa.literals.size()) + " point(s)";
      fetch[a].atoms.push_back(std::move(pa));
      for (std::size_t i : r.clauses) decisions[i] = ClauseDecision{stmt.where[i].text(), Placement::kTransform, note};
    } else {
      residual = true;
      for (std::size_t i : r.clauses) {
        decisions[i] = ClauseDecision{stmt.where[i].text(), Placement::kClient,
                                      "range not enumerable: full reconstruction"};
      }
    }
  }
  for (auto& d : decisions) qp.clauses.push_back(*d);

  // Aggregate pushdown: one table, key-only grouping, additive sums and no
  // residual filter.
  std::optional<AggregatePlan> agg;
  if (options_.aggregate_pushdown && n == 1 && stmt.is_aggregate() && !stmt.distinct && !residual) {
    const TableDef& table = catalog_.table(scope->table(0));
    AggregatePlan ap;
    bool ok = true;
    std::set<std::string> group_text;
    for (const auto& g : stmt.group_by) {
      if (!g->is_column()) {
        ok = false;
        break;
      }
      const ColumnDef& col = table.columns[scope->resolve(*g).column];
      if (col.codec.encrypted()) {
        ok = false;
        break;
      }
      ap.group_by.push_back(col.name);
      group_text.insert(scope->canonical(*g));
    }
    // Bare columns outside aggregates must be grouping columns.
    std::function<void(const ExprPtr&)> check = [&](const ExprPtr& e) {
      if (!e || e->kind == Expr::Kind::kAggregate) return;
      if (e->is_column() && !group_text.count(scope->canonical(*e))) ok = false;
      check(e->lhs);
      check(e->rhs);
    };
    std::function<void(const Condition&)> check_cond = [&](const Condition& c) {
      check(c.lhs);
      check(c.rhs);
      check(c.lo);
      check(c.hi);
      for (const auto& e : c.list) check(e);
      for (const auto& ch : c.children) check_cond(ch);
    };
    if (ok) {
      for (const auto& item : stmt.items) check(item.expr);
      for (const auto& h : stmt.having) check_cond(h);
      for (const auto& o : stmt.order_by) {
        // Output aliases and positions resolve against the select list.
        if (o.expr->is_literal()) continue;
        if (o.expr->is_column() && o.expr->table.empty() &&
            std::any_of(stmt.items.begin(), stmt.items.end(),
                        [&](const SelectItem& it) { return it.alias == o.expr->column; })) {
          continue;
        }
        check(o.expr);
      }
    }
    if (ok) {
      for (const auto& a : collect_aggregates(stmt, *scope)) {
        AggregatePlan::Source src;
        src.func = a->func;
        if (!a->lhs) {
          if (a->func != "COUNT") ok = false;
          ap.sources.push_back(src);
          continue;
        }
        if (a->func == "MIN" || a->func == "MAX" || !a->lhs->is_column()) {
          ok = false;
          break;
        }
        const ColumnDef& col = table.columns[scope->resolve(*a->lhs).column];
        if (!col.codec.encrypted()) {
          if (a->func == "COUNT" && !col.codec.nullable) {
            ap.sources.push_back(src);  // same as COUNT(*)
            continue;
          }
          ok = false;
          break;
        }
        if (col.codec.fixed_blocks(catalog_.config.t) <= 0 ||
            (a->func != "COUNT" && !col.codec.additive())) {
          ok = false;
          break;
        }
        auto it = std::find(ap.sums.begin(), ap.sums.end(), col.name);
        if (it == ap.sums.end()) it = ap.sums.insert(ap.sums.end(), col.name);
        src.sum = static_cast<int>(it - ap.sums.begin());
        ap.sources.push_back(src);
      }
    }
    if (ok) {
      ap.key_phase = std::any_of(fetch[0].atoms.begin(), fetch[0].atoms.end(),
                                 [](const PlannedAtom& pa) { return pa.shared; });
      agg = std::move(ap);
    }
  }

  // Fetch order: filtered entries first, then entries reachable through key
  // joins, then the rest.
  std::vector<std::size_t> order;
  std::vector<bool> placed(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    if (!fetch[a].atoms.empty()) {
      order.push_back(a);
      placed[a] = true;
    }
  }
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (placed[a]) continue;
      const bool linked = std::any_of(edges.begin(), edges.end(), [&](const KeyEdge& e) {
        return (e.a == a && placed[e.b]) || (e.b == a && placed[e.a]);
      });
      if (linked) {
        order.push_back(a);
        placed[a] = grew = true;
      }
    }
    if (!grew) {
      for (std::size_t a = 0; a < n; ++a) {
        if (!placed[a]) {
          order.push_back(a);
          placed[a] = grew = true;
          break;
        }
      }
    }
  }
  std::vector<bool> done(n, false);
  for (std::size_t a : order) {
    TableFetch f = fetch[a];
    const TableDef& table = catalog_.table(f.table);
    if (options_.semi_joins) {
      for (const auto& e : edges) {
        if (e.a == a && done[e.b]) f.semi_joins.push_back({e.col_a, e.b, e.col_b});
        if (e.b == a && done[e.a]) f.semi_joins.push_back({e.col_b, e.a, e.col_a});
      }
    }
    std::set<std::string> cols = needed[a];
    for (const auto& k : table.primary_key) cols.insert(k);
    for (const auto& c : table.columns) {
      if (cols.count(c.name)) f.projection.push_back(c.name);
    }
    if (agg) {
      // The key phase only needs keys and the filtered columns.
      std::set<std::string> phase_cols(table.primary_key.begin(), table.primary_key.end());
      for (std::size_t i : f.local_conditions) {
        walk_condition(stmt.where[i], [&](const Expr& e) {
          phase_cols.insert(scope->columns(0)[scope->resolve(e).column]);
        });
      }
      f.projection.clear();
      for (const auto& c : table.columns) {
        if (phase_cols.count(c.name)) f.projection.push_back(c.name);
      }
    }
    qp.fetches.push_back(std::move(f));
    done[a] = true;
  }

  if (agg) {
    qp.mode = QueryPlan::Mode::kAggregate;
    qp.aggregate = std::move(agg);
  }
  // Remaining clause classification for the plan listing.
  auto note = [&](std::string clause, Placement p, std::string why) {
    qp.clauses.push_back(ClauseDecision{std::move(clause), p, std::move(why)});
  };
  if (stmt.is_aggregate()) {
    for (const auto& a : collect_aggregates(stmt, *scope)) {
      if (qp.aggregate) {
        note(a->text(), Placement::kPushdown, "share sums with row count");
      } else {
        note(a->text(), Placement::kClient,
             a->func == "MIN" || a->func == "MAX" ? "order is lost on shares"
                                                  : "aggregated after reconstruction");
      }
    }
    for (const auto& g : stmt.group_by) {
      note("GROUP BY " + g->text(), qp.aggregate ? Placement::kPushdown : Placement::kClient,
           qp.aggregate ? "plaintext key grouping" : "grouped after reconstruction");
    }
    for (const auto& h : stmt.having) note("HAVING " + h.text(), Placement::kClient, "on group results");
  }
  for (const auto& o : stmt.order_by) {
    note("ORDER BY " + o.expr->text() + (o.desc ? " DESC" : ""), Placement::kClient,
         "order is lost on shares");
  }
  if (stmt.limit) note("LIMIT " + std::to_string(*stmt.limit), Placement::kClient, "after ordering");
  return qp;
}

std::string QueryPlan::explain() const {
  std::ostringstream out;
  out << "mode: " << (mode == Mode::kAggregate ? "aggregate pushdown" : "fetch and reconstruct")
      << "\n";
  out << "group:";
  for (CspId k : group) out << " " << k;
  out << "\nclauses:\n";
  std::size_t width = 0;
  for (const auto& c : clauses) width = std::max(width, c.clause.size());
  for (const auto& c : clauses) {
    std::string name = placement_name(c.placement);
    out << "  " << name << std::string(10 - name.size(), ' ') << c.clause
        << std::string(width - c.clause.size() + 2, ' ') << c.note << "\n";
  }
  out << "fetches:\n";
  for (const auto& f : fetches) {
    out << "  " << scope->alias(f.alias) << " (" << f.table << "): columns";
    for (const auto& c : f.projection) out << " " << c;
    out << "\n";
    for (const auto& a : f.atoms) {
      out << "    " << (a.shared ? "share literals: " : "key filter: ") << a.text << "\n";
    }
    for (const auto& s : f.semi_joins) {
      out << "    semi-join: " << s.column << " IN " << scope->alias(s.from_alias) << "."
          << s.from_column << "\n";
    }
  }
  if (aggregate) {
    out << "aggregate: group by";
    for (const auto& g : aggregate->group_by) out << " " << g;
    out << "; sums";
    for (const auto& s : aggregate->sums) out << " " << s;
    out << (aggregate->key_phase ? "; keys resolved first" : "") << "\n";
  }
  return out.str();
}

namespace {

// Column lookup on one FROM entry's rows.
class EntryLeaf {
 public:
  explicit EntryLeaf(const Scope& scope) : scope_(scope) {}
  ValueOf bind(const Row& row) {
    return [this, &row](const Expr& e) -> std::optional<Value> {
      if (!e.is_column()) return std::nullopt;
      auto it = cache_.find(&e);
      if (it == cache_.end()) it = cache_.emplace(&e, scope_.resolve(e).column).first;
      return row[it->second];
    };
  }

 private:
  const Scope& scope_;
  std::unordered_map<const Expr*, std::size_t> cache_;
};

}  // namespace

ResultSet Router::execute(const QueryPlan& plan) const {
  return plan.mode == QueryPlan::Mode::kAggregate ? execute_aggregate(plan) : execute_fetch(plan);
}

ResultSet Router::execute_fetch(const QueryPlan& plan) const {
  const Scope& scope = *plan.scope;
  const std::size_t n = scope.size();
  std::vector<std::vector<Row>> raw(n);
  std::vector<Relation> inputs(n);
  for (const auto& f : plan.fetches) {
    const TableDef& table = catalog_.table(f.table);
    std::vector<PlannedAtom> atoms = f.atoms;
    bool empty = false;
    for (const auto& sj : f.semi_joins) {
      const TableDef& src = catalog_.table(scope.table(sj.from_alias));
      const std::size_t idx = src.index_of(sj.from_column);
      std::set<PlainValue, PlainLess> vals;
      for (const auto& r : raw[sj.from_alias]) {
        if (auto v = to_plain(r[idx])) vals.insert(*v);
      }
      if (vals.empty()) empty = true;
      PlannedAtom pa;
      pa.plain.op = Atom::Op::kIn;
      pa.plain.cols = {sj.column};
      for (const auto& v : vals) pa.plain.values.push_back({v});
      atoms.push_back(std::move(pa));
    }
    std::vector<Row> rows;
    if (!empty) rows = fetch_table(f.table, f.projection, atoms);
    EntryLeaf leaf(scope);
    for (auto& r : rows) {
      Row shown(r.size());
      for (std::size_t j = 0; j < r.size(); ++j) shown[j] = present(table.columns[j], r[j]);
      ValueOf of = leaf.bind(shown);
      bool keep = true;
      for (std::size_t i : f.local_conditions) {
        if (eval_condition(plan.stmt.where[i], of) != Truth::kTrue) {
          keep = false;
          break;
        }
      }
      if (!keep) continue;
      raw[f.alias].push_back(std::move(r));
      inputs[f.alias].rows.push_back(std::move(shown));
    }
  }
  return evaluate(plan.stmt, scope, inputs);
}

ResultSet Router::execute_aggregate(const QueryPlan& plan) const {
  const Scope& scope = *plan.scope;
  const AggregatePlan& ap = *plan.aggregate;
  const TableFetch& f = plan.fetches.at(0);
  const TableDef& table = catalog_.table(f.table);
  std::vector<PlannedAtom> atoms = f.atoms;
  auto empty_result = [&]() {
    std::vector<GroupRow> groups;
    if (plan.stmt.group_by.empty()) {
      GroupRow g;
      for (const auto& s : ap.sources) {
        g.aggs.push_back(s.func == "COUNT" ? Value{std::int64_t{0}} : Value{});
      }
      groups.push_back(std::move(g));
    }
    return finish(plan.stmt, scope, std::move(groups));
  };
  if (ap.key_phase) {
    // Share filters may over-match per CSP; settle the exact key set first.
    std::vector<Row> rows = fetch_table(f.table, f.projection, f.atoms);
    EntryLeaf leaf(scope);
    PlannedAtom keys;
    keys.plain.op = Atom::Op::kIn;
    keys.plain.cols = table.primary_key;
    std::vector<std::size_t> pk;
    for (const auto& k : table.primary_key) pk.push_back(table.index_of(k));
    for (const auto& r : rows) {
      Row shown(r.size());
      for (std::size_t j = 0; j < r.size(); ++j) shown[j] = present(table.columns[j], r[j]);
      ValueOf of = leaf.bind(shown);
      bool keep = true;
      for (std::size_t i : f.local_conditions) {
        if (eval_condition(plan.stmt.where[i], of) != Truth::kTrue) {
          keep = false;
          break;
        }
      }
      if (!keep) continue;
      std::vector<PlainValue> tuple;
      for (std::size_t i : pk) tuple.push_back(to_plain(r[i]).value_or(PlainValue{}));
      keys.plain.values.push_back(std::move(tuple));
    }
    if (keys.plain.values.empty()) return empty_result();
    atoms = {std::move(keys)};
  }

  std::vector<GroupRow> groups;
  for (auto& g : aggregate_shares(table.name, ap.group_by, ap.sums, atoms)) {
    GroupRow row;
    for (std::size_t i = 0; i < g.key.size(); ++i) {
      row.keys.push_back(present(table.column(ap.group_by[i]), g.key[i]));
    }
    for (const auto& src : ap.sources) {
      if (src.sum < 0) {
        row.aggs.push_back(Value{g.count});
        continue;
      }
      const auto s = static_cast<std::size_t>(src.sum);
      if (src.func == "COUNT") {
        row.aggs.push_back(Value{g.nonnull[s]});
      } else if (g.nonnull[s] == 0 || src.func == "SUM") {
        row.aggs.push_back(g.sums[s]);
      } else {
        row.aggs.push_back(to_double(g.sums[s]) / static_cast<double>(g.nonnull[s]));
      }
    }
    groups.push_back(std::move(row));
  }
  return finish(plan.stmt, scope, std::move(groups));
}

std::vector<GroupTotals> Router::aggregate_shares(const std::string& table_name,
                                                  const std::vector<std::string>& group_by,
                                                  const std::vector<std::string>& sums,
                                                  const std::vector<PlannedAtom>& atoms) const {
  const TableDef& table = catalog_.table(table_name);
  std::vector<GroupTotals> groups;
  run_on_groups([&](const std::vector<CspId>& group, const ReconstructionContext& ctx) {
    auto replies = fan_out<std::vector<AggregateGroup>>(group, [&](CspId k) {
      return pool_.client(k).aggregate(table.name, group_by, sums,
                                       predicate_for(catalog_, table, atoms, k));
    });
    const std::size_t t = group.size();
    for (std::size_t x = 1; x < t; ++x) {
      if (replies[x].size() != replies[0].size()) {
        throw CorruptionError("CSPs returned different aggregate groups");
      }
    }
    std::vector<GroupTotals> out;
    for (std::size_t gi = 0; gi < replies[0].size(); ++gi) {
      const AggregateGroup& g0 = replies[0][gi];
      if (g0.sums.size() != sums.size()) throw CorruptionError("aggregate reply lacks sums");
      for (std::size_t x = 1; x < t; ++x) {
        const AggregateGroup& gx = replies[x][gi];
        bool same = gx.count == g0.count && gx.key.size() == g0.key.size() &&
                    gx.sums.size() == g0.sums.size();
        for (std::size_t i = 0; same && i < g0.key.size(); ++i) {
          same = !PlainLess{}(gx.key[i], g0.key[i]) && !PlainLess{}(g0.key[i], gx.key[i]);
        }
        for (std::size_t s = 0; same && s < g0.sums.size(); ++s) {
          same = gx.sums[s].nonnull == g0.sums[s].nonnull;
        }
        if (!same) throw CorruptionError("CSPs disagree on aggregate groups");
      }
      GroupTotals totals;
      for (const auto& k : g0.key) {
        if (auto v = std::get_if<std::int64_t>(&k)) {
          totals.key.emplace_back(*v);
        } else if (auto b = std::get_if<bool>(&k)) {
          totals.key.emplace_back(*b);
        } else {
          totals.key.emplace_back();
        }
      }
      totals.count = g0.count;
      for (std::size_t s = 0; s < sums.size(); ++s) {
        const std::int64_t nonnull = g0.sums[s].nonnull;
        totals.nonnull.push_back(nonnull);
        if (nonnull == 0) {
          totals.sums.emplace_back();
          continue;
        }
        std::vector<std::vector<BigInt>> per(t);
        for (std::size_t x = 0; x < t; ++x) per[x] = replies[x][gi].sums[s].sums;
        totals.sums.push_back(
            reconstruct_sum(per, nonnull, ctx, table.column(sums[s]).codec, catalog_.config));
      }
      out.push_back(std::move(totals));
    }
    groups = std::move(out);
  });
  return groups;
}

}  // namespace shardhouse
