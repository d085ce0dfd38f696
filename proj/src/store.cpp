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

#include "shardhouse/store.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "shardhouse/errors.h"

namespace shardhouse {

using nlohmann::json;

namespace {

std::string role_name(ColumnRole r) {
  switch (r) {
    case ColumnRole::kKey: return "key";
    case ColumnRole::kPlain: return "plain";
    case ColumnRole::kShared: return "shared";
  }
  return "?";
}

ColumnRole parse_role(const std::string& s) {
  if (s == "key") return ColumnRole::kKey;
  if (s == "plain") return ColumnRole::kPlain;
  if (s == "shared") return ColumnRole::kShared;
  throw SchemaError("unknown column role '" + s + "'");
}

bool valid_table_name(const std::string& name) {
  if (name.empty() || name.size() > 128) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

PlainValue cell_plain(const Cell& c) {
  if (auto i = std::get_if<std::int64_t>(&c)) return *i;
  if (auto b = std::get_if<bool>(&c)) return *b;
  return std::monostate{};
}

std::string key_label(const std::vector<PlainValue>& key) {
  std::string out = "(";
  for (std::size_t i = 0; i < key.size(); ++i) {
    out += (i ? "," : "") + plain_to_json(key[i]).dump();
  }
  return out + ")";
}

json shares_to_json(const std::vector<BigInt>& v) {
  json arr = json::array();
  for (const auto& e : v) arr.push_back(to_decimal(e));
  return arr;
}

std::vector<BigInt> shares_from_json(const json& j) {
  if (!j.is_array()) throw ProtocolError("share list must be an array");
  std::vector<BigInt> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) throw ProtocolError("shares travel as decimal strings");
    out.push_back(from_decimal(e.get_ref<const std::string&>()));
  }
  return out;
}

std::int64_t mod_p2(const BigInt& e, std::int64_t p2) {
  BigInt r = e % p2;
  if (r < 0) r += p2;
  return r.convert_to<std::int64_t>();
}

}  // namespace

json plain_to_json(const PlainValue& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return *i;
  if (auto b = std::get_if<bool>(&v)) return *b;
  return nullptr;
}

PlainValue plain_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  throw ProtocolError("expected a plaintext key or boolean, got " + j.dump());
}

bool PlainLess::operator()(const PlainValue& a, const PlainValue& b) const {
  if (a.index() != b.index()) return a.index() < b.index();
  if (auto x = std::get_if<std::int64_t>(&a)) return *x < std::get<std::int64_t>(b);
  if (auto x = std::get_if<bool>(&a)) return *x < std::get<bool>(b);
  return false;
}

bool PlainLess::operator()(const std::vector<PlainValue>& a,
                           const std::vector<PlainValue>& b) const {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), *this);
}

int SharedTableSchema::column_count() const {
  int n = 0;
  for (const auto& c : columns) n += c.role == ColumnRole::kShared ? 2 : 1;
  return n;
}

std::size_t SharedTableSchema::index_of(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  throw SchemaError("table " + name + " has no column '" + std::string(column) + "'");
}

void SharedTableSchema::validate() const {
  if (!valid_table_name(name)) throw SchemaError("invalid table name '" + name + "'");
  if (columns.empty()) throw SchemaError("table " + name + " has no columns");
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (c.name.empty() || !names.insert(c.name).second) {
      throw SchemaError("duplicate or empty column name in " + name);
    }
    if (c.role == ColumnRole::kShared) {
      if (c.sig_name.empty() || !names.insert(c.sig_name).second) {
        throw SchemaError("shared column " + c.name + " needs a distinct signature column");
      }
      if (c.blocks < 0) throw SchemaError("negative block count for " + c.name);
    }
  }
  if (primary_key.empty()) throw SchemaError("table " + name + " has no primary key");
  for (const auto& k : primary_key) {
    if (columns[index_of(k)].role == ColumnRole::kShared) {
      throw SchemaError("primary key column " + k + " must be plaintext");
    }
  }
  if (p2 < 2) throw SchemaError("table " + name + " lacks an outer-signature modulus");
}

json schema_to_json(const SharedTableSchema& s) {
  json cols = json::array();
  for (const auto& c : s.columns) {
    json jc = {{"name", c.name}, {"role", role_name(c.role)}, {"nullable", c.nullable}};
    if (c.role == ColumnRole::kShared) {
      jc["blocks"] = c.blocks;
      jc["sig"] = c.sig_name;
    }
    cols.push_back(std::move(jc));
  }
  return {{"name", s.name}, {"p2", s.p2}, {"primary_key", s.primary_key}, {"columns", cols}};
}

SharedTableSchema schema_from_json(const json& j) {
  try {
    SharedTableSchema s;
    s.name = j.at("name").get<std::string>();
    s.p2 = j.at("p2").get<std::int64_t>();
    s.primary_key = j.at("primary_key").get<std::vector<std::string>>();
    for (const auto& jc : j.at("columns")) {
      SharedColumn c;
      c.name = jc.at("name").get<std::string>();
      c.role = parse_role(jc.at("role").get<std::string>());
      c.nullable = jc.value("nullable", false);
      if (c.role == ColumnRole::kShared) {
        c.blocks = jc.value("blocks", 0);
        c.sig_name = jc.at("sig").get<std::string>();
      }
      s.columns.push_back(std::move(c));
    }
    return s;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed schema: ") + e.what());
  }
}

std::vector<std::size_t> all_attributes(const SharedTableSchema& schema) {
  std::vector<std::size_t> out(schema.columns.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

json row_to_json(const ShareRow& row, const SharedTableSchema& schema,
                 const std::vector<std::size_t>& attrs) {
  json arr = json::array();
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const SharedColumn& col = schema.columns[attrs[i]];
    const Cell& cell = row.cells.at(i);
    if (col.role == ColumnRole::kShared) {
      if (const auto* sc = std::get_if<SharedCell>(&cell)) {
        arr.push_back(shares_to_json(sc->shares));
        arr.push_back(sc->sigs);
      } else {
        arr.push_back(nullptr);
        arr.push_back(nullptr);
      }
    } else {
      arr.push_back(plain_to_json(cell_plain(cell)));
    }
  }
  return arr;
}

ShareRow row_from_json(const json& j, const SharedTableSchema& schema,
                       const std::vector<std::size_t>& attrs) {
  if (!j.is_array()) throw ProtocolError("row must be an array");
  ShareRow row;
  row.cells.reserve(attrs.size());
  std::size_t pos = 0;
  auto next = [&]() -> const json& {
    if (pos >= j.size()) throw ProtocolError("row is shorter than its schema");
    return j[pos++];
  };
  for (std::size_t a : attrs) {
    const SharedColumn& col = schema.columns.at(a);
    if (col.role == ColumnRole::kShared) {
      const json& shares = next();
      const json& sigs = next();
      if (shares.is_null() != sigs.is_null()) {
        throw ProtocolError("column " + col.name + " mixes NULL shares with signatures");
      }
      if (shares.is_null()) {
        row.cells.emplace_back(std::monostate{});
        continue;
      }
      SharedCell sc;
      sc.shares = shares_from_json(shares);
      if (!sigs.is_array()) throw ProtocolError("signature list must be an array");
      sc.sigs = sigs.get<std::vector<std::int64_t>>();
      row.cells.emplace_back(std::move(sc));
    } else {
      PlainValue v = plain_from_json(next());
      if (auto i = std::get_if<std::int64_t>(&v)) {
        row.cells.emplace_back(*i);
      } else if (auto b = std::get_if<bool>(&v)) {
        row.cells.emplace_back(*b);
      } else {
        row.cells.emplace_back(std::monostate{});
      }
    }
  }
  if (pos != j.size()) throw ProtocolError("row is longer than its schema");
  return row;
}

namespace {

const char* op_name(Atom::Op op) {
  switch (op) {
    case Atom::Op::kEq: return "eq";
    case Atom::Op::kNe: return "ne";
    case Atom::Op::kCmp: return "cmp";
    case Atom::Op::kIn: return "in";
    case Atom::Op::kIsNull: return "is_null";
    case Atom::Op::kNotNull: return "not_null";
    case Atom::Op::kShareEq: return "share_eq";
    case Atom::Op::kShareIn: return "share_in";
  }
  return "?";
}

Atom::Op parse_op(const std::string& s) {
  for (auto op : {Atom::Op::kEq, Atom::Op::kNe, Atom::Op::kCmp, Atom::Op::kIn, Atom::Op::kIsNull,
                  Atom::Op::kNotNull, Atom::Op::kShareEq, Atom::Op::kShareIn}) {
    if (s == op_name(op)) return op;
  }
  throw ProtocolError("unknown predicate op '" + s + "'");
}

}  // namespace

json predicate_to_json(const Predicate& pred) {
  json arr = json::array();
  for (const Atom& a : pred) {
    json ja = {{"op", op_name(a.op)}};
    switch (a.op) {
      case Atom::Op::kIn: {
        ja["cols"] = a.cols;
        json vals = json::array();
        for (const auto& tup : a.values) {
          json jt = json::array();
          for (const auto& v : tup) jt.push_back(plain_to_json(v));
          vals.push_back(std::move(jt));
        }
        ja["values"] = std::move(vals);
        break;
      }
      case Atom::Op::kShareEq:
      case Atom::Op::kShareIn: {
        ja["col"] = a.cols.at(0);
        json tups = json::array();
        for (const auto& tup : a.tuples) tups.push_back(shares_to_json(tup));
        if (a.op == Atom::Op::kShareEq) {
          ja["shares"] = tups.at(0);
        } else {
          ja["tuples"] = std::move(tups);
        }
        break;
      }
      case Atom::Op::kIsNull:
      case Atom::Op::kNotNull:
        ja["col"] = a.cols.at(0);
        break;
      case Atom::Op::kCmp:
        ja["cmp"] = a.cmp;
        [[fallthrough]];
      case Atom::Op::kEq:
      case Atom::Op::kNe:
        ja["col"] = a.cols.at(0);
        ja["value"] = plain_to_json(a.values.at(0).at(0));
        break;
    }
    arr.push_back(std::move(ja));
  }
  return arr;
}

Predicate predicate_from_json(const json& j) {
  if (j.is_null()) return {};
  if (!j.is_array()) throw ProtocolError("predicate must be an array of atoms");
  Predicate out;
  try {
    for (const auto& ja : j) {
      Atom a;
      a.op = parse_op(ja.at("op").get<std::string>());
      switch (a.op) {
        case Atom::Op::kIn:
          a.cols = ja.at("cols").get<std::vector<std::string>>();
          for (const auto& jt : ja.at("values")) {
            std::vector<PlainValue> tup;
            for (const auto& v : jt) tup.push_back(plain_from_json(v));
            if (tup.size() != a.cols.size()) throw ProtocolError("IN tuple arity mismatch");
            a.values.push_back(std::move(tup));
          }
          break;
        case Atom::Op::kShareEq:
          a.cols = {ja.at("col").get<std::string>()};
          a.tuples.push_back(shares_from_json(ja.at("shares")));
          break;
        case Atom::Op::kShareIn:
          a.cols = {ja.at("col").get<std::string>()};
          for (const auto& jt : ja.at("tuples")) a.tuples.push_back(shares_from_json(jt));
          break;
        case Atom::Op::kIsNull:
        case Atom::Op::kNotNull:
          a.cols = {ja.at("col").get<std::string>()};
          break;
        case Atom::Op::kCmp:
          a.cmp = ja.at("cmp").get<std::string>();
          if (a.cmp != "<" && a.cmp != "<=" && a.cmp != ">" && a.cmp != ">=") {
            throw ProtocolError("unknown comparison '" + a.cmp + "'");
          }
          [[fallthrough]];
        case Atom::Op::kEq:
        case Atom::Op::kNe:
          a.cols = {ja.at("col").get<std::string>()};
          a.values.push_back({plain_from_json(ja.at("value"))});
          break;
      }
      out.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed predicate: ") + e.what());
  }
  return out;
}

struct Store::Table {
  SharedTableSchema schema;
  std::vector<std::size_t> key_idx;
  std::map<std::vector<PlainValue>, ShareRow, PlainLess> rows;
  mutable std::shared_mutex mu;
  std::optional<std::filesystem::path> log_path;

  std::vector<PlainValue> key_of(const ShareRow& row) const {
    std::vector<PlainValue> key;
    key.reserve(key_idx.size());
    for (std::size_t i : key_idx) key.push_back(cell_plain(row.cells[i]));
    return key;
  }

  void check_row(const ShareRow& row) const {
    if (row.cells.size() != schema.columns.size()) {
      throw SchemaError("row arity " + std::to_string(row.cells.size()) + " does not match " +
                        schema.name);
    }
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
      const SharedColumn& col = schema.columns[i];
      const Cell& cell = row.cells[i];
      if (std::holds_alternative<std::monostate>(cell)) {
        if (!col.nullable) throw SchemaError("NULL in non-nullable column " + col.name);
        continue;
      }
      switch (col.role) {
        case ColumnRole::kKey:
          if (!std::holds_alternative<std::int64_t>(cell)) {
            throw SchemaError("key column " + col.name + " expects an integer");
          }
          break;
        case ColumnRole::kPlain:
          if (!std::holds_alternative<bool>(cell)) {
            throw SchemaError("plain column " + col.name + " expects a boolean");
          }
          break;
        case ColumnRole::kShared: {
          const auto* sc = std::get_if<SharedCell>(&cell);
          if (!sc) throw SchemaError("shared column " + col.name + " expects shares");
          if (sc->shares.empty() || sc->shares.size() != sc->sigs.size()) {
            throw SchemaError("column " + col.name + " has " + std::to_string(sc->shares.size()) +
                              " shares but " + std::to_string(sc->sigs.size()) +
                              " signatures");
          }
          if (col.blocks > 0 && sc->shares.size() != static_cast<std::size_t>(col.blocks)) {
            throw SchemaError("column " + col.name + " expects " + std::to_string(col.blocks) +
                              " blocks");
          }
          for (const auto& e : sc->shares) {
            if (e < 0) throw SchemaError("negative share in column " + col.name);
          }
          break;
        }
      }
    }
  }
};

namespace {

// Predicate resolved against one table.
class CompiledPredicate {
 public:
  CompiledPredicate(const Predicate& pred, const SharedTableSchema& schema) {
    for (const Atom& a : pred) {
      Resolved r;
      r.atom = &a;
      for (const auto& c : a.cols) r.idx.push_back(schema.index_of(c));
      const bool shared_op = a.op == Atom::Op::kShareEq || a.op == Atom::Op::kShareIn;
      const bool null_op = a.op == Atom::Op::kIsNull || a.op == Atom::Op::kNotNull;
      for (std::size_t i : r.idx) {
        const bool is_shared = schema.columns[i].role == ColumnRole::kShared;
        if (!null_op && shared_op != is_shared) {
          throw RemoteError("bad_predicate",
                            std::string("operator ") + op_name(a.op) +
                                " cannot apply to column " + schema.columns[i].name +
                                (is_shared ? " (shared columns accept only share equality or IN)"
                                           : ""));
        }
      }
      if (a.op == Atom::Op::kIn) {
        for (const auto& tup : a.values) r.plain_set.insert(tup);
      }
      if (shared_op) {
        for (const auto& tup : a.tuples) r.share_set.insert(tup);
      }
      atoms_.push_back(std::move(r));
    }
  }

  bool matches(const ShareRow& row) const {
    for (const Resolved& r : atoms_) {
      if (!match_atom(r, row)) return false;
    }
    return true;
  }

 private:
  struct Resolved {
    const Atom* atom = nullptr;
    std::vector<std::size_t> idx;
    std::set<std::vector<PlainValue>, PlainLess> plain_set;
    std::set<std::vector<BigInt>> share_set;
  };

  static bool match_atom(const Resolved& r, const ShareRow& row) {
    const Atom& a = *r.atom;
    const Cell& first = row.cells[r.idx[0]];
    const bool null = std::holds_alternative<std::monostate>(first);
    switch (a.op) {
      case Atom::Op::kIsNull: return null;
      case Atom::Op::kNotNull: return !null;
      case Atom::Op::kEq:
      case Atom::Op::kNe:
      case Atom::Op::kCmp: {
        const PlainValue& lit = a.values[0][0];
        PlainValue v = cell_plain(first);
        if (null || std::holds_alternative<std::monostate>(lit)) return false;
        PlainLess less;
        if (a.op == Atom::Op::kEq) return !less(v, lit) && !less(lit, v);
        if (a.op == Atom::Op::kNe) return less(v, lit) || less(lit, v);
        if (a.cmp == "<") return less(v, lit);
        if (a.cmp == "<=") return !less(lit, v);
        if (a.cmp == ">") return less(lit, v);
        return !less(v, lit);
      }
      case Atom::Op::kIn: {
        std::vector<PlainValue> tup;
        for (std::size_t i : r.idx) {
          if (std::holds_alternative<std::monostate>(row.cells[i])) return false;
          tup.push_back(cell_plain(row.cells[i]));
        }
        return r.plain_set.count(tup) > 0;
      }
      case Atom::Op::kShareEq:
      case Atom::Op::kShareIn: {
        const auto* sc = std::get_if<SharedCell>(&first);
        return sc && r.share_set.count(sc->shares) > 0;
      }
    }
    return false;
  }

  std::vector<Resolved> atoms_;
};

void append_log(const std::optional<std::filesystem::path>& path, const json& entry,
                bool truncate = false) {
  if (!path) return;
  std::ofstream out(*path, truncate ? std::ios::trunc : std::ios::app);
  out << entry.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot write store log " + path->string());
}

}  // namespace

Store::Store(std::optional<std::filesystem::path> data_dir) : data_dir_(std::move(data_dir)) {
  if (data_dir_) {
    std::filesystem::create_directories(*data_dir_);
    replay();
  }
}

Store::~Store() = default;

void Store::replay() {
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(*data_dir_)) {
    if (entry.path().extension() == ".log") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path);
    std::string line;
    std::shared_ptr<Table> table;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json entry = json::parse(line);
      if (entry.contains("create")) {
        table = std::make_shared<Table>();
        table->schema = schema_from_json(entry["create"]);
        for (const auto& k : table->schema.primary_key) {
          table->key_idx.push_back(table->schema.index_of(k));
        }
        table->log_path = path;
      } else if (table && entry.contains("insert")) {
        auto attrs = all_attributes(table->schema);
        for (const auto& jr : entry["insert"]) {
          ShareRow row = row_from_json(jr, table->schema, attrs);
          table->rows[table->key_of(row)] = std::move(row);
        }
      }
    }
    if (table) tables_[table->schema.name] = table;
  }
}

std::shared_ptr<Store::Table> Store::find(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = tables_.find(name);
  if (it == tables_.end()) throw RemoteError("not_found", "no table '" + name + "'");
  return it->second;
}

void Store::create_table(const SharedTableSchema& schema, bool replace) {
  schema.validate();
  auto table = std::make_shared<Table>();
  table->schema = schema;
  for (const auto& k : schema.primary_key) table->key_idx.push_back(schema.index_of(k));
  if (data_dir_) table->log_path = *data_dir_ / (schema.name + ".log");
  std::unique_lock lock(mu_);
  if (!replace && tables_.count(schema.name)) {
    throw RemoteError("duplicate", "table '" + schema.name + "' already exists");
  }
  append_log(table->log_path, json{{"create", schema_to_json(schema)}}, true);
  tables_[schema.name] = std::move(table);
}

std::size_t Store::insert_rows(const std::string& name, std::vector<ShareRow> rows, bool upsert) {
  auto table = find(name);
  std::unique_lock lock(table->mu);
  std::set<std::vector<PlainValue>, PlainLess> batch_keys;
  for (const auto& row : rows) {
    table->check_row(row);
    auto key = table->key_of(row);
    if (!upsert && (table->rows.count(key) || !batch_keys.insert(key).second)) {
      throw RemoteError("duplicate", "duplicate key " + key_label(key) + " in " + name);
    }
  }
  if (rows.empty()) return 0;
  if (table->log_path) {
    json batch = json::array();
    auto attrs = all_attributes(table->schema);
    for (const auto& row : rows) batch.push_back(row_to_json(row, table->schema, attrs));
    append_log(table->log_path, json{{"insert", std::move(batch)}, {"upsert", upsert}});
  }
  for (auto& row : rows) {
    auto key = table->key_of(row);
    table->rows[std::move(key)] = std::move(row);
  }
  return rows.size();
}

std::vector<ShareRow> Store::select(const std::string& name,
                                    const std::vector<std::string>& projection,
                                    const Predicate& pred) const {
  auto table = find(name);
  std::shared_lock lock(table->mu);
  const SharedTableSchema& schema = table->schema;
  CompiledPredicate compiled(pred, schema);
  std::vector<std::size_t> attrs;
  if (projection.empty()) {
    attrs = all_attributes(schema);
  } else {
    for (const auto& c : projection) attrs.push_back(schema.index_of(c));
  }
  std::vector<ShareRow> out;
  std::vector<CorruptCell> corrupt;
  for (const auto& [key, row] : table->rows) {
    if (!compiled.matches(row)) continue;
    ShareRow projected;
    projected.cells.reserve(attrs.size());
    for (std::size_t a : attrs) {
      const Cell& cell = row.cells[a];
      if (verify_on_read_) {
        if (const auto* sc = std::get_if<SharedCell>(&cell)) {
          for (std::size_t b = 0; b < sc->shares.size(); ++b) {
            if (mod_p2(sc->shares[b], schema.p2) != sc->sigs[b]) {
              corrupt.push_back({key, schema.columns[a].name, b});
            }
          }
        }
      }
      projected.cells.push_back(cell);
    }
    out.push_back(std::move(projected));
  }
  if (!corrupt.empty()) {
    const auto& c = corrupt.front();
    throw RemoteError("corrupt", std::to_string(corrupt.size()) +
                                     " share(s) failed outer verification, first at key " +
                                     key_label(c.key) + " column " + c.attribute);
  }
  return out;
}

std::vector<AggregateGroup> Store::aggregate(const std::string& name,
                                             const std::vector<std::string>& group_by,
                                             const std::vector<std::string>& sum_columns,
                                             const Predicate& pred) const {
  auto table = find(name);
  std::shared_lock lock(table->mu);
  const SharedTableSchema& schema = table->schema;
  CompiledPredicate compiled(pred, schema);
  std::vector<std::size_t> group_idx, sum_idx;
  for (const auto& c : group_by) {
    std::size_t i = schema.index_of(c);
    if (schema.columns[i].role == ColumnRole::kShared) {
      throw RemoteError("bad_request", "cannot group by shared column " + c);
    }
    group_idx.push_back(i);
  }
  for (const auto& c : sum_columns) {
    std::size_t i = schema.index_of(c);
    if (schema.columns[i].role != ColumnRole::kShared || schema.columns[i].blocks <= 0) {
      throw RemoteError("bad_request", "cannot sum column " + c);
    }
    sum_idx.push_back(i);
  }
  auto fresh_group = [&](std::vector<PlainValue> key) {
    AggregateGroup g;
    g.key = std::move(key);
    for (std::size_t i : sum_idx) {
      AggregateSum s;
      s.sums.assign(static_cast<std::size_t>(schema.columns[i].blocks), BigInt(0));
      g.sums.push_back(std::move(s));
    }
    return g;
  };
  std::map<std::vector<PlainValue>, AggregateGroup, PlainLess> groups;
  std::size_t corrupt = 0;
  for (const auto& [key, row] : table->rows) {
    if (!compiled.matches(row)) continue;
    std::vector<PlainValue> gk;
    for (std::size_t i : group_idx) gk.push_back(cell_plain(row.cells[i]));
    auto it = groups.find(gk);
    if (it == groups.end()) it = groups.emplace(gk, fresh_group(gk)).first;
    AggregateGroup& g = it->second;
    ++g.count;
    for (std::size_t s = 0; s < sum_idx.size(); ++s) {
      const auto* sc = std::get_if<SharedCell>(&row.cells[sum_idx[s]]);
      if (!sc) continue;
      ++g.sums[s].nonnull;
      for (std::size_t b = 0; b < sc->shares.size(); ++b) {
        if (verify_on_read_ && mod_p2(sc->shares[b], schema.p2) != sc->sigs[b]) ++corrupt;
        g.sums[s].sums[b] += sc->shares[b];
      }
    }
  }
  if (corrupt > 0) {
    throw RemoteError("corrupt", std::to_string(corrupt) +
                                     " share(s) failed outer verification in " + name);
  }
  std::vector<AggregateGroup> out;
  if (groups.empty() && group_idx.empty()) out.push_back(fresh_group({}));
  for (auto& [k, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<CorruptCell> Store::scan_verify(const std::string& name) const {
  auto table = find(name);
  std::shared_lock lock(table->mu);
  std::vector<CorruptCell> out;
  for (const auto& [key, row] : table->rows) {
    for (std::size_t a = 0; a < row.cells.size(); ++a) {
      const auto* sc = std::get_if<SharedCell>(&row.cells[a]);
      if (!sc) continue;
      for (std::size_t b = 0; b < sc->shares.size(); ++b) {
        if (mod_p2(sc->shares[b], table->schema.p2) != sc->sigs[b]) {
          out.push_back({key, table->schema.columns[a].name, b});
        }
      }
    }
  }
  return out;
}

SnapshotChunk Store::snapshot(const std::string& name, std::size_t offset,
                              std::size_t limit) const {
  auto table = find(name);
  std::shared_lock lock(table->mu);
  limit = std::min(limit, kSnapshotChunk);
  SnapshotChunk chunk;
  chunk.total = table->rows.size();
  auto it = table->rows.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(std::min(offset, chunk.total)));
  for (; it != table->rows.end() && chunk.rows.size() < limit; ++it) chunk.rows.push_back(it->second);
  const std::size_t end = offset + chunk.rows.size();
  if (end < chunk.total) chunk.next = end;
  return chunk;
}

std::vector<std::string> Store::tables() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, t] : tables_) out.push_back(name);
  return out;
}

SharedTableSchema Store::schema(const std::string& name) const { return find(name)->schema; }

std::string Store::canonical_dump(const std::string& name) const {
  auto table = find(name);
  std::shared_lock lock(table->mu);
  json rows = json::array();
  auto attrs = all_attributes(table->schema);
  for (const auto& [key, row] : table->rows) rows.push_back(row_to_json(row, table->schema, attrs));
  return json{{"schema", schema_to_json(table->schema)}, {"rows", std::move(rows)}}.dump();
}

json Store::handle(const json& request) {
  json response = {{"seq", request.value("seq", json(nullptr))}};
  try {
    if (!request.is_object()) throw ProtocolError("request must be an object");
    const std::string op = request.at("op").get<std::string>();
    const std::string table = request.value("table", std::string());
    const json payload = request.value("payload", json::object());
    if (op == "CREATE") {
      SharedTableSchema schema = schema_from_json(payload.at("schema"));
      if (!table.empty() && schema.name != table) throw ProtocolError("table name mismatch");
      create_table(schema, payload.value("replace", false));
      response["rows"] = json::array();
    } else if (op == "INSERT") {
      auto t = find(table);
      const SharedTableSchema& schema = t->schema;
      auto attrs = all_attributes(schema);
      std::vector<ShareRow> rows;
      for (const auto& jr : payload.at("rows")) rows.push_back(row_from_json(jr, schema, attrs));
      response["count"] = insert_rows(table, std::move(rows), payload.value("upsert", false));
    } else if (op == "SELECT") {
      auto projection = payload.value("projection", std::vector<std::string>{});
      Predicate pred = predicate_from_json(payload.value("predicate", json::array()));
      auto rows = select(table, projection, pred);
      const SharedTableSchema schema = find(table)->schema;
      std::vector<std::size_t> attrs;
      if (projection.empty()) {
        attrs = all_attributes(schema);
      } else {
        for (const auto& c : projection) attrs.push_back(schema.index_of(c));
      }
      json out = json::array();
      for (const auto& r : rows) out.push_back(row_to_json(r, schema, attrs));
      response["rows"] = std::move(out);
    } else if (op == "AGGREGATE") {
      auto groups = aggregate(table, payload.value("group_by", std::vector<std::string>{}),
                              payload.value("sums", std::vector<std::string>{}),
                              predicate_from_json(payload.value("predicate", json::array())));
      json out = json::array();
      for (const auto& g : groups) {
        json key = json::array();
        for (const auto& k : g.key) key.push_back(plain_to_json(k));
        json sums = json::array();
        for (const auto& s : g.sums) {
          sums.push_back({{"n", s.nonnull}, {"e", shares_to_json(s.sums)}});
        }
        out.push_back({{"key", std::move(key)}, {"count", g.count}, {"sums", std::move(sums)}});
      }
      response["rows"] = std::move(out);
    } else if (op == "VERIFY") {
      json out = json::array();
      for (const auto& c : scan_verify(table)) {
        json key = json::array();
        for (const auto& k : c.key) key.push_back(plain_to_json(k));
        out.push_back({{"key", std::move(key)}, {"column", c.attribute}, {"block", c.block}});
      }
      response["rows"] = std::move(out);
    } else if (op == "SNAPSHOT") {
      SnapshotChunk chunk = snapshot(table, payload.value("offset", std::size_t{0}),
                                     payload.value("limit", kSnapshotChunk));
      const SharedTableSchema schema = find(table)->schema;
      auto attrs = all_attributes(schema);
      json out = json::array();
      for (const auto& r : chunk.rows) out.push_back(row_to_json(r, schema, attrs));
      response["rows"] = std::move(out);
      response["total"] = chunk.total;
      response["next"] = chunk.next ? json(*chunk.next) : json(nullptr);
      response["schema"] = schema_to_json(schema);
    } else if (op == "HEALTH") {
      response["rows"] = tables();
    } else {
      throw ProtocolError("unknown op '" + op + "'");
    }
    response["status"] = "ok";
  } catch (const RemoteError& e) {
    response["status"] = "error";
    response["code"] = e.code();
    response["error"] = e.what();
  } catch (const SchemaError& e) {
    response["status"] = "error";
    response["code"] = "schema";
    response["error"] = e.what();
  } catch (const ProtocolError& e) {
    response["status"] = "error";
    response["code"] = "bad_request";
    response["error"] = e.what();
  } catch (const json::exception& e) {
    response["status"] = "error";
    response["code"] = "bad_request";
    response["error"] = e.what();
  } catch (const std::exception& e) {
    response["status"] = "error";
    response["code"] = "internal";
    response["error"] = e.what();
  }
  return response;
}

std::string Store::handle_frame(std::string_view body) {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception& e) {
    return json{{"seq", nullptr},
                {"status", "error"},
                {"code", "bad_request"},
                {"error", e.what()}}
        .dump();
  }
  return handle(request).dump();
}

}  // namespace shardhouse
