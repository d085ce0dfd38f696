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


#include "shardhouse/warehouse.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace fs = std::filesystem;

namespace {

struct RowLess {
  bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      int c = compare_values(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  }
};

std::string key_text(const Value& v) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  return format_value(v);
}

PlainValue plain_of(const Value& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return *i;
  if (auto b = std::get_if<bool>(&v)) return *b;
  return std::monostate{};
}

// Rows for every CSP of the config, in csp_ids order.
std::vector<ShareRow> encode_all(const Catalog& catalog, const TableDef& table, const Row& stored) {
  const auto& ids = catalog.config.csp_ids;
  if (stored.size() != table.columns.size()) {
    throw SchemaError("row for " + table.name + " has " + std::to_string(stored.size()) +
                      " values, expected " + std::to_string(table.columns.size()));
  }
  std::vector<ShareRow> out(ids.size());
  for (auto& r : out) r.cells.reserve(stored.size());
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const ColumnDef& col = table.columns[i];
    const Value& v = stored[i];
    if (is_null(v)) {
      if (!col.codec.nullable) throw SchemaError("column " + col.name + " is not nullable");
      for (auto& r : out) r.cells.emplace_back(std::monostate{});
      continue;
    }
    if (col.codec.kind == ColumnKind::kKey) {
      const auto* k = std::get_if<std::int64_t>(&v);
      if (!k) throw SchemaError("key column " + col.name + " needs an integer, got " + format_value(v));
      for (auto& r : out) r.cells.emplace_back(*k);
      continue;
    }
    if (col.codec.kind == ColumnKind::kBoolean) {
      const auto* b = std::get_if<bool>(&v);
      if (!b) throw SchemaError("column " + col.name + " needs a boolean, got " + format_value(v));
      for (auto& r : out) r.cells.emplace_back(*b);
      continue;
    }
    EncodedValue enc = value_to_blocks(v, col.codec, catalog.config);
    for (std::size_t x = 0; x < ids.size(); ++x) {
      SharedCell cell;
      cell.shares.reserve(enc.blocks.size());
      cell.sigs.reserve(enc.blocks.size());
      for (const Block& b : enc.blocks) {
        ShareBundle s = share_block(b, catalog.coeffs, ids[x], catalog.config.p2);
        cell.shares.push_back(std::move(s.e));
        cell.sigs.push_back(s.s_out);
      }
      out[x].cells.emplace_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace

Catalog new_catalog(const SharingConfig& config, std::optional<CoefficientSet> coeffs) {
  config.validate();
  Catalog c;
  c.config = config;
  c.coeffs = coeffs ? std::move(*coeffs) : gen_coefficients(config);
  if (c.coeffs.ids() != config.csp_ids || c.coeffs.t() != config.t) {
    throw ConfigError("coefficient set does not match the CSP list");
  }
  for (CspId id : config.csp_ids) c.endpoints[id] = "local";
  return c;
}

Catalog share_schema(Catalog catalog, std::vector<TableDef> tables) {
  resolve_tables(tables, catalog.tables, catalog.config.p);
  for (auto& t : tables) {
    if (catalog.find_table(t.name)) throw SchemaError("table " + t.name + " already exists");
    catalog.tables.push_back(std::move(t));
  }
  return catalog;
}

LocalCluster make_local_cluster(const std::vector<CspId>& ids, const std::optional<fs::path>& root) {
  LocalCluster cluster;
  std::vector<std::shared_ptr<StoreClient>> clients;
  for (CspId id : ids) {
    std::optional<fs::path> dir;
    if (root) dir = *root / ("csp" + std::to_string(id));
    auto store = std::make_shared<Store>(dir);
    auto transport = std::make_shared<InProcessTransport>(store);
    cluster.stores[id] = store;
    cluster.transports[id] = transport;
    clients.push_back(std::make_shared<StoreClient>(id, transport));
  }
  cluster.pool = std::make_shared<CspPool>(std::move(clients));
  return cluster;
}

std::shared_ptr<CspPool> connect_pool(const Catalog& catalog, const fs::path& data_root) {
  std::vector<std::shared_ptr<StoreClient>> clients;
  for (CspId id : catalog.config.csp_ids) {
    auto it = catalog.endpoints.find(id);
    const std::string endpoint = it == catalog.endpoints.end() ? "local" : it->second;
    std::shared_ptr<Transport> transport;
    if (endpoint == "local") {
      transport = std::make_shared<InProcessTransport>(
          std::make_shared<Store>(data_root / ("csp" + std::to_string(id))));
    } else {
      auto [host, port] = parse_host_port(endpoint);
      transport = std::make_shared<TcpTransport>(host, port);
    }
    clients.push_back(std::make_shared<StoreClient>(id, std::move(transport)));
  }
  return std::make_shared<CspPool>(std::move(clients));
}

ShareRow encode_row(const Catalog& catalog, const TableDef& table, const Row& stored, CspId k) {
  return encode_all(catalog, table, stored).at(catalog.config.index_of(k));
}

Warehouse::Warehouse(Catalog catalog, std::shared_ptr<CspPool> pool,
                     std::optional<fs::path> catalog_path)
    : catalog_(std::move(catalog)), pool_(std::move(pool)), catalog_path_(std::move(catalog_path)) {}

fs::path Warehouse::default_data_root(const fs::path& catalog_path) {
  if (const char* env = std::getenv("SHARDHOUSE_DATA_DIR"); env && *env) return env;
  return catalog_path.parent_path() / "shards";
}

Warehouse Warehouse::open(const fs::path& catalog_path, const std::optional<fs::path>& data_root) {
  Catalog catalog = Catalog::load(catalog_path);
  auto pool = connect_pool(catalog, data_root ? *data_root : default_data_root(catalog_path));
  return Warehouse(std::move(catalog), std::move(pool), catalog_path);
}

void Warehouse::save() const {
  if (catalog_path_) catalog_.save(*catalog_path_);
}

void Warehouse::precheck() const {
  for (CspId id : catalog_.config.csp_ids) {
    try {
      pool_->client(id).health();
    } catch (const UnavailableError& e) {
      throw UnavailableError("CSP " + std::to_string(id) + " is unreachable, nothing written: " +
                             e.what());
    }
  }
}

std::vector<SharedTableSchema> Warehouse::share_schema(std::vector<TableDef> tables) {
  std::vector<std::string> names;
  for (const auto& t : tables) names.push_back(t.name);
  Catalog next = shardhouse::share_schema(catalog_, std::move(tables));
  precheck();
  std::vector<SharedTableSchema> out;
  for (const auto& name : names) out.push_back(next.shared_schema(next.table(name)));
  for (CspId id : next.config.csp_ids) {
    for (const auto& s : out) pool_->client(id).create(s);
  }
  catalog_ = std::move(next);
  save();
  return out;
}

Row Warehouse::to_stored(const TableDef& table, const Row& original) {
  if (original.size() != table.columns.size()) {
    throw SchemaError("row for " + table.name + " has " + std::to_string(original.size()) +
                      " values, expected " + std::to_string(table.columns.size()));
  }
  Row out(original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    const ColumnDef& col = table.columns[i];
    const Value& v = original[i];
    if (is_null(v)) continue;
    if (!col.key_domain.empty()) {
      out[i] = catalog_.map_key(col.key_domain, key_text(v));
    } else if (col.codec.kind == ColumnKind::kBoolean) {
      out[i] = v;
    } else {
      try {
        out[i] = coerce_to(v, col.codec);
      } catch (const QueryError& e) {
        throw SchemaError("column " + col.name + ": " + e.what());
      }
    }
  }
  return out;
}

namespace {

std::map<CspId, std::size_t> insert_stored(const Catalog& catalog, CspPool& pool,
                                           const TableDef& table, const std::vector<Row>& stored,
                                           bool upsert) {
  const SharedTableSchema schema = catalog.shared_schema(table);
  const auto& ids = catalog.config.csp_ids;
  std::map<CspId, std::size_t> counts;
  for (CspId id : ids) counts[id] = 0;
  for (std::size_t start = 0; start < stored.size(); start += kLoadBatch) {
    const std::size_t end = std::min(stored.size(), start + kLoadBatch);
    std::vector<std::vector<ShareRow>> per(ids.size());
    for (std::size_t r = start; r < end; ++r) {
      auto rows = encode_all(catalog, table, stored[r]);
      for (std::size_t x = 0; x < ids.size(); ++x) per[x].push_back(std::move(rows[x]));
    }
    for (std::size_t x = 0; x < ids.size(); ++x) {
      counts[ids[x]] += pool.client(ids[x]).insert(schema, per[x], upsert);
    }
  }
  return counts;
}

}  // namespace

std::map<CspId, std::size_t> Warehouse::load_records(const std::string& table_name,
                                                     const std::vector<Row>& rows, bool upsert) {
  const TableDef& table = catalog_.table(table_name);
  if (rows.empty()) {
    std::map<CspId, std::size_t> zero;
    for (CspId id : catalog_.config.csp_ids) zero[id] = 0;
    return zero;
  }
  precheck();
  Catalog backup = catalog_;
  try {
    std::vector<Row> stored;
    stored.reserve(rows.size());
    for (const auto& r : rows) stored.push_back(to_stored(table, r));
    auto counts = insert_stored(catalog_, *pool_, table, stored, upsert);
    save();
    return counts;
  } catch (...) {
    catalog_ = std::move(backup);
    throw;
  }
}

std::map<CspId, std::size_t> Warehouse::load_csv(const std::string& table_name, const fs::path& csv) {
  const TableDef& table = catalog_.table(table_name);
  auto records = read_csv(csv);
  if (records.empty()) throw SchemaError(csv.string() + " has no header");
  const auto& header = records[0];
  std::vector<std::size_t> pos;
  for (const auto& c : table.columns) {
    auto it = std::find(header.begin(), header.end(), c.name);
    if (it == header.end()) throw SchemaError(csv.string() + " lacks column " + c.name);
    pos.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw SchemaError(csv.string() + ":" + std::to_string(r + 1) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    Row row(table.columns.size());
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const ColumnDef& col = table.columns[i];
      const std::string& text = rec[pos[i]];
      if (col.codec.nullable && (text.empty() || text == "NULL")) continue;
      row[i] = col.key_domain.empty() ? parse_typed(text, col.codec) : Value{text};
    }
    rows.push_back(std::move(row));
  }
  return load_records(table_name, rows);
}

std::vector<Row> Warehouse::cube_rows(const CubeSpec& spec, const TableDef& source,
                                      const std::vector<Row>& stored) const {
  const std::size_t d = spec.dimensions.size();
  std::vector<std::size_t> dim_idx;
  for (const auto& dim : spec.dimensions) dim_idx.push_back(source.index_of(dim));
  std::vector<std::optional<std::size_t>> src_idx;
  for (const auto& m : spec.measures) {
    src_idx.push_back(m.source.empty() ? std::nullopt
                                       : std::optional<std::size_t>(source.index_of(m.source)));
  }
  struct Acc {
    std::vector<Value> vals;
  };
  std::map<std::vector<Value>, Acc, RowLess> cells;
  auto fresh = [&]() {
    Acc a;
    for (std::size_t m = 0; m < spec.measures.size(); ++m) {
      const auto& f = spec.measures[m].func;
      if (f == "COUNT") {
        a.vals.emplace_back(std::int64_t{0});
      } else if (f == "SUM") {
        const ColumnDef& c = source.columns[*src_idx[m]];
        a.vals.push_back(c.codec.kind == ColumnKind::kReal ? Value{Decimal{0, c.codec.scale}}
                                                           : Value{std::int64_t{0}});
      } else {
        a.vals.emplace_back();
      }
    }
    return a;
  };
  if (stored.empty()) cells.emplace(std::vector<Value>(d), fresh());
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (const auto& row : stored) {
      std::vector<Value> key(d);
      for (std::size_t i = 0; i < d; ++i) {
        if (mask & (std::size_t{1} << i)) key[i] = row[dim_idx[i]];
      }
      auto it = cells.find(key);
      if (it == cells.end()) it = cells.emplace(key, fresh()).first;
      Acc& acc = it->second;
      for (std::size_t m = 0; m < spec.measures.size(); ++m) {
        const auto& f = spec.measures[m].func;
        const Value* v = src_idx[m] ? &row[*src_idx[m]] : nullptr;
        if (f == "COUNT") {
          if (!v || !is_null(*v)) acc.vals[m] = std::get<std::int64_t>(acc.vals[m]) + 1;
        } else if (is_null(*v)) {
          continue;
        } else if (f == "SUM") {
          acc.vals[m] = add_values(acc.vals[m], *v);
        } else if (is_null(acc.vals[m]) || (f == "MIN" ? compare_values(*v, acc.vals[m]) < 0
                                                       : compare_values(*v, acc.vals[m]) > 0)) {
          acc.vals[m] = *v;
        }
      }
    }
  }
  std::vector<Row> out;
  for (auto& [key, acc] : cells) {
    Row r = key;
    for (auto& v : acc.vals) r.push_back(std::move(v));
    out.push_back(std::move(r));
  }
  return out;
}

void Warehouse::build_cube(const CubeSpec& spec, bool staging) {
  if (catalog_.find_table(spec.name)) throw SchemaError("table " + spec.name + " already exists");
  const TableDef& source = catalog_.table(spec.source);
  if (spec.dimensions.empty()) throw SchemaError("cube " + spec.name + " needs a dimension");
  TableDef cube;
  cube.name = spec.name;
  for (const auto& dim : spec.dimensions) {
    const ColumnDef& src = source.column(dim);
    if (src.codec.kind != ColumnKind::kKey) {
      throw SchemaError("cube dimension " + dim + " must be a key column of " + source.name);
    }
    ColumnDef c;
    c.name = dim;
    c.codec.kind = ColumnKind::kKey;
    c.codec.nullable = true;  // NULL marks a superaggregate
    c.key_domain = src.key_domain;
    cube.columns.push_back(std::move(c));
    cube.primary_key.push_back(dim);
  }
  for (const auto& m : spec.measures) {
    ColumnDef c;
    c.name = m.name;
    if (m.func != "SUM" && m.func != "COUNT" && m.func != "MIN" && m.func != "MAX") {
      throw SchemaError("unknown cube aggregate " + m.func);
    }
    if (m.source.empty() && m.func != "COUNT") throw SchemaError(m.func + " needs a source column");
    if (!staging && (m.func == "MIN" || m.func == "MAX")) {
      throw QueryError(m.func + " cannot be computed on shares; build the cube with staging");
    }
    const ColumnDef* src = m.source.empty() ? nullptr : &source.column(m.source);
    if (m.func == "COUNT") {
      c.codec.kind = ColumnKind::kInteger;
      c.codec.is_signed = false;
    } else if (m.func == "SUM") {
      if (src->codec.kind != ColumnKind::kInteger && src->codec.kind != ColumnKind::kReal) {
        throw SchemaError("SUM over non-numeric column " + src->name);
      }
      if (!staging && (!src->codec.additive() || src->codec.fixed_blocks(catalog_.config.t) == 0)) {
        throw QueryError("SUM(" + src->name + ") cannot be computed on shares");
      }
      c.codec.kind = src->codec.kind;
      c.codec.scale = src->codec.scale;
      c.codec.is_signed = src->codec.is_signed;
    } else {
      if (!src->codec.encrypted()) throw SchemaError(m.func + " over a key column " + src->name);
      c.codec = src->codec;
    }
    if (m.func != "MIN" && m.func != "MAX") {
      // Totals get room for any 63-bit value.
      c.codec.width = 1;
      while (digit_capacity(catalog_.config.p, c.codec.width) < (static_cast<unsigned __int128>(1) << 63)) {
        ++c.codec.width;
      }
    }
    c.codec.nullable = true;
    cube.columns.push_back(std::move(c));
  }

  std::vector<Row> rows;
  Router router(catalog_, *pool_);
  if (staging) {
    std::vector<std::string> projection = spec.dimensions;
    for (const auto& m : spec.measures) {
      if (!m.source.empty()) projection.push_back(m.source);
    }
    rows = cube_rows(spec, source, router.fetch_table(source.name, projection, {}));
  } else {
    const std::size_t d = spec.dimensions.size();
    std::vector<std::string> sums;
    for (const auto& m : spec.measures) {
      if (!m.source.empty() && std::find(sums.begin(), sums.end(), m.source) == sums.end()) {
        sums.push_back(m.source);
      }
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      std::vector<std::string> group_by;
      for (std::size_t i = 0; i < d; ++i) {
        if (mask & (std::size_t{1} << i)) group_by.push_back(spec.dimensions[i]);
      }
      for (auto& g : router.aggregate_shares(source.name, group_by, sums, {})) {
        if (mask != 0 && g.count == 0) continue;
        Row r(d);
        for (std::size_t i = 0, j = 0; i < d; ++i) {
          if (mask & (std::size_t{1} << i)) r[i] = g.key[j++];
        }
        for (const auto& m : spec.measures) {
          if (m.source.empty()) {
            r.emplace_back(g.count);
            continue;
          }
          const auto s = static_cast<std::size_t>(
              std::find(sums.begin(), sums.end(), m.source) - sums.begin());
          if (m.func == "COUNT") {
            r.emplace_back(g.nonnull[s]);
          } else if (is_null(g.sums[s])) {
            const auto& codec = source.column(m.source).codec;
            r.push_back(codec.kind == ColumnKind::kReal ? Value{Decimal{0, codec.scale}}
                                                        : Value{std::int64_t{0}});
          } else {
            r.push_back(g.sums[s]);
          }
        }
        rows.push_back(std::move(r));
      }
    }
  }

  Catalog next = shardhouse::share_schema(catalog_, {cube});
  next.cubes.push_back(spec);
  const TableDef& def = next.table(spec.name);
  const SharedTableSchema schema = next.shared_schema(def);
  precheck();
  for (CspId id : next.config.csp_ids) pool_->client(id).create(schema);
  insert_stored(next, *pool_, def, rows, false);
  catalog_ = std::move(next);
  save();
}

std::size_t Warehouse::refresh_cube(const std::string& name, const std::vector<Row>& rows) {
  const CubeSpec* found = catalog_.find_cube(name);
  if (!found) throw QueryError("unknown cube '" + name + "'");
  const CubeSpec spec = *found;
  if (rows.empty()) return 0;
  load_records(spec.source, rows);
  const TableDef source = catalog_.table(spec.source);
  const TableDef cube = catalog_.table(spec.name);
  std::vector<Row> stored;
  for (const auto& r : rows) stored.push_back(to_stored(source, r));
  std::vector<Row> delta = cube_rows(spec, source, stored);

  const std::size_t d = spec.dimensions.size();
  // IN never matches NULL, so superaggregate cells are looked up per
  // pattern of NULL dimensions.
  std::map<std::vector<bool>, std::vector<std::vector<PlainValue>>> by_pattern;
  for (const auto& r : delta) {
    std::vector<bool> nulls(d);
    std::vector<PlainValue> tuple;
    for (std::size_t i = 0; i < d; ++i) {
      nulls[i] = is_null(r[i]);
      if (!nulls[i]) tuple.push_back(plain_of(r[i]));
    }
    by_pattern[nulls].push_back(std::move(tuple));
  }
  Router router(catalog_, *pool_);
  std::map<std::vector<Value>, Row, RowLess> existing;
  for (auto& [nulls, tuples] : by_pattern) {
    std::vector<PlannedAtom> atoms;
    PlannedAtom in;
    in.plain.op = Atom::Op::kIn;
    for (std::size_t i = 0; i < d; ++i) {
      if (nulls[i]) {
        PlannedAtom isnull;
        isnull.plain.op = Atom::Op::kIsNull;
        isnull.plain.cols = {spec.dimensions[i]};
        atoms.push_back(std::move(isnull));
      } else {
        in.plain.cols.push_back(spec.dimensions[i]);
      }
    }
    if (!in.plain.cols.empty()) {
      in.plain.values = std::move(tuples);
      atoms.push_back(std::move(in));
    }
    for (auto& r : router.fetch_table(cube.name, {}, atoms)) {
      std::vector<Value> key(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(d));
      existing.emplace(std::move(key), std::move(r));
    }
  }
  for (auto& r : delta) {
    auto it = existing.find(std::vector<Value>(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(d)));
    if (it == existing.end()) continue;
    const Row& old = it->second;
    for (std::size_t m = 0; m < spec.measures.size(); ++m) {
      const std::size_t i = d + m;
      const auto& f = spec.measures[m].func;
      if (is_null(old[i])) continue;
      if (is_null(r[i])) {
        r[i] = old[i];
      } else if (f == "SUM" || f == "COUNT") {
        r[i] = add_values(old[i], r[i]);
      } else if (f == "MIN" ? compare_values(old[i], r[i]) < 0 : compare_values(old[i], r[i]) > 0) {
        r[i] = old[i];
      }
    }
  }
  insert_stored(catalog_, *pool_, cube, delta, true);
  return delta.size();
}

RecoveryReport Warehouse::recover_csp(CspId k) {
  catalog_.config.index_of(k);  // rejects unknown ids
  const auto t = static_cast<std::size_t>(catalog_.config.t);
  pool_->mark_down(k);
  const auto healthy = pool_->preferred();
  if (healthy.size() < t) {
    throw UnavailableError("cannot recover CSP " + std::to_string(k) + ": " +
                           std::to_string(healthy.size()) + " healthy CSPs, " + std::to_string(t) +
                           " needed");
  }
  RecoveryReport report;
  report.csp = k;
  Router router(catalog_, *pool_);
  const auto& row_k = catalog_.coeffs.row(k);
  const std::int64_t p2 = catalog_.config.p2;
  std::map<std::string, std::vector<ShareRow>> rebuilt;
  for (const TableDef& table : catalog_.tables) {
    const SharedTableSchema schema = catalog_.shared_schema(table);
    router.run_on_groups([&](const std::vector<CspId>& group, const ReconstructionContext& ctx) {
      std::vector<std::vector<ShareRow>> rows(group.size());
      for (std::size_t x = 0; x < group.size(); ++x) {
        std::optional<std::size_t> offset = 0;
        while (offset) {
          auto snap = pool_->client(group[x]).snapshot(table.name, *offset);
          for (auto& r : snap.rows) rows[x].push_back(std::move(r));
          offset = snap.next;
        }
        if (rows[x].size() != rows[0].size()) {
          throw CorruptionError("CSPs hold different row counts for " + table.name);
        }
      }
      std::vector<ShareRow> out;
      out.reserve(rows[0].size());
      std::vector<BigInt> shares(group.size());
      for (std::size_t r = 0; r < rows[0].size(); ++r) {
        ShareRow row;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
          const Cell& c0 = rows[0][r].cells.at(c);
          const auto* s0 = std::get_if<SharedCell>(&c0);
          for (std::size_t x = 1; x < group.size(); ++x) {
            const Cell& cx = rows[x][r].cells.at(c);
            const bool agree = s0 ? (std::holds_alternative<SharedCell>(cx) &&
                                     std::get<SharedCell>(cx).shares.size() == s0->shares.size())
                                  : cx == c0;
            if (!agree) {
              throw CorruptionError("CSPs disagree on " + table.name + "." + table.columns[c].name);
            }
          }
          if (!s0) {
            row.cells.push_back(c0);
            continue;
          }
          SharedCell cell;
          for (std::size_t b = 0; b < s0->shares.size(); ++b) {
            for (std::size_t x = 0; x < group.size(); ++x) {
              const auto& sc = std::get<SharedCell>(rows[x][r].cells[c]);
              if (!verify_outer(ShareBundle{sc.shares[b], sc.sigs.at(b)}, p2)) {
                throw CorruptionError("outer signature mismatch at CSP " +
                                      std::to_string(group[x]) + " in " + table.name + "." +
                                      table.columns[c].name);
              }
              shares[x] = sc.shares[b];
            }
            Block block = reconstruct_block(shares, ctx, catalog_.config.p);
            BigInt e = share_value(block, row_k);
            cell.sigs.push_back(outer_signature(e, p2));
            cell.shares.push_back(std::move(e));
          }
          row.cells.emplace_back(std::move(cell));
        }
        out.push_back(std::move(row));
      }
      rebuilt[table.name] = std::move(out);
      report.sources = group;
    });
  }
  StoreClient& target = pool_->client(k);
  for (const TableDef& table : catalog_.tables) {
    const SharedTableSchema schema = catalog_.shared_schema(table);
    target.create(schema, true);
    const auto& rows = rebuilt[table.name];
    for (std::size_t start = 0; start < rows.size(); start += kLoadBatch) {
      const std::size_t end = std::min(rows.size(), start + kLoadBatch);
      target.insert(schema, std::vector<ShareRow>(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                                  rows.begin() + static_cast<std::ptrdiff_t>(end)));
    }
    report.rows[table.name] = rows.size();
  }
  pool_->mark_up(k);
  return report;
}

VerifyReport Warehouse::verify(const std::vector<CspId>& csps) const {
  VerifyReport report;
  const auto& ids = csps.empty() ? catalog_.config.csp_ids : csps;
  for (CspId id : ids) {
    auto& per = report[id];
    for (const auto& t : catalog_.tables) per[t.name] = pool_->client(id).verify(t.name);
  }
  return report;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> record;
  std::string field, line;
  bool quoted = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!quoted && line.empty()) continue;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c != '"') {
          field += c;
        } else if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        record.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    if (quoted) {
      field += '\n';  // quoted field spans lines
      continue;
    }
    record.push_back(std::move(field));
    field.clear();
    out.push_back(std::move(record));
    record.clear();
  }
  if (quoted) throw SchemaError(path.string() + ": unterminated quoted field");
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace shardhouse
