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

#include "shardhouse/catalog.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "shardhouse/errors.h"

namespace shardhouse {

using nlohmann::json;

std::size_t TableDef::index_of(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  throw SchemaError("table " + name + " has no column '" + std::string(column) + "'");
}

std::vector<std::string> TableDef::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

json table_to_json(const TableDef& t) {
  json cols = json::array();
  for (const auto& c : t.columns) {
    json jc = {{"name", c.name},
               {"kind", kind_name(c.codec.kind)},
               {"width", c.codec.width},
               {"scale", c.codec.scale},
               {"max_len", c.codec.max_len},
               {"nullable", c.codec.nullable},
               {"signed", c.codec.is_signed},
               {"pad", c.codec.pad},
               {"replace", c.replace},
               {"key_domain", c.key_domain},
               {"sig_name", c.sig_name}};
    cols.push_back(std::move(jc));
  }
  json fks = json::array();
  for (const auto& fk : t.foreign_keys) {
    fks.push_back({{"columns", fk.columns}, {"table", fk.table}, {"ref_columns", fk.ref_columns}});
  }
  return {{"name", t.name}, {"columns", cols}, {"primary_key", t.primary_key}, {"foreign_keys", fks}};
}

TableDef table_from_json(const json& j) {
  try {
    TableDef t;
    t.name = j.at("name").get<std::string>();
    for (const auto& jc : j.at("columns")) {
      ColumnDef c;
      c.name = jc.at("name").get<std::string>();
      c.codec.kind = jc.value("is_key", false) ? ColumnKind::kKey
                                               : parse_kind(jc.at("kind").get<std::string>());
      c.codec.width = jc.value("width", 0);
      c.codec.scale = jc.value("scale", 0);
      c.codec.max_len = jc.value("max_len", 0);
      c.codec.nullable = jc.value("nullable", false);
      c.codec.is_signed = jc.value("signed", true);
      c.codec.pad = jc.value("pad", false);
      c.replace = jc.value("replace", false);
      c.key_domain = jc.value("key_domain", std::string());
      c.sig_name = jc.value("sig_name", std::string());
      t.columns.push_back(std::move(c));
    }
    t.primary_key = j.value("primary_key", std::vector<std::string>{});
    for (const auto& jf : j.value("foreign_keys", json::array())) {
      ForeignKey fk;
      fk.columns = jf.at("columns").get<std::vector<std::string>>();
      fk.table = jf.at("table").get<std::string>();
      fk.ref_columns = jf.value("ref_columns", fk.columns);
      t.foreign_keys.push_back(std::move(fk));
    }
    return t;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed table definition: ") + e.what());
  }
}

std::vector<TableDef> tables_from_sidecar(const json& j) {
  std::vector<TableDef> out;
  if (j.contains("tables")) {
    for (const auto& jt : j.at("tables")) out.push_back(table_from_json(jt));
  } else {
    out.push_back(table_from_json(j));
  }
  return out;
}

json cube_to_json(const CubeSpec& c) {
  json ms = json::array();
  for (const auto& m : c.measures) {
    ms.push_back({{"name", m.name}, {"func", m.func}, {"source", m.source}});
  }
  return {{"name", c.name}, {"source", c.source}, {"dimensions", c.dimensions}, {"measures", ms}};
}

CubeSpec cube_from_json(const json& j) {
  try {
    CubeSpec c;
    c.name = j.at("name").get<std::string>();
    c.source = j.at("source").get<std::string>();
    c.dimensions = j.at("dimensions").get<std::vector<std::string>>();
    for (const auto& jm : j.at("measures")) {
      CubeMeasure m;
      m.func = jm.at("func").get<std::string>();
      std::transform(m.func.begin(), m.func.end(), m.func.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      m.source = jm.value("source", std::string());
      m.name = jm.value("name", m.func + (m.source.empty() ? "" : "_" + m.source));
      c.measures.push_back(std::move(m));
    }
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed cube definition: ") + e.what());
  }
}

void resolve_tables(std::vector<TableDef>& tables, const std::vector<TableDef>& existing,
                    std::int64_t p) {
  auto lookup = [&](const std::string& name) -> const TableDef* {
    for (const auto& t : tables) {
      if (t.name == name) return &t;
    }
    for (const auto& t : existing) {
      if (t.name == name) return &t;
    }
    return nullptr;
  };
  for (auto& t : tables) {
    if (t.columns.empty()) throw SchemaError("table " + t.name + " has no columns");
    std::set<std::string> names;
    for (auto& c : t.columns) {
      if (!names.insert(c.name).second) throw SchemaError("duplicate column " + c.name);
      if (c.codec.encrypted() && c.codec.width == 0) c.codec.width = default_width(c.codec.kind, p);
      validate_codec(c.codec, p);
      if (c.codec.encrypted() && c.sig_name.empty()) c.sig_name = c.name + "_sig";
      if (!c.codec.encrypted()) c.sig_name.clear();
      if (c.replace) {
        if (c.codec.kind != ColumnKind::kKey) {
          throw SchemaError("only key columns can be replaced by a sequence: " + c.name);
        }
        c.key_domain = t.name;
      }
    }
    for (auto& c : t.columns) {
      if (!c.sig_name.empty() && names.count(c.sig_name)) {
        throw SchemaError("signature column " + c.sig_name + " collides with a column");
      }
    }
    if (t.primary_key.empty()) throw SchemaError("table " + t.name + " needs a primary key");
    for (const auto& k : t.primary_key) {
      if (t.column(k).codec.encrypted()) {
        throw SchemaError("primary key column " + k + " of " + t.name + " must be a key");
      }
    }
  }
  // Foreign keys inherit the key domain of the column they reference; one
  // pass per table covers chains listed parents-first.
  for (std::size_t pass = 0; pass < tables.size(); ++pass) {
    for (auto& t : tables) {
      for (const auto& fk : t.foreign_keys) {
        if (fk.columns.size() != fk.ref_columns.size()) {
          throw SchemaError("foreign key arity mismatch in " + t.name);
        }
        const TableDef* ref = lookup(fk.table);
        if (!ref) throw SchemaError(t.name + " references unknown table " + fk.table);
        for (std::size_t i = 0; i < fk.columns.size(); ++i) {
          ColumnDef& c = t.columns[t.index_of(fk.columns[i])];
          const ColumnDef& rc = ref->column(fk.ref_columns[i]);
          if (c.codec.kind == ColumnKind::kKey && !rc.key_domain.empty() && !c.replace) {
            c.key_domain = rc.key_domain;
          }
        }
      }
    }
  }
}

const TableDef& Catalog::table(std::string_view name) const {
  if (const TableDef* t = find_table(name)) return *t;
  throw QueryError("unknown table '" + std::string(name) + "'");
}

TableDef* Catalog::find_table(std::string_view name) {
  for (auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const TableDef* Catalog::find_table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const CubeSpec* Catalog::find_cube(std::string_view name) const {
  for (const auto& c : cubes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

SharedTableSchema Catalog::shared_schema(const TableDef& t) const {
  SharedTableSchema s;
  s.name = t.name;
  s.p2 = config.p2;
  s.primary_key = t.primary_key;
  for (const auto& c : t.columns) {
    SharedColumn sc;
    sc.name = c.name;
    sc.nullable = c.codec.nullable;
    if (c.codec.kind == ColumnKind::kKey) {
      sc.role = ColumnRole::kKey;
    } else if (c.codec.kind == ColumnKind::kBoolean) {
      sc.role = ColumnRole::kPlain;
    } else {
      sc.role = ColumnRole::kShared;
      sc.blocks = c.codec.fixed_blocks(config.t);
      sc.sig_name = c.sig_name;
    }
    s.columns.push_back(std::move(sc));
  }
  return s;
}

std::int64_t Catalog::map_key(const std::string& domain, const std::string& original) {
  auto& m = key_maps[domain];
  auto it = m.find(original);
  if (it != m.end()) return it->second;
  const std::int64_t seq = ++sequences[domain];
  m.emplace(original, seq);
  reverse_[domain][seq] = original;
  return seq;
}

std::optional<std::int64_t> Catalog::find_key(const std::string& domain,
                                              const std::string& original) const {
  auto dm = key_maps.find(domain);
  if (dm == key_maps.end()) return std::nullopt;
  auto it = dm->second.find(original);
  if (it == dm->second.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Catalog::original_key(const std::string& domain, std::int64_t seq) const {
  auto rev = reverse_.find(domain);
  if (rev == reverse_.end()) return std::nullopt;
  auto it = rev->second.find(seq);
  if (it == rev->second.end()) return std::nullopt;
  return it->second;
}

json Catalog::to_json() const {
  json rows = json::array();
  for (const auto& r : coeffs.rows()) {
    json jr = json::array();
    for (auto a : r) jr.push_back(std::to_string(a));
    rows.push_back(std::move(jr));
  }
  json eps = json::object();
  for (const auto& [id, uri] : endpoints) eps[std::to_string(id)] = uri;
  json tabs = json::array();
  for (const auto& t : tables) tabs.push_back(table_to_json(t));
  json cubes_j = json::array();
  for (const auto& c : cubes) cubes_j.push_back(cube_to_json(c));
  return {{"version", version},
          {"config",
           {{"n", config.n},
            {"t", config.t},
            {"p", config.p},
            {"p2", config.p2},
            {"csp_ids", config.csp_ids},
            {"seed", std::to_string(config.seed)}}},
          {"coefficients", rows},
          {"endpoints", eps},
          {"tables", tabs},
          {"sequences", sequences},
          {"key_maps", key_maps},
          {"cubes", cubes_j}};
}

Catalog Catalog::from_json(const json& j) {
  Catalog c;
  try {
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw ConfigError("unsupported catalog version " + std::to_string(c.version));
    const json& jc = j.at("config");
    c.config.n = jc.at("n").get<int>();
    c.config.t = jc.at("t").get<int>();
    c.config.p = jc.at("p").get<std::int64_t>();
    c.config.p2 = jc.at("p2").get<std::int64_t>();
    c.config.csp_ids = jc.at("csp_ids").get<std::vector<CspId>>();
    c.config.seed = std::stoull(jc.at("seed").get<std::string>());
    c.config.validate();
    CoefficientRows rows;
    for (const auto& jr : j.at("coefficients")) {
      std::vector<std::int64_t> row;
      for (const auto& a : jr) row.push_back(std::stoll(a.get<std::string>()));
      rows.push_back(std::move(row));
    }
    c.coeffs = CoefficientSet(c.config.csp_ids, rows, c.config.p);
    for (const auto& [id, uri] : j.at("endpoints").items()) {
      c.endpoints[std::stoll(id)] = uri.get<std::string>();
    }
    for (const auto& jt : j.at("tables")) c.tables.push_back(table_from_json(jt));
    c.sequences = j.at("sequences").get<std::map<std::string, std::int64_t>>();
    c.key_maps = j.at("key_maps").get<std::map<std::string, std::map<std::string, std::int64_t>>>();
    for (const auto& jcube : j.at("cubes")) c.cubes.push_back(cube_from_json(jcube));
    for (const auto& [domain, m] : c.key_maps) {
      for (const auto& [orig, seq] : m) c.reverse_[domain][seq] = orig;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed catalog: ") + e.what());
  }
  return c;
}

void Catalog::save(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json().dump(2) << '\n';
    if (!out) throw ConfigError("cannot write catalog " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Catalog Catalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("catalog " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace shardhouse
