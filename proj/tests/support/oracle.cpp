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


#include "support/oracle.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shardhouse::testing {

namespace {

std::string quote_ident(const std::string& name) { return "\"" + name + "\""; }

void bind(sqlite3_stmt* st, int i, const Value& v) {
  if (is_null(v)) {
    sqlite3_bind_null(st, i);
  } else if (const auto* b = std::get_if<bool>(&v)) {
    sqlite3_bind_int64(st, i, *b ? 1 : 0);
  } else if (const auto* x = std::get_if<std::int64_t>(&v)) {
    sqlite3_bind_int64(st, i, *x);
  } else if (const auto* s = std::get_if<std::string>(&v)) {
    sqlite3_bind_text(st, i, s->c_str(), static_cast<int>(s->size()), SQLITE_TRANSIENT);
  } else if (const auto* d = std::get_if<Date>(&v)) {
    const std::string s = format_date(*d);
    sqlite3_bind_text(st, i, s.c_str(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
  } else {
    sqlite3_bind_double(st, i, to_double(v));
  }
}

Cell to_cell(const Value& v) {
  Cell c;
  if (is_null(v)) return c;
  if (const auto* s = std::get_if<std::string>(&v)) {
    c.kind = 2;
    c.text = *s;
  } else if (const auto* d = std::get_if<Date>(&v)) {
    c.kind = 2;
    c.text = format_date(*d);
  } else if (const auto* b = std::get_if<bool>(&v)) {
    c.kind = 1;
    c.num = *b ? 1 : 0;
  } else {
    c.kind = 1;
    c.num = to_double(v);
  }
  return c;
}

bool cell_less(const Cell& a, const Cell& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.kind == 1) return a.num < b.num;
  return a.text < b.text;
}

bool row_less(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool cell_close(const Cell& a, const Cell& b, double tol) {
  if (a.kind != b.kind) return false;
  if (a.kind == 0) return true;
  if (a.kind == 2) return a.text == b.text;
  return std::fabs(a.num - b.num) <= tol * std::max({1.0, std::fabs(a.num), std::fabs(b.num)});
}

std::string cell_text(const Cell& c) {
  if (c.kind == 0) return "NULL";
  if (c.kind == 2) return "'" + c.text + "'";
  std::ostringstream os;
  os.precision(17);
  os << c.num;
  return os.str();
}

}  // namespace

SqliteOracle::SqliteOracle() {
  if (sqlite3_open(":memory:", &db_) != SQLITE_OK) throw std::runtime_error("sqlite open failed");
  exec("PRAGMA case_sensitive_like=ON");
}

SqliteOracle::~SqliteOracle() { sqlite3_close(db_); }

void SqliteOracle::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "?";
    sqlite3_free(err);
    throw std::runtime_error("sqlite: " + msg + " in " + sql);
  }
}

void SqliteOracle::load(const TableDef& table, const std::vector<Row>& rows) {
  std::string cols, marks;
  for (const auto& c : table.columns) {
    if (!cols.empty()) {
      cols += ", ";
      marks += ", ";
    }
    cols += quote_ident(c.name);
    marks += "?";
  }
  exec("CREATE TABLE " + quote_ident(table.name) + " (" + cols + ")");
  exec("BEGIN");
  sqlite3_stmt* st = nullptr;
  const std::string ins = "INSERT INTO " + quote_ident(table.name) + " VALUES (" + marks + ")";
  if (sqlite3_prepare_v2(db_, ins.c_str(), -1, &st, nullptr) != SQLITE_OK)
    throw std::runtime_error(sqlite3_errmsg(db_));
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) bind(st, static_cast<int>(i + 1), r[i]);
    if (sqlite3_step(st) != SQLITE_DONE) throw std::runtime_error(sqlite3_errmsg(db_));
    sqlite3_reset(st);
  }
  sqlite3_finalize(st);
  exec("COMMIT");
}

ResultSet SqliteOracle::query(const std::string& sql) {
  std::string text = sql;
  for (std::size_t at; (at = text.find("DATE '")) != std::string::npos;) text.erase(at, 5);
  sqlite3_stmt* st = nullptr;
  if (sqlite3_prepare_v2(db_, text.c_str(), -1, &st, nullptr) != SQLITE_OK)
    throw std::runtime_error(std::string("sqlite: ") + sqlite3_errmsg(db_) + " in " + text);
  ResultSet rs;
  const int n = sqlite3_column_count(st);
  for (int i = 0; i < n; ++i) rs.columns.push_back(sqlite3_column_name(st, i));
  int rc;
  while ((rc = sqlite3_step(st)) == SQLITE_ROW) {
    Row r;
    for (int i = 0; i < n; ++i) {
      switch (sqlite3_column_type(st, i)) {
        case SQLITE_NULL: r.emplace_back(); break;
        case SQLITE_INTEGER: r.emplace_back(std::int64_t{sqlite3_column_int64(st, i)}); break;
        case SQLITE_FLOAT: r.emplace_back(sqlite3_column_double(st, i)); break;
        default:
          r.emplace_back(std::string(reinterpret_cast<const char*>(sqlite3_column_text(st, i))));
      }
    }
    rs.rows.push_back(std::move(r));
  }
  sqlite3_finalize(st);
  if (rc != SQLITE_DONE) throw std::runtime_error(sqlite3_errmsg(db_));
  return rs;
}

std::vector<std::vector<Cell>> normalize(const ResultSet& rs) {
  std::vector<std::vector<Cell>> out;
  out.reserve(rs.rows.size());
  for (const auto& r : rs.rows) {
    std::vector<Cell> cells;
    for (const auto& v : r) cells.push_back(to_cell(v));
    out.push_back(std::move(cells));
  }
  std::sort(out.begin(), out.end(), row_less);
  return out;
}

bool same_rows(const ResultSet& got, const ResultSet& want, double tol, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const auto a = normalize(got), b = normalize(want);
  if (a.size() != b.size())
    return fail("row count " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return fail("arity differs at row " + std::to_string(i));
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      if (!cell_close(a[i][j], b[i][j], tol))
        return fail("row " + std::to_string(i) + " col " + std::to_string(j) + ": " +
                    cell_text(a[i][j]) + " vs " + cell_text(b[i][j]));
    }
  }
  return true;
}

std::string dump(const ResultSet& rs, std::size_t limit) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rs.rows.size() && i < limit; ++i) {
    for (const auto& v : rs.rows[i]) os << format_value(v) << " | ";
    os << "\n";
  }
  if (rs.rows.size() > limit) os << "... " << rs.rows.size() << " rows\n";
  return os.str();
}

}  // namespace shardhouse::testing
