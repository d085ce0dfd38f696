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


#include "shardhouse/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "shardhouse/codec.h"
#include "shardhouse/errors.h"
#include "shardhouse/scheme.h"

namespace shardhouse {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::uint32_t> gen_flat(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> dist;
  std::vector<std::uint32_t> out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

void write_flat_csv(const std::vector<std::uint32_t>& values, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "id,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i + 1) << ',' << values[i] << '\n';
}

json flat_sidecar() {
  return {{"name", "flat"},
          {"columns",
           {{{"name", "id"}, {"is_key", true}},
            {{"name", "value"}, {"kind", "integer"}, {"signed", false}}}},
          {"primary_key", {"id"}}};
}

namespace {

json key_col(const char* name) { return {{"name", name}, {"is_key", true}}; }
json text_col(const char* name, int width, bool nullable = false) {
  return {{"name", name}, {"kind", "string"}, {"width", width}, {"nullable", nullable}};
}
json uint_col(const char* name, bool nullable = false) {
  return {{"name", name}, {"kind", "integer"}, {"signed", false}, {"nullable", nullable}};
}
json bool_col(const char* name) { return {{"name", name}, {"kind", "boolean"}}; }
json fk(const char* col, const char* table, const char* ref) {
  return {{"columns", {col}}, {"table", table}, {"ref_columns", {ref}}};
}

struct Nation {
  const char* name;
  const char* region;
};

constexpr Nation kNations[] = {
    {"ALGERIA", "AFRICA"},        {"ARGENTINA", "AMERICA"},   {"BRAZIL", "AMERICA"},
    {"CANADA", "AMERICA"},        {"EGYPT", "MIDDLE EAST"},   {"ETHIOPIA", "AFRICA"},
    {"FRANCE", "EUROPE"},         {"GERMANY", "EUROPE"},      {"INDIA", "ASIA"},
    {"INDONESIA", "ASIA"},        {"IRAN", "MIDDLE EAST"},    {"IRAQ", "MIDDLE EAST"},
    {"JAPAN", "ASIA"},            {"JORDAN", "MIDDLE EAST"},  {"KENYA", "AFRICA"},
    {"MOROCCO", "AFRICA"},        {"MOZAMBIQUE", "AFRICA"},   {"PERU", "AMERICA"},
    {"CHINA", "ASIA"},            {"ROMANIA", "EUROPE"},      {"SAUDI ARABIA", "MIDDLE EAST"},
    {"VIETNAM", "ASIA"},          {"RUSSIA", "EUROPE"},       {"UNITED KINGDOM", "EUROPE"},
    {"UNITED STATES", "AMERICA"},
};
constexpr std::size_t kUnitedKingdom = 23, kUnitedStates = 24;

constexpr const char* kColors[] = {"almond", "azure",  "blush",  "coral", "cyan",  "forest",
                                   "ivory",  "khaki",  "linen",  "navy",  "olive", "orchid",
                                   "peach",  "plum",   "salmon", "sienna", "tan",  "violet"};
constexpr const char* kSegments[] = {"AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD",
                                     "MACHINERY"};
constexpr const char* kPriorities[] = {"1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPEC", "5-LOW"};
constexpr const char* kShipModes[] = {"REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"};
constexpr const char* kContainers[] = {"SM CASE", "SM BOX", "MED BAG", "MED PKG", "LG CASE",
                                       "LG DRUM", "JUMBO JAR", "WRAP PACK"};
constexpr const char* kTypes[] = {"STANDARD ANODIZED TIN", "SMALL PLATED COPPER",
                                  "MEDIUM BURNISHED NICKEL", "LARGE BRUSHED STEEL",
                                  "ECONOMY POLISHED BRASS", "PROMO PLATED TIN"};
constexpr const char* kDays[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                 "Thursday", "Friday", "Saturday"};
constexpr const char* kMonths[] = {"January", "February", "March",     "April",   "May",      "June",
                                   "July",    "August",   "September", "October", "November",
                                   "December"};

std::string city_of(const Nation& n, int digit) {
  std::string c = n.name;
  c.resize(9, ' ');
  return c + std::to_string(digit);
}

std::string padded(std::int64_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

template <typename Rng>
std::string random_text(Rng& rng, std::size_t lo, std::size_t hi) {
  static const char kAlpha[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::uniform_int_distribution<std::size_t> len(lo, hi), ch(0, sizeof(kAlpha) - 2);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = kAlpha[ch(rng)];
  return s;
}

template <typename Rng>
std::string phone(Rng& rng, std::size_t nation) {
  std::uniform_int_distribution<int> d3(100, 999), d4(1000, 9999);
  return std::to_string(10 + nation) + "-" + std::to_string(d3(rng)) + "-" + std::to_string(d3(rng)) +
         "-" + std::to_string(d4(rng));
}

// Half of the customers and suppliers come from two nations so the city
// and nation templates select rows at this scale.
template <typename Rng>
std::size_t pick_nation(Rng& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  if (u(rng) < 0.5) return u(rng) < 0.5 ? kUnitedKingdom : kUnitedStates;
  return std::uniform_int_distribution<std::size_t>(0, std::size(kNations) - 1)(rng);
}

}  // namespace

json ssb_sidecar(std::int64_t p) {
  int w = 1;
  while (digit_capacity(p, w) < 128) ++w;
  json customer = {
      {"name", "customer"},
      {"columns",
       {key_col("c_custkey"), text_col("c_name", w), text_col("c_address", w), text_col("c_city", w),
        text_col("c_nation", w), text_col("c_region", w), text_col("c_phone", w),
        text_col("c_mktsegment", w)}},
      {"primary_key", {"c_custkey"}}};
  json supplier = {
      {"name", "supplier"},
      {"columns",
       {key_col("s_suppkey"), text_col("s_name", w), text_col("s_address", w), text_col("s_city", w),
        text_col("s_nation", w), text_col("s_region", w), text_col("s_phone", w)}},
      {"primary_key", {"s_suppkey"}}};
  json part = {
      {"name", "part"},
      {"columns",
       {key_col("p_partkey"), text_col("p_name", w), text_col("p_mfgr", w), text_col("p_category", w),
        text_col("p_brand1", w), text_col("p_color", w, true), text_col("p_type", w),
        uint_col("p_size", true), text_col("p_container", w)}},
      {"primary_key", {"p_partkey"}}};
  json date = {
      {"name", "date"},
      {"columns",
       {key_col("d_datekey"), text_col("d_dayofweek", w), text_col("d_month", w), uint_col("d_year"),
        uint_col("d_yearmonthnum"), text_col("d_yearmonth", w), uint_col("d_daynuminweek"),
        uint_col("d_daynuminmonth"), uint_col("d_monthnuminyear"), uint_col("d_weeknuminyear"),
        text_col("d_sellingseason", w), bool_col("d_holidayfl"), bool_col("d_weekdayfl")}},
      {"primary_key", {"d_datekey"}}};
  json lineorder = {
      {"name", "lineorder"},
      {"columns",
       {key_col("lo_orderkey"), key_col("lo_linenumber"), key_col("lo_custkey"),
        key_col("lo_partkey"), key_col("lo_suppkey"), key_col("lo_orderdate"),
        text_col("lo_orderpriority", w),
        {{"name", "lo_shippriority"}, {"kind", "character"}, {"width", w}},
        uint_col("lo_quantity"), uint_col("lo_extendedprice"), uint_col("lo_ordtotalprice"),
        uint_col("lo_discount"), uint_col("lo_revenue"), uint_col("lo_supplycost"),
        uint_col("lo_tax"), {{"name", "lo_commitdate"}, {"kind", "date"}},
        text_col("lo_shipmode", w)}},
      {"primary_key", {"lo_orderkey", "lo_linenumber"}},
      {"foreign_keys",
       {fk("lo_custkey", "customer", "c_custkey"), fk("lo_partkey", "part", "p_partkey"),
        fk("lo_suppkey", "supplier", "s_suppkey"), fk("lo_orderdate", "date", "d_datekey")}}};
  return {{"tables", {customer, supplier, part, date, lineorder}}};
}

std::vector<NamedQuery> ssb_queries() {
  const char* kJoin3 = "lo_custkey = c_custkey AND lo_suppkey = s_suppkey AND lo_orderdate = d_datekey";
  return {
      {"Q1.1",
       "SELECT SUM(lo_extendedprice * lo_discount) AS revenue FROM lineorder, date "
       "WHERE lo_orderdate = d_datekey AND d_year = 1993 AND lo_discount BETWEEN 1 AND 3 "
       "AND lo_quantity < 25"},
      {"Q1.2",
       "SELECT SUM(lo_extendedprice * lo_discount) AS revenue FROM lineorder, date "
       "WHERE lo_orderdate = d_datekey AND d_yearmonthnum = 199401 "
       "AND lo_discount BETWEEN 4 AND 6 AND lo_quantity BETWEEN 26 AND 35"},
      {"Q1.3",
       "SELECT SUM(lo_extendedprice * lo_discount) AS revenue FROM lineorder, date "
       "WHERE lo_orderdate = d_datekey AND d_weeknuminyear = 6 AND d_year = 1994 "
       "AND lo_discount BETWEEN 5 AND 7 AND lo_quantity BETWEEN 26 AND 35"},
      {"Q2.1",
       "SELECT SUM(lo_revenue), d_year, p_brand1 FROM lineorder, date, part, supplier "
       "WHERE lo_orderdate = d_datekey AND lo_partkey = p_partkey AND lo_suppkey = s_suppkey "
       "AND p_category = 'MFGR#12' AND s_region = 'AMERICA' "
       "GROUP BY d_year, p_brand1 ORDER BY d_year, p_brand1"},
      {"Q2.2",
       "SELECT SUM(lo_revenue), d_year, p_brand1 FROM lineorder, date, part, supplier "
       "WHERE lo_orderdate = d_datekey AND lo_partkey = p_partkey AND lo_suppkey = s_suppkey "
       "AND p_brand1 BETWEEN 'MFGR#2221' AND 'MFGR#2228' AND s_region = 'ASIA' "
       "GROUP BY d_year, p_brand1 ORDER BY d_year, p_brand1"},
      {"Q2.3",
       "SELECT SUM(lo_revenue), d_year, p_brand1 FROM lineorder, date, part, supplier "
       "WHERE lo_orderdate = d_datekey AND lo_partkey = p_partkey AND lo_suppkey = s_suppkey "
       "AND p_brand1 = 'MFGR#2239' AND s_region = 'EUROPE' "
       "GROUP BY d_year, p_brand1 ORDER BY d_year, p_brand1"},
      {"Q3.1",
       std::string("SELECT c_nation, s_nation, d_year, SUM(lo_revenue) AS revenue "
                   "FROM customer, lineorder, supplier, date WHERE ") +
           kJoin3 +
           " AND c_region = 'ASIA' AND s_region = 'ASIA' AND d_year >= 1992 AND d_year <= 1997 "
           "GROUP BY c_nation, s_nation, d_year ORDER BY d_year ASC, revenue DESC"},
      {"Q3.2",
       std::string("SELECT c_city, s_city, d_year, SUM(lo_revenue) AS revenue "
                   "FROM customer, lineorder, supplier, date WHERE ") +
           kJoin3 +
           " AND c_nation = 'UNITED STATES' AND s_nation = 'UNITED STATES' "
           "AND d_year >= 1992 AND d_year <= 1997 "
           "GROUP BY c_city, s_city, d_year ORDER BY d_year ASC, revenue DESC"},
      {"Q3.3",
       std::string("SELECT c_city, s_city, d_year, SUM(lo_revenue) AS revenue "
                   "FROM customer, lineorder, supplier, date WHERE ") +
           kJoin3 +
           " AND (c_city = 'UNITED KI1' OR c_city = 'UNITED KI5') "
           "AND (s_city = 'UNITED KI1' OR s_city = 'UNITED KI5') "
           "AND d_year >= 1992 AND d_year <= 1997 "
           "GROUP BY c_city, s_city, d_year ORDER BY d_year ASC, revenue DESC"},
      {"Q3.4",
       std::string("SELECT c_city, s_city, d_year, SUM(lo_revenue) AS revenue "
                   "FROM customer, lineorder, supplier, date WHERE ") +
           kJoin3 +
           " AND (c_city = 'UNITED KI1' OR c_city = 'UNITED KI5') "
           "AND (s_city = 'UNITED KI1' OR s_city = 'UNITED KI5') AND d_yearmonth = 'Dec1997' "
           "GROUP BY c_city, s_city, d_year ORDER BY d_year ASC, revenue DESC"},
      {"Q4.1",
       "SELECT d_year, c_nation, SUM(lo_revenue - lo_supplycost) AS profit "
       "FROM date, customer, supplier, part, lineorder "
       "WHERE lo_custkey = c_custkey AND lo_suppkey = s_suppkey AND lo_partkey = p_partkey "
       "AND lo_orderdate = d_datekey AND c_region = 'AMERICA' AND s_region = 'AMERICA' "
       "AND (p_mfgr = 'MFGR#1' OR p_mfgr = 'MFGR#2') "
       "GROUP BY d_year, c_nation ORDER BY d_year, c_nation"},
      {"Q4.2",
       "SELECT d_year, s_nation, p_category, SUM(lo_revenue - lo_supplycost) AS profit "
       "FROM date, customer, supplier, part, lineorder "
       "WHERE lo_custkey = c_custkey AND lo_suppkey = s_suppkey AND lo_partkey = p_partkey "
       "AND lo_orderdate = d_datekey AND c_region = 'AMERICA' AND s_region = 'AMERICA' "
       "AND (d_year = 1997 OR d_year = 1998) AND (p_mfgr = 'MFGR#1' OR p_mfgr = 'MFGR#2') "
       "GROUP BY d_year, s_nation, p_category ORDER BY d_year, s_nation, p_category"},
      {"Q4.3",
       "SELECT d_year, s_city, p_brand1, SUM(lo_revenue - lo_supplycost) AS profit "
       "FROM date, customer, supplier, part, lineorder "
       "WHERE lo_custkey = c_custkey AND lo_suppkey = s_suppkey AND lo_partkey = p_partkey "
       "AND lo_orderdate = d_datekey AND c_region = 'AMERICA' AND s_nation = 'UNITED STATES' "
       "AND (d_year = 1997 OR d_year = 1998) AND p_category = 'MFGR#14' "
       "GROUP BY d_year, s_city, p_brand1 ORDER BY d_year, s_city, p_brand1"},
  };
}

SsbDataset gen_ssb(std::uint64_t seed, std::int64_t p, std::size_t lineorder_rows) {
  SsbDataset data;
  data.tables = tables_from_sidecar(ssb_sidecar(p));
  data.queries = ssb_queries();
  std::mt19937_64 rng(seed);
  auto uni = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  auto chance = [&](double q) { return std::uniform_real_distribution<double>(0, 1)(rng) < q; };
  const std::size_t customers = 300, suppliers = 100, parts = 800;

  auto& cust = data.rows["customer"];
  for (std::size_t i = 1; i <= customers; ++i) {
    const std::size_t n = pick_nation(rng);
    cust.push_back({std::int64_t(i), "Customer#" + padded(std::int64_t(i), 9), random_text(rng, 10, 25),
                    city_of(kNations[n], int(uni(0, 9))), std::string(kNations[n].name),
                    std::string(kNations[n].region), phone(rng, n),
                    std::string(kSegments[uni(0, std::size(kSegments) - 1)])});
  }
  auto& supp = data.rows["supplier"];
  for (std::size_t i = 1; i <= suppliers; ++i) {
    const std::size_t n = pick_nation(rng);
    supp.push_back({std::int64_t(i), "Supplier#" + padded(std::int64_t(i), 9), random_text(rng, 10, 25),
                    city_of(kNations[n], int(uni(0, 9))), std::string(kNations[n].name),
                    std::string(kNations[n].region), phone(rng, n)});
  }
  auto& part = data.rows["part"];
  std::vector<std::int64_t> price(parts + 1);
  for (std::size_t i = 1; i <= parts; ++i) {
    const std::int64_t mfgr = uni(1, 5), cat = uni(1, 5);
    // A third of the brands land in the ranges the templates ask for.
    const std::int64_t brand = chance(0.33) ? uni(21, 40) : uni(1, 40);
    const std::string category = "MFGR#" + std::to_string(mfgr) + std::to_string(cat);
    const std::string color = kColors[uni(0, std::size(kColors) - 1)];
    Row r{std::int64_t(i),
          color + " " + kColors[uni(0, std::size(kColors) - 1)],
          "MFGR#" + std::to_string(mfgr),
          category,
          category + padded(brand, 2),
          chance(0.05) ? Value{} : Value{color},
          std::string(kTypes[uni(0, std::size(kTypes) - 1)]),
          chance(0.03) ? Value{} : Value{uni(1, 50)},
          std::string(kContainers[uni(0, std::size(kContainers) - 1)])};
    price[i] = 900 + (std::int64_t(i) * 7) % 1100;
    part.push_back(std::move(r));
  }

  using namespace std::chrono;
  auto& dates = data.rows["date"];
  std::vector<std::int64_t> datekeys, dec1997;
  std::map<std::int64_t, sys_days> key_day;
  const sys_days first = sys_days(year{1992} / January / 1), last = sys_days(year{1998} / December / 31);
  for (sys_days d = first; d <= last; d += days{1}) {
    const year_month_day ymd(d);
    const weekday wd(d);
    const auto y = int(ymd.year());
    const auto m = unsigned(ymd.month());
    const auto dd = unsigned(ymd.day());
    const std::int64_t key = y * 10000 + m * 100 + dd;
    const auto doy = (d - sys_days(year{y} / January / 1)).count() + 1;
    const char* season = m == 12 ? "Christmas" : m <= 2 ? "Winter" : m <= 5 ? "Spring" : m <= 8 ? "Summer" : "Fall";
    const bool holiday = (m == 1 && dd == 1) || (m == 7 && dd == 4) || (m == 12 && dd == 25);
    const unsigned dow = wd.c_encoding();
    dates.push_back({key, std::string(kDays[dow]), std::string(kMonths[m - 1]), std::int64_t(y),
                     std::int64_t(y * 100 + m),
                     std::string(kMonths[m - 1]).substr(0, 3) + std::to_string(y),
                     std::int64_t(dow + 1), std::int64_t(dd), std::int64_t(m),
                     std::int64_t((doy - 1) / 7 + 1), std::string(season), holiday,
                     dow >= 1 && dow <= 5});
    datekeys.push_back(key);
    key_day[key] = d;
    if (y == 1997 && m == 12) dec1997.push_back(key);
  }

  auto& lo = data.rows["lineorder"];
  std::int64_t order = 0;
  while (lo.size() < lineorder_rows) {
    ++order;
    const std::int64_t lines = std::min<std::int64_t>(uni(1, 7), std::int64_t(lineorder_rows - lo.size()));
    const std::int64_t cust_key = uni(1, customers);
    const std::int64_t date_key =
        chance(0.1) ? dec1997[uni(0, dec1997.size() - 1)] : datekeys[uni(0, datekeys.size() - 1)];
    const std::string priority = kPriorities[uni(0, 4)];
    const std::size_t start = lo.size();
    std::int64_t total = 0;
    for (std::int64_t l = 1; l <= lines; ++l) {
      const std::int64_t pk = uni(1, parts), qty = uni(1, 50), disc = uni(0, 10);
      const std::int64_t ext = qty * price[pk];
      total += ext;
      const sys_days commit = key_day[date_key] + days{uni(30, 90)};
      lo.push_back({order, l, cust_key, pk, uni(1, suppliers), date_key, priority, std::string("0"),
                    qty, ext, std::int64_t{0}, disc, ext * (100 - disc) / 100, price[pk] * 6 / 10,
                    uni(0, 8), Date{std::int32_t((commit - sys_days{}).count())},
                    std::string(kShipModes[uni(0, std::size(kShipModes) - 1)])});
    }
    for (std::size_t i = start; i < lo.size(); ++i) lo[i][10] = total;
  }
  return data;
}

void write_ssb(const SsbDataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  json schema = {{"tables", json::array()}};
  for (const auto& t : data.tables) schema["tables"].push_back(table_to_json(t));
  std::ofstream(dir / "schema.json") << schema.dump(2) << "\n";
  for (const auto& t : data.tables) {
    std::ofstream out(dir / (t.name + ".csv"));
    const auto names = t.column_names();
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << "\n";
    for (const auto& row : data.rows.at(t.name)) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        if (is_null(row[i])) continue;
        if (auto s = std::get_if<std::string>(&row[i])) {
          out << csv_field(*s);
        } else {
          out << csv_field(format_value(row[i]));
        }
      }
      out << "\n";
    }
  }
  std::ofstream q(dir / "queries.sql");
  for (const auto& nq : data.queries) q << "-- " << nq.name << "\n" << nq.sql << ";\n";
}

std::vector<NamedQuery> random_ssb_queries(const SsbDataset& data, std::size_t count,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  const auto& dates = data.rows.at("date");
  auto datekey = [&]() { return std::get<std::int64_t>(dates[uni(0, dates.size() - 1)][0]); };
  auto quote = [](const std::string& s) { return "'" + s + "'"; };
  std::vector<NamedQuery> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t kind = static_cast<std::int64_t>(i % 12);
    std::string sql;
    const std::string nation = kNations[uni(0, std::size(kNations) - 1)].name;
    switch (kind) {
      case 0:
        sql = "SELECT c_custkey, c_name, c_city FROM customer WHERE c_nation = " + quote(nation);
        break;
      case 1: {
        const auto a = uni(1, 45);
        sql = "SELECT lo_orderkey, lo_linenumber, lo_quantity, lo_discount FROM lineorder "
              "WHERE lo_quantity BETWEEN " + std::to_string(a) + " AND " + std::to_string(a + uni(0, 5)) +
              " AND lo_discount = " + std::to_string(uni(0, 10));
        break;
      }
      case 2:
        sql = "SELECT lo_shipmode, COUNT(*), SUM(lo_revenue), AVG(lo_quantity) FROM lineorder "
              "WHERE lo_discount >= " + std::to_string(uni(0, 10)) + " GROUP BY lo_shipmode";
        break;
      case 3: {
        auto a = datekey(), b = datekey();
        if (a > b) std::swap(a, b);
        sql = "SELECT lo_suppkey, COUNT(*), SUM(lo_extendedprice), AVG(lo_tax) FROM lineorder "
              "WHERE lo_orderdate >= " + std::to_string(a) + " AND lo_orderdate < " +
              std::to_string(b) + " GROUP BY lo_suppkey";
        break;
      }
      case 4:
        sql = "SELECT SUM(lo_revenue), COUNT(*), AVG(lo_discount), COUNT(lo_tax) FROM lineorder "
              "WHERE lo_quantity < " + std::to_string(uni(1, 50));
        break;
      case 5:
        sql = "SELECT p_mfgr, COUNT(*), COUNT(p_size), SUM(p_size), AVG(p_size) FROM part "
              "GROUP BY p_mfgr";
        break;
      case 6: {
        const auto day = std::get<std::int64_t>(dates[uni(0, dates.size() - 40)][0]);
        const std::string d = std::to_string(day);
        const std::string from = d.substr(0, 4) + "-" + d.substr(4, 2) + "-" + d.substr(6, 2);
        const Date lo = parse_date(from);
        sql = "SELECT lo_orderkey, lo_linenumber, lo_commitdate FROM lineorder "
              "WHERE lo_commitdate BETWEEN DATE '" + from + "' AND DATE '" +
              format_date(Date{lo.days + std::int32_t(uni(0, 20))}) + "'";
        break;
      }
      case 7:
        sql = "SELECT d_year, COUNT(*) FROM date WHERE d_holidayfl = true GROUP BY d_year";
        break;
      case 8:
        sql = "SELECT s_name, s_phone FROM supplier WHERE s_region IN ('ASIA', 'EUROPE') "
              "AND s_nation <> " + quote(nation);
        break;
      case 9:
        sql = "SELECT p_partkey, p_name FROM part WHERE p_name LIKE '%" +
              std::string(kColors[uni(0, std::size(kColors) - 1)]) + "%'";
        break;
      case 10: {
        std::string list;
        for (int k = 0; k < 5; ++k) list += (k ? ", " : "") + std::to_string(uni(1, 300));
        sql = "SELECT lo_orderpriority, lo_shippriority, COUNT(*) FROM lineorder WHERE lo_custkey IN (" +
              list + ") GROUP BY lo_orderpriority, lo_shippriority ORDER BY lo_orderpriority";
        break;
      }
      default: {
        const auto lo_d = uni(0, 8);
        sql = "SELECT SUM(lo_supplycost), COUNT(*) FROM lineorder WHERE lo_suppkey = " +
              std::to_string(uni(1, 100)) + " AND lo_discount BETWEEN " + std::to_string(lo_d) +
              " AND " + std::to_string(lo_d + 2);
      }
    }
    out.push_back({"R" + std::to_string(i + 1), sql});
  }
  return out;
}

CorruptionPattern parse_pattern(const std::string& name) {
  if (name == "add") return CorruptionPattern::kAddDelta;
  if (name == "replace") return CorruptionPattern::kRandomReplace;
  if (name == "sigpreserve") return CorruptionPattern::kSignaturePreserving;
  throw ConfigError("unknown corruption pattern '" + name + "' (add, replace, sigpreserve)");
}

std::string pattern_name(CorruptionPattern p) {
  switch (p) {
    case CorruptionPattern::kAddDelta: return "add";
    case CorruptionPattern::kRandomReplace: return "replace";
    case CorruptionPattern::kSignaturePreserving: return "sigpreserve";
  }
  return "?";
}

std::size_t inject_errors(StoreClient& csp, const std::string& table, CorruptionPattern pattern,
                          double rate, std::int64_t delta, std::uint64_t seed) {
  if (rate <= 0) return 0;
  std::vector<ShareRow> rows;
  SharedTableSchema schema;
  for (std::optional<std::size_t> offset = 0; offset;) {
    auto snap = csp.snapshot(table, *offset);
    schema = snap.schema;
    for (auto& r : snap.rows) rows.push_back(std::move(r));
    offset = snap.next;
  }
  BigInt largest = 1;
  for (const auto& r : rows) {
    for (const auto& c : r.cells) {
      if (auto s = std::get_if<SharedCell>(&c)) {
        for (const auto& e : s->shares) largest = std::max(largest, e);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0, 1);
  auto random_below = [&](const BigInt& bound) {
    // Uniform enough for corruption: 64 random bits per limb, reduced.
    BigInt v = 0;
    const std::size_t bits = boost::multiprecision::msb(bound) + 65;
    for (std::size_t b = 0; b < bits; b += 64) v = (v << 64) + BigInt(rng());
    return BigInt(v % bound);
  };
  std::size_t corrupted = 0;
  std::vector<ShareRow> changed;
  for (auto& r : rows) {
    bool touched = false;
    for (auto& c : r.cells) {
      auto s = std::get_if<SharedCell>(&c);
      if (!s) continue;
      for (auto& e : s->shares) {
        if (coin(rng) >= rate) continue;
        switch (pattern) {
          case CorruptionPattern::kAddDelta:
            e += delta;
            if (e < 0) e = -e;
            break;
          case CorruptionPattern::kRandomReplace: {
            BigInt v = random_below(2 * largest + 1);
            if (v == e) v += 1;
            e = std::move(v);
            break;
          }
          case CorruptionPattern::kSignaturePreserving:
            e += BigInt(schema.p2) * BigInt(std::uniform_int_distribution<int>(1, 1000)(rng));
            break;
        }
        ++corrupted;
        touched = true;
      }
    }
    if (touched) changed.push_back(std::move(r));
  }
  for (std::size_t start = 0; start < changed.size(); start += kLoadBatch) {
    const std::size_t end = std::min(changed.size(), start + kLoadBatch);
    csp.insert(schema,
               std::vector<ShareRow>(changed.begin() + std::ptrdiff_t(start),
                                     changed.begin() + std::ptrdiff_t(end)),
               true);
  }
  return corrupted;
}

namespace {

std::uint64_t share_bytes(const BigInt& e) { return std::max<std::uint64_t>(1, byte_length(e)); }

std::uint64_t int_bytes(std::int64_t v) {
  return v >= std::numeric_limits<std::int32_t>::min() && v <= std::numeric_limits<std::uint32_t>::max() ? 4 : 8;
}

std::uint64_t original_bytes(const ColumnDef& col, const Value& v) {
  if (is_null(v)) return 0;
  switch (col.codec.kind) {
    case ColumnKind::kKey: return int_bytes(std::get<std::int64_t>(v));
    case ColumnKind::kBoolean: return 1;
    case ColumnKind::kInteger: return int_bytes(std::get<std::int64_t>(v));
    case ColumnKind::kReal: return 8;
    case ColumnKind::kDate: return 4;
    case ColumnKind::kCharacter:
    case ColumnKind::kString: return std::get<std::string>(v).size();
  }
  return 0;
}

}  // namespace

VolumeReport measure_volume(const Warehouse& warehouse) {
  const Catalog& catalog = warehouse.catalog();
  VolumeReport report;
  report.n = catalog.config.n;
  report.t = catalog.config.t;
  report.p = catalog.config.p;
  report.p2 = catalog.config.p2;
  const std::uint64_t sig_bytes = catalog.config.p2 <= 256 ? 1 : 2;
  Router router = warehouse.router();
  for (const auto& table : catalog.tables) {
    VolumeRow row;
    row.table = table.name;
    for (const auto& r : router.fetch_table(table.name, {}, {})) {
      ++row.rows;
      for (std::size_t i = 0; i < r.size(); ++i) row.original_bytes += original_bytes(table.columns[i], r[i]);
    }
    for (CspId id : catalog.config.csp_ids) {
      std::uint64_t bytes = 0;
      StoreClient& client = warehouse.pool().client(id);
      for (std::optional<std::size_t> offset = 0; offset;) {
        auto snap = client.snapshot(table.name, *offset);
        for (const auto& r : snap.rows) {
          for (std::size_t i = 0; i < r.cells.size(); ++i) {
            const Cell& c = r.cells[i];
            const ColumnDef& col = table.columns[i];
            if (auto k = std::get_if<std::int64_t>(&c)) {
              bytes += int_bytes(*k);
            } else if (std::holds_alternative<bool>(c)) {
              bytes += 1;
            } else if (auto s = std::get_if<SharedCell>(&c)) {
              const std::uint64_t slots = s->shares.size() * std::uint64_t(catalog.config.t - 1);
              if (id == catalog.config.csp_ids.front()) {
                row.digits += slots;
                if (col.codec.kind == ColumnKind::kInteger) row.integer_digits += slots;
              }
              row.share_integers += s->shares.size();
              if (col.codec.kind == ColumnKind::kInteger) row.integer_shares += s->shares.size();
              for (const auto& e : s->shares) bytes += share_bytes(e) + sig_bytes;
            }
          }
        }
        offset = snap.next;
      }
      row.csp_bytes[id] = bytes;
    }
    report.tables.push_back(std::move(row));
  }
  return report;
}

json VolumeReport::to_json() const {
  json tables_j = json::array();
  for (const auto& r : tables) {
    json csp = json::object();
    for (const auto& [id, b] : r.csp_bytes) {
      csp[std::to_string(id)] = {{"bytes", b},
                                 {"ratio", r.original_bytes ? double(b) / double(r.original_bytes) : 0}};
    }
    tables_j.push_back({{"table", r.table},
                        {"rows", r.rows},
                        {"digits", r.digits},
                        {"share_integers", r.share_integers},
                        {"integer_ratio", r.digits ? double(r.share_integers) / double(r.digits) : 0},
                        {"integer_column_digits", r.integer_digits},
                        {"integer_column_shares", r.integer_shares},
                        {"original_bytes", r.original_bytes},
                        {"csp", csp}});
  }
  return {{"n", n}, {"t", t}, {"p", p}, {"p2", p2}, {"tables", tables_j}};
}

std::string VolumeReport::summary() const {
  std::ostringstream out;
  out << "storage, n=" << n << " t=" << t << " p=" << p << " p2=" << p2 << "\n";
  out << std::left << std::setw(12) << "table" << std::right << std::setw(8) << "rows" << std::setw(12)
      << "shares" << std::setw(12) << "digits" << std::setw(8) << "ratio" << std::setw(14)
      << "orig bytes" << std::setw(14) << "csp bytes" << std::setw(9) << "csp %" << "\n";
  for (const auto& r : tables) {
    std::uint64_t worst = 0;
    for (const auto& [id, b] : r.csp_bytes) worst = std::max(worst, b);
    out << std::left << std::setw(12) << r.table << std::right << std::setw(8) << r.rows << std::setw(12)
        << r.share_integers << std::setw(12) << r.digits << std::setw(8) << std::fixed
        << std::setprecision(3) << (r.digits ? double(r.share_integers) / double(r.digits) : 0)
        << std::setw(14) << r.original_bytes << std::setw(14) << worst << std::setw(8)
        << std::setprecision(1)
        << (r.original_bytes ? 100.0 * double(worst) / double(r.original_bytes) : 0) << "%\n";
  }
  return out.str();
}

BreachProbability breach_probability(int x, int t, std::int64_t p) {
  if (t < 2 || x < 0 || x >= t) {
    throw RangeError("breach probability needs 0 <= x < t (x=" + std::to_string(x) +
                     ", t=" + std::to_string(t) + ")");
  }
  if (p < 2) throw RangeError("modulus must be at least 2");
  const int exponent = 2 * t - x - 1;
  BreachProbability out;
  out.denominator = boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(exponent));
  out.value = std::pow(static_cast<double>(p), -exponent);
  return out;
}

json DetectionReport::to_json() const {
  return {{"p", p},
          {"p2", p2},
          {"n", n},
          {"t", t},
          {"trials", trials},
          {"outer_detected", outer_detected},
          {"combined_detected", combined_detected},
          {"combined_rate", combined_rate()},
          {"inner_trials", inner_trials},
          {"inner_false_negatives", inner_false_negatives},
          {"inner_fn_fraction", inner_fn_fraction()}};
}

DetectionReport detection_experiment(std::int64_t p, std::int64_t p2, int n, int t,
                                     std::uint64_t trials, std::uint64_t inner_trials,
                                     std::uint64_t seed) {
  SharingConfig config;
  config.n = n;
  config.t = t;
  config.p = p;
  config.p2 = p2;
  config.seed = seed;
  for (int k = 1; k <= n; ++k) config.csp_ids.push_back(k);
  const CoefficientSet coeffs = gen_coefficients(config);
  const std::vector<CspId> group(config.csp_ids.begin(), config.csp_ids.begin() + t);
  const ReconstructionContext ctx = build_reconstruction(group, coeffs);

  DetectionReport report;
  report.p = p;
  report.p2 = p2;
  report.n = n;
  report.t = t;
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<std::int64_t> digit(0, p - 1);
  std::uniform_int_distribution<int> victim(0, t - 1);
  // Shares lie below t * (p + 1) * p; replacements are drawn from that range.
  const std::int64_t bound = static_cast<std::int64_t>(t) * (p + 1) * p;
  std::uniform_int_distribution<std::int64_t> replacement(0, bound - 1);

  auto fresh = [&](Block& block, std::vector<BigInt>& shares, std::vector<std::int64_t>& sigs) {
    std::vector<std::int64_t> d(static_cast<std::size_t>(t - 1));
    for (auto& x : d) x = digit(rng);
    block = sign_block(std::move(d), p);
    for (int x = 0; x < t; ++x) {
      ShareBundle b = share_block(block, coeffs, group[x], p2);
      shares[x] = std::move(b.e);
      sigs[x] = b.s_out;
    }
    const int v = victim(rng);
    BigInt e;
    do {
      e = replacement(rng);
    } while (e == shares[v]);
    shares[v] = std::move(e);
    return v;
  };

  Block block;
  std::vector<BigInt> shares(t);
  std::vector<std::int64_t> sigs(t);
  for (std::uint64_t i = 0; i < trials; ++i) {
    const int v = fresh(block, shares, sigs);
    ++report.trials;
    if (!verify_outer(ShareBundle{shares[v], sigs[v]}, p2)) {
      ++report.outer_detected;
      ++report.combined_detected;
      continue;
    }
    try {
      reconstruct_block(shares, ctx, p);
    } catch (const CorruptionError&) {
      ++report.combined_detected;
    }
  }

  // Inner-only: round the rational solution and trust the inner signature.
  const BigInt det = ctx.det;
  const BigInt half = abs(det) / 2;
  auto round_div = [&](const BigInt& num) {
    BigInt a = det < 0 ? BigInt(-num) : num;
    const BigInt d = abs(det);
    BigInt q = a >= 0 ? BigInt((a + half) / d) : BigInt(-((-a + half) / d));
    return q;
  };
  for (std::uint64_t i = 0; i < inner_trials; ++i) {
    fresh(block, shares, sigs);
    ++report.inner_trials;
    std::vector<BigInt> x(t);
    for (int r = 0; r < t; ++r) {
      BigInt acc = 0;
      for (int c = 0; c < t; ++c) acc += ctx.adjugate[r][c] * shares[c];
      x[r] = round_div(acc);
    }
    BigInt sum = 0;
    bool same = true;
    for (int h = 0; h < t - 1; ++h) {
      BigInt d = x[h] - 2;
      sum += d;
      same = same && d == block.digits[h];
    }
    same = same && x[t - 1] == block.sig;
    BigInt diff = (x[t - 1] - sum) % p;
    if (diff == 0 && !same) ++report.inner_false_negatives;
  }
  return report;
}

double ScalingPoint::share_mb_s() const {
  return share_ms > 0 ? double(values) * 4.0 / 1e6 / (share_ms / 1000.0) : 0;
}
double ScalingPoint::reconstruct_mb_s() const {
  return reconstruct_ms > 0 ? double(values) * 4.0 / 1e6 / (reconstruct_ms / 1000.0) : 0;
}

bool ScalingReport::share_monotone(int t) const {
  double prev = -1;
  for (const auto& pt : points) {
    if (pt.t != t) continue;
    if (pt.share_ms < prev) return false;
    prev = pt.share_ms;
  }
  return true;
}

double ScalingReport::reconstruct_spread(int t) const {
  std::vector<double> v;
  for (const auto& pt : points) {
    if (pt.t == t) v.push_back(pt.reconstruct_ms);
  }
  if (v.empty()) return 0;
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const double med = s.size() % 2 ? s[s.size() / 2] : (s[s.size() / 2 - 1] + s[s.size() / 2]) / 2;
  double worst = 0;
  for (double x : v) worst = std::max(worst, std::abs(x - med) / med);
  return worst;
}

json ScalingReport::to_json() const {
  json pts = json::array();
  for (const auto& pt : points) {
    pts.push_back({{"n", pt.n},
                   {"t", pt.t},
                   {"values", pt.values},
                   {"share_ms", pt.share_ms},
                   {"reconstruct_ms", pt.reconstruct_ms},
                   {"share_mb_s", pt.share_mb_s()},
                   {"reconstruct_mb_s", pt.reconstruct_mb_s()}});
  }
  std::set<int> ts;
  for (const auto& pt : points) ts.insert(pt.t);
  json trends = json::object();
  for (int t : ts) {
    trends[std::to_string(t)] = {{"share_monotone", share_monotone(t)},
                                 {"reconstruct_spread", reconstruct_spread(t)}};
  }
  return {{"p", p}, {"runs", runs}, {"points", pts}, {"trends", trends}};
}

std::string ScalingReport::summary() const {
  std::ostringstream out;
  out << "scaling, p=" << p << ", median of " << runs << " runs\n";
  out << std::setw(4) << "n" << std::setw(4) << "t" << std::setw(10) << "values" << std::setw(12)
      << "share ms" << std::setw(10) << "MB/s" << std::setw(12) << "recon ms" << std::setw(10)
      << "MB/s" << "\n";
  for (const auto& pt : points) {
    out << std::setw(4) << pt.n << std::setw(4) << pt.t << std::setw(10) << pt.values << std::fixed
        << std::setprecision(1) << std::setw(12) << pt.share_ms << std::setw(10) << std::setprecision(2)
        << pt.share_mb_s() << std::setprecision(1) << std::setw(12) << pt.reconstruct_ms
        << std::setw(10) << std::setprecision(2) << pt.reconstruct_mb_s() << "\n";
  }
  return out.str();
}

ScalingReport run_scaling(const std::vector<std::pair<int, int>>& nt, std::size_t count,
                          std::int64_t p, int runs, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  ScalingReport report;
  report.p = p;
  report.runs = runs;
  const auto values = gen_flat(count, seed);
  ColumnCodec codec;
  codec.kind = ColumnKind::kInteger;
  codec.is_signed = false;
  codec.width = default_width(codec.kind, p);
  struct Setup {
    SharingConfig config;
    CoefficientSet coeffs;
    ReconstructionContext ctx;
    std::vector<double> share_ms, recon_ms;
  };
  std::vector<Setup> setups;
  for (auto [n, t] : nt) {
    Setup s;
    s.config.n = n;
    s.config.t = t;
    s.config.p = p;
    s.config.seed = seed;
    for (int k = 1; k <= n; ++k) s.config.csp_ids.push_back(k);
    s.coeffs = gen_coefficients(s.config);
    const std::vector<CspId> group(s.config.csp_ids.begin(), s.config.csp_ids.begin() + t);
    s.ctx = build_reconstruction(group, s.coeffs);
    setups.push_back(std::move(s));
  }
  // Runs go round-robin over the configurations so clock drift on a busy
  // host lands on every point alike. Run 0 is a warm-up and is dropped.
  for (int run = 0; run <= runs; ++run) {
    for (Setup& s : setups) {
      const SharingConfig& config = s.config;
      const int t = config.t;
      // One share column per CSP, as the stores hold them; reconstruction
      // only touches the t columns of its group.
      std::vector<std::vector<BigInt>> columns(static_cast<std::size_t>(config.n));
      std::vector<std::size_t> blocks_of(values.size());
      auto t0 = clock::now();
      for (std::size_t i = 0; i < values.size(); ++i) {
        EncodedValue enc = value_to_blocks(Value{std::int64_t(values[i])}, codec, config);
        blocks_of[i] = enc.blocks.size();
        for (const Block& b : enc.blocks) {
          for (std::size_t k = 0; k < columns.size(); ++k) {
            columns[k].push_back(share_block(b, s.coeffs, config.csp_ids[k], config.p2).e);
          }
        }
      }
      auto t1 = clock::now();
      std::vector<BigInt> group_shares(static_cast<std::size_t>(t));
      std::size_t at = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        EncodedValue enc;
        enc.form = EncodedValue::Form::kBlocks;
        for (std::size_t b = 0; b < blocks_of[i]; ++b, ++at) {
          for (int x = 0; x < t; ++x) group_shares[x] = columns[static_cast<std::size_t>(x)][at];
          enc.blocks.push_back(reconstruct_block(group_shares, s.ctx, p));
        }
        Value v = blocks_to_value(enc, codec, config);
        if (std::get<std::int64_t>(v) != std::int64_t(values[i])) {
          throw CorruptionError("scaling run reconstructed a wrong value");
        }
      }
      auto t2 = clock::now();
      if (run == 0) continue;
      s.share_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      s.recon_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
    }
  }
  for (Setup& s : setups) {
    std::sort(s.share_ms.begin(), s.share_ms.end());
    std::sort(s.recon_ms.begin(), s.recon_ms.end());
    ScalingPoint pt;
    pt.n = s.config.n;
    pt.t = s.config.t;
    pt.values = values.size();
    pt.share_ms = s.share_ms[s.share_ms.size() / 2];
    pt.reconstruct_ms = s.recon_ms[s.recon_ms.size() / 2];
    report.points.push_back(pt);
  }
  return report;
}

}  // namespace shardhouse
