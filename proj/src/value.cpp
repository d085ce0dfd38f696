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

#include "shardhouse/value.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace {

constexpr std::int64_t kPow10[] = {1,
                                   10,
                                   100,
                                   1000,
                                   10000,
                                   100000,
                                   1000000,
                                   10000000,
                                   100000000,
                                   1000000000,
                                   10000000000,
                                   100000000000,
                                   1000000000000,
                                   10000000000000,
                                   100000000000000,
                                   1000000000000000,
                                   10000000000000000,
                                   100000000000000000,
                                   1000000000000000000};

std::int64_t pow10(int e) {
  if (e < 0 || e > 18) throw QueryError("decimal scale out of range");
  return kPow10[e];
}

bool is_numeric(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<Decimal>(v) ||
         std::holds_alternative<double>(v);
}

Decimal as_decimal(const Value& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return Decimal{*i, 0};
  return std::get<Decimal>(v);
}

int sign_of(__int128 v) { return v < 0 ? -1 : (v > 0 ? 1 : 0); }

int compare_decimal(Decimal a, Decimal b) {
  const int s = std::max(a.scale, b.scale);
  __int128 x = static_cast<__int128>(a.units) * pow10(s - a.scale);
  __int128 y = static_cast<__int128>(b.units) * pow10(s - b.scale);
  return sign_of(x - y);
}

int kind_rank(const Value& v) {
  if (is_null(v)) return 0;
  if (std::holds_alternative<bool>(v)) return 1;
  if (is_numeric(v)) return 2;
  if (std::holds_alternative<Date>(v)) return 3;
  return 4;
}

}  // namespace

int compare_values(const Value& a, const Value& b) {
  if (is_null(a) || is_null(b)) {
    return is_null(a) && is_null(b) ? 0 : (is_null(a) ? -1 : 1);
  }
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<double>(a) || std::holds_alternative<double>(b)) {
      double x = to_double(a), y = to_double(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    return compare_decimal(as_decimal(a), as_decimal(b));
  }
  if (auto x = std::get_if<bool>(&a)) {
    if (auto y = std::get_if<bool>(&b)) return static_cast<int>(*x) - static_cast<int>(*y);
  }
  if (std::holds_alternative<Date>(a) || std::holds_alternative<Date>(b)) {
    auto date_of = [](const Value& v) {
      if (auto d = std::get_if<Date>(&v)) return *d;
      if (auto s = std::get_if<std::string>(&v)) return parse_date(*s);
      throw QueryError("cannot compare a date with " + format_value(v));
    };
    Date x = date_of(a), y = date_of(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (auto x = std::get_if<std::string>(&a)) {
    if (auto y = std::get_if<std::string>(&b)) {
      int c = x->compare(*y);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
  }
  if (kind_rank(a) != kind_rank(b)) {
    throw QueryError("cannot compare " + format_value(a) + " with " + format_value(b));
  }
  throw QueryError("incomparable values");
}

std::string format_date(Date d) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{d.days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw QueryError("malformed date '" + std::string(text) + "'");
  }
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc() || ptr != text.data() + pos + len) {
      throw QueryError("malformed date '" + std::string(text) + "'");
    }
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw QueryError("invalid date '" + std::string(text) + "'");
  return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

Decimal rescale(Decimal d, int scale) {
  if (scale == d.scale) return d;
  if (scale > d.scale) {
    return Decimal{d.units * pow10(scale - d.scale), scale};
  }
  const std::int64_t div = pow10(d.scale - scale);
  std::int64_t q = d.units / div;
  std::int64_t r = d.units % div;
  if (2 * (r < 0 ? -r : r) >= div) q += d.units < 0 ? -1 : 1;
  return Decimal{q, scale};
}

Decimal parse_decimal(std::string_view text, int scale) {
  std::size_t i = 0;
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    ++i;
  }
  std::int64_t units = 0;
  int frac = 0;
  bool seen_dot = false, any = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw QueryError("malformed number '" + std::string(text) + "'");
    if (units > (INT64_MAX - 9) / 10) throw QueryError("number too large '" + std::string(text) + "'");
    units = units * 10 + (c - '0');
    any = true;
    if (seen_dot) ++frac;
  }
  if (!any) throw QueryError("malformed number '" + std::string(text) + "'");
  return rescale(Decimal{negative ? -units : units, frac}, scale);
}

std::string format_decimal(Decimal d) {
  if (d.scale == 0) return std::to_string(d.units);
  const std::int64_t div = pow10(d.scale);
  std::uint64_t mag = d.units < 0 ? static_cast<std::uint64_t>(-(d.units + 1)) + 1
                                  : static_cast<std::uint64_t>(d.units);
  std::string frac = std::to_string(mag % static_cast<std::uint64_t>(div));
  frac.insert(0, static_cast<std::size_t>(d.scale) - frac.size(), '0');
  return (d.units < 0 ? "-" : "") + std::to_string(mag / static_cast<std::uint64_t>(div)) + "." +
         frac;
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NULL"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(Decimal d) const { return format_decimal(d); }
    std::string operator()(Date d) const { return format_date(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double x) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      return std::string(buf, ptr);
    }
  };
  return std::visit(Visitor{}, v);
}

double to_double(const Value& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (auto d = std::get_if<Decimal>(&v)) {
    return static_cast<double>(d->units) / static_cast<double>(pow10(d->scale));
  }
  if (auto x = std::get_if<double>(&v)) return *x;
  throw QueryError("not a number: " + format_value(v));
}

namespace {

template <typename IntOp, typename DoubleOp>
Value arith(const Value& a, const Value& b, IntOp int_op, DoubleOp dbl_op, bool multiply) {
  if (is_null(a) || is_null(b)) return std::monostate{};
  if (!is_numeric(a) || !is_numeric(b)) {
    throw QueryError("arithmetic on non-numeric values " + format_value(a) + ", " +
                     format_value(b));
  }
  if (std::holds_alternative<double>(a) || std::holds_alternative<double>(b)) {
    return dbl_op(to_double(a), to_double(b));
  }
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    return int_op(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
  }
  Decimal x = as_decimal(a), y = as_decimal(b);
  if (multiply) return Decimal{x.units * y.units, x.scale + y.scale};
  const int s = std::max(x.scale, y.scale);
  x = rescale(x, s);
  y = rescale(y, s);
  return Decimal{int_op(x.units, y.units), s};
}

}  // namespace

Value add_values(const Value& a, const Value& b) {
  return arith(
      a, b, [](std::int64_t x, std::int64_t y) { return x + y; },
      [](double x, double y) { return x + y; }, false);
}

Value sub_values(const Value& a, const Value& b) {
  return arith(
      a, b, [](std::int64_t x, std::int64_t y) { return x - y; },
      [](double x, double y) { return x - y; }, false);
}

Value mul_values(const Value& a, const Value& b) {
  return arith(
      a, b, [](std::int64_t x, std::int64_t y) { return x * y; },
      [](double x, double y) { return x * y; }, true);
}

Value div_values(const Value& a, const Value& b) {
  if (is_null(a) || is_null(b)) return std::monostate{};
  double y = to_double(b);
  if (y == 0) return std::monostate{};
  return to_double(a) / y;
}

}  // namespace shardhouse
