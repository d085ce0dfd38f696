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

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

namespace shardhouse {

/// Calendar date as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;
  auto operator<=>(const Date&) const = default;
};

/// Fixed-point number: units * 10^-scale.
struct Decimal {
  std::int64_t units = 0;
  int scale = 0;
};

/// A plaintext cell. monostate is SQL NULL; double only appears as the
/// result of AVG.
using Value = std::variant<std::monostate, bool, std::int64_t, Decimal, Date, std::string, double>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Three-way comparison with numeric promotion (integer < decimal < double)
/// and string-to-date coercion. NULL orders before everything. Throws
/// QueryError for incomparable kinds.
int compare_values(const Value& a, const Value& b);

/// Grouping equality: NULL equals NULL.
inline bool values_equal(const Value& a, const Value& b) { return compare_values(a, b) == 0; }

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return compare_values(a, b) < 0; }
};

std::string format_value(const Value& v);

Date parse_date(std::string_view text);  // YYYY-MM-DD, throws QueryError
std::string format_date(Date d);

/// Exact decimal parse; rounds half away from zero past `scale` digits.
Decimal parse_decimal(std::string_view text, int scale);
/// Rescales with half-away-from-zero rounding.
Decimal rescale(Decimal d, int scale);
std::string format_decimal(Decimal d);

Value add_values(const Value& a, const Value& b);
Value sub_values(const Value& a, const Value& b);
Value mul_values(const Value& a, const Value& b);
Value div_values(const Value& a, const Value& b);
double to_double(const Value& v);

}  // namespace shardhouse
