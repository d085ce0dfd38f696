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

// Typed values to fixed-width base-p digit blocks and back.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shardhouse/scheme.h"
#include "shardhouse/value.h"

namespace shardhouse {

enum class ColumnKind { kInteger, kReal, kCharacter, kString, kDate, kBoolean, kKey };

std::string kind_name(ColumnKind kind);
ColumnKind parse_kind(std::string_view name);  // throws SchemaError

struct ColumnCodec {
  ColumnKind kind = ColumnKind::kInteger;
  int width = 0;      // base-p digits per scalar (per character for strings)
  int scale = 0;      // reals only
  int max_len = 0;    // strings only; 0 means unbounded
  bool is_signed = true;  // zig-zag integers, reals and dates
  bool pad = false;       // pad strings to max_len with the reserved code
  bool nullable = false;

  bool encrypted() const { return kind != ColumnKind::kBoolean && kind != ColumnKind::kKey; }
  int blocks_per_unit(int t) const { return (width + t - 2) / (t - 1); }
  /// Summing shares and decoding the sum gives the plaintext sum.
  bool additive() const {
    return (kind == ColumnKind::kInteger || kind == ColumnKind::kReal) && !is_signed;
  }
  /// Number of blocks when every value encodes to the same count; 0 for
  /// variable-length strings.
  int fixed_blocks(int t) const;
};

/// Smallest width covering the natural domain of `kind` under modulus p.
int default_width(ColumnKind kind, std::int64_t p);
/// p^w saturated at 2^64.
unsigned __int128 digit_capacity(std::int64_t p, int w);
/// Checks width against p (characters must be representable, etc.).
void validate_codec(const ColumnCodec& codec, std::int64_t p);

/// Little-endian base-p digits, zero-filled to width w. Throws RangeError
/// when v >= p^w.
std::vector<std::int64_t> int_to_digits(std::uint64_t v, std::int64_t p, int w);
/// Inverse of int_to_digits. Throws RangeError for digits outside [0, p).
std::uint64_t digits_to_int(std::span<const std::int64_t> digits, std::int64_t p);

std::uint64_t zigzag_encode(std::int64_t x);
std::int64_t zigzag_decode(std::uint64_t z);

/// Column value to its non-negative integer image (before digit split).
std::uint64_t scalar_to_int(const Value& value, const ColumnCodec& codec, std::int64_t p);
Value int_to_scalar(std::uint64_t i, const ColumnCodec& codec);

/// Unicode helpers used by character and string codecs.
std::vector<std::uint32_t> utf8_decode(std::string_view s);
std::string utf8_encode(std::span<const std::uint32_t> cps);

struct EncodedValue {
  enum class Form { kBlocks, kNull, kPlain };
  Form form = Form::kNull;
  std::vector<Block> blocks;
  Value plain;
};

EncodedValue value_to_blocks(const Value& value, const ColumnCodec& codec,
                             const SharingConfig& config);
Value blocks_to_value(const EncodedValue& encoded, const ColumnCodec& codec,
                      const SharingConfig& config);

/// Parses CSV/SQL literal text for a column (empty text or NULL is NULL when
/// nullable). Keys parse as integers.
Value parse_typed(std::string_view text, const ColumnCodec& codec);

/// Coerces a query literal to the column's value domain (ints to decimals,
/// strings to dates). Throws QueryError when impossible.
Value coerce_to(const Value& literal, const ColumnCodec& codec);

}  // namespace shardhouse
