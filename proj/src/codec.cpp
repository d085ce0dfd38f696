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

#include "shardhouse/codec.h"

#include <charconv>
#include <cmath>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace {

using u128 = unsigned __int128;

constexpr u128 kSaturated = static_cast<u128>(1) << 64;

std::uint64_t pow10u(int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= 10;
  return r;
}

int width_for(u128 domain, std::int64_t p) {
  int w = 1;
  while (digit_capacity(p, w) < domain) ++w;
  return w;
}

// Reserved code used to pad strings when the codec asks for it.
std::uint64_t pad_code(const ColumnCodec& codec, std::int64_t p) {
  return static_cast<std::uint64_t>(digit_capacity(p, codec.width) - 1);
}

}  // namespace

std::string kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kInteger: return "integer";
    case ColumnKind::kReal: return "real";
    case ColumnKind::kCharacter: return "character";
    case ColumnKind::kString: return "string";
    case ColumnKind::kDate: return "date";
    case ColumnKind::kBoolean: return "boolean";
    case ColumnKind::kKey: return "key";
  }
  return "?";
}

ColumnKind parse_kind(std::string_view name) {
  for (ColumnKind k : {ColumnKind::kInteger, ColumnKind::kReal, ColumnKind::kCharacter,
                       ColumnKind::kString, ColumnKind::kDate, ColumnKind::kBoolean,
                       ColumnKind::kKey}) {
    if (kind_name(k) == name) return k;
  }
  throw SchemaError("unknown column kind '" + std::string(name) + "'");
}

int ColumnCodec::fixed_blocks(int t) const {
  if (!encrypted()) return 0;
  if (kind == ColumnKind::kString) return pad ? max_len * blocks_per_unit(t) : 0;
  return blocks_per_unit(t);
}

u128 digit_capacity(std::int64_t p, int w) {
  u128 cap = 1;
  for (int i = 0; i < w; ++i) {
    cap *= static_cast<u128>(p);
    if (cap >= kSaturated) return kSaturated;
  }
  return cap;
}

int default_width(ColumnKind kind, std::int64_t p) {
  switch (kind) {
    case ColumnKind::kInteger: return width_for(u128{1} << 32, p);
    case ColumnKind::kReal: return width_for(u128{1} << 48, p);
    case ColumnKind::kDate: return width_for(u128{1} << 21, p);
    case ColumnKind::kCharacter:
    case ColumnKind::kString: return width_for(0x110000, p);
    case ColumnKind::kBoolean:
    case ColumnKind::kKey: return 0;
  }
  return 0;
}

void validate_codec(const ColumnCodec& codec, std::int64_t p) {
  if (!codec.encrypted()) return;
  if (codec.width < 1) throw SchemaError("encrypted column needs width >= 1");
  if (codec.kind == ColumnKind::kCharacter || codec.kind == ColumnKind::kString) {
    // At least 7-bit text must be representable, plus the pad code when used.
    if (digit_capacity(p, codec.width) < (codec.pad ? 129u : 128u)) {
      throw SchemaError("character width " + std::to_string(codec.width) +
                        " cannot hold 7-bit code points for p=" + std::to_string(p));
    }
    if (codec.pad && codec.max_len <= 0) {
      throw SchemaError("padded strings need max_len");
    }
  }
  if (codec.kind == ColumnKind::kReal && (codec.scale < 0 || codec.scale > 18)) {
    throw SchemaError("real scale must be in [0, 18]");
  }
}

std::vector<std::int64_t> int_to_digits(std::uint64_t v, std::int64_t p, int w) {
  if (static_cast<u128>(v) >= digit_capacity(p, w)) {
    throw RangeError("value " + std::to_string(v) + " does not fit " + std::to_string(w) +
                     " base-" + std::to_string(p) + " digits");
  }
  std::vector<std::int64_t> digits(static_cast<std::size_t>(w));
  const auto base = static_cast<std::uint64_t>(p);
  for (auto& d : digits) {
    d = static_cast<std::int64_t>(v % base);
    v /= base;
  }
  return digits;
}

std::uint64_t digits_to_int(std::span<const std::int64_t> digits, std::int64_t p) {
  u128 acc = 0;
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < 0 || digits[i] >= p) {
      throw RangeError("digit " + std::to_string(digits[i]) + " outside [0, " +
                       std::to_string(p) + ")");
    }
    acc = acc * static_cast<u128>(p) + static_cast<u128>(digits[i]);
    if (acc >= kSaturated) throw RangeError("digit sequence exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t zigzag_encode(std::int64_t x) {
  return (static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63);
}

std::int64_t zigzag_decode(std::uint64_t z) {
  return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
}

std::vector<std::uint32_t> utf8_decode(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      throw RangeError("invalid UTF-8 text");
    }
    std::uint32_t cp = len == 1 ? c : (c & (0x7F >> len));
    for (int k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc >> 6) != 0x2) throw RangeError("invalid UTF-8 text");
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string utf8_encode(std::span<const std::uint32_t> cps) {
  std::string out;
  for (std::uint32_t cp : cps) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x110000) {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      throw RangeError("code point out of range");
    }
  }
  return out;
}

std::uint64_t scalar_to_int(const Value& value, const ColumnCodec& codec, std::int64_t p) {
  std::uint64_t out = 0;
  switch (codec.kind) {
    case ColumnKind::kInteger: {
      const auto* i = std::get_if<std::int64_t>(&value);
      if (!i) throw RangeError("integer column expects an integer, got " + format_value(value));
      if (codec.is_signed) {
        out = zigzag_encode(*i);
      } else {
        if (*i < 0) throw RangeError("negative value in unsigned column");
        out = static_cast<std::uint64_t>(*i);
      }
      break;
    }
    case ColumnKind::kReal: {
      std::int64_t units = 0;
      if (const auto* d = std::get_if<Decimal>(&value)) {
        units = rescale(*d, codec.scale).units;
      } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
        units = rescale(Decimal{*i, 0}, codec.scale).units;
      } else if (const auto* x = std::get_if<double>(&value)) {
        units = std::llround(*x * static_cast<double>(pow10u(codec.scale)));
      } else {
        throw RangeError("real column expects a number, got " + format_value(value));
      }
      if (codec.is_signed) {
        out = zigzag_encode(units);
      } else {
        if (units < 0) throw RangeError("negative value in unsigned column");
        out = static_cast<std::uint64_t>(units);
      }
      break;
    }
    case ColumnKind::kDate: {
      const auto* d = std::get_if<Date>(&value);
      if (!d) throw RangeError("date column expects a date, got " + format_value(value));
      out = codec.is_signed ? zigzag_encode(d->days) : static_cast<std::uint64_t>(d->days);
      if (!codec.is_signed && d->days < 0) throw RangeError("date before epoch in unsigned column");
      break;
    }
    case ColumnKind::kCharacter: {
      const auto* s = std::get_if<std::string>(&value);
      if (!s) throw RangeError("character column expects text");
      auto cps = utf8_decode(*s);
      if (cps.size() != 1) throw RangeError("character column expects exactly one character");
      out = cps[0];
      break;
    }
    default:
      throw RangeError("column kind " + kind_name(codec.kind) + " has no integer image");
  }
  if (static_cast<u128>(out) >= digit_capacity(p, codec.width)) {
    throw RangeError("value " + format_value(value) + " overflows " +
                     std::to_string(codec.width) + " base-" + std::to_string(p) + " digits");
  }
  return out;
}

Value int_to_scalar(std::uint64_t i, const ColumnCodec& codec) {
  switch (codec.kind) {
    case ColumnKind::kInteger:
      return codec.is_signed ? zigzag_decode(i) : static_cast<std::int64_t>(i);
    case ColumnKind::kReal: {
      std::int64_t units = codec.is_signed ? zigzag_decode(i) : static_cast<std::int64_t>(i);
      return Decimal{units, codec.scale};
    }
    case ColumnKind::kDate: {
      std::int64_t days = codec.is_signed ? zigzag_decode(i) : static_cast<std::int64_t>(i);
      return Date{static_cast<std::int32_t>(days)};
    }
    case ColumnKind::kCharacter: {
      std::uint32_t cp = static_cast<std::uint32_t>(i);
      return utf8_encode(std::span<const std::uint32_t>(&cp, 1));
    }
    default:
      throw RangeError("column kind " + kind_name(codec.kind) + " has no integer image");
  }
}

EncodedValue value_to_blocks(const Value& value, const ColumnCodec& codec,
                             const SharingConfig& config) {
  EncodedValue out;
  if (is_null(value)) {
    if (!codec.nullable) throw SchemaError("NULL in a non-nullable column");
    out.form = EncodedValue::Form::kNull;
    return out;
  }
  if (!codec.encrypted()) {
    out.form = EncodedValue::Form::kPlain;
    out.plain = value;
    return out;
  }
  out.form = EncodedValue::Form::kBlocks;
  const std::size_t slot = static_cast<std::size_t>(config.t - 1);
  const int units_blocks = codec.blocks_per_unit(config.t);
  auto append_unit = [&](std::uint64_t image) {
    std::vector<std::int64_t> digits = int_to_digits(image, config.p, codec.width);
    digits.resize(static_cast<std::size_t>(units_blocks) * slot, kPadDigit);
    for (int b = 0; b < units_blocks; ++b) {
      auto first = digits.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(b) * slot);
      out.blocks.push_back(sign_block(std::vector<std::int64_t>(first, first + static_cast<std::ptrdiff_t>(slot)), config.p));
    }
  };
  if (codec.kind == ColumnKind::kString) {
    const auto* s = std::get_if<std::string>(&value);
    if (!s) throw RangeError("string column expects text, got " + format_value(value));
    std::vector<std::uint32_t> cps = utf8_decode(*s);
    if (codec.max_len > 0 && static_cast<int>(cps.size()) > codec.max_len) {
      throw RangeError("string of length " + std::to_string(cps.size()) + " exceeds max_len " +
                       std::to_string(codec.max_len));
    }
    const std::uint64_t pad = codec.pad ? pad_code(codec, config.p) : 0;
    for (std::uint32_t cp : cps) {
      if (static_cast<u128>(cp) >= digit_capacity(config.p, codec.width) ||
          (codec.pad && cp >= pad)) {
        throw RangeError("code point " + std::to_string(cp) + " not representable in " +
                         std::to_string(codec.width) + " base-" + std::to_string(config.p) +
                         " digits");
      }
      append_unit(cp);
    }
    if (codec.pad) {
      for (std::size_t i = cps.size(); i < static_cast<std::size_t>(codec.max_len); ++i) {
        append_unit(pad);
      }
    }
    return out;
  }
  append_unit(scalar_to_int(value, codec, config.p));
  return out;
}

Value blocks_to_value(const EncodedValue& encoded, const ColumnCodec& codec,
                      const SharingConfig& config) {
  switch (encoded.form) {
    case EncodedValue::Form::kNull: return std::monostate{};
    case EncodedValue::Form::kPlain: return encoded.plain;
    case EncodedValue::Form::kBlocks: break;
  }
  const std::size_t slot = static_cast<std::size_t>(config.t - 1);
  const std::size_t unit_blocks = static_cast<std::size_t>(codec.blocks_per_unit(config.t));
  const std::size_t w = static_cast<std::size_t>(codec.width);
  if (encoded.blocks.size() % unit_blocks != 0) {
    throw CorruptionError("block count is not a multiple of the per-unit block count");
  }
  auto unit_image = [&](std::size_t u) {
    std::vector<std::int64_t> digits;
    digits.reserve(unit_blocks * slot);
    for (std::size_t b = 0; b < unit_blocks; ++b) {
      const Block& blk = encoded.blocks[u * unit_blocks + b];
      if (blk.digits.size() != slot) throw CorruptionError("block width mismatch");
      digits.insert(digits.end(), blk.digits.begin(), blk.digits.end());
    }
    for (std::size_t i = w; i < digits.size(); ++i) {
      if (digits[i] != kPadDigit) throw CorruptionError("unexpected data in padding slot");
    }
    digits.resize(w);
    return digits_to_int(digits, config.p);
  };
  const std::size_t units = encoded.blocks.size() / unit_blocks;
  if (codec.kind == ColumnKind::kString) {
    std::vector<std::uint32_t> cps;
    const std::uint64_t pad = codec.pad ? pad_code(codec, config.p) : 0;
    for (std::size_t u = 0; u < units; ++u) {
      std::uint64_t image = unit_image(u);
      if (codec.pad && image == pad) break;
      cps.push_back(static_cast<std::uint32_t>(image));
    }
    return utf8_encode(cps);
  }
  if (units != 1) throw CorruptionError("scalar column holds more than one unit");
  return int_to_scalar(unit_image(0), codec);
}

Value parse_typed(std::string_view text, const ColumnCodec& codec) {
  if (codec.nullable && (text.empty() || text == "NULL")) return std::monostate{};
  switch (codec.kind) {
    case ColumnKind::kKey:
    case ColumnKind::kInteger: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw SchemaError("malformed integer '" + std::string(text) + "'");
      }
      return v;
    }
    case ColumnKind::kReal: return parse_decimal(text, codec.scale);
    case ColumnKind::kDate: return parse_date(text);
    case ColumnKind::kBoolean: {
      if (text == "true" || text == "1" || text == "TRUE") return true;
      if (text == "false" || text == "0" || text == "FALSE") return false;
      throw SchemaError("malformed boolean '" + std::string(text) + "'");
    }
    case ColumnKind::kCharacter:
    case ColumnKind::kString: return std::string(text);
  }
  return std::monostate{};
}

Value coerce_to(const Value& literal, const ColumnCodec& codec) {
  if (is_null(literal)) return literal;
  switch (codec.kind) {
    case ColumnKind::kKey:
    case ColumnKind::kInteger:
      if (std::holds_alternative<std::int64_t>(literal)) return literal;
      if (const auto* d = std::get_if<Decimal>(&literal)) {
        Decimal r = rescale(*d, 0);
        if (compare_values(r, *d) == 0) return r.units;
      }
      break;
    case ColumnKind::kReal:
      if (const auto* i = std::get_if<std::int64_t>(&literal)) return rescale(Decimal{*i, 0}, codec.scale);
      if (const auto* d = std::get_if<Decimal>(&literal)) {
        Decimal r = rescale(*d, codec.scale);
        if (compare_values(r, *d) == 0) return r;
      }
      break;
    case ColumnKind::kDate:
      if (std::holds_alternative<Date>(literal)) return literal;
      if (const auto* s = std::get_if<std::string>(&literal)) return parse_date(*s);
      break;
    case ColumnKind::kBoolean:
      if (std::holds_alternative<bool>(literal)) return literal;
      break;
    case ColumnKind::kCharacter:
    case ColumnKind::kString:
      if (std::holds_alternative<std::string>(literal)) return literal;
      break;
  }
  throw QueryError("literal " + format_value(literal) + " is not in the domain of a " +
                   kind_name(codec.kind) + " column");
}

}  // namespace shardhouse
