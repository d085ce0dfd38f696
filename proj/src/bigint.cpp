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

#include "shardhouse/bigint.h"

#include "shardhouse/errors.h"

namespace shardhouse {

std::string to_decimal(const BigInt& v) { return v.str(); }

BigInt from_decimal(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) {
    throw ProtocolError("empty integer literal");
  }
  BigInt out = 0;
  // Accumulate in chunks of up to 18 digits to keep the big multiply count low.
  while (i < text.size()) {
    std::uint64_t chunk = 0;
    std::uint64_t scale = 1;
    for (int k = 0; k < 18 && i < text.size(); ++k, ++i) {
      char c = text[i];
      if (c < '0' || c > '9') {
        throw ProtocolError("malformed integer literal: " + std::string(text));
      }
      chunk = chunk * 10 + static_cast<std::uint64_t>(c - '0');
      scale *= 10;
    }
    out = out * scale + chunk;
  }
  return negative ? BigInt(-out) : out;
}

std::size_t byte_length(const BigInt& v) {
  BigInt a = abs(v);
  if (a == 0) {
    return 1;
  }
  return (msb(a) / 8) + 1;
}

}  // namespace shardhouse
