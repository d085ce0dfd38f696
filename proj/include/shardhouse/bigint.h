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

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace shardhouse {

// Share values are unbounded: the sums of products behind a share are never
// reduced, and aggregated shares grow with the number of rows.
using BigInt = boost::multiprecision::cpp_int;

std::string to_decimal(const BigInt& v);

/// Parses an optionally signed base-10 integer. Throws ProtocolError on
/// anything else (including empty input).
BigInt from_decimal(std::string_view text);

/// Number of bytes of the minimal unsigned big-endian encoding of |v|
/// (zero encodes in one byte).
std::size_t byte_length(const BigInt& v);

}  // namespace shardhouse
