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

#include "shardhouse/scheme.h"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

std::string group_label(std::span<const CspId> group) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < group.size(); ++i) {
    os << (i ? "," : "") << group[i];
  }
  os << "}";
  return os.str();
}

// Visits every k-subset of [0, n) in lexicographic order until `fn` returns false.
template <typename Fn>
bool for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!fn(idx)) return false;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return true;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

IntMatrix to_big(const CoefficientRows& rows) {
  IntMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m[i].assign(rows[i].begin(), rows[i].end());
  }
  return m;
}

}  // namespace

bool is_prime(std::int64_t v) {
  if (v < 2) return false;
  for (std::int64_t q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (v % q == 0) return v == q;
  }
  auto n = static_cast<std::uint64_t>(v);
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic for all 64-bit inputs with these bases.
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

void SharingConfig::validate() const {
  if (t < 2 || t > n) {
    throw ConfigError("threshold must satisfy 2 <= t <= n (t=" + std::to_string(t) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (p <= 2 || !is_prime(p)) {
    throw ConfigError("p must be a prime greater than 2 (p=" + std::to_string(p) + ")");
  }
  if (p > (std::int64_t{1} << 62)) {
    throw ConfigError("p must be below 2^62");
  }
  if (!is_prime(p2)) {
    throw ConfigError("p2 must be prime (p2=" + std::to_string(p2) + ")");
  }
  if (static_cast<int>(csp_ids.size()) != n) {
    throw ConfigError("expected " + std::to_string(n) + " CSP ids, got " +
                      std::to_string(csp_ids.size()));
  }
  std::set<CspId> seen;
  for (CspId id : csp_ids) {
    if (id <= 0) throw ConfigError("CSP ids must be positive");
    if (!seen.insert(id).second) {
      throw ConfigError("duplicate CSP id " + std::to_string(id));
    }
  }
}

std::size_t SharingConfig::index_of(CspId id) const {
  auto it = std::find(csp_ids.begin(), csp_ids.end(), id);
  if (it == csp_ids.end()) {
    throw ConfigError("unknown CSP id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - csp_ids.begin());
}

BigInt determinant(const IntMatrix& input) {
  const std::size_t n = input.size();
  if (n == 0) return 1;
  IntMatrix m = input;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && m[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      std::swap(m[k], m[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

bool admissible(const CoefficientRows& rows, int t) {
  const int n = static_cast<int>(rows.size());
  if (t < 1 || n < t) return false;
  std::set<std::vector<std::int64_t>> distinct(rows.begin(), rows.end());
  if (static_cast<int>(distinct.size()) != n) return false;
  return for_each_subset(n, t, [&](const std::vector<int>& idx) {
    IntMatrix sub(t);
    for (int i = 0; i < t; ++i) sub[i].assign(rows[idx[i]].begin(), rows[idx[i]].end());
    return determinant(sub) != 0;
  });
}

CoefficientSet::CoefficientSet(std::vector<CspId> ids, CoefficientRows rows, std::int64_t p)
    : ids_(std::move(ids)), rows_(std::move(rows)) {
  if (ids_.size() != rows_.size() || rows_.empty()) {
    throw ConfigError("coefficient matrix needs one row per CSP");
  }
  const std::size_t t = rows_[0].size();
  for (const auto& row : rows_) {
    if (row.size() != t) throw ConfigError("ragged coefficient matrix");
    for (std::int64_t a : row) {
      if (a < 0 || a >= p) {
        throw ConfigError("coefficient " + std::to_string(a) + " outside [0, p)");
      }
    }
  }
  if (!admissible(rows_, static_cast<int>(t))) {
    throw ConfigError("coefficient matrix has a singular t-row subset or repeated rows");
  }
}

const std::vector<std::int64_t>& CoefficientSet::row(CspId id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) {
    throw ConfigError("no coefficient row for CSP " + std::to_string(id));
  }
  return rows_[static_cast<std::size_t>(it - ids_.begin())];
}

RowDraw seeded_row_draw(const SharingConfig& config) {
  return [seed = config.seed, ids = config.csp_ids, p = config.p,
          t = config.t](std::size_t index, int attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(ids[index]),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(ids[index]) >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::int64_t> dist(0, p - 1);
    std::vector<std::int64_t> row(static_cast<std::size_t>(t));
    for (auto& a : row) a = dist(rng);
    return row;
  };
}

CoefficientSet gen_coefficients(const SharingConfig& config) {
  return gen_coefficients(config, seeded_row_draw(config));
}

CoefficientSet gen_coefficients(const SharingConfig& config, const RowDraw& draw,
                                int max_attempts, int* attempts_used) {
  config.validate();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    CoefficientRows rows(static_cast<std::size_t>(config.n));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      rows[k] = draw(k, attempt);
      if (static_cast<int>(rows[k].size()) != config.t) {
        throw ConfigError("coefficient draw returned a row of the wrong width");
      }
    }
    if (admissible(rows, config.t)) {
      if (attempts_used) *attempts_used = attempt + 1;
      return CoefficientSet(config.csp_ids, std::move(rows), config.p);
    }
  }
  throw ConfigError("no admissible coefficient matrix after " + std::to_string(max_attempts) +
                    " draws; p or n/t too small");
}

std::int64_t inner_signature(std::span<const std::int64_t> digits, std::int64_t p) {
  __int128 sum = 0;
  for (std::int64_t d : digits) sum += d;
  auto r = static_cast<std::int64_t>(sum % p);
  return r < 0 ? r + p : r;
}

std::int64_t outer_signature(const BigInt& e, std::int64_t p2) {
  BigInt r = e % p2;
  if (r < 0) r += p2;
  return r.convert_to<std::int64_t>();
}

const Hashes& default_hashes() {
  static const Hashes hashes{&inner_signature, &outer_signature};
  return hashes;
}

Block sign_block(std::vector<std::int64_t> digits, std::int64_t p, const Hashes& hashes) {
  Block b;
  b.sig = hashes.inner(digits, p);
  b.digits = std::move(digits);
  return b;
}

std::vector<Block> make_blocks(std::span<const std::int64_t> data, const SharingConfig& config,
                               const Hashes& hashes) {
  const std::size_t width = static_cast<std::size_t>(config.t - 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] < 0 || data[i] >= config.p) {
      throw RangeError("datum " + std::to_string(data[i]) + " at index " + std::to_string(i) +
                       " outside [0, " + std::to_string(config.p) + ")");
    }
  }
  std::vector<Block> blocks;
  blocks.reserve((data.size() + width - 1) / width);
  for (std::size_t start = 0; start < data.size(); start += width) {
    std::vector<std::int64_t> digits(width, kPadDigit);
    const std::size_t len = std::min(width, data.size() - start);
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(start), len, digits.begin());
    blocks.push_back(sign_block(std::move(digits), config.p, hashes));
  }
  return blocks;
}

BigInt share_value(const Block& block, std::span<const std::int64_t> row) {
  const std::size_t w = block.digits.size();
  if (row.size() != w + 1) {
    throw ConfigError("block width does not match coefficient row");
  }
  // Entries are below 2^62, so each product fits comfortably when p is
  // small; fall back to big arithmetic otherwise.
  bool small = true;
  for (std::int64_t a : row) small = small && a < (std::int64_t{1} << 40);
  for (std::int64_t d : block.digits) small = small && d < (std::int64_t{1} << 40);
  small = small && block.sig < (std::int64_t{1} << 40) && w < 1024;
  if (small) {
    __int128 acc = 0;
    for (std::size_t h = 0; h < w; ++h) {
      acc += static_cast<__int128>(block.digits[h] + 2) * row[h];
    }
    acc += static_cast<__int128>(block.sig) * row[w];
    return BigInt(acc);
  }
  BigInt acc = 0;
  for (std::size_t h = 0; h < w; ++h) acc += BigInt(block.digits[h] + 2) * row[h];
  acc += BigInt(block.sig) * row[w];
  return acc;
}

ShareBundle share_block(const Block& block, const CoefficientSet& coeffs, CspId k,
                        std::int64_t p2, const Hashes& hashes) {
  ShareBundle out;
  out.e = share_value(block, coeffs.row(k));
  out.s_out = hashes.outer(out.e, p2);
  return out;
}

bool verify_outer(const ShareBundle& bundle, std::int64_t p2, const Hashes& hashes) {
  return hashes.outer(bundle.e, p2) == bundle.s_out;
}

ReconstructionContext build_reconstruction(std::span<const CspId> group,
                                           const CoefficientSet& coeffs) {
  std::set<CspId> unique(group.begin(), group.end());
  if (unique.size() != group.size() || static_cast<int>(group.size()) != coeffs.t()) {
    throw ConfigError("reconstruction group must hold t distinct CSPs");
  }
  CoefficientRows rows;
  rows.reserve(group.size());
  for (CspId id : group) rows.push_back(coeffs.row(id));
  return build_reconstruction(group, rows);
}

ReconstructionContext build_reconstruction(std::span<const CspId> group,
                                           const CoefficientRows& rows) {
  const std::size_t t = rows.size();
  if (group.size() != t) {
    throw ConfigError("group size does not match coefficient rows");
  }
  IntMatrix a = to_big(rows);
  ReconstructionContext ctx;
  ctx.group.assign(group.begin(), group.end());
  ctx.det = determinant(a);
  if (ctx.det == 0) {
    throw CorruptionError("singular coefficient rows for group " + group_label(group) +
                          "; catalog is corrupt");
  }
  ctx.adjugate.assign(t, std::vector<BigInt>(t));
  if (t == 1) {
    ctx.adjugate[0][0] = 1;
    return ctx;
  }
  // adj[i][j] = (-1)^(i+j) * det(A without row j and column i)
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      IntMatrix minor;
      minor.reserve(t - 1);
      for (std::size_t r = 0; r < t; ++r) {
        if (r == j) continue;
        std::vector<BigInt> row;
        row.reserve(t - 1);
        for (std::size_t c = 0; c < t; ++c) {
          if (c != i) row.push_back(a[r][c]);
        }
        minor.push_back(std::move(row));
      }
      BigInt cof = determinant(minor);
      ctx.adjugate[i][j] = ((i + j) % 2 == 0) ? cof : BigInt(-cof);
    }
  }
  return ctx;
}

std::vector<BigInt> solve_shares(std::span<const BigInt> shares,
                                 const ReconstructionContext& ctx) {
  const std::size_t t = ctx.adjugate.size();
  if (shares.size() != t) {
    throw ConfigError("expected " + std::to_string(t) + " shares, got " +
                      std::to_string(shares.size()));
  }
  std::vector<BigInt> x(t);
  BigInt q, r;
  for (std::size_t i = 0; i < t; ++i) {
    BigInt acc = 0;
    for (std::size_t h = 0; h < t; ++h) acc += ctx.adjugate[i][h] * shares[h];
    divide_qr(acc, ctx.det, q, r);
    if (r != 0) {
      throw CorruptionError("shares from group " + group_label(ctx.group) +
                            " are inconsistent (component " + std::to_string(i + 1) +
                            " not divisible by the determinant)");
    }
    x[i] = std::move(q);
  }
  return x;
}

Block reconstruct_block(std::span<const BigInt> shares, const ReconstructionContext& ctx,
                        std::int64_t p, const Hashes& hashes) {
  std::vector<BigInt> x = solve_shares(shares, ctx);
  const std::size_t w = x.size() - 1;
  Block b;
  b.digits.resize(w);
  for (std::size_t i = 0; i < w; ++i) {
    BigInt d = x[i] - 2;
    if (d < kPadDigit || d >= p) {
      throw CorruptionError("shares from group " + group_label(ctx.group) +
                            " decode to an out-of-range digit");
    }
    b.digits[i] = d.convert_to<std::int64_t>();
  }
  if (x[w] < 0 || x[w] >= p) {
    throw CorruptionError("shares from group " + group_label(ctx.group) +
                          " decode to an out-of-range inner signature");
  }
  b.sig = x[w].convert_to<std::int64_t>();
  if (hashes.inner(b.digits, p) != b.sig) {
    throw CorruptionError("inner signature mismatch for group " + group_label(ctx.group));
  }
  return b;
}

}  // namespace shardhouse
