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

// (m, n, t) multi-secret sharing with inner and outer signatures.
//
// A block of t-1 base-p digits plus its inner signature is mapped onto n
// integer shares by n linear forms
//
//   e_k = sum_{h<t} (d_h + 2) * a[k][h]  +  sig * a[k][t]
//
// evaluated without any modular reduction. Any t shares determine the block
// through the exact integer inverse of the t x t coefficient submatrix,
// which is kept as (adjugate, determinant) so reconstruction never rounds.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "shardhouse/bigint.h"

namespace shardhouse {

using CspId = std::int64_t;

/// Digit value used to fill the tail of the last block.
inline constexpr std::int64_t kPadDigit = -1;

/// Attempts made by gen_coefficients before giving up.
inline constexpr int kCoefficientRetryBudget = 1000;

bool is_prime(std::int64_t v);

struct SharingConfig {
  int n = 0;
  int t = 0;
  std::int64_t p = 0;   // digit modulus
  std::int64_t p2 = 67; // outer-signature modulus
  std::vector<CspId> csp_ids;
  std::uint64_t seed = 0;

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
  /// Position of `id` in csp_ids; throws ConfigError for unknown ids.
  std::size_t index_of(CspId id) const;
};

using IntMatrix = std::vector<std::vector<BigInt>>;
using CoefficientRows = std::vector<std::vector<std::int64_t>>;

/// Exact determinant (fraction-free Bareiss elimination).
BigInt determinant(const IntMatrix& m);

/// True when rows are pairwise distinct and every t-row subset is
/// nonsingular.
bool admissible(const CoefficientRows& rows, int t);

/// The n x t coefficient matrix. Row k belongs to csp_ids[k].
class CoefficientSet {
 public:
  CoefficientSet() = default;
  /// Validates shape, entry range [0, p) and admissibility.
  CoefficientSet(std::vector<CspId> ids, CoefficientRows rows, std::int64_t p);

  int n() const { return static_cast<int>(rows_.size()); }
  int t() const { return rows_.empty() ? 0 : static_cast<int>(rows_[0].size()); }
  const std::vector<CspId>& ids() const { return ids_; }
  const CoefficientRows& rows() const { return rows_; }
  const std::vector<std::int64_t>& row(CspId id) const;

  bool operator==(const CoefficientSet&) const = default;

 private:
  std::vector<CspId> ids_;
  CoefficientRows rows_;
};

/// Candidate row for the CSP at `index` on retry number `attempt`.
using RowDraw = std::function<std::vector<std::int64_t>(std::size_t index, int attempt)>;

/// Default generator: row k on attempt a is drawn from a 64-bit Mersenne
/// twister seeded with (seed, csp_ids[k], a), entries uniform in [0, p).
RowDraw seeded_row_draw(const SharingConfig& config);

CoefficientSet gen_coefficients(const SharingConfig& config);
/// Redraws the whole matrix until admissible. `attempts_used` receives the
/// number of draws consumed. Throws ConfigError when the budget runs out.
CoefficientSet gen_coefficients(const SharingConfig& config, const RowDraw& draw,
                                int max_attempts = kCoefficientRetryBudget,
                                int* attempts_used = nullptr);

using InnerHash = std::function<std::int64_t(std::span<const std::int64_t>, std::int64_t)>;
using OuterHash = std::function<std::int64_t(const BigInt&, std::int64_t)>;

/// Signature functions. Defaults: digit sum mod p, share mod p2.
struct Hashes {
  InnerHash inner;
  OuterHash outer;
};
const Hashes& default_hashes();

/// Sum of digits reduced into [0, p); padding counts as -1.
std::int64_t inner_signature(std::span<const std::int64_t> digits, std::int64_t p);
std::int64_t outer_signature(const BigInt& e, std::int64_t p2);

struct Block {
  std::vector<std::int64_t> digits;  // exactly t-1 entries
  std::int64_t sig = 0;

  bool operator==(const Block&) const = default;
};

Block sign_block(std::vector<std::int64_t> digits, std::int64_t p,
                 const Hashes& hashes = default_hashes());

/// Splits `data` into ceil(m/(t-1)) signed blocks, padding the last one.
/// Every datum must lie in [0, p). Throws RangeError naming the index.
std::vector<Block> make_blocks(std::span<const std::int64_t> data, const SharingConfig& config,
                               const Hashes& hashes = default_hashes());

struct ShareBundle {
  BigInt e;
  std::int64_t s_out = 0;

  bool operator==(const ShareBundle&) const = default;
};

ShareBundle share_block(const Block& block, const CoefficientSet& coeffs, CspId k,
                        std::int64_t p2, const Hashes& hashes = default_hashes());
/// Share value only, for callers that sign separately.
BigInt share_value(const Block& block, std::span<const std::int64_t> coeff_row);

bool verify_outer(const ShareBundle& bundle, std::int64_t p2,
                  const Hashes& hashes = default_hashes());

struct ReconstructionContext {
  std::vector<CspId> group;
  IntMatrix adjugate;  // adjugate * A == det * I
  BigInt det;
};

ReconstructionContext build_reconstruction(std::span<const CspId> group,
                                           const CoefficientSet& coeffs);
/// Same, from raw rows (row x belongs to group[x]). Throws CorruptionError
/// when the rows are singular.
ReconstructionContext build_reconstruction(std::span<const CspId> group,
                                           const CoefficientRows& rows);

/// Solves A x = shares exactly. Throws CorruptionError when a component of
/// adjugate * shares is not a multiple of det.
std::vector<BigInt> solve_shares(std::span<const BigInt> shares, const ReconstructionContext& ctx);

/// Recovers a block from t shares in group order and checks its inner
/// signature. Throws CorruptionError on any mismatch.
Block reconstruct_block(std::span<const BigInt> shares, const ReconstructionContext& ctx,
                        std::int64_t p, const Hashes& hashes = default_hashes());

}  // namespace shardhouse
