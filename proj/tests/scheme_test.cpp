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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "shardhouse/codec.h"
#include "shardhouse/errors.h"
#include "support/fixtures.h"

namespace shardhouse {
namespace {

using testing::example_coefficients;
using testing::example_config;

// Cofactor expansion, only for the small matrices used here.
BigInt slow_det(const IntMatrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  BigInt acc = 0;
  for (std::size_t c = 0; c < n; ++c) {
    IntMatrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<BigInt> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    const BigInt term = m[0][c] * slow_det(minor);
    acc += (c % 2 == 0) ? term : BigInt(-term);
  }
  return acc;
}

TEST(SchemeTest, WorkedExampleShares) {
  const auto cfg = example_config();
  const auto coeffs = example_coefficients();
  const auto digits = int_to_digits(75, 13, 2);
  ASSERT_EQ(digits, (std::vector<std::int64_t>{10, 5}));
  const Block b = sign_block(digits, 13);
  EXPECT_EQ(b.sig, 2);

  const std::vector<std::int64_t> shares = {16, 43, 33, 16};
  const std::vector<std::int64_t> sout = {2, 1, 5, 2};
  for (CspId k = 1; k <= 4; ++k) {
    const auto s = share_block(b, coeffs, k, cfg.p2);
    EXPECT_EQ(s.e, shares[k - 1]) << "CSP " << k;
    EXPECT_EQ(s.s_out, sout[k - 1]) << "CSP " << k;
    EXPECT_TRUE(verify_outer(s, cfg.p2));
  }
}

TEST(SchemeTest, WorkedExampleReconstruction) {
  const auto coeffs = example_coefficients();
  const std::vector<CspId> g = {1, 2, 3};
  const auto ctx = build_reconstruction(g, coeffs);
  EXPECT_EQ(ctx.det, 3);
  const IntMatrix adj = {{1, 2, -2}, {-3, -3, 6}, {1, -1, 1}};
  EXPECT_EQ(ctx.adjugate, adj);

  const std::vector<BigInt> e = {16, 43, 33};
  const Block b = reconstruct_block(e, ctx, 13);
  EXPECT_EQ(b.digits, (std::vector<std::int64_t>{10, 5}));
  EXPECT_EQ(b.sig, 2);
  EXPECT_EQ(digits_to_int(b.digits, 13), 75u);
}

TEST(SchemeTest, AdjugateTimesMatrixIsDetIdentity) {
  const auto coeffs = example_coefficients();
  std::vector<CspId> ids = {1, 2, 3, 4};
  std::vector<bool> pick = {true, true, true, false};
  do {
    std::vector<CspId> g;
    for (std::size_t i = 0; i < 4; ++i)
      if (pick[i]) g.push_back(ids[i]);
    const auto ctx = build_reconstruction(g, coeffs);
    IntMatrix a;
    for (CspId id : g) {
      std::vector<BigInt> row;
      for (auto v : coeffs.row(id)) row.push_back(v);
      a.push_back(row);
    }
    EXPECT_EQ(ctx.det, slow_det(a));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        BigInt s = 0;
        for (int k = 0; k < 3; ++k) s += ctx.adjugate[i][k] * a[k][j];
        EXPECT_EQ(s, i == j ? ctx.det : BigInt(0));
      }
  } while (std::prev_permutation(pick.begin(), pick.end()));
}

TEST(SchemeTest, DeterminantMatchesCofactorExpansion) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(-50, 50);
  for (int n = 1; n <= 5; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      IntMatrix m(n, std::vector<BigInt>(n));
      for (auto& r : m)
        for (auto& x : r) x = d(rng);
      EXPECT_EQ(determinant(m), slow_det(m));
    }
  }
}

TEST(SchemeTest, InnerSignatureIsMathematicalMod) {
  const std::vector<std::int64_t> pad = {-1, -1};
  EXPECT_EQ(inner_signature(pad, 13), 11);
  const std::vector<std::int64_t> mixed = {4, -1};
  EXPECT_EQ(inner_signature(mixed, 13), 3);
  EXPECT_EQ(outer_signature(BigInt(-3), 7), 4);
}

TEST(SchemeTest, MakeBlocksPadsTail) {
  auto cfg = example_config();
  const std::vector<std::int64_t> data = {1, 2, 3};
  const auto blocks = make_blocks(data, cfg);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[1].digits, (std::vector<std::int64_t>{3, kPadDigit}));
  EXPECT_EQ(blocks[1].sig, 2);
}

TEST(SchemeTest, MakeBlocksRejectsOutOfRange) {
  auto cfg = example_config();
  const std::vector<std::int64_t> data = {1, 13};
  try {
    make_blocks(data, cfg);
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
  const std::vector<std::int64_t> neg = {-1};
  EXPECT_THROW(make_blocks(neg, cfg), RangeError);
}

TEST(SchemeTest, ConfigValidation) {
  auto cfg = example_config();
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.t = 5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.t = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.p = 15;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.p2 = 8;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.csp_ids = {1, 2, 2, 4};
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(cfg.index_of(9), ConfigError);
}

TEST(SchemeTest, CoefficientSetRejectsSingularSubsets) {
  // Rows 1 and 2 are proportional in the first two columns and row 3 is
  // their sum, so {1,2,3} is singular.
  EXPECT_THROW(CoefficientSet({1, 2, 3}, {{1, 2, 0}, {2, 4, 1}, {3, 6, 1}}, 13), ConfigError);
  EXPECT_THROW(CoefficientSet({1, 2, 3}, {{1, 2, 13}, {2, 1, 1}, {3, 1, 2}}, 13), ConfigError);
  EXPECT_FALSE(admissible({{1, 0}, {1, 0}, {0, 1}}, 2));
  EXPECT_TRUE(admissible({{1, 0, 2}, {3, 1, 0}, {2, 1, 1}, {0, 2, 1}}, 3));
}

TEST(SchemeTest, GeneratedCoefficientsAreAdmissibleAndSeeded) {
  for (int n = 2; n <= 6; ++n) {
    for (int t = 2; t <= n; ++t) {
      auto cfg = testing::config_for(n, t, 13, 99);
      const auto a = gen_coefficients(cfg);
      EXPECT_TRUE(admissible(a.rows(), t));
      EXPECT_EQ(a, gen_coefficients(cfg));
      for (const auto& r : a.rows())
        for (auto v : r) EXPECT_TRUE(v >= 0 && v < 13);
    }
  }
}

TEST(SchemeTest, GenerationRetriesThenGivesUp) {
  auto cfg = testing::config_for(3, 2, 13);
  // First two attempts repeat a row; the third is admissible.
  RowDraw draw = [](std::size_t i, int attempt) {
    if (attempt < 2) return std::vector<std::int64_t>{1, 1};
    return std::vector<std::int64_t>{static_cast<std::int64_t>(i) + 1, 1};
  };
  int used = 0;
  const auto a = gen_coefficients(cfg, draw, 10, &used);
  EXPECT_EQ(used, 3);
  EXPECT_TRUE(admissible(a.rows(), 2));

  RowDraw never = [](std::size_t, int) { return std::vector<std::int64_t>{0, 0}; };
  EXPECT_THROW(gen_coefficients(cfg, never, 5), ConfigError);
}

TEST(SchemeTest, CorruptShareIsDetected) {
  const auto coeffs = example_coefficients();
  const std::vector<CspId> g = {1, 2, 3};
  const auto ctx = build_reconstruction(g, coeffs);
  // 43 -> 44 makes adj*e non-divisible by det.
  const std::vector<BigInt> e = {16, 44, 33};
  EXPECT_THROW(reconstruct_block(e, ctx, 13), CorruptionError);
  // A divisible perturbation lands on a block whose signature disagrees.
  const std::vector<BigInt> e2 = {16 + 3, 43, 33};
  EXPECT_THROW(reconstruct_block(e2, ctx, 13), CorruptionError);
}

TEST(SchemeTest, OuterCheckFlagsChangedShare) {
  ShareBundle s{BigInt(16), 2};
  EXPECT_TRUE(verify_outer(s, 7));
  s.e += 1;
  EXPECT_FALSE(verify_outer(s, 7));
  s.e += 6;
  EXPECT_TRUE(verify_outer(s, 7));  // multiples of p2 slip through the outer check
}

TEST(SchemeTest, SingularGroupRowsThrowCorruption) {
  const std::vector<CspId> g = {1, 2};
  EXPECT_THROW(build_reconstruction(g, CoefficientRows{{1, 2}, {2, 4}}), CorruptionError);
}

TEST(SchemeTest, SolveSharesChecksDivisibility) {
  const auto coeffs = example_coefficients();
  const std::vector<CspId> g = {2, 3, 4};
  const auto ctx = build_reconstruction(g, coeffs);
  const Block b = sign_block({7, 0}, 13);
  std::vector<BigInt> e;
  for (CspId k : g) e.push_back(share_value(b, coeffs.row(k)));
  const auto x = solve_shares(e, ctx);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x[0], 9);
  EXPECT_EQ(x[1], 2);
  EXPECT_EQ(x[2], 7);
  e[0] += 1;
  ASSERT_EQ(ctx.det, -5);
  EXPECT_THROW(solve_shares(e, ctx), CorruptionError);
}

}  // namespace
}  // namespace shardhouse
