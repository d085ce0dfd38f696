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

// Experiment harness: dataset generators, corruption injection and the
// storage, detection, privacy and scaling measurements.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shardhouse/bigint.h"
#include "shardhouse/catalog.h"
#include "shardhouse/engine.h"
#include "shardhouse/transport.h"
#include "shardhouse/warehouse.h"

namespace shardhouse {

// ---- datasets

std::vector<std::uint32_t> gen_flat(std::size_t count, std::uint64_t seed);
void write_flat_csv(const std::vector<std::uint32_t>& values, const std::filesystem::path& path);
/// Sidecar for the flat dataset: one unsigned integer column plus a key.
nlohmann::json flat_sidecar();

struct NamedQuery {
  std::string name;
  std::string sql;
};

struct SsbDataset {
  std::vector<TableDef> tables;  // original schema, parents first
  std::map<std::string, std::vector<Row>> rows;
  std::vector<NamedQuery> queries;  // Q1.1 .. Q4.3
};

/// Mini star schema: customer, supplier, part, date and lineorder. String
/// columns get the narrowest width holding 7-bit text under `p`.
nlohmann::json ssb_sidecar(std::int64_t p);
SsbDataset gen_ssb(std::uint64_t seed, std::int64_t p, std::size_t lineorder_rows = 10000);
std::vector<NamedQuery> ssb_queries();
/// schema.json, one CSV per table and queries.sql.
void write_ssb(const SsbDataset& data, const std::filesystem::path& dir);
/// Seeded single-table queries over the mini schema: equality, range,
/// grouped and global aggregates.
std::vector<NamedQuery> random_ssb_queries(const SsbDataset& data, std::size_t count,
                                           std::uint64_t seed);

// ---- corruption

enum class CorruptionPattern { kAddDelta, kRandomReplace, kSignaturePreserving };
CorruptionPattern parse_pattern(const std::string& name);
std::string pattern_name(CorruptionPattern p);

/// Rewrites share blocks of one table at one CSP, each with probability
/// `rate`. Returns the number of corrupted blocks.
std::size_t inject_errors(StoreClient& csp, const std::string& table, CorruptionPattern pattern,
                          double rate, std::int64_t delta, std::uint64_t seed);

// ---- measurements

struct VolumeRow {
  std::string table;
  std::uint64_t rows = 0;
  std::uint64_t digits = 0;         // digit slots of shared values, (t-1) per block
  std::uint64_t share_integers = 0; // over all CSPs
  std::uint64_t integer_digits = 0; // integer columns only
  std::uint64_t integer_shares = 0;
  std::uint64_t original_bytes = 0;
  std::map<CspId, std::uint64_t> csp_bytes;
};

struct VolumeReport {
  int n = 0, t = 0;
  std::int64_t p = 0, p2 = 0;
  std::vector<VolumeRow> tables;

  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Reconstructs every table for the original volume and reads every CSP's
/// shares. Original bytes use natural binary widths (4-byte keys, integers
/// and dates, 8-byte wider integers and reals, UTF-8 text, 1-byte
/// booleans); stored bytes use the minimal unsigned width of each share,
/// one byte per outer signature and the same key and boolean widths.
VolumeReport measure_volume(const Warehouse& warehouse);

struct BreachProbability {
  BigInt denominator;  // probability is 1 / denominator
  double value = 0;
};
/// Chance of guessing a block from x of t shares: p^-(2t-x-1). Throws
/// RangeError unless 0 <= x < t.
BreachProbability breach_probability(int x, int t, std::int64_t p);

struct DetectionReport {
  std::int64_t p = 0, p2 = 0;
  int n = 0, t = 0;
  std::uint64_t trials = 0;
  std::uint64_t outer_detected = 0;
  std::uint64_t combined_detected = 0;
  std::uint64_t inner_trials = 0;
  std::uint64_t inner_false_negatives = 0;

  double combined_rate() const { return trials ? double(combined_detected) / double(trials) : 0; }
  double inner_fn_fraction() const {
    return inner_trials ? double(inner_false_negatives) / double(inner_trials) : 0;
  }
  nlohmann::json to_json() const;
};

/// Random single-share replacements on random blocks. The combined check
/// is the production path: outer signature, then exact reconstruction with
/// the inner signature. The inner-only check rounds the rational solution
/// and tests the inner signature alone; a false negative is a wrong block
/// that passes.
DetectionReport detection_experiment(std::int64_t p, std::int64_t p2, int n, int t,
                                     std::uint64_t trials, std::uint64_t inner_trials,
                                     std::uint64_t seed);

struct ScalingPoint {
  int n = 0, t = 0;
  std::size_t values = 0;
  double share_ms = 0;        // median
  double reconstruct_ms = 0;  // median
  double share_mb_s() const;
  double reconstruct_mb_s() const;
};

struct ScalingReport {
  std::int64_t p = 0;
  std::vector<ScalingPoint> points;
  int runs = 0;

  /// Sharing time never drops as n grows, per t.
  bool share_monotone(int t) const;
  /// Largest relative deviation of reconstruction time from its median
  /// across n, per t.
  double reconstruct_spread(int t) const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Times sharing (encode + n shares per block) and reconstruction (t
/// shares per block + decode) of `values` random 32-bit integers for every
/// (n, t) pair, median of `runs`.
ScalingReport run_scaling(const std::vector<std::pair<int, int>>& nt, std::size_t values,
                          std::int64_t p, int runs, std::uint64_t seed);

}  // namespace shardhouse
