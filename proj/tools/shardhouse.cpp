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


// Command-line front end: warehouse lifecycle, queries, a CSP server and
// the benchmark harness.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shardhouse/bench.h"
#include "shardhouse/errors.h"
#include "shardhouse/router.h"
#include "shardhouse/transport.h"
#include "shardhouse/warehouse.h"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace shardhouse;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string cell_text(const Value& v) { return is_null(v) ? "NULL" : format_value(v); }

void print_table(const ResultSet& rs, std::ostream& out) {
  std::vector<std::size_t> width(rs.columns.size());
  for (std::size_t i = 0; i < rs.columns.size(); ++i) width[i] = rs.columns[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rs.rows) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line.push_back(cell_text(r[i]));
      width[i] = std::max(width[i], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << line[i];
    }
    out << "\n";
  };
  emit(rs.columns);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  emit(rule);
  for (const auto& line : cells) emit(line);
  out << "(" << rs.rows.size() << " row" << (rs.rows.size() == 1 ? "" : "s") << ")\n";
}

void print_csv(const ResultSet& rs, std::ostream& out) {
  for (std::size_t i = 0; i < rs.columns.size(); ++i) out << (i ? "," : "") << csv_field(rs.columns[i]);
  out << "\n";
  for (const auto& r : rs.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "," : "");
      if (!is_null(r[i])) out << csv_field(format_value(r[i]));
    }
    out << "\n";
  }
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SchemaError*>(&e)) return 2;
  if (dynamic_cast<const UnavailableError*>(&e)) return 3;
  if (dynamic_cast<const IntegrityError*>(&e) || dynamic_cast<const CorruptionError*>(&e)) return 4;
  if (dynamic_cast<const QueryError*>(&e)) return 5;
  return 1;
}

TcpServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shardhouse: a data warehouse split into signed shares across storage nodes"};
  app.require_subcommand(1);
  std::string catalog_path = "warehouse.json", data_dir;
  auto add_catalog = [&](CLI::App* cmd) {
    cmd->add_option("--catalog", catalog_path, "Catalog file")->capture_default_str();
    cmd->add_option("--data-dir", data_dir, "Root for local CSP stores");
  };

  // init
  auto* init = app.add_subcommand("init", "Create a warehouse catalog and share its schema");
  add_catalog(init);
  std::string schema_path;
  SharingConfig config;
  config.n = 4;
  config.t = 3;
  config.p = 99991;
  std::vector<std::string> endpoints;
  init->add_option("--schema", schema_path, "Schema sidecar (JSON)")->required();
  init->add_option("-n,--csps", config.n, "Number of CSPs")->capture_default_str();
  init->add_option("-t,--threshold", config.t, "CSPs needed to reconstruct")->capture_default_str();
  init->add_option("-p,--modulus", config.p, "Digit modulus (prime)")->capture_default_str();
  init->add_option("--p2", config.p2, "Outer-signature modulus")->capture_default_str();
  init->add_option("--seed", config.seed, "Coefficient seed")->capture_default_str();
  init->add_option("--endpoint", endpoints, "ID=tcp://host:port for a remote CSP (repeatable)");

  // load
  auto* load = app.add_subcommand("load", "Share and load CSV rows into a table");
  add_catalog(load);
  std::string table, csv_path;
  load->add_option("--table", table, "Table name")->required();
  load->add_option("--csv", csv_path, "CSV file with a header row")->required();

  // query
  auto* query = app.add_subcommand("query", "Run a SELECT over the shares");
  add_catalog(query);
  std::string sql, format = "table";
  bool explain = false, no_pushdown = false;
  query->add_option("sql", sql, "SQL text, or - to read stdin")->required();
  query->add_flag("--explain", explain, "Print the plan instead of running it");
  query->add_flag("--no-pushdown", no_pushdown, "Aggregate after reconstruction");
  query->add_option("--format", format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();

  // cube
  auto* cube = app.add_subcommand("cube", "Shared cubes");
  cube->require_subcommand(1);
  auto* cube_build = cube->add_subcommand("build", "Build a cube from a JSON spec");
  add_catalog(cube_build);
  std::string spec_path, cube_name;
  bool no_staging = false;
  cube_build->add_option("--spec", spec_path, "Cube spec (JSON)")->required();
  cube_build->add_flag("--no-staging", no_staging, "Aggregate on shares instead of plaintext");
  auto* cube_refresh = cube->add_subcommand("refresh", "Load new source rows and update a cube");
  add_catalog(cube_refresh);
  cube_refresh->add_option("--cube", cube_name, "Cube name")->required();
  cube_refresh->add_option("--csv", csv_path, "New source rows (CSV)")->required();

  // recover / verify
  auto* recover = app.add_subcommand("recover", "Rebuild one CSP from its healthy peers");
  add_catalog(recover);
  CspId csp = 0;
  recover->add_option("--csp", csp, "CSP id")->required();
  auto* verify = app.add_subcommand("verify", "Outer-signature scan at the CSPs");
  add_catalog(verify);
  std::vector<CspId> csps;
  verify->add_option("--csp", csps, "CSP ids (default all)");

  // store
  auto* store = app.add_subcommand("store", "Serve one CSP over TCP");
  std::string listen = "127.0.0.1:7701", store_dir;
  store->add_option("--listen", listen, "host:port")->capture_default_str();
  store->add_option("--data", store_dir, "Persistence directory (memory only when empty)");

  // bench
  auto* bench = app.add_subcommand("bench", "Experiment harness");
  bench->require_subcommand(1);
  std::uint64_t seed = 7;
  std::string out;
  std::int64_t bench_p = 99991;
  auto* gen = bench->add_subcommand("gen", "Generate a dataset");
  std::string shape = "flat";
  std::size_t count = 100;
  gen->add_option("--shape", shape, "flat or ssb")->check(CLI::IsMember({"flat", "ssb"}))->capture_default_str();
  gen->add_option("--count", count, "Values (flat) or lineorder rows (ssb)")->capture_default_str();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("-p,--modulus", bench_p, "Modulus the ssb widths target")->capture_default_str();
  gen->add_option("--out", out, "Output file (flat) or directory (ssb)")->required();

  auto* inject = bench->add_subcommand("inject", "Corrupt share cells at one CSP");
  add_catalog(inject);
  std::string pattern = "replace";
  double rate = 0.01;
  std::int64_t delta = 1;
  inject->add_option("--csp", csp, "CSP id")->required();
  inject->add_option("--table", table, "Table name")->required();
  inject->add_option("--pattern", pattern, "add, replace or sigpreserve")->capture_default_str();
  inject->add_option("--rate", rate, "Fraction of blocks to corrupt")->capture_default_str();
  inject->add_option("--delta", delta, "Offset for the add pattern")->capture_default_str();
  inject->add_option("--seed", seed)->capture_default_str();

  auto* volume = bench->add_subcommand("volume", "Storage volume of a loaded warehouse");
  add_catalog(volume);
  volume->add_option("--out", out, "JSON report path");

  auto* prob = bench->add_subcommand("prob", "Breach probability p^-(2t-x-1)");
  int x = 1, t = 3;
  bool sweep = false;
  prob->add_option("-x", x, "Shares held by the intruder")->capture_default_str();
  prob->add_option("-t", t, "Threshold")->capture_default_str();
  prob->add_option("-p,--modulus", bench_p)->capture_default_str();
  prob->add_flag("--sweep", sweep, "Table over t in 2..10 and x < t");
  prob->add_option("--out", out, "JSON report path");

  auto* run = bench->add_subcommand("run", "Scaling sweep and error-detection experiment");
  std::size_t values = 20000, trials = 100000, inner_trials = 1000000;
  int runs = 5;
  run->add_option("--values", values, "Integers per scaling run")->capture_default_str();
  run->add_option("--runs", runs, "Repetitions (median reported)")->capture_default_str();
  run->add_option("--trials", trials, "Combined-detection trials")->capture_default_str();
  run->add_option("--inner-trials", inner_trials, "Inner-only trials per modulus")->capture_default_str();
  run->add_option("--seed", seed)->capture_default_str();
  run->add_option("--out", out, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    auto open = [&]() { return Warehouse::open(catalog_path, opt_path(data_dir)); };
    if (*init) {
      if (fs::exists(catalog_path)) throw ConfigError(catalog_path + " already exists");
      config.csp_ids.clear();
      for (int k = 1; k <= config.n; ++k) config.csp_ids.push_back(k);
      Catalog catalog = new_catalog(config);
      for (const auto& e : endpoints) {
        const auto eq = e.find('=');
        if (eq == std::string::npos) throw ConfigError("endpoint must look like ID=tcp://host:port");
        const CspId id = std::stoll(e.substr(0, eq));
        config.index_of(id);
        parse_host_port(e.substr(eq + 1));
        catalog.endpoints[id] = e.substr(eq + 1);
      }
      const fs::path root = data_dir.empty() ? Warehouse::default_data_root(catalog_path) : fs::path(data_dir);
      Warehouse wh(catalog, connect_pool(catalog, root), fs::path(catalog_path));
      auto schemas = wh.share_schema(tables_from_sidecar(read_json(schema_path)));
      wh.save();
      std::cout << "initialised " << catalog_path << ": n=" << config.n << " t=" << config.t
                << " p=" << config.p << " p2=" << config.p2 << ", " << schemas.size() << " table(s)\n";
    } else if (*load) {
      Warehouse wh = open();
      auto counts = wh.load_csv(table, csv_path);
      for (const auto& [id, c] : counts) std::cout << "CSP " << id << ": " << c << " rows\n";
    } else if (*query) {
      if (sql == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        sql = ss.str();
      }
      Warehouse wh = open();
      RouterOptions opts;
      opts.aggregate_pushdown = !no_pushdown;
      Router router = wh.router(opts);
      wh.pool().probe();
      QueryPlan plan = router.plan(sql);
      if (explain) {
        std::cout << plan.explain();
      } else {
        ResultSet rs = router.execute(plan);
        if (format == "csv") {
          print_csv(rs, std::cout);
        } else {
          print_table(rs, std::cout);
        }
        if (router.substitutions() > 0) {
          std::cerr << "note: " << router.substitutions() << " CSP group substitution(s)\n";
        }
      }
    } else if (*cube_build) {
      Warehouse wh = open();
      CubeSpec spec = cube_from_json(read_json(spec_path));
      wh.build_cube(spec, !no_staging);
      std::cout << "built cube " << spec.name << "\n";
    } else if (*cube_refresh) {
      Warehouse wh = open();
      const CubeSpec* spec = wh.catalog().find_cube(cube_name);
      if (!spec) throw QueryError("unknown cube '" + cube_name + "'");
      // Parse through a scratch load of the source table's codecs.
      const TableDef& source = wh.catalog().table(spec->source);
      auto records = read_csv(csv_path);
      if (records.empty()) throw SchemaError(csv_path + " has no header");
      std::vector<Row> rows;
      for (std::size_t r = 1; r < records.size(); ++r) {
        Row row(source.columns.size());
        for (std::size_t i = 0; i < source.columns.size(); ++i) {
          const auto& col = source.columns[i];
          auto it = std::find(records[0].begin(), records[0].end(), col.name);
          if (it == records[0].end()) throw SchemaError(csv_path + " lacks column " + col.name);
          const std::string& text = records[r].at(static_cast<std::size_t>(it - records[0].begin()));
          if (col.codec.nullable && (text.empty() || text == "NULL")) continue;
          row[i] = col.key_domain.empty() ? parse_typed(text, col.codec) : Value{text};
        }
        rows.push_back(std::move(row));
      }
      const std::size_t cells = wh.refresh_cube(cube_name, rows);
      wh.save();
      std::cout << "refreshed cube " << cube_name << ": " << cells << " cell(s) written\n";
    } else if (*recover) {
      Warehouse wh = open();
      wh.pool().probe();
      RecoveryReport rep = wh.recover_csp(csp);
      std::cout << "recovered CSP " << rep.csp << " from";
      for (CspId id : rep.sources) std::cout << " " << id;
      std::cout << "\n";
      for (const auto& [name, n] : rep.rows) std::cout << "  " << name << ": " << n << " rows\n";
    } else if (*verify) {
      Warehouse wh = open();
      VerifyReport rep = wh.verify(csps);
      std::size_t bad = 0;
      for (const auto& [id, tables] : rep) {
        for (const auto& [name, cells] : tables) {
          bad += cells.size();
          std::cout << "CSP " << id << " " << name << ": " << cells.size() << " corrupt block(s)\n";
          for (const auto& c : cells) {
            std::cout << "    key";
            for (const auto& k : c.key) std::cout << " " << plain_to_json(k).dump();
            std::cout << " column " << c.attribute << " block " << c.block << "\n";
          }
        }
      }
      return bad ? 4 : 0;
    } else if (*store) {
      auto [host, port] = parse_host_port(listen);
      auto st = std::make_shared<Store>(opt_path(store_dir));
      TcpServer server(st, host, port);
      const int bound = server.start();
      std::cout << "serving on " << host << ":" << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.wait();
    } else if (*gen) {
      if (shape == "flat") {
        write_flat_csv(gen_flat(count, seed), out);
        std::ofstream(fs::path(out).replace_extension(".schema.json")) << flat_sidecar().dump(2) << "\n";
        std::cout << "wrote " << count << " values to " << out << "\n";
      } else {
        SsbDataset data = gen_ssb(seed, bench_p, count);
        write_ssb(data, out);
        for (const auto& [name, rows] : data.rows) std::cout << name << ": " << rows.size() << " rows\n";
      }
    } else if (*inject) {
      Warehouse wh = open();
      const std::size_t n = inject_errors(wh.pool().client(csp), table, parse_pattern(pattern), rate,
                                          delta, seed);
      std::cout << "corrupted " << n << " block(s) of " << table << " at CSP " << csp << "\n";
    } else if (*volume) {
      Warehouse wh = open();
      VolumeReport rep = measure_volume(wh);
      std::cout << rep.summary();
      if (!out.empty()) write_text(out, rep.to_json().dump(2) + "\n");
    } else if (*prob) {
      json rows = json::array();
      std::vector<std::pair<int, int>> points;
      if (sweep) {
        for (int tt = 2; tt <= 10; ++tt) {
          for (int xx = 0; xx < tt; ++xx) points.emplace_back(xx, tt);
        }
      } else {
        points.emplace_back(x, t);
      }
      std::cout << std::setw(4) << "x" << std::setw(4) << "t" << std::setw(10) << "p" << std::setw(14)
                << "probability" << "\n";
      for (auto [xx, tt] : points) {
        BreachProbability bp = breach_probability(xx, tt, bench_p);
        std::cout << std::setw(4) << xx << std::setw(4) << tt << std::setw(10) << bench_p << std::setw(14)
                  << std::setprecision(4) << std::scientific << bp.value << std::defaultfloat << "\n";
        rows.push_back({{"x", xx}, {"t", tt}, {"p", bench_p}, {"exponent", 2 * tt - xx - 1},
                        {"denominator", to_decimal(bp.denominator)}, {"value", bp.value}});
      }
      if (!out.empty()) write_text(out, rows.dump(2) + "\n");
    } else if (*run) {
      std::vector<std::pair<int, int>> nt;
      for (int n = 3; n <= 6; ++n) {
        for (int tt = 2; tt <= n; ++tt) nt.emplace_back(n, tt);
      }
      ScalingReport scaling = run_scaling(nt, values, 99991, runs, seed);
      std::cout << scaling.summary();
      for (int tt = 2; tt <= 3; ++tt) {
        std::cout << "t=" << tt << ": sharing monotone in n: " << (scaling.share_monotone(tt) ? "yes" : "no")
                  << ", reconstruction spread across n: " << std::fixed << std::setprecision(1)
                  << 100 * scaling.reconstruct_spread(tt) << "%\n";
      }
      std::cout << "context: the original measurements were 68 MB/s sharing and 144 MB/s "
                   "reconstruction on different hardware\n";
      json detection = json::array();
      std::cout << "\nerror detection (p2=67, n=4, t=3)\n";
      for (std::int64_t p : {13, 251, 99991}) {
        DetectionReport d = detection_experiment(p, 67, 4, 3, p == 99991 ? trials : trials / 10,
                                                 inner_trials, seed);
        std::cout << "p=" << std::setw(6) << p << "  combined " << d.combined_detected << "/" << d.trials
                  << "  inner-only false negatives " << d.inner_false_negatives << "/" << d.inner_trials
                  << " (" << std::scientific << std::setprecision(2) << d.inner_fn_fraction()
                  << std::defaultfloat << ")\n";
        detection.push_back(d.to_json());
      }
      if (!out.empty()) {
        write_text(out, json{{"scaling", scaling.to_json()}, {"detection", detection}}.dump(2) + "\n");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
