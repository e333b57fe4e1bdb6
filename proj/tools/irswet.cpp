// SPDX-License-Identifier: Apache-2.0
//
// irswet: IRS-assisted multiuser wireless energy transfer optimization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "irswet/experiments.hpp"

using namespace irswet;
using namespace irswet::experiments;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_elements;
  std::optional<int> n_ers;
  std::optional<int> realizations;
  std::optional<int> threads;
  std::string schemes;
  std::string grid;
  std::string out;
  std::string json_out;
  bool no_wall_time = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool sweep) {
  cmd->add_option("-c,--config", a.config, "JSON scenario/config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", a.sets, "Override any config key, e.g. --set total_energy_j=5 (repeatable)");
  auto* seed = cmd->add_option("--seed", a.seed, "Master seed");
  if (sweep) seed->required();
  cmd->add_option("-N,--n-elements", a.n_elements, "IRS elements");
  cmd->add_option("--threads", a.threads, "Worker threads (0: all cores)");
  cmd->add_option("-o,--out", a.out, "CSV output path (stdout when omitted)");
  cmd->add_option("--json", a.json_out, "JSON mirror output path");
  cmd->add_flag("--no-wall-time", a.no_wall_time, "Write wall_ms as 0 for byte-identical reruns");
}

std::set<std::string> known_keys() {
  std::set<std::string> keys;
  const auto defaults = irswet::to_json(SystemConfig{});
  for (const auto& [k, v] : defaults.items()) keys.insert(k);
  for (const char* k : {"schemes", "sweep", "grid", "n_realizations", "master_seed", "dynamic_j", "init",
                        "measure_wall_time", "threads"})
    keys.insert(k);
  return keys;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> parse_grid(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) {
    const auto dash = tok.find("..");
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(tok));
      } else {
        const int lo = std::stoi(tok.substr(0, dash)), hi = std::stoi(tok.substr(dash + 2));
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad grid entry '" + tok + "'");
    }
  }
  return out;
}

Scenario build_scenario(const CommonArgs& a) {
  Scenario sc;
  nlohmann::json doc = nlohmann::json::object();
  if (!a.config.empty()) doc = read_json_file(a.config);
  const auto keys = known_keys();
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (!keys.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    try {
      doc[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      doc[key] = value;  // bare strings such as --set init=random
    }
  }
  for (const auto& [k, v] : doc.items())
    if (!keys.count(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  apply_scenario_json(sc, doc);
  if (a.seed) sc.master_seed = *a.seed;
  if (a.n_elements) sc.config.n_elements = *a.n_elements;
  if (a.n_ers) sc.config.n_ers = *a.n_ers;
  if (a.realizations) sc.n_realizations = *a.realizations;
  if (a.threads) sc.threads = *a.threads;
  if (!a.schemes.empty()) {
    sc.schemes.clear();
    for (const auto& s : split_list(a.schemes)) sc.schemes.push_back(parse_scheme(s));
  }
  if (!a.grid.empty()) sc.grid = parse_grid(a.grid);
  if (a.no_wall_time) sc.measure_wall_time = false;
  return sc;
}

void emit(const Scenario& sc, const std::vector<RunRecord>& records, const CommonArgs& a) {
  if (a.out.empty()) {
    write_csv(std::cout, records);
  } else {
    emit_csv(records, a.out);
    std::cerr << "wrote " << records.size() << " records to " << a.out << '\n';
  }
  if (!a.json_out.empty()) emit_json(sc, records, a.json_out);
}

int count_failures(const std::vector<RunRecord>& records) {
  int n = 0;
  for (const auto& r : records)
    if (r.status.rfind("error", 0) == 0) ++n;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted multiuser wireless energy transfer: solvers and Monte-Carlo sweeps"};
  app.require_subcommand(1);

  CommonArgs solve_args, k_args, j_args, rank_args;
  std::string solve_scheme = "dynamic";
  std::uint64_t solve_realization = 0;
  std::optional<int> solve_j;
  std::string spectrum_out;

  auto* solve = app.add_subcommand("solve", "One realization, one scheme");
  add_common(solve, solve_args, false);
  solve->add_option("-s,--scheme", solve_scheme, "upper-bound, static-gr, static-sca, dynamic, tdma or no-irs");
  solve->add_option("-K,--n-ers", solve_args.n_ers, "Energy receivers");
  solve->add_option("-r,--realization", solve_realization, "Realization index under the master seed");
  solve->add_option("-J,--patterns", solve_j, "Reflection patterns for the dynamic scheme (default: SDR rank)");

  auto* sweep_k = app.add_subcommand("sweep-k", "Sweep the number of ERs");
  add_common(sweep_k, k_args, true);
  sweep_k->add_option("-g,--grid", k_args.grid, "K values, e.g. 2,4,8 or 2..6");
  sweep_k->add_option("-R,--realizations", k_args.realizations, "Channel realizations per K");
  sweep_k->add_option("--schemes", k_args.schemes, "Comma-separated scheme list");

  auto* sweep_j = app.add_subcommand("sweep-j", "Sweep the number of reflection patterns");
  add_common(sweep_j, j_args, true);
  sweep_j->add_option("-g,--grid", j_args.grid, "J values, e.g. 1..6");
  sweep_j->add_option("-K,--n-ers", j_args.n_ers, "Energy receivers");
  sweep_j->add_option("-R,--realizations", j_args.realizations, "Channel realizations");
  sweep_j->add_option("--schemes", j_args.schemes, "Comma-separated scheme list");

  auto* rank = app.add_subcommand("rank-analysis", "SDR rank estimates and eigenvalue spectra over a K grid");
  add_common(rank, rank_args, true);
  rank->add_option("-g,--grid", rank_args.grid, "K values");
  rank->add_option("-R,--realizations", rank_args.realizations, "Channel realizations per K");
  rank->add_option("--spectrum-out", spectrum_out, "CSV of normalized eigenvalues per realization");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      Scenario sc = build_scenario(solve_args);
      sc.sweep = Sweep::none;
      sc.schemes = {parse_scheme(solve_scheme)};
      if (solve_j) sc.dynamic_j = *solve_j;
      const auto records = run_realization(sc, solve_realization);
      emit(sc, records, solve_args);
      return count_failures(records) ? 2 : 0;
    }
    if (sweep_k->parsed()) {
      Scenario sc = build_scenario(k_args);
      sc.sweep = Sweep::k_grid;
      const auto records = run_scenario(sc);
      emit(sc, records, k_args);
      return count_failures(records) ? 2 : 0;
    }
    if (sweep_j->parsed()) {
      Scenario sc = build_scenario(j_args);
      sc.sweep = Sweep::j_grid;
      const auto records = run_scenario(sc);
      emit(sc, records, j_args);
      return count_failures(records) ? 2 : 0;
    }
    if (rank->parsed()) {
      Scenario sc = build_scenario(rank_args);
      sc.sweep = Sweep::k_grid;
      const auto ra = rank_analysis(sc);
      emit(sc, ra.records, rank_args);
      if (!spectrum_out.empty()) {
        std::ofstream out(spectrum_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + spectrum_out + " for writing");
        write_spectrum_csv(out, ra.spectra);
      }
      return count_failures(ra.records) ? 2 : 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "irswet: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
