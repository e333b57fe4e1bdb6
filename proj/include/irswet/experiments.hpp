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

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "irswet/static_sdr.hpp"
#include "irswet/tdma.hpp"

namespace irswet::experiments {

using Eigen::VectorXd;

enum class Scheme { upper_bound, static_gr, static_sca, dynamic, tdma, no_irs };

inline const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> s{Scheme::upper_bound, Scheme::static_gr, Scheme::static_sca,
                                     Scheme::dynamic,     Scheme::tdma,      Scheme::no_irs};
  return s;
}

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::upper_bound: return "upper-bound";
    case Scheme::static_gr: return "static-gr";
    case Scheme::static_sca: return "static-sca";
    case Scheme::dynamic: return "dynamic";
    case Scheme::tdma: return "tdma";
    case Scheme::no_irs: return "no-irs";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : all_schemes())
    if (name == to_string(s)) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

enum class Sweep { none, k_grid, j_grid };

inline const char* to_string(Sweep s) {
  return s == Sweep::none ? "none" : s == Sweep::k_grid ? "k-grid" : "j-grid";
}

inline Sweep parse_sweep(const std::string& name) {
  if (name == "none") return Sweep::none;
  if (name == "k-grid") return Sweep::k_grid;
  if (name == "j-grid") return Sweep::j_grid;
  throw std::invalid_argument("unknown sweep: " + name);
}

struct Scenario {
  SystemConfig config;
  std::vector<Scheme> schemes = all_schemes();
  Sweep sweep = Sweep::none;
  std::vector<int> grid;  // K values for k-grid, J values for j-grid
  int n_realizations = 1;
  std::uint64_t master_seed = 0;
  /// Pattern count for the dynamic scheme outside j-grid sweeps; 0 couples J to the SDR rank.
  int dynamic_j = 0;
  /// Start used by the dynamic scheme besides the SDR-eigenvector and embedding starts.
  sca::InitStrategy init = sca::InitStrategy::tdma_warm;
  /// When false wall_ms is written as 0 so repeated runs are byte-identical.
  bool measure_wall_time = true;
  int threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (n_realizations < 1) throw std::invalid_argument("Scenario: n_realizations must be positive");
    if (schemes.empty()) throw std::invalid_argument("Scenario: no schemes selected");
    if (sweep != Sweep::none && grid.empty()) throw std::invalid_argument("Scenario: sweep grid is empty");
    for (int g : grid)
      if (g < 1) throw std::invalid_argument("Scenario: grid values must be positive");
    if (dynamic_j < 0) throw std::invalid_argument("Scenario: dynamic_j must be nonnegative");
    if (threads < 0) throw std::invalid_argument("Scenario: threads must be nonnegative");
    config.validate();
  }
};

struct RunRecord {
  std::string scheme;
  int k = 0;
  int j = 0;
  std::uint64_t seed = 0;
  double e_joules = 0.0;
  double total_energy_joules = 0.0;
  std::optional<int> rank;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string status = "ok";
  std::uint64_t channel_hash = 0;  // JSON only

  bool operator==(const RunRecord&) const = default;
};

/// FNV-1a over the raw channel coefficients.
inline std::uint64_t channel_hash(const ChannelRealization& ch) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const cplx* p, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(cplx); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  feed(ch.g.data(), ch.g.size());
  feed(ch.h_r.data(), ch.h_r.size());
  feed(ch.h_d.data(), ch.h_d.size());
  return h;
}

/// Direct link only, constant power E/T over the whole block.
inline sca::Audit evaluate_no_irs(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                  const SystemConfig& cfg) {
  sca::Audit a;
  a.energy = VectorXd::Zero(ch.n_ers);
  a.e = std::numeric_limits<double>::infinity();
  const double p = cfg.static_power();
  for (int k = 0; k < ch.n_ers; ++k) {
    const double rf = p * std::norm(ch.h_d(k));
    a.energy(k) = cfg.horizon * eh::dc_power(ehs[static_cast<std::size_t>(k)], rf);
    if (cfg.weight(k) > 0.0) a.e = std::min(a.e, a.energy(k) / cfg.weight(k));
  }
  if (!std::isfinite(a.e)) a.e = 0.0;
  a.energy_used = p * cfg.horizon;
  a.time_used = cfg.horizon;
  return a;
}

inline sca::Schedule single_slot(const VectorXcd& theta, const SystemConfig& cfg) {
  sca::Schedule s;
  s.n_slots = 1;
  s.phases.push_back(theta);
  s.durations.push_back(cfg.horizon);
  s.powers.push_back(cfg.static_power());
  return s;
}

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t realization, std::uint64_t tag) {
  return irswet::splitmix64(realization ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
}

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!on_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline bool wants(const Scenario& sc, Scheme s) {
  return std::find(sc.schemes.begin(), sc.schemes.end(), s) != sc.schemes.end();
}

inline void fill(RunRecord& r, const sca::Solution& sol) {
  r.e_joules = std::max(0.0, sol.e);
  r.total_energy_joules = std::max(0.0, sol.per_er_energy.sum());
  r.iterations = sol.iterations;
  r.status = sol.status;
}

inline void fill(RunRecord& r, const sca::Audit& a) {
  r.e_joules = std::max(0.0, a.e);
  r.total_energy_joules = std::max(0.0, a.energy.sum());
}

/// Everything one realization needs, computed lazily and shared by the schemes.
struct Context {
  const Scenario& sc;
  SystemConfig cfg;
  ChannelRealization ch;
  std::vector<eh::EhParams> ehs;
  std::uint64_t seed;
  std::uint64_t hash;

  std::optional<sdr::SdrResult> sdr;
  double sdr_ms = 0.0;
  std::optional<sca::Solution> static_sca;
  double static_sca_ms = 0.0;
  std::optional<sca::Solution> tdma;
  double tdma_ms = 0.0;

  Context(const Scenario& s, SystemConfig c, std::uint64_t sd)
      : sc(s), cfg(std::move(c)), ch(sample_channels(cfg, sd)), ehs(eh::harvesters(cfg)), seed(sd),
        hash(channel_hash(ch)) {}

  const sdr::SdrResult& upper_bound() {
    if (!sdr) {
      Stopwatch w(sc.measure_wall_time);
      sdr = sdr::solve_sdr_upper_bound(ch, ehs, cfg);
      sdr_ms = w.ms();
    }
    return *sdr;
  }

  const sca::Solution& static_solution() {
    if (!static_sca) {
      Stopwatch w(sc.measure_wall_time);
      static_sca = sca::solve_static_sca(ch, ehs, cfg);
      static_sca_ms = w.ms();
    }
    return *static_sca;
  }

  const sca::Solution& tdma_solution() {
    if (!tdma) {
      Stopwatch w(sc.measure_wall_time);
      tdma = tdma::solve_tdma(ch, ehs, cfg);
      tdma_ms = w.ms();
    }
    return *tdma;
  }

  /// Best audited result over several starts.  `nested` is an extra warm start
  /// (the previous point of a J sweep).
  sca::Solution dynamic(int n_slots, const std::optional<sca::Schedule>& nested = std::nullopt) {
    std::vector<sca::DynamicOptions> starts;
    sca::DynamicOptions base;
    base.init = sc.init;
    base.seed = stream_seed(seed, 2);
    starts.push_back(base);
    auto add = [&](sca::Schedule s) {
      sca::DynamicOptions o;
      o.warm_start = std::move(s);
      starts.push_back(std::move(o));
    };
    if (nested) add(sca::embed_schedule(*nested, n_slots, ch, ehs, cfg));
    if (n_slots > 1) {
      add(sca::eigen_schedule(upper_bound().theta_lift, n_slots, cfg));
      add(sca::embed_schedule(static_solution().schedule, n_slots, ch, ehs, cfg));
      if (n_slots >= ch.n_ers) add(sca::embed_schedule(tdma_solution().schedule, n_slots, ch, ehs, cfg));
    }
    std::optional<sca::Solution> best;
    std::string first_error;
    for (const auto& o : starts) {
      try {
        auto sol = sca::solve_dynamic(ch, ehs, cfg, n_slots, o);
        if (!best || sol.e > best->e) best = std::move(sol);
      } catch (const std::exception& ex) {
        if (first_error.empty()) first_error = ex.what();
      }
    }
    if (!best) throw std::runtime_error(first_error);
    return *best;
  }
};

inline RunRecord base_record(const Context& c, Scheme s, int j) {
  RunRecord r;
  r.scheme = to_string(s);
  r.k = c.cfg.n_ers;
  r.j = j;
  r.seed = c.seed;
  r.channel_hash = c.hash;
  return r;
}

inline std::string error_status(const std::exception& ex) { return std::string("error: ") + ex.what(); }

/// Records for every scheme except `dynamic`, whose pattern count depends on the sweep.
/// `j_override` replaces the natural J column (used by j-grid sweeps).
inline std::vector<RunRecord> fixed_schemes(Context& c, std::optional<int> j_override) {
  std::vector<RunRecord> out;
  auto j_of = [&](int natural) { return j_override ? *j_override : natural; };
  for (Scheme s : c.sc.schemes) {
    if (s == Scheme::dynamic) continue;
    const int natural = s == Scheme::tdma ? c.cfg.n_ers : 1;
    RunRecord r = base_record(c, s, j_of(natural));
    try {
      switch (s) {
        case Scheme::upper_bound: {
          const auto& u = c.upper_bound();
          r.e_joules = u.e_upper;
          r.total_energy_joules = sdr::lifted_total_energy(c.ch, c.ehs, c.cfg, u.theta_lift);
          r.rank = u.rank_estimate;
          r.iterations = u.bisection_iterations;
          r.wall_ms = c.sdr_ms;
          break;
        }
        case Scheme::static_gr: {
          const auto& u = c.upper_bound();
          Stopwatch w(c.sc.measure_wall_time);
          const auto gr = sdr::gaussian_randomization(u, c.ch, c.ehs, c.cfg, c.cfg.gr_samples, stream_seed(c.seed, 1));
          fill(r, sca::audit(single_slot(gr.theta, c.cfg), c.ch, c.ehs, c.cfg));
          r.rank = u.rank_estimate;
          r.iterations = c.cfg.gr_samples;
          r.wall_ms = c.sdr_ms + w.ms();
          break;
        }
        case Scheme::static_sca:
          fill(r, c.static_solution());
          r.wall_ms = c.static_sca_ms;
          break;
        case Scheme::tdma:
          fill(r, c.tdma_solution());
          r.wall_ms = c.tdma_ms;
          break;
        case Scheme::no_irs: {
          Stopwatch w(c.sc.measure_wall_time);
          fill(r, evaluate_no_irs(c.ch, c.ehs, c.cfg));
          r.wall_ms = w.ms();
          break;
        }
        case Scheme::dynamic: break;
      }
    } catch (const std::exception& ex) {
      r.status = error_status(ex);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// One (K, realization) work unit outside j-grid sweeps.
inline std::vector<RunRecord> run_point(const Scenario& sc, const SystemConfig& cfg, std::uint64_t seed) {
  Context c(sc, cfg, seed);
  auto out = fixed_schemes(c, std::nullopt);
  if (wants(sc, Scheme::dynamic)) {
    RunRecord r = base_record(c, Scheme::dynamic, sc.dynamic_j);
    try {
      int j = sc.dynamic_j;
      if (j == 0) {
        r.rank = c.upper_bound().rank_estimate;
        j = std::max(1, *r.rank);
      }
      r.j = j;
      // the shared static / TDMA / SDR solves are charged to their own records
      Stopwatch w(sc.measure_wall_time);
      fill(r, c.dynamic(j));
      r.wall_ms = w.ms();
    } catch (const std::exception& ex) {
      r.status = error_status(ex);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// One realization of a j-grid sweep: J values are visited in increasing order and
/// each dynamic run is also warm-started from the previous J's schedule.
inline std::vector<RunRecord> run_j_chain(const Scenario& sc, std::uint64_t seed) {
  Context c(sc, sc.config, seed);
  std::vector<int> grid = sc.grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<RunRecord> out;
  std::optional<sca::Schedule> previous;
  for (int j : grid) {
    auto fixed = fixed_schemes(c, j);
    out.insert(out.end(), fixed.begin(), fixed.end());
    if (!wants(sc, Scheme::dynamic)) continue;
    RunRecord r = base_record(c, Scheme::dynamic, j);
    try {
      Stopwatch w(sc.measure_wall_time);
      auto sol = c.dynamic(j, previous);
      fill(r, sol);
      r.wall_ms = w.ms();
      previous = sol.schedule;
    } catch (const std::exception& ex) {
      r.status = error_status(ex);
    }
    out.push_back(std::move(r));
  }
  return out;
}

template <class Task>
void parallel_for(int n_tasks, int threads, Task&& task) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int n = std::min(n_tasks, threads > 0 ? threads : hw);
  if (n <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n_tasks; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

inline int scheme_order(const std::string& name) {
  const auto& all = all_schemes();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (name == to_string(all[i])) return static_cast<int>(i);
  return static_cast<int>(all.size());
}

}  // namespace detail

inline void sort_records(std::vector<RunRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::make_tuple(a.k, a.j, a.seed, detail::scheme_order(a.scheme)) <
           std::make_tuple(b.k, b.j, b.seed, detail::scheme_order(b.scheme));
  });
}

/// Runs every requested scheme on shared channel draws.  Realization i uses seed
/// realization_seed(master_seed, i) at every grid point, with ER positions drawn
/// afresh from that seed.
inline std::vector<RunRecord> run_scenario(const Scenario& sc) {
  sc.validate();
  std::vector<std::vector<RunRecord>> parts;
  if (sc.sweep == Sweep::j_grid) {
    parts.resize(static_cast<std::size_t>(sc.n_realizations));
    detail::parallel_for(sc.n_realizations, sc.threads, [&](int i) {
      parts[static_cast<std::size_t>(i)] =
          detail::run_j_chain(sc, realization_seed(sc.master_seed, static_cast<std::uint64_t>(i)));
    });
  } else {
    const std::vector<int> ks = sc.sweep == Sweep::k_grid ? sc.grid : std::vector<int>{sc.config.n_ers};
    const int n_tasks = static_cast<int>(ks.size()) * sc.n_realizations;
    parts.resize(static_cast<std::size_t>(n_tasks));
    detail::parallel_for(n_tasks, sc.threads, [&](int t) {
      SystemConfig cfg = sc.config;
      cfg.n_ers = ks[static_cast<std::size_t>(t / sc.n_realizations)];
      if (static_cast<int>(cfg.fairness_weights.size()) != cfg.n_ers) cfg.fairness_weights.clear();
      if (cfg.circuits.size() > 1 && static_cast<int>(cfg.circuits.size()) != cfg.n_ers) cfg.circuits.resize(1);
      const auto seed = realization_seed(sc.master_seed, static_cast<std::uint64_t>(t % sc.n_realizations));
      parts[static_cast<std::size_t>(t)] = detail::run_point(sc, cfg, seed);
    });
  }
  std::vector<RunRecord> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  sort_records(out);
  return out;
}

/// Records of realization `index` alone (seed realization_seed(master_seed, index)).
/// k-grid scenarios use the configured K; j-grid scenarios visit the whole J chain.
inline std::vector<RunRecord> run_realization(const Scenario& sc, std::uint64_t index) {
  sc.validate();
  const auto seed = realization_seed(sc.master_seed, index);
  auto out = sc.sweep == Sweep::j_grid ? detail::run_j_chain(sc, seed) : detail::run_point(sc, sc.config, seed);
  sort_records(out);
  return out;
}

// ---------------------------------------------------------------------------
// Rank analysis

struct SpectrumRow {
  int k = 0;
  std::uint64_t seed = 0;
  int index = 0;            // 1-based, descending eigenvalues
  double eigenvalue = 0.0;  // normalized by the largest
  bool operator==(const SpectrumRow&) const = default;
};

struct RankAnalysis {
  std::vector<RunRecord> records;  // upper-bound records carrying the rank estimate
  std::vector<SpectrumRow> spectra;
};

inline RankAnalysis rank_analysis(const Scenario& sc) {
  Scenario s = sc;
  s.schemes = {Scheme::upper_bound};
  s.validate();
  const std::vector<int> ks = s.sweep == Sweep::k_grid ? s.grid : std::vector<int>{s.config.n_ers};
  const int n_tasks = static_cast<int>(ks.size()) * s.n_realizations;
  std::vector<RankAnalysis> parts(static_cast<std::size_t>(n_tasks));
  detail::parallel_for(n_tasks, s.threads, [&](int t) {
    SystemConfig cfg = s.config;
    cfg.n_ers = ks[static_cast<std::size_t>(t / s.n_realizations)];
    if (static_cast<int>(cfg.fairness_weights.size()) != cfg.n_ers) cfg.fairness_weights.clear();
    if (cfg.circuits.size() > 1 && static_cast<int>(cfg.circuits.size()) != cfg.n_ers) cfg.circuits.resize(1);
    const auto seed = realization_seed(s.master_seed, static_cast<std::uint64_t>(t % s.n_realizations));
    detail::Context c(s, cfg, seed);
    auto& part = parts[static_cast<std::size_t>(t)];
    part.records = detail::fixed_schemes(c, std::nullopt);
    if (!c.sdr) return;
    const VectorXd ev = sdr::clean_spectrum(c.sdr->theta_lift);
    const double top = ev.size() > 0 && ev(0) > 0.0 ? ev(0) : 1.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      part.spectra.push_back({cfg.n_ers, seed, static_cast<int>(i) + 1, ev(i) / top});
  });
  RankAnalysis out;
  for (auto& p : parts) {
    out.records.insert(out.records.end(), p.records.begin(), p.records.end());
    out.spectra.insert(out.spectra.end(), p.spectra.begin(), p.spectra.end());
  }
  sort_records(out.records);
  std::stable_sort(out.spectra.begin(), out.spectra.end(), [](const SpectrumRow& a, const SpectrumRow& b) {
    return std::tie(a.k, a.seed, a.index) < std::tie(b.k, b.seed, b.index);
  });
  return out;
}

// ---------------------------------------------------------------------------
// CSV / JSON

inline constexpr const char* kCsvHeader = "scheme,k,j,seed,e_joules,total_energy_joules,rank,iterations,wall_ms,status";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << csv_field(r.scheme) << ',' << r.k << ',' << r.j << ',' << r.seed << ',' << format_double(r.e_joules) << ','
       << format_double(r.total_energy_joules) << ',' << (r.rank ? std::to_string(*r.rank) : std::string()) << ','
       << r.iterations << ',' << format_double(r.wall_ms) << ',' << csv_field(r.status) << '\n';
  }
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote in CSV line");
  return fields;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
  std::istringstream in(s);
  T v{};
  in >> v;
  if (!in || in.peek() != std::char_traits<char>::eof())
    throw std::invalid_argument(std::string("bad ") + what + " field: '" + s + "'");
  return v;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("bad floating-point field: '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("CSV header mismatch");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    // a quoted status may span lines
    while (std::count(line.begin(), line.end(), '"') % 2 == 1) {
      std::string more;
      if (!std::getline(in, more)) break;
      line += '\n' + more;
    }
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 10) throw std::invalid_argument("CSV row has " + std::to_string(f.size()) + " fields");
    RunRecord r;
    r.scheme = f[0];
    r.k = detail::parse_number<int>(f[1], "k");
    r.j = detail::parse_number<int>(f[2], "j");
    r.seed = detail::parse_number<std::uint64_t>(f[3], "seed");
    r.e_joules = detail::parse_double(f[4]);
    r.total_energy_joules = detail::parse_double(f[5]);
    if (!f[6].empty()) r.rank = detail::parse_number<int>(f[6], "rank");
    r.iterations = detail::parse_number<int>(f[7], "iterations");
    r.wall_ms = detail::parse_double(f[8]);
    r.status = f[9];
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RunRecord> load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "k,seed,index,eigenvalue_normalized\n";
  for (const auto& r : rows) os << r.k << ',' << r.seed << ',' << r.index << ',' << format_double(r.eigenvalue) << '\n';
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j{{"scheme", r.scheme},
                   {"k", r.k},
                   {"j", r.j},
                   {"seed", r.seed},
                   {"e_joules", r.e_joules},
                   {"total_energy_joules", r.total_energy_joules},
                   {"rank", r.rank ? nlohmann::json(*r.rank) : nlohmann::json(nullptr)},
                   {"iterations", r.iterations},
                   {"wall_ms", r.wall_ms},
                   {"status", r.status},
                   {"channel_hash", r.channel_hash}};
  return j;
}

inline nlohmann::json scenario_metadata(const Scenario& sc) {
  nlohmann::json schemes = nlohmann::json::array();
  for (Scheme s : sc.schemes) schemes.push_back(to_string(s));
  return {{"config", irswet::to_json(sc.config)},
          {"schemes", schemes},
          {"sweep", to_string(sc.sweep)},
          {"grid", sc.grid},
          {"n_realizations", sc.n_realizations},
          {"master_seed", sc.master_seed},
          {"dynamic_j", sc.dynamic_j == 0 ? nlohmann::json("rank") : nlohmann::json(sc.dynamic_j)},
          {"dynamic_starts", {sca::to_string(sc.init), "sdr-eigenvectors", "embedded-static-sca", "embedded-tdma"}},
          {"er_geometry", "redrawn per realization"},
          {"measure_wall_time", sc.measure_wall_time}};
}

inline nlohmann::json records_json(const Scenario& sc, const std::vector<RunRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return {{"metadata", scenario_metadata(sc)}, {"records", arr}};
}

inline void emit_json(const Scenario& sc, const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << records_json(sc, records).dump(2) << '\n';
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// Scenario files

/// Reads the scenario keys of `j` (system keys are handled by irswet::apply_json).
inline void apply_scenario_json(Scenario& sc, const nlohmann::json& j) {
  irswet::apply_json(sc.config, j);
  if (j.contains("schemes")) {
    sc.schemes.clear();
    for (const auto& s : j.at("schemes")) sc.schemes.push_back(parse_scheme(s.get<std::string>()));
  }
  if (j.contains("sweep")) sc.sweep = parse_sweep(j.at("sweep").get<std::string>());
  if (j.contains("grid")) sc.grid = j.at("grid").get<std::vector<int>>();
  if (j.contains("n_realizations")) sc.n_realizations = j.at("n_realizations").get<int>();
  if (j.contains("master_seed")) sc.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("dynamic_j")) {
    const auto& v = j.at("dynamic_j");
    sc.dynamic_j = v.is_string() && v.get<std::string>() == "rank" ? 0 : v.get<int>();
  }
  if (j.contains("init")) sc.init = sca::parse_init_strategy(j.at("init").get<std::string>());
  if (j.contains("measure_wall_time")) sc.measure_wall_time = j.at("measure_wall_time").get<bool>();
  if (j.contains("threads")) sc.threads = j.at("threads").get<int>();
}

inline Scenario load_scenario(const std::string& path) {
  Scenario sc;
  apply_scenario_json(sc, read_json_file(path));
  return sc;
}

}  // namespace irswet::experiments
