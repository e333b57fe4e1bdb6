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

#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace irswet {

using Point3 = std::array<double, 3>;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Sigmoid RF-to-DC circuit constants of one energy receiver.
struct HarvesterCircuit {
  double a = 150.0;    // 1/W
  double b = 0.014;    // W
  double m = 0.024;    // W
};

struct SystemConfig {
  int n_elements = 100;
  int n_ers = 4;
  Point3 et_position{0.0, 0.0, 0.0};
  Point3 irs_position{30.0, 0.0, 5.0};
  Point3 er_circle_center{30.0, 0.0, 0.0};
  double er_circle_radius = 5.0;
  double pathloss_ref = db_to_linear(-30.0);
  double ref_distance = 1.0;
  double exp_et_irs = 2.2;
  double exp_irs_er = 2.2;
  double exp_et_er = 3.6;
  double rician_factor = db_to_linear(3.0);
  double et_gain = db_to_linear(10.0);
  double er_gain = db_to_linear(3.0);
  double total_energy = 10.0;
  double max_power = dbm_to_watts(46.0);
  double horizon = 1.0;
  std::vector<double> fairness_weights;  // empty means uniform 1/K
  double sca_tol = 1e-3;
  int sca_max_iterations = 100;
  double rank_threshold = 0.02;
  int gr_samples = 1000;
  std::vector<HarvesterCircuit> circuits;  // empty or size 1 means homogeneous

  double weight(int k) const {
    return fairness_weights.empty() ? 1.0 / n_ers : fairness_weights[static_cast<std::size_t>(k)];
  }

  std::vector<double> weights() const {
    std::vector<double> w(static_cast<std::size_t>(n_ers));
    for (int k = 0; k < n_ers; ++k) w[static_cast<std::size_t>(k)] = weight(k);
    return w;
  }

  HarvesterCircuit circuit(int k) const {
    if (circuits.empty()) return {};
    if (circuits.size() == 1) return circuits.front();
    return circuits[static_cast<std::size_t>(k)];
  }

  /// Static transmit power: the whole budget spread over the block, capped.
  double static_power() const { return std::min(total_energy / horizon, max_power); }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("SystemConfig: " + what); };
    if (n_elements < 1) fail("n_elements must be positive");
    if (n_ers < 1) fail("n_ers must be positive");
    if (!(er_circle_radius > 0.0)) fail("er_circle_radius must be positive");
    if (!(pathloss_ref > 0.0)) fail("pathloss_ref must be positive");
    if (!(ref_distance > 0.0)) fail("ref_distance must be positive");
    if (!(exp_et_irs > 0.0) || !(exp_irs_er > 0.0) || !(exp_et_er > 0.0)) fail("path-loss exponents must be positive");
    if (!(rician_factor > 0.0)) fail("rician_factor must be positive");
    if (!(et_gain > 0.0) || !(er_gain > 0.0)) fail("antenna gains must be positive");
    if (!(total_energy > 0.0)) fail("total_energy must be positive");
    if (!(max_power > 0.0)) fail("max_power must be positive");
    if (!(horizon > 0.0)) fail("horizon must be positive");
    if (!(sca_tol > 0.0)) fail("sca_tol must be positive");
    if (sca_max_iterations < 1) fail("sca_max_iterations must be positive");
    if (!(rank_threshold > 0.0 && rank_threshold < 1.0)) fail("rank_threshold must lie in (0, 1)");
    if (gr_samples < 1) fail("gr_samples must be positive");
    if (distance(et_position, irs_position) <= 0.0) fail("ET and IRS coincide");
    if (!fairness_weights.empty()) {
      if (static_cast<int>(fairness_weights.size()) != n_ers) fail("fairness_weights must have n_ers entries");
      double sum = 0.0;
      for (double w : fairness_weights) {
        if (!(w >= 0.0)) fail("fairness weights must be nonnegative");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-12) fail("fairness weights must sum to 1");
    }
    if (circuits.size() > 1 && static_cast<int>(circuits.size()) != n_ers) fail("circuits must have 1 or n_ers entries");
    for (const auto& c : circuits) {
      if (!(c.a > 0.0) || !(c.b > 0.0) || !(c.m > 0.0)) fail("harvester constants must be positive");
    }
  }
};

namespace detail {

inline Point3 read_point(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument(std::string("config key ") + key + " needs 3 coordinates");
  return {v[0], v[1], v[2]};
}

inline std::vector<double> scalar_or_list(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return {j.get<double>()};
}

}  // namespace detail

/// Applies the SystemConfig keys present in `j` on top of `cfg`.  Unknown keys are ignored
/// here so scenario files can share the same document.
inline void apply_json(SystemConfig& cfg, const nlohmann::json& j) {
  using detail::read_point;
  if (j.contains("n_elements")) cfg.n_elements = j.at("n_elements").get<int>();
  if (j.contains("n_ers")) cfg.n_ers = j.at("n_ers").get<int>();
  if (j.contains("et_position_m")) cfg.et_position = read_point(j, "et_position_m");
  if (j.contains("irs_position_m")) cfg.irs_position = read_point(j, "irs_position_m");
  if (j.contains("er_circle_center_m")) cfg.er_circle_center = read_point(j, "er_circle_center_m");
  if (j.contains("er_circle_radius_m")) cfg.er_circle_radius = j.at("er_circle_radius_m").get<double>();
  if (j.contains("pathloss_ref_db")) cfg.pathloss_ref = db_to_linear(j.at("pathloss_ref_db").get<double>());
  if (j.contains("ref_distance_m")) cfg.ref_distance = j.at("ref_distance_m").get<double>();
  if (j.contains("exp_et_irs")) cfg.exp_et_irs = j.at("exp_et_irs").get<double>();
  if (j.contains("exp_irs_er")) cfg.exp_irs_er = j.at("exp_irs_er").get<double>();
  if (j.contains("exp_et_er")) cfg.exp_et_er = j.at("exp_et_er").get<double>();
  if (j.contains("rician_factor_db")) cfg.rician_factor = db_to_linear(j.at("rician_factor_db").get<double>());
  if (j.contains("et_gain_dbi")) cfg.et_gain = db_to_linear(j.at("et_gain_dbi").get<double>());
  if (j.contains("er_gain_dbi")) cfg.er_gain = db_to_linear(j.at("er_gain_dbi").get<double>());
  if (j.contains("total_energy_j")) cfg.total_energy = j.at("total_energy_j").get<double>();
  if (j.contains("max_power_dbm")) cfg.max_power = dbm_to_watts(j.at("max_power_dbm").get<double>());
  if (j.contains("horizon_s")) cfg.horizon = j.at("horizon_s").get<double>();
  if (j.contains("fairness_weights")) {
    cfg.fairness_weights = j.at("fairness_weights").is_null() ? std::vector<double>{}
                                                              : j.at("fairness_weights").get<std::vector<double>>();
  }
  if (j.contains("sca_tol")) cfg.sca_tol = j.at("sca_tol").get<double>();
  if (j.contains("sca_max_iterations")) cfg.sca_max_iterations = j.at("sca_max_iterations").get<int>();
  if (j.contains("rank_threshold")) cfg.rank_threshold = j.at("rank_threshold").get<double>();
  if (j.contains("gr_samples")) cfg.gr_samples = j.at("gr_samples").get<int>();
  if (j.contains("eh_a") || j.contains("eh_b") || j.contains("eh_m")) {
    const HarvesterCircuit def;
    const auto a = j.contains("eh_a") ? detail::scalar_or_list(j.at("eh_a")) : std::vector<double>{def.a};
    const auto b = j.contains("eh_b") ? detail::scalar_or_list(j.at("eh_b")) : std::vector<double>{def.b};
    const auto m = j.contains("eh_m") ? detail::scalar_or_list(j.at("eh_m")) : std::vector<double>{def.m};
    const std::size_t n = std::max({a.size(), b.size(), m.size()});
    auto pick = [n](const std::vector<double>& v, std::size_t i) {
      if (v.size() != 1 && v.size() != n) throw std::invalid_argument("eh_a/eh_b/eh_m lists must agree in length");
      return v.size() == 1 ? v[0] : v[i];
    };
    cfg.circuits.clear();
    for (std::size_t i = 0; i < n; ++i) cfg.circuits.push_back({pick(a, i), pick(b, i), pick(m, i)});
  }
}

inline nlohmann::json to_json(const SystemConfig& cfg) {
  nlohmann::json j;
  j["n_elements"] = cfg.n_elements;
  j["n_ers"] = cfg.n_ers;
  j["et_position_m"] = cfg.et_position;
  j["irs_position_m"] = cfg.irs_position;
  j["er_circle_center_m"] = cfg.er_circle_center;
  j["er_circle_radius_m"] = cfg.er_circle_radius;
  j["pathloss_ref_db"] = linear_to_db(cfg.pathloss_ref);
  j["ref_distance_m"] = cfg.ref_distance;
  j["exp_et_irs"] = cfg.exp_et_irs;
  j["exp_irs_er"] = cfg.exp_irs_er;
  j["exp_et_er"] = cfg.exp_et_er;
  j["rician_factor_db"] = linear_to_db(cfg.rician_factor);
  j["et_gain_dbi"] = linear_to_db(cfg.et_gain);
  j["er_gain_dbi"] = linear_to_db(cfg.er_gain);
  j["total_energy_j"] = cfg.total_energy;
  j["max_power_dbm"] = linear_to_db(cfg.max_power) + 30.0;
  j["horizon_s"] = cfg.horizon;
  j["fairness_weights"] = cfg.fairness_weights.empty() ? nlohmann::json(nullptr) : nlohmann::json(cfg.fairness_weights);
  j["sca_tol"] = cfg.sca_tol;
  j["sca_max_iterations"] = cfg.sca_max_iterations;
  j["rank_threshold"] = cfg.rank_threshold;
  j["gr_samples"] = cfg.gr_samples;
  std::vector<double> a, b, m;
  for (int k = 0; k < (cfg.circuits.size() > 1 ? cfg.n_ers : 1); ++k) {
    const auto c = cfg.circuit(k);
    a.push_back(c.a);
    b.push_back(c.b);
    m.push_back(c.m);
  }
  j["eh_a"] = a.size() == 1 ? nlohmann::json(a[0]) : nlohmann::json(a);
  j["eh_b"] = b.size() == 1 ? nlohmann::json(b[0]) : nlohmann::json(b);
  j["eh_m"] = m.size() == 1 ? nlohmann::json(m[0]) : nlohmann::json(m);
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
}

inline SystemConfig load_system_config(const std::string& path) {
  SystemConfig cfg;
  apply_json(cfg, read_json_file(path));
  cfg.validate();
  return cfg;
}

}  // namespace irswet
