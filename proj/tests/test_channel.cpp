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

#include <catch_amalgamated.hpp>

#include "irswet/channel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace irswet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemConfig small_config(int n, int k) {
  SystemConfig cfg;
  cfg.n_elements = n;
  cfg.n_ers = k;
  return cfg;
}

VectorXcd random_phases(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * std::acos(-1.0));
  VectorXcd t(n);
  for (int i = 0; i < n; ++i) t(i) = std::polar(1.0, u(rng));
  return t;
}

}  // namespace

TEST_CASE("unit conversions", "[config]") {
  CHECK_THAT(dbm_to_watts(46.0), WithinAbs(39.8107, 5e-5));
  CHECK(dbm_to_watts(46.0) == std::pow(10.0, (46.0 - 30.0) / 10.0));
  CHECK(db_to_linear(-30.0) == std::pow(10.0, -3.0));
  CHECK_THAT(db_to_linear(3.0), WithinRel(1.9952623149688795, 1e-15));
}

TEST_CASE("config validation", "[config]") {
  SystemConfig cfg;
  REQUIRE_NOTHROW(cfg.validate());
  CHECK_THAT(cfg.weight(0), WithinRel(1.0 / cfg.n_ers, 1e-15));

  auto bad = cfg;
  bad.horizon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.fairness_weights = {0.5, 0.5, 0.5, -0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.fairness_weights = {0.25, 0.25, 0.25, 0.3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.fairness_weights = {0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.rank_threshold = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_power = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config file round trip", "[config]") {
  const auto path = std::filesystem::temp_directory_path() / "irswet_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({ "n_elements": 8, "n_ers": 2, "max_power_dbm": 40, "fairness_weights": [0.25, 0.75],
               "eh_a": [100, 120], "eh_b": 0.01, "rician_factor_db": 0 })";
  }
  const auto cfg = load_system_config(path.string());
  CHECK(cfg.n_elements == 8);
  CHECK_THAT(cfg.max_power, WithinRel(10.0, 1e-14));
  CHECK(cfg.weight(1) == 0.75);
  CHECK(cfg.circuit(1).a == 120);
  CHECK(cfg.circuit(1).b == 0.01);
  CHECK(cfg.circuit(1).m == 0.024);
  CHECK_THAT(cfg.rician_factor, WithinRel(1.0, 1e-15));

  SystemConfig back;
  apply_json(back, to_json(cfg));
  CHECK(back.n_ers == 2);
  CHECK_THAT(back.max_power, WithinRel(cfg.max_power, 1e-14));
  CHECK(back.circuit(0).a == 100);
  std::filesystem::remove(path);
  CHECK_THROWS(load_system_config(path.string()));
}

TEST_CASE("path loss", "[channel]") {
  CHECK(path_loss(0.001, 1.0, 1.0, 2.2) == 0.001);
  const long double d = std::sqrt(925.0L);
  const double oracle = static_cast<double>(0.001L * std::pow(d, -2.2L));
  CHECK_THAT(path_loss(db_to_linear(-30), 1.0, distance({0, 0, 0}, {30, 0, 5}), 2.2), WithinRel(oracle, 1e-12));
  CHECK_THAT(oracle, WithinRel(5.46e-7, 1e-3));
}

TEST_CASE("sampled channel structure", "[channel]") {
  const auto cfg = small_config(16, 5);
  const auto ch = sample_channels(cfg, 123);
  REQUIRE(ch.q_bar.rows() == 5);
  REQUIRE(ch.q_bar.cols() == 17);
  for (const auto& pos : ch.er_positions) {
    CHECK(pos[2] == 0.0);
    CHECK(std::hypot(pos[0] - 30.0, pos[1]) <= 5.0);
  }
  for (int k = 0; k < 5; ++k) {
    const auto& Q = ch.q_lift[static_cast<std::size_t>(k)];
    CHECK((Q - Q.adjoint()).norm() <= 1e-15 * Q.norm());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Q);
    const auto ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    CHECK(top > 0.0);
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) CHECK(std::abs(ev(i)) < 1e-10 * top);
    CHECK_THAT(Q.trace().real(), WithinRel(ch.q_bar.row(k).squaredNorm(), 1e-10));
    for (int n = 0; n < 16; ++n) CHECK(ch.q(k, n) == std::conj(ch.g(n)) * ch.h_r(k, n));
  }
}

TEST_CASE("sampling is deterministic", "[channel]") {
  const auto cfg = small_config(8, 3);
  const auto a = sample_channels(cfg, 99);
  const auto b = sample_channels(cfg, 99);
  const auto c = sample_channels(cfg, 100);
  CHECK(a.q_bar == b.q_bar);
  CHECK(a.g == b.g);
  CHECK(a.h_d == b.h_d);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(realization_seed(1, 0) == realization_seed(1, 0));
  CHECK(realization_seed(1, 0) != realization_seed(1, 1));
  CHECK(realization_seed(1, 0) != realization_seed(2, 0));
}

TEST_CASE("received power: direct and lifted forms agree", "[channel][property]") {
  const auto cfg = small_config(12, 4);
  const auto ch = sample_channels(cfg, 5);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto theta = random_phases(12, rng);
    for (int k = 0; k < 4; ++k) {
      const double p = received_rf_power(ch, k, theta, 10.0);
      CHECK_THAT(received_rf_power_lifted(ch, k, theta, 10.0), WithinRel(p, 1e-10));
      CHECK(p >= 0.0);
      CHECK(p <= 10.0 * aligned_gain(ch, k) * (1 + 1e-12));
    }
  }
}

TEST_CASE("received power edge cases", "[channel]") {
  const auto cfg = small_config(6, 2);
  auto ch = sample_channels(cfg, 17);
  std::mt19937_64 rng(3);
  const auto zero = make_realization(VectorXcd::Zero(6), ch.h_r, ch.h_d);
  for (int trial = 0; trial < 10; ++trial) {
    const auto theta = random_phases(6, rng);
    CHECK_THAT(received_rf_power(zero, 1, theta, 2.0), WithinRel(2.0 * std::norm(ch.h_d(1)), 1e-14));
  }
  VectorXcd matched(6);
  for (int n = 0; n < 6; ++n) matched(n) = std::polar(1.0, std::arg(ch.q(0, n)) - std::arg(ch.h_d(0)));
  CHECK_THAT(received_rf_power(ch, 0, matched, 3.0), WithinRel(3.0 * aligned_gain(ch, 0), 1e-10));

  VectorXcd bad = matched;
  bad(2) *= 1.01;
  CHECK_THROWS_AS(received_rf_power(ch, 0, bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(received_rf_power(ch, 0, matched, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(received_rf_power(ch, 2, matched, 1.0), std::out_of_range);
}

TEST_CASE("direct-link power matches path loss on average", "[channel][property]") {
  SystemConfig cfg = small_config(1, 1);
  cfg.er_circle_radius = 1e-9;  // pin the ER so the large-scale gain is fixed
  const double expected = path_loss(cfg.pathloss_ref, cfg.ref_distance, distance(cfg.et_position, cfg.er_circle_center),
                                    cfg.exp_et_er) *
                          cfg.et_gain * cfg.er_gain;
  double acc = 0.0;
  const int runs = 6000;
  for (int r = 0; r < runs; ++r) acc += std::norm(sample_channels(cfg, realization_seed(42, r)).h_d(0));
  CHECK_THAT(acc / runs, WithinRel(expected, 0.05));
}
