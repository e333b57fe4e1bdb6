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

#include "irswet/tdma.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace irswet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemConfig config(int n, int k) {
  SystemConfig cfg;
  cfg.n_elements = n;
  cfg.n_ers = k;
  return cfg;
}

VectorXcd random_phases(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  VectorXcd t(n);
  for (int i = 0; i < n; ++i) t(i) = std::polar(1.0, u(rng));
  return t;
}

// |h_d^H + sum_n q_n^H theta_n| from the raw channels.
double amplitude(const ChannelRealization& ch, int k, const VectorXcd& theta) {
  cplx a = std::conj(ch.h_d(k));
  for (int n = 0; n < ch.n_elements; ++n) a += std::conj(ch.q(k, n)) * theta(n);
  return std::abs(a);
}

double sigmoid_dc(const eh::EhParams& p, double rf) {
  const long double eab = std::exp(static_cast<long double>(p.a) * p.b);
  return static_cast<double>(p.m * (1 + eab) / eab / (1 + std::exp(-p.a * (rf - p.b))) - p.m / eab);
}

}  // namespace

TEST_CASE("matched phase hand examples", "[tdma]") {
  // q^H = (e^{j pi/4}, 2 e^{-j pi/2}), h_d^H = 3 e^{j pi/3}
  VectorXcd g = VectorXcd::Ones(2);
  MatrixXcd hr(1, 2);
  hr << std::conj(std::polar(1.0, std::numbers::pi / 4)), std::conj(std::polar(2.0, -std::numbers::pi / 2));
  VectorXcd hd(1);
  hd << std::conj(std::polar(3.0, std::numbers::pi / 3));
  const auto ch = make_realization(g, hr, hd);
  CHECK_THAT(amplitude(ch, 0, tdma::matched_phase(ch, 0)), WithinRel(6.0, 1e-12));

  MatrixXcd pos(1, 3);
  pos << 0.5, 1.5, 2.0;
  VectorXcd hd_pos(1);
  hd_pos << 0.7;
  const auto aligned = make_realization(VectorXcd::Ones(3), pos, hd_pos);
  CHECK((tdma::matched_phase(aligned, 0) - VectorXcd::Ones(3)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(tdma::matched_phase(aligned, 1), std::out_of_range);
}

TEST_CASE("matched phase beats random search", "[tdma]") {
  const auto cfg = config(8, 3);
  const auto ch = sample_channels(cfg, 7);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 3; ++k) {
    const VectorXcd best = tdma::matched_phase(ch, k);
    const double closed = received_rf_power(ch, k, best, 1.0);
    CHECK_THAT(closed, WithinRel(aligned_gain(ch, k), 1e-10));
    const int samples = k == 0 ? 100000 : 10000;
    double found = 0.0;
    for (int i = 0; i < samples; ++i) found = std::max(found, received_rf_power(ch, k, random_phases(8, rng), 1.0));
    CHECK(found <= closed);
  }
}

TEST_CASE("single ER matches a power-duration grid", "[tdma]") {
  const auto cfg = config(16, 1);
  const auto ehs = eh::harvesters(cfg);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto ch = sample_channels(cfg, realization_seed(9, r));
    const double gain = aligned_gain(ch, 0);
    double grid = 0.0;
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j) {
        const double p = cfg.max_power * i / 200.0, tau = cfg.horizon * j / 200.0;
        if (p * tau > cfg.total_energy) continue;
        grid = std::max(grid, tau * sigmoid_dc(ehs[0], p * gain));
      }
    const auto sol = tdma::solve_tdma(ch, ehs, cfg);
    REQUIRE(sol.schedule.n_slots == 1);
    CHECK_THAT(sol.e, WithinRel(grid, 1e-2));

    // with the energy budget active the problem is one-dimensional in tau
    double line = 0.0;
    for (int j = 1; j <= 100000; ++j) {
      const double tau = cfg.horizon * j / 100000.0;
      line = std::max(line, tau * sigmoid_dc(ehs[0], std::min(cfg.max_power, cfg.total_energy / tau) * gain));
    }
    CHECK_THAT(sol.e, WithinRel(line, 1e-3));
  }
}

TEST_CASE("symmetric two-ER instance splits evenly", "[tdma]") {
  const auto cfg = config(6, 2);
  const auto ehs = eh::harvesters(cfg);
  const auto base = sample_channels(cfg, 10);
  MatrixXcd hr(2, 6);
  hr.row(0) = base.h_r.row(0);
  hr.row(1) = base.h_r.row(0);
  VectorXcd hd(2);
  hd << base.h_d(0), base.h_d(0);
  const auto ch = make_realization(base.g, hr, hd);
  const auto sol = tdma::solve_tdma(ch, ehs, cfg);
  REQUIRE(sol.schedule.n_slots == 2);
  CHECK_THAT(sol.schedule.durations[0], WithinRel(sol.schedule.durations[1], 1e-4));
  CHECK_THAT(sol.per_er_energy(0), WithinRel(sol.per_er_energy(1), 1e-4));
}

TEST_CASE("TDMA keeps phases, harvests across slots and stays feasible", "[tdma]") {
  const auto cfg = config(8, 4);
  const auto ehs = eh::harvesters(cfg);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto ch = sample_channels(cfg, realization_seed(11, r));
    const auto start = tdma::tdma_schedule(ch, cfg);
    const auto sol = tdma::solve_tdma(ch, ehs, cfg);
    CHECK(sol.e >= sca::audit(start, ch, ehs, cfg).e * (1.0 - 1e-6));
    for (std::size_t i = 1; i < sol.resource_history.size(); ++i)
      CHECK(sol.resource_history[i] >= sol.resource_history[i - 1] * (1.0 - 1e-6));
    const auto a = sca::audit(sol.schedule, ch, ehs, cfg);
    CHECK(a.violation <= 1e-6);
    // every surviving slot still carries one of the matched patterns
    for (const auto& t : sol.schedule.phases) {
      bool found = false;
      for (int k = 0; k < 4; ++k) found = found || t == tdma::matched_phase(ch, k);
      CHECK(found);
    }
    // every ER is credited with all slots, not only its own
    for (int k = 0; k < 4; ++k) {
      double own = 0.0, all = 0.0;
      for (std::size_t j = 0; j < sol.schedule.phases.size(); ++j) {
        const double amp = amplitude(ch, k, sol.schedule.phases[j]);
        const double part = sol.schedule.durations[j] * sigmoid_dc(ehs[k], sol.schedule.powers[j] * amp * amp);
        all += part;
        if (sol.schedule.phases[j] == tdma::matched_phase(ch, k)) own += part;
      }
      CHECK_THAT(sol.per_er_energy(k), WithinRel(all, 1e-6));
      if (sol.schedule.n_slots > 1) CHECK(all > own);
    }
  }
}

TEST_CASE("resource-only subproblems drop the phase variables", "[tdma]") {
  for (auto [n, k] : {std::pair{4, 2}, std::pair{8, 3}}) {
    const auto cfg = config(n, k);
    const auto ehs = eh::harvesters(cfg);
    const auto ch = sample_channels(cfg, 12);
    const auto it = sca::initialize(ch, ehs, cfg, k);
    sca::SubproblemOptions opt;
    opt.optimize_phases = false;
    const auto res = sca::solve_sca_subproblem(it, ch, ehs, cfg, opt);
    opt.optimize_phases = true;
    const auto joint = sca::solve_sca_subproblem(it, ch, ehs, cfg, opt);
    const int j = k;
    // e, (P, tau, s) per slot, w per (ER, slot); phases add Re, Im and 1/P per slot
    CHECK(res.variable_count == 1 + 3 * j + k * j);
    CHECK(joint.variable_count == res.variable_count + j * (2 * n + 1));
  }
}
