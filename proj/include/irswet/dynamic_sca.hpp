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

// Dynamic multi-pattern beamforming by successive convex approximation.
//
// Slot j uses pattern theta_j for tau_j seconds at transmit power P_j.  ER k
// harvests sum_j tau_j Phi_k(P_j |q_bar_k^H theta_bar_j|^2) and the program
// maximizes e subject to every ER reaching alpha_k e.  Each SCA step solves a
// conic model built around the current iterate:
//
//   * tau / (1 + z) is replaced by its tangent plane in (sqrt(tau), z);
//   * P |a|^2 = |a|^2 / (1/P) by its tangent in (theta_bar, 1/P);
//   * -(P - tau)^2 in the energy budget by its tangent in (P, tau);
//   * |theta_n| = 1 is relaxed to |theta_n| <= 1.
//
// Slacks are carried as z_kj = z^r_kj (1 + w_kj) with z^r tight at the
// iterate, which keeps the exponential cone arguments O(1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irswet/channel.hpp"
#include "irswet/conic.hpp"
#include "irswet/eh.hpp"

namespace irswet::sca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Schedule {
  int n_slots = 0;
  std::vector<VectorXcd> phases;
  std::vector<double> durations;
  std::vector<double> powers;
};

struct ScaIterate {
  Schedule schedule;
  MatrixXd slack;  // K x J, z_kj
  double e = 0.0;
  int iteration = 0;
  bool improved = true;
  int variable_count = 0;  // scalar unknowns of the last subproblem
  std::string message;
};

struct Solution {
  double e = 0.0;
  VectorXd per_er_energy;
  Schedule schedule;
  int iterations = 0;
  bool converged = false;
  /// Audited e after each accepted step of the phase-design stage (first entry is the start).
  std::vector<double> history;
  /// Audited e after each accepted step of the resource-only stage that follows projection.
  std::vector<double> resource_history;
  std::string status = "ok";
};

enum class InitStrategy { tdma_warm, random };

inline const char* to_string(InitStrategy s) { return s == InitStrategy::tdma_warm ? "tdma-warm" : "random"; }

inline InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "tdma-warm") return InitStrategy::tdma_warm;
  if (s == "random") return InitStrategy::random;
  throw std::invalid_argument("unknown initialization strategy: " + s);
}

// ---------------------------------------------------------------------------
// Surrogates

/// Tangent of tau / (1 + z) in (sqrt(tau), z) at (tau_r, z_r); a global lower bound.
inline double surrogate_f_lb(double z, double tau, double z_r, double tau_r) {
  if (!(z > -1.0) || !(z_r > 0.0) || !(tau >= 0.0) || !(tau_r >= 0.0))
    throw std::invalid_argument("surrogate_f_lb: outside the domain");
  const double s_r = std::sqrt(tau_r);
  const double d = 1.0 + z_r;
  return tau_r / d + 2.0 * s_r / d * (std::sqrt(tau) - s_r) - tau_r / (d * d) * (z - z_r);
}

/// Tangent of p |q_bar^H theta_bar|^2 in (theta_bar, 1/p); a global lower bound.
inline double surrogate_g_lb(const VectorXcd& theta_bar, double p, const VectorXcd& theta_bar_r, double p_r,
                             const MatrixXcd& q_lift) {
  if (!(p > 0.0) || !(p_r > 0.0)) throw std::invalid_argument("surrogate_g_lb: powers must be positive");
  const cplx cross = theta_bar.dot(q_lift * theta_bar_r);  // theta^H Q theta_r
  const double quad_r = theta_bar_r.dot(q_lift * theta_bar_r).real();
  return 2.0 * p_r * cross.real() - p_r * quad_r - p_r * p_r * quad_r * (1.0 / p - 1.0 / p_r);
}

/// Tangent of -(p - tau)^2 at (p_r, tau_r); a global upper bound.
inline double surrogate_eta_ub(double p, double tau, double p_r, double tau_r) {
  const double d_r = p_r - tau_r;
  return -d_r * d_r - 2.0 * d_r * (p - p_r) + 2.0 * d_r * (tau - tau_r);
}

// ---------------------------------------------------------------------------
// Exact model

struct Audit {
  VectorXd energy;          // per ER, joules
  double e = 0.0;           // min_k energy_k / alpha_k over alpha_k > 0
  double energy_used = 0.0;
  double time_used = 0.0;
  double violation = 0.0;   // worst relative violation of the schedule constraints
};

inline Audit audit(const Schedule& s, const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                   const SystemConfig& cfg, bool require_unit_modulus = true) {
  Audit a;
  a.energy = VectorXd::Zero(ch.n_ers);
  for (int j = 0; j < s.n_slots; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const double tau = std::max(0.0, s.durations[js]);
    const double p = std::max(0.0, s.powers[js]);
    a.time_used += s.durations[js];
    a.energy_used += s.durations[js] * s.powers[js];
    a.violation = std::max({a.violation, -s.durations[js] / cfg.horizon, -s.powers[js] / cfg.max_power,
                            (s.powers[js] - cfg.max_power) / cfg.max_power});
    if (require_unit_modulus) {
      for (Eigen::Index n = 0; n < s.phases[js].size(); ++n)
        a.violation = std::max(a.violation, std::abs(std::abs(s.phases[js](n)) - 1.0));
    }
    if (tau == 0.0) continue;
    const VectorXcd tb = lift_phases(s.phases[js]);
    for (int k = 0; k < ch.n_ers; ++k)
      a.energy(k) += tau * eh::dc_power(ehs[static_cast<std::size_t>(k)], p * channel_gain(ch, k, tb));
  }
  a.violation = std::max({a.violation, (a.time_used - cfg.horizon) / cfg.horizon,
                          (a.energy_used - cfg.total_energy) / cfg.total_energy});
  a.e = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ch.n_ers; ++k)
    if (cfg.weight(k) > 0.0) a.e = std::min(a.e, a.energy(k) / cfg.weight(k));
  if (!std::isfinite(a.e)) a.e = 0.0;
  return a;
}

/// Tight slack z_kj = exp(-a_k (rho_kj - b_k)) at the schedule.
inline MatrixXd tight_slack(const Schedule& s, const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs) {
  MatrixXd z(ch.n_ers, s.n_slots);
  for (int j = 0; j < s.n_slots; ++j) {
    const VectorXcd tb = lift_phases(s.phases[static_cast<std::size_t>(j)]);
    for (int k = 0; k < ch.n_ers; ++k) {
      const auto& p = ehs[static_cast<std::size_t>(k)];
      const double rho = s.powers[static_cast<std::size_t>(j)] * channel_gain(ch, k, tb);
      z(k, j) = std::exp(-p.a * (rho - p.b));
    }
  }
  return z;
}

/// Entrywise projection onto the unit circle; zero entries map to phase 0.
inline VectorXcd project_phases(const VectorXcd& theta) {
  VectorXcd out(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double r = std::abs(theta(i));
    out(i) = r > 0.0 ? theta(i) / r : cplx(1.0, 0.0);
  }
  return out;
}

/// arg(h_d,k^H) - arg(q_k,n^H) per element, aligning every path with the direct one.
inline VectorXcd matched_phase(const ChannelRealization& ch, int k) {
  if (k < 0 || k >= ch.n_ers) throw std::out_of_range("matched_phase: ER index");
  VectorXcd theta(ch.n_elements);
  const double ref = std::arg(std::conj(ch.h_d(k)));
  for (int n = 0; n < ch.n_elements; ++n) {
    const cplx qn = ch.q(k, n);
    theta(n) = std::abs(qn) > 0.0 ? std::polar(1.0, ref - std::arg(std::conj(qn))) : cplx(1.0, 0.0);
  }
  return theta;
}

/// ERs ordered by required energy: larger alpha first, ties broken by weaker aligned gain.
inline std::vector<int> neediest_ers(const ChannelRealization& ch, const SystemConfig& cfg) {
  std::vector<int> order(static_cast<std::size_t>(ch.n_ers));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    if (cfg.weight(l) != cfg.weight(r)) return cfg.weight(l) > cfg.weight(r);
    return aligned_gain(ch, l) < aligned_gain(ch, r);
  });
  return order;
}

inline ScaIterate make_iterate(Schedule s, const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                               const SystemConfig& cfg) {
  ScaIterate it;
  it.slack = tight_slack(s, ch, ehs);
  it.e = audit(s, ch, ehs, cfg, false).e;
  it.schedule = std::move(s);
  return it;
}

inline ScaIterate initialize(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                             const SystemConfig& cfg, int n_slots, InitStrategy strategy = InitStrategy::tdma_warm,
                             std::uint64_t seed = 0) {
  if (n_slots < 1) throw std::invalid_argument("initialize: J must be at least 1");
  Schedule s;
  s.n_slots = n_slots;
  s.durations.assign(static_cast<std::size_t>(n_slots), cfg.horizon / n_slots);
  s.powers.assign(static_cast<std::size_t>(n_slots), cfg.static_power());
  if (strategy == InitStrategy::tdma_warm) {
    const auto order = neediest_ers(ch, cfg);
    std::vector<int> chosen;
    if (n_slots <= ch.n_ers) {
      chosen.assign(order.begin(), order.begin() + n_slots);
      std::sort(chosen.begin(), chosen.end());
    } else {
      for (int j = 0; j < n_slots; ++j) chosen.push_back(j % ch.n_ers);
    }
    for (int k : chosen) s.phases.push_back(matched_phase(ch, k));
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::acos(-1.0));
    for (int j = 0; j < n_slots; ++j) {
      VectorXcd t(ch.n_elements);
      for (int n = 0; n < ch.n_elements; ++n) t(n) = std::polar(1.0, u(rng));
      s.phases.push_back(std::move(t));
    }
  }
  return make_iterate(std::move(s), ch, ehs, cfg);
}

// ---------------------------------------------------------------------------
// Subproblem

struct SubproblemOptions {
  bool optimize_phases = true;
  double tol = 1e-8;
};

namespace detail {

struct SlotVars {
  std::vector<conic::Var> re, im;  // empty when phases are frozen
  conic::Var omega{-1}, p, tau, s;
};

struct ExpLink {
  conic::LinExpr x;  // a (rho_r - rho_lb)
  conic::Var w;
  double row_cost;   // coefficient of w in its fairness row
};

}  // namespace detail

/// One SCA step about `it`.  Slots with tau_r = 0 are expanded
/// at zero, where f_lb vanishes, so such slots stay idle.
inline ScaIterate solve_sca_subproblem(const ScaIterate& it, const ChannelRealization& ch,
                                       const std::vector<eh::EhParams>& ehs, const SystemConfig& cfg,
                                       const SubproblemOptions& opt = {}) {
  using conic::LinExpr;
  const Schedule& sr = it.schedule;
  const int jn = sr.n_slots, n = ch.n_elements;
  const double e_scale = std::max(it.e, 1e-300);

  std::vector<int> active_ers;
  for (int k = 0; k < ch.n_ers; ++k)
    if (cfg.weight(k) > 0.0) active_ers.push_back(k);

  conic::ConicProgram prog;
  const auto e_hat = prog.add_scalar("e");
  std::vector<detail::SlotVars> sv(static_cast<std::size_t>(jn));
  for (int j = 0; j < jn; ++j) {
    auto& v = sv[static_cast<std::size_t>(j)];
    const std::string tag = std::to_string(j);
    if (opt.optimize_phases) {
      v.re = prog.add_vector("theta_re" + tag, n);
      v.im = prog.add_vector("theta_im" + tag, n);
      v.omega = prog.add_scalar("omega" + tag);
    }
    v.p = prog.add_scalar("p" + tag);
    v.tau = prog.add_scalar("tau" + tag);
    v.s = prog.add_scalar("s" + tag);
  }

  // w_kj, fairness rows, slack cones
  LinExpr time_used, budget = 4.0 * cfg.total_energy;
  std::vector<LinExpr> rows(active_ers.size());
  std::vector<detail::ExpLink> links;
  std::vector<double> scale(static_cast<std::size_t>(jn), 1.0);
  for (std::size_t i = 0; i < active_ers.size(); ++i) rows[i] = -cfg.weight(active_ers[i]) * LinExpr(e_hat);

  for (int j = 0; j < jn; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const auto& v = sv[js];
    const double p_r = std::max(sr.powers[js], 1e-12 * cfg.max_power);
    const double t_r = std::max(0.0, sr.durations[js]);
    const double s_r = std::sqrt(t_r);
    const VectorXcd tb_r = lift_phases(sr.phases[js]);

    for (std::size_t i = 0; i < active_ers.size(); ++i) {
      if (t_r == 0.0) {
        // f_lb vanishes at tau_r = 0: only the -Y tau term remains
        rows[i] += (-ehs[static_cast<std::size_t>(active_ers[i])].y / e_scale) * LinExpr(v.tau);
        continue;
      }
      const int k = active_ers[i];
      const auto& hp = ehs[static_cast<std::size_t>(k)];
      const cplx a_r = ch.q_bar.row(k).transpose().dot(tb_r);  // q_bar^H theta_bar_r
      const double gain_r = std::norm(a_r);
      const double rho_r = p_r * gain_r;
      const double z_r = std::exp(-hp.a * (rho_r - hp.b));
      const double phi_r = eh::dc_power(hp, rho_r);
      const double beta = phi_r + hp.y;             // X / (1 + z_r)
      const double c_w = beta * t_r / (1.0 + 1.0 / z_r);  // beta tau_r z_r / (1 + z_r)

      // X f_lb - Y tau, with z = z_r (1 + w), divided by e_scale
      const auto w = prog.add_scalar("w" + std::to_string(k) + "_" + std::to_string(j));
      rows[i] += (beta * 2.0 * s_r / e_scale) * LinExpr(v.s);
      rows[i] += (-hp.y / e_scale) * LinExpr(v.tau);
      rows[i] += LinExpr(-(beta * t_r) / e_scale);
      rows[i] += (-c_w / e_scale) * LinExpr(w);

      // 1 + w >= exp(a (rho_r - rho_lb))
      LinExpr x(hp.a * rho_r);
      if (opt.optimize_phases) {
        // rho_lb = 2 p_r Re{conj(a_r) q_bar^H theta_bar} - p_r^2 |a_r|^2 omega
        const cplx hd_term = std::conj(a_r) * std::conj(ch.h_d(k));
        x += LinExpr(-hp.a * 2.0 * p_r * hd_term.real());
        for (int m = 0; m < n; ++m) {
          const cplx c = std::conj(a_r) * std::conj(ch.q(k, m));
          x.add_term(v.re[static_cast<std::size_t>(m)], -hp.a * 2.0 * p_r * c.real());
          x.add_term(v.im[static_cast<std::size_t>(m)], hp.a * 2.0 * p_r * c.imag());
        }
        x.add_term(v.omega, hp.a * p_r * p_r * gain_r);
      } else {
        x.add_term(v.p, -hp.a * gain_r);
      }
      prog.add_exp(x, LinExpr(1.0), LinExpr(1.0) + LinExpr(w));
      links.push_back({x, w, c_w / e_scale});
    }

    // s^2 <= tau
    prog.add_rotated_soc(LinExpr(v.tau), LinExpr(0.5), {LinExpr(v.s)});
    prog.add_nonneg(LinExpr(v.p));
    prog.add_nonneg(LinExpr(cfg.max_power) - LinExpr(v.p));
    if (opt.optimize_phases) {
      // omega P >= 1, omega bounded so the barrier stays bounded
      prog.add_rotated_soc(LinExpr(v.omega), LinExpr(v.p), {LinExpr(std::sqrt(2.0))});
      prog.add_nonneg(LinExpr(1e3 / p_r) - LinExpr(v.omega));
      for (int m = 0; m < n; ++m)
        prog.add_soc(LinExpr(1.0), {LinExpr(v.re[static_cast<std::size_t>(m)]), LinExpr(v.im[static_cast<std::size_t>(m)])});
    }
    time_used += LinExpr(v.tau);
    // energy: (P + tau)^2 + eta_ub <= 4 E summed over slots, written in the
    // units P / c, c tau (same product) with c balancing the two at the iterate
    const double c = t_r > 0.0 ? std::sqrt(p_r / t_r) : 1.0;
    scale[js] = c;
    const double d_r = p_r / c - c * t_r;
    budget += LinExpr(d_r * d_r - 2.0 * d_r * d_r);
    budget += (2.0 * d_r / c) * LinExpr(v.p);
    budget += (-2.0 * d_r * c) * LinExpr(v.tau);
  }
  for (auto& r : rows) prog.add_nonneg(r);
  prog.add_nonneg(LinExpr(cfg.horizon) - time_used);
  {
    std::vector<LinExpr> sums;
    for (int j = 0; j < jn; ++j) {
      const auto js = static_cast<std::size_t>(j);
      sums.push_back((1.0 / scale[js]) * LinExpr(sv[js].p) + scale[js] * LinExpr(sv[js].tau));
    }
    prog.add_rotated_soc(budget, LinExpr(0.5), std::move(sums));
  }
  prog.maximize(LinExpr(e_hat));

  // strictly interior start a relative 1e-8 inside the iterate; the solver
  // falls back to phase one if rounding puts it on the boundary
  constexpr double shrink = 1e-8;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(prog.variable_count());
  for (int j = 0; j < jn; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const auto& v = sv[js];
    const double tau = (1.0 - 2.0 * shrink) * std::max(0.0, sr.durations[js]) + shrink * cfg.horizon / jn;
    start[v.p.index] = std::clamp((1.0 - shrink) * sr.powers[js], shrink * cfg.max_power, (1.0 - shrink) * cfg.max_power);
    start[v.tau.index] = tau;
    start[v.s.index] = (1.0 - shrink) * std::sqrt(tau);
    if (opt.optimize_phases) {
      for (int m = 0; m < n; ++m) {
        start[v.re[static_cast<std::size_t>(m)].index] = (1.0 - shrink) * sr.phases[js](m).real();
        start[v.im[static_cast<std::size_t>(m)].index] = (1.0 - shrink) * sr.phases[js](m).imag();
      }
      start[v.omega.index] = (1.0 + shrink) / start[v.p.index];
    }
  }
  for (const auto& l : links) {
    const double xv = l.x.evaluate(start);
    // w sits well inside its cone and spends about 1e-3 of the row in total
    const double margin = l.row_cost > 0.0 ? std::min(1.0, 1e-3 / (jn * l.row_cost)) : 1.0;
    start[l.w.index] = std::max(0.0, std::expm1(xv)) + margin;
  }
  double e0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i)
    e0 = std::min(e0, rows[i].evaluate(start) / cfg.weight(active_ers[i]));
  start[e_hat.index] = std::isfinite(e0) ? e0 - 1e-4 * (1.0 + std::abs(e0)) : 0.0;

  ScaIterate out = it;
  out.variable_count = prog.variable_count();
  out.iteration = it.iteration + 1;
  conic::SolveOptions so;
  so.tol = opt.tol;
  so.start = start;
  const auto sol = conic::solve(prog, so);
  if (sol.status != conic::Status::optimal) {
    out.improved = false;
    out.iteration = it.iteration;
    out.message = std::string("subproblem ") + conic::to_string(sol.status) + ": " + sol.message;
    return out;
  }

  Schedule next = sr;
  for (int j = 0; j < jn; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const auto& v = sv[js];
    next.powers[js] = std::clamp(sol.value(v.p), 0.0, cfg.max_power);
    next.durations[js] = std::max(0.0, sol.value(v.tau));
    if (opt.optimize_phases) {
      VectorXcd t(n);
      for (int m = 0; m < n; ++m) {
        t(m) = cplx(sol.value(v.re[static_cast<std::size_t>(m)]), sol.value(v.im[static_cast<std::size_t>(m)]));
        const double r = std::abs(t(m));
        if (r > 1.0) t(m) /= r;
      }
      next.phases[js] = t;
    }
  }
  // interior-point output sits inside the budget up to solver tolerance; remove the residue
  const double t_sum = std::accumulate(next.durations.begin(), next.durations.end(), 0.0);
  if (t_sum > cfg.horizon)
    for (auto& t : next.durations) t *= cfg.horizon / t_sum;
  double used = 0.0;
  for (int j = 0; j < jn; ++j) used += next.durations[static_cast<std::size_t>(j)] * next.powers[static_cast<std::size_t>(j)];
  if (used > cfg.total_energy)
    for (auto& p : next.powers) p *= cfg.total_energy / used;

  const double e_new = audit(next, ch, ehs, cfg, false).e;
  if (!(e_new >= it.e - 1e-6 * it.e)) {
    out.improved = false;
    out.iteration = it.iteration;
    out.message = "audited objective decreased";
    return out;
  }
  out.schedule = std::move(next);
  out.slack = tight_slack(out.schedule, ch, ehs);
  out.e = e_new;
  out.improved = true;
  return out;
}

// ---------------------------------------------------------------------------
// Driver

struct DynamicOptions {
  InitStrategy init = InitStrategy::tdma_warm;
  std::uint64_t seed = 0;
  /// Starting schedule; overrides `init` when present (used for nested warm starts).
  std::optional<Schedule> warm_start;
  SubproblemOptions subproblem{};
};

namespace detail {

struct StageResult {
  ScaIterate it;
  std::vector<double> history;
  bool converged = false;
  std::string message;
};

inline StageResult run_stage(ScaIterate it, const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                             const SystemConfig& cfg, const SubproblemOptions& opt) {
  StageResult st;
  st.history.push_back(it.e);
  for (int r = 0; r < cfg.sca_max_iterations; ++r) {
    auto next = solve_sca_subproblem(it, ch, ehs, cfg, opt);
    if (!next.improved) {
      st.message = next.message;
      st.converged = next.message == "audited objective decreased";
      break;
    }
    const double rel = (next.e - it.e) / std::max(it.e, 1e-300);
    it = std::move(next);
    st.history.push_back(it.e);
    if (rel < cfg.sca_tol) {
      st.converged = true;
      break;
    }
  }
  st.it = std::move(it);
  return st;
}

inline Schedule pruned(const Schedule& s, double horizon) {
  Schedule out;
  for (int j = 0; j < s.n_slots; ++j) {
    const auto js = static_cast<std::size_t>(j);
    if (s.durations[js] < 1e-9 * horizon) continue;
    out.phases.push_back(s.phases[js]);
    out.durations.push_back(s.durations[js]);
    out.powers.push_back(s.powers[js]);
  }
  out.n_slots = static_cast<int>(out.durations.size());
  if (out.n_slots == 0) {  // keep one slot so the schedule stays well formed
    out.phases.push_back(s.phases.front());
    out.durations.push_back(0.0);
    out.powers.push_back(s.powers.front());
    out.n_slots = 1;
  }
  return out;
}

inline Solution finish(const Schedule& s, const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                       const SystemConfig& cfg) {
  Solution sol;
  sol.schedule = pruned(s, cfg.horizon);
  const auto a = audit(sol.schedule, ch, ehs, cfg);
  sol.e = a.e;
  sol.per_er_energy = a.energy;
  return sol;
}

}  // namespace detail

/// Runs the phase-design SCA, projects to unit modulus, then re-optimizes time
/// and power with the phases frozen.  The returned schedule is the best
/// unit-modulus point seen (the start or the post-projection result).
inline Solution solve_dynamic(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                              const SystemConfig& cfg, int n_slots, const DynamicOptions& opt = {}) {
  if (n_slots < 1) throw std::invalid_argument("solve_dynamic: J must be at least 1");
  ScaIterate start = opt.warm_start ? make_iterate(*opt.warm_start, ch, ehs, cfg)
                                    : initialize(ch, ehs, cfg, n_slots, opt.init, opt.seed);
  for (auto& t : start.schedule.phases) t = project_phases(t);
  start = make_iterate(start.schedule, ch, ehs, cfg);

  auto design_opt = opt.subproblem;
  design_opt.optimize_phases = true;
  auto stage1 = detail::run_stage(start, ch, ehs, cfg, design_opt);

  Schedule projected = stage1.it.schedule;
  for (auto& t : projected.phases) t = project_phases(t);
  auto resource_opt = opt.subproblem;
  resource_opt.optimize_phases = false;
  auto stage2 = detail::run_stage(make_iterate(projected, ch, ehs, cfg), ch, ehs, cfg, resource_opt);

  const double e_start = audit(start.schedule, ch, ehs, cfg).e;
  const double e_final = audit(stage2.it.schedule, ch, ehs, cfg).e;
  Solution sol = detail::finish(e_final >= e_start ? stage2.it.schedule : start.schedule, ch, ehs, cfg);
  sol.iterations = static_cast<int>(stage1.history.size() + stage2.history.size()) - 2;
  sol.converged = stage1.converged && stage2.converged;
  sol.history = std::move(stage1.history);
  sol.resource_history = std::move(stage2.history);
  if (!stage1.message.empty() && stage1.message != "audited objective decreased") sol.status = stage1.message;
  else if (!stage2.message.empty() && stage2.message != "audited objective decreased") sol.status = stage2.message;
  return sol;
}

/// Single-pattern SCA baseline: the J = 1 specialization of solve_dynamic.
inline Solution solve_static_sca(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                 const SystemConfig& cfg, const DynamicOptions& opt = {}) {
  return solve_dynamic(ch, ehs, cfg, 1, opt);
}

/// Embeds `s` into J >= s.n_slots slots: extra slots get tau = 0 and the matched
/// phase of the ER currently furthest below its share.
inline Schedule embed_schedule(const Schedule& s, int n_slots, const ChannelRealization& ch,
                               const std::vector<eh::EhParams>& ehs, const SystemConfig& cfg) {
  if (n_slots < s.n_slots) throw std::invalid_argument("embed_schedule: cannot shrink a schedule");
  Schedule out = s;
  while (out.n_slots < n_slots) {
    const auto a = audit(out, ch, ehs, cfg, false);
    int worst = 0;
    double worst_v = std::numeric_limits<double>::infinity();
    for (int k = 0; k < ch.n_ers; ++k) {
      if (cfg.weight(k) <= 0.0) continue;
      const double v = a.energy(k) / cfg.weight(k);
      if (v < worst_v) {
        worst_v = v;
        worst = k;
      }
    }
    out.phases.push_back(matched_phase(ch, worst));
    out.durations.push_back(0.0);
    out.powers.push_back(cfg.static_power());
    ++out.n_slots;
  }
  return out;
}

/// J-slot start from a lifted phase matrix (N+1 x N+1, e.g. the SDR solution):
/// slot i uses the i-th leading eigenvector, rotated so its last entry is real
/// and projected to unit modulus, for a share of T proportional to its eigenvalue.
inline Schedule eigen_schedule(const MatrixXcd& theta_lift, int n_slots, const SystemConfig& cfg) {
  const auto n1 = theta_lift.rows();
  if (n1 < 2 || theta_lift.cols() != n1) throw std::invalid_argument("eigen_schedule: lifted matrix must be square");
  if (n_slots < 1) throw std::invalid_argument("eigen_schedule: J must be at least 1");
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> es(theta_lift);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen_schedule: eigendecomposition failed");
  std::vector<double> weight(static_cast<std::size_t>(n_slots), 0.0);
  double total = 0.0;
  for (int i = 0; i < n_slots; ++i) {
    const auto col = (n1 - 1 - i % n1);  // cycles when J exceeds N + 1
    weight[static_cast<std::size_t>(i)] = std::max(0.0, es.eigenvalues()(col));
    total += weight[static_cast<std::size_t>(i)];
  }
  Schedule s;
  s.n_slots = n_slots;
  for (int i = 0; i < n_slots; ++i) {
    const auto col = (n1 - 1 - i % n1);
    const VectorXcd v = es.eigenvectors().col(col);
    s.phases.push_back(project_phases(v.head(n1 - 1) * std::conj(v(n1 - 1))));
    const double w = weight[static_cast<std::size_t>(i)];
    s.durations.push_back(total > 0.0 ? cfg.horizon * w / total : cfg.horizon / n_slots);
    s.powers.push_back(cfg.static_power());
  }
  return s;
}

}  // namespace irswet::sca
