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

// Static single-pattern scheme: semidefinite relaxation with bisection on the
// fairness level e, eigen-rank profiling and Gaussian randomization.
//
// A trial e is decided through the slack problem
//
//     s*(e) = max_Theta min_k  tr(Qt_k Theta) - rt_k(e),  Theta >= 0, diag(Theta) = 1,
//
// with Qt_k = Q_k / |q_k|^2 and rt_k(e) = required_rf_power(alpha_k e / T) / (P |q_k|^2).
// e is feasible iff s*(e) >= 0.  The program actually handed to the conic layer
// is the Lagrange dual
//
//     min 1'y - rt'lambda   s.t.  diag(y) - sum_k lambda_k Qt_k >= 0,  lambda >= 0,  1'lambda = 1,
//
// which has N+1+K scalar unknowns instead of (N+1)^2.  Its PSD multiplier is a
// primal Theta (unit diagonal up to renormalization) and every dual point
// bounds s* from above, so one solve tightens both ends of the bracket.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "irswet/channel.hpp"
#include "irswet/conic.hpp"
#include "irswet/eh.hpp"

namespace irswet::sdr {

using Eigen::VectorXd;

struct SdrResult {
  double e_upper = 0.0;
  MatrixXcd theta_lift;
  VectorXd eigenvalues;  // descending
  int rank_estimate = 0;
  int bisection_iterations = 0;
  double power = 0.0;       // transmit power used
  double e_bracket_hi = 0.0;  // final upper end of the bracket
  int newton_steps = 0;
};

/// Raised when the conic layer fails on a bisection trial.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double trial_e)
      : std::runtime_error(what + " (trial e = " + std::to_string(trial_e) + ")"), trial_e_(trial_e) {}
  double trial_e() const { return trial_e_; }

 private:
  double trial_e_;
};

/// min over ERs with positive weight of T * dc_power(p * gain_k) / alpha_k.
template <class GainFn>
double fairness_value(const SystemConfig& cfg, const std::vector<eh::EhParams>& ehs, double p, GainFn gain) {
  double e = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.n_ers; ++k) {
    const double w = cfg.weight(k);
    if (w <= 0.0) continue;
    e = std::min(e, cfg.horizon * eh::dc_power(ehs[static_cast<std::size_t>(k)], p * std::max(0.0, gain(k))) / w);
  }
  return std::isfinite(e) ? e : 0.0;
}

/// Achieved e of a single unit-modulus pattern at the static power.
inline double static_objective(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                               const SystemConfig& cfg, const VectorXcd& theta) {
  const VectorXcd tb = lift_phases(theta);
  return fairness_value(cfg, ehs, cfg.static_power(), [&](int k) { return channel_gain(ch, k, tb); });
}

/// Relaxed objective at a lifted matrix Theta.
inline double lifted_objective(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                               const SystemConfig& cfg, const MatrixXcd& theta_lift) {
  return fairness_value(cfg, ehs, cfg.static_power(), [&](int k) {
    return (ch.q_lift[static_cast<std::size_t>(k)] * theta_lift).trace().real();
  });
}

/// Sum over ERs of the energy a lifted Theta would deliver at the static power.
inline double lifted_total_energy(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                  const SystemConfig& cfg, const MatrixXcd& theta_lift) {
  double total = 0.0;
  for (int k = 0; k < ch.n_ers; ++k) {
    const double gain = std::max(0.0, (ch.q_lift[static_cast<std::size_t>(k)] * theta_lift).trace().real());
    total += cfg.horizon * eh::dc_power(ehs[static_cast<std::size_t>(k)], cfg.static_power() * gain);
  }
  return total;
}

/// Channel-aware bracket top: no unit-diagonal PSD Theta beats the aligned gain.
inline double e_bracket_top(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                            const SystemConfig& cfg) {
  return fairness_value(cfg, ehs, cfg.static_power(), [&](int k) { return aligned_gain(ch, k); });
}

inline int rank_of(const VectorXd& descending, double threshold) {
  if (descending.size() == 0) return 0;
  const double top = descending(0);
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < descending.size(); ++i)
    if (descending(i) > threshold * top) ++r;
  return r;
}

/// Eigenvalues in descending order with solver noise in (-1e-9, 0) clamped to 0.
inline VectorXd clean_spectrum(const MatrixXcd& theta) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (theta + theta.adjoint()), Eigen::EigenvaluesOnly);
  VectorXd ev = es.eigenvalues().reverse();
  const double scale = std::max(1.0, ev.size() > 0 ? std::abs(ev(0)) : 1.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-9 * scale) throw SolverFailure("lifted matrix has a negative eigenvalue", 0.0);
    ev(i) = std::max(0.0, ev(i));
  }
  return ev;
}

inline std::pair<int, VectorXd> rank_profile(const SdrResult& result, double threshold) {
  VectorXd spectrum = clean_spectrum(result.theta_lift);
  return {rank_of(spectrum, threshold), std::move(spectrum)};
}

namespace detail {

struct Normalized {
  std::vector<int> active;            // ERs with positive weight
  std::vector<MatrixXcd> q_tilde;     // per active ER
  std::vector<double> scale;          // P |q_bar_k|^2
  double power = 0.0;
};

inline Normalized normalize(const ChannelRealization& ch, const SystemConfig& cfg) {
  Normalized nz;
  nz.power = cfg.static_power();
  for (int k = 0; k < ch.n_ers; ++k) {
    if (cfg.weight(k) <= 0.0) continue;
    const double sq = ch.q_bar.row(k).squaredNorm();
    if (!(sq > 0.0)) throw std::invalid_argument("SDR: ER with an all-zero channel cannot receive energy");
    nz.active.push_back(k);
    nz.q_tilde.push_back(ch.q_lift[static_cast<std::size_t>(k)] / sq);
    nz.scale.push_back(nz.power * sq);
  }
  return nz;
}

inline std::vector<double> normalized_targets(const Normalized& nz, const std::vector<eh::EhParams>& ehs,
                                              const SystemConfig& cfg, double e) {
  std::vector<double> r;
  for (std::size_t i = 0; i < nz.active.size(); ++i) {
    const int k = nz.active[i];
    r.push_back(eh::required_rf_power(ehs[static_cast<std::size_t>(k)], cfg.weight(k) * e / cfg.horizon) /
                nz.scale[i]);
  }
  return r;
}

struct SlackSolve {
  conic::Status status = conic::Status::numerical_failure;
  std::vector<double> y;       // scaled so that sum(lambda) = 1
  std::vector<double> lambda;
  MatrixXcd theta;             // unit-diagonal witness
  double witness_slack = -std::numeric_limits<double>::infinity();
  double dual_bound = std::numeric_limits<double>::infinity();  // >= s*(e)
  int newton = 0;
};

inline double witness_slack(const Normalized& nz, const std::vector<double>& r, const MatrixXcd& theta) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nz.active.size(); ++i) s = std::min(s, (nz.q_tilde[i] * theta).trace().real() - r[i]);
  return s;
}

inline MatrixXcd unit_diagonal(const MatrixXcd& z) {
  const Eigen::Index n = z.rows();
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 / std::sqrt(std::max(z(i, i).real(), 1e-300));
  MatrixXcd t = d.asDiagonal() * z * d.asDiagonal();
  t = 0.5 * (t + t.adjoint()).eval();
  for (Eigen::Index i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

/// Solves the dual LMI at a trial e.  With `certify_only` the solve stops as
/// soon as either a feasibility witness or an infeasibility bound is in hand.
inline SlackSolve solve_slack(const Normalized& nz, const std::vector<double>& r, bool certify_only, double tol) {
  const int kk = static_cast<int>(nz.active.size());
  const int n1 = static_cast<int>(nz.q_tilde.front().rows());
  conic::ConicProgram prog;
  const auto y = prog.add_vector("y", n1);
  const auto lam = prog.add_vector("lambda", kk);

  conic::LinExpr obj, sum;
  for (int i = 0; i < n1; ++i) obj -= conic::LinExpr(y[static_cast<std::size_t>(i)]);
  for (int i = 0; i < kk; ++i) {
    obj += r[static_cast<std::size_t>(i)] * lam[static_cast<std::size_t>(i)];
    sum += conic::LinExpr(lam[static_cast<std::size_t>(i)]);
    prog.add_nonneg(lam[static_cast<std::size_t>(i)]);
  }
  prog.maximize(obj);
  prog.add_equality(sum - 1.0);

  conic::HermitianAffine lmi;
  lmi.constant = MatrixXcd::Zero(n1, n1);
  for (int i = 0; i < n1; ++i) {
    conic::SparseC e(n1, n1);
    e.insert(i, i) = 1.0;
    lmi.terms.emplace_back(y[static_cast<std::size_t>(i)].index, std::move(e));
  }
  for (int i = 0; i < kk; ++i)
    lmi.terms.emplace_back(lam[static_cast<std::size_t>(i)].index,
                           conic::SparseC((-nz.q_tilde[static_cast<std::size_t>(i)]).sparseView()));
  const int lmi_id = prog.add_hermitian_psd(std::move(lmi));

  // lambda uniform, y = 2: diag(y) - sum lambda Qt >= I since each Qt has spectral norm 1.
  VectorXd start(n1 + kk);
  start.head(n1).setConstant(2.0);
  start.tail(kk).setConstant(1.0 / kk);

  SlackSolve out;
  auto harvest = [&](const conic::ConicSolution& sol) {
    double ls = 0.0;
    out.lambda.assign(static_cast<std::size_t>(kk), 0.0);
    out.y.assign(static_cast<std::size_t>(n1), 0.0);
    for (int i = 0; i < kk; ++i) ls += (out.lambda[static_cast<std::size_t>(i)] = std::max(0.0, sol.value(lam[static_cast<std::size_t>(i)])));
    for (int i = 0; i < n1; ++i) out.y[static_cast<std::size_t>(i)] = sol.value(y[static_cast<std::size_t>(i)]) / ls;
    double d = 0.0;
    for (int i = 0; i < kk; ++i) {
      out.lambda[static_cast<std::size_t>(i)] /= ls;
      d -= out.lambda[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    }
    for (double v : out.y) d += v;
    out.dual_bound = d;
    if (static_cast<std::size_t>(lmi_id) < sol.hermitian_duals.size() && sol.hermitian_duals[static_cast<std::size_t>(lmi_id)].size() > 0) {
      out.theta = unit_diagonal(sol.hermitian_duals[static_cast<std::size_t>(lmi_id)]);
      out.witness_slack = witness_slack(nz, r, out.theta);
    }
  };

  conic::SolveOptions opt;
  opt.tol = tol;
  opt.start = start;
  if (certify_only) {
    opt.early_stop = [&](const conic::ConicSolution& snap) {
      harvest(snap);
      return out.dual_bound < 0.0 || out.witness_slack >= 0.0;
    };
  }
  const auto sol = conic::solve(prog, opt);
  out.status = sol.status;
  out.newton = sol.newton_steps;
  if (sol.status == conic::Status::optimal) harvest(sol);
  return out;
}

/// Largest e with sum(y) - lambda' rt(e) >= 0; beyond it the trial is certified infeasible.
inline double dual_root(const Normalized& nz, const std::vector<eh::EhParams>& ehs, const SystemConfig& cfg,
                        const SlackSolve& s, double lo, double hi) {
  auto bound = [&](double e) {
    const auto r = normalized_targets(nz, ehs, cfg, e);
    double d = 0.0;
    for (double v : s.y) d += v;
    for (std::size_t i = 0; i < r.size(); ++i) d -= s.lambda[i] * r[i];
    return d;
  };
  if (bound(hi) >= 0.0) return hi;
  if (bound(lo) < 0.0) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) >= 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace detail

struct FeasibilityCheck {
  bool feasible = false;
  MatrixXcd witness;     // unit-diagonal Theta when feasible
  double slack = 0.0;    // min_k tr(Qt_k Theta) - rt_k at the witness, or the dual bound when infeasible
};

/// Decides whether the relaxed program admits fairness level e.
inline FeasibilityCheck check_sdr_feasibility(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                              const SystemConfig& cfg, double e) {
  const auto nz = detail::normalize(ch, cfg);
  FeasibilityCheck fc;
  if (nz.active.empty() || e <= 0.0) {
    fc.feasible = true;
    fc.witness = MatrixXcd::Identity(ch.n_elements + 1, ch.n_elements + 1);
    return fc;
  }
  std::vector<double> r;
  try {
    r = detail::normalized_targets(nz, ehs, cfg, e);
  } catch (const eh::InfeasibleTarget&) {
    return fc;
  }
  const auto s = detail::solve_slack(nz, r, /*certify_only=*/true, 1e-8);
  if (s.status != conic::Status::optimal) throw SolverFailure("SDR feasibility solve failed", e);
  fc.feasible = s.witness_slack >= 0.0 || (s.dual_bound >= 0.0 && s.witness_slack >= -1e-9);
  fc.witness = s.theta;
  fc.slack = fc.feasible ? s.witness_slack : s.dual_bound;
  return fc;
}

inline SdrResult solve_sdr_upper_bound(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                       const SystemConfig& cfg) {
  if (ch.n_ers < 1) throw std::invalid_argument("solve_sdr_upper_bound: no ERs");
  if (static_cast<int>(ehs.size()) != ch.n_ers) throw std::invalid_argument("solve_sdr_upper_bound: EH list size");
  const auto nz = detail::normalize(ch, cfg);
  const int n1 = ch.n_elements + 1;

  SdrResult res;
  res.power = nz.power;
  res.theta_lift = MatrixXcd::Identity(n1, n1);
  double lo = lifted_objective(ch, ehs, cfg, res.theta_lift);
  double hi = e_bracket_top(ch, ehs, cfg);
  const double width = 1e-6 * hi;

  // The dual root (upper end) settles within a few solves while witnesses from
  // trials below the optimum approach it only linearly, so after the opening
  // midpoint each trial sits just under the current upper end.
  bool first = true;
  while (!nz.active.empty() && hi - lo > width && res.bisection_iterations < 40) {
    const double e = first ? 0.5 * (lo + hi) : std::max(0.5 * (lo + hi), hi - 0.4 * width);
    first = false;
    ++res.bisection_iterations;
    const auto r = detail::normalized_targets(nz, ehs, cfg, e);
    const auto s = detail::solve_slack(nz, r, /*certify_only=*/false, 1e-8);
    res.newton_steps += s.newton;
    if (s.status != conic::Status::optimal) throw SolverFailure("SDR bisection solve failed", e);

    const double e_lo = lifted_objective(ch, ehs, cfg, s.theta);
    if (e_lo > lo) {
      lo = e_lo;
      res.theta_lift = s.theta;
    }
    hi = std::max(lo, std::min(hi, detail::dual_root(nz, ehs, cfg, s, lo, hi)));
    // s*(e) within solver resolution of 0: neither certificate crosses e and the
    // bracket cannot shrink further at this tolerance
    if (lo < e && e < hi) break;
  }
  res.e_upper = lo;
  res.e_bracket_hi = hi;
  res.eigenvalues = clean_spectrum(res.theta_lift);
  res.rank_estimate = rank_of(res.eigenvalues, cfg.rank_threshold);
  return res;
}

struct GrResult {
  VectorXcd theta;
  double e = 0.0;
};

/// Best of n Gaussian-randomized rank-one candidates drawn from Theta's
/// eigendecomposition.  Candidate i depends only on (seed, i), so the best of
/// a prefix never beats the best of the full set.
inline GrResult gaussian_randomization(const SdrResult& result, const ChannelRealization& ch,
                                       const std::vector<eh::EhParams>& ehs, const SystemConfig& cfg, int n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("gaussian_randomization: n_samples must be positive");
  const Eigen::Index n1 = result.theta_lift.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (result.theta_lift + result.theta_lift.adjoint()));
  VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const MatrixXcd factor = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(seed);
  GrResult best;
  best.e = -1.0;
  VectorXcd rv(n1);
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < n1; ++i) rv(i) = irswet::detail::cn01(rng);
    VectorXcd tb = factor * rv;
    const cplx last = tb(n1 - 1);
    const cplx rot = std::abs(last) > 0.0 ? std::conj(last) / std::abs(last) : cplx(1.0);
    VectorXcd theta(n1 - 1);
    for (Eigen::Index i = 0; i + 1 < n1; ++i) {
      const cplx v = tb(i) * rot;
      theta(i) = std::abs(v) > 0.0 ? v / std::abs(v) : cplx(1.0);
    }
    const double e = static_objective(ch, ehs, cfg, theta);
    if (e > best.e) {
      best.e = e;
      best.theta = theta;
    }
  }
  return best;
}

}  // namespace irswet::sdr
