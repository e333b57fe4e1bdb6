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

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "irswet/config.hpp"

namespace irswet {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Baseband channels of one coherence block.
///
/// Conventions: the amplitude seen by ER k under reflection vector theta is
/// q_bar_k^H theta_bar with theta_bar = [theta; 1], where q_bar_k = [q_k; h_d,k]
/// and q_k,n = conj(g_n) h_r,k,n.  Row k of `q_bar` stores q_bar_k itself.
struct ChannelRealization {
  int n_elements = 0;
  int n_ers = 0;
  std::vector<Point3> er_positions;
  VectorXcd h_d;     // K
  VectorXcd g;       // N
  MatrixXcd h_r;     // K x N
  MatrixXcd q;       // K x N
  MatrixXcd q_bar;   // K x (N+1)
  std::vector<MatrixXcd> q_lift;  // K matrices, q_bar_k q_bar_k^H

  VectorXcd q_bar_col(int k) const { return q_bar.row(k).transpose(); }

  /// FNV-1a over the bit patterns of q_bar, used to check paired evaluation.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double v) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffU;
        h *= 1099511628211ULL;
      }
    };
    for (Eigen::Index k = 0; k < q_bar.rows(); ++k)
      for (Eigen::Index n = 0; n < q_bar.cols(); ++n) {
        mix(q_bar(k, n).real());
        mix(q_bar(k, n).imag());
      }
    return h;
  }
};

inline double path_loss(double c0, double d0, double d, double exponent) {
  if (!(d > 0.0)) throw std::invalid_argument("path_loss: distance must be positive");
  return c0 * std::pow(d / d0, -exponent);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of realization `index` under `master`; independent of evaluation order.
inline std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

namespace detail {

/// Unit-power circularly symmetric complex Gaussian.
inline cplx cn01(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

/// Uniform linear array along x: element n sees exp(-j pi n cos(psi)), where
/// cos(psi) is the x component of the unit link direction.
inline VectorXcd ula_response(int n, const Point3& from, const Point3& to) {
  const double d = distance(from, to);
  const double cos_psi = (to[0] - from[0]) / d;
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, -std::numbers::pi * i * cos_psi);
  return v;
}

}  // namespace detail

inline void populate_derived(ChannelRealization& ch) {
  const int n = ch.n_elements, k_count = ch.n_ers;
  ch.q.resize(k_count, n);
  ch.q_bar.resize(k_count, n + 1);
  ch.q_lift.assign(static_cast<std::size_t>(k_count), MatrixXcd());
  for (int k = 0; k < k_count; ++k) {
    for (int i = 0; i < n; ++i) ch.q(k, i) = std::conj(ch.g(i)) * ch.h_r(k, i);
    ch.q_bar.row(k).head(n) = ch.q.row(k);
    ch.q_bar(k, n) = ch.h_d(k);
    const VectorXcd col = ch.q_bar_col(k);
    ch.q_lift[static_cast<std::size_t>(k)] = col * col.adjoint();
  }
}

/// Builds a realization from explicit channels (h_r is K x N).
inline ChannelRealization make_realization(const VectorXcd& g, const MatrixXcd& h_r, const VectorXcd& h_d) {
  if (h_r.cols() != g.size() || h_r.rows() != h_d.size())
    throw std::invalid_argument("make_realization: dimension mismatch");
  ChannelRealization ch;
  ch.n_elements = static_cast<int>(g.size());
  ch.n_ers = static_cast<int>(h_d.size());
  ch.g = g;
  ch.h_r = h_r;
  ch.h_d = h_d;
  populate_derived(ch);
  return ch;
}

inline ChannelRealization sample_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = cfg.n_elements, k_count = cfg.n_ers;
  const double los = std::sqrt(cfg.rician_factor / (1.0 + cfg.rician_factor));
  const double nlos = std::sqrt(1.0 / (1.0 + cfg.rician_factor));

  ChannelRealization ch;
  ch.n_elements = n;
  ch.n_ers = k_count;
  for (int k = 0; k < k_count; ++k) {
    const double r = cfg.er_circle_radius * std::sqrt(unif(rng));
    const double phi = 2.0 * std::numbers::pi * unif(rng);
    ch.er_positions.push_back({cfg.er_circle_center[0] + r * std::cos(phi),
                               cfg.er_circle_center[1] + r * std::sin(phi), cfg.er_circle_center[2]});
  }

  const double d_g = distance(cfg.et_position, cfg.irs_position);
  const double amp_g = std::sqrt(path_loss(cfg.pathloss_ref, cfg.ref_distance, d_g, cfg.exp_et_irs) * cfg.et_gain);
  const VectorXcd los_g = detail::ula_response(n, cfg.irs_position, cfg.et_position);
  ch.g.resize(n);
  for (int i = 0; i < n; ++i) ch.g(i) = amp_g * (los * los_g(i) + nlos * detail::cn01(rng));

  ch.h_r.resize(k_count, n);
  ch.h_d.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    const auto& pos = ch.er_positions[static_cast<std::size_t>(k)];
    const double d_r = distance(cfg.irs_position, pos);
    const double amp_r = std::sqrt(path_loss(cfg.pathloss_ref, cfg.ref_distance, d_r, cfg.exp_irs_er) * cfg.er_gain);
    const VectorXcd los_r = detail::ula_response(n, cfg.irs_position, pos);
    for (int i = 0; i < n; ++i) ch.h_r(k, i) = amp_r * (los * los_r(i) + nlos * detail::cn01(rng));
    const double d_d = distance(cfg.et_position, pos);
    const double amp_d =
        std::sqrt(path_loss(cfg.pathloss_ref, cfg.ref_distance, d_d, cfg.exp_et_er) * cfg.et_gain * cfg.er_gain);
    ch.h_d(k) = amp_d * detail::cn01(rng);
  }
  populate_derived(ch);
  return ch;
}

inline VectorXcd lift_phases(const VectorXcd& theta) {
  VectorXcd tb(theta.size() + 1);
  tb.head(theta.size()) = theta;
  tb(theta.size()) = 1.0;
  return tb;
}

inline void require_unit_modulus(const VectorXcd& theta, double tol = 1e-9) {
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (std::abs(std::abs(theta(i)) - 1.0) > tol) throw std::invalid_argument("phase vector entry is not unit modulus");
}

/// |q_bar_k^H theta_bar|^2 without modulus checks (theta_bar may be relaxed).
inline double channel_gain(const ChannelRealization& ch, int k, const VectorXcd& theta_bar) {
  return std::norm(ch.q_bar.row(k).transpose().dot(theta_bar));
}

inline double received_rf_power(const ChannelRealization& ch, int k, const VectorXcd& theta, double p_t) {
  if (k < 0 || k >= ch.n_ers) throw std::out_of_range("received_rf_power: ER index");
  if (theta.size() != ch.n_elements) throw std::invalid_argument("received_rf_power: theta has wrong length");
  if (!(p_t >= 0.0)) throw std::invalid_argument("received_rf_power: negative transmit power");
  require_unit_modulus(theta);
  cplx amp = std::conj(ch.h_d(k));
  for (int i = 0; i < ch.n_elements; ++i) amp += std::conj(ch.q(k, i)) * theta(i);
  return p_t * std::norm(amp);
}

/// Same quantity through the lifted quadratic form theta_bar^H Q_bar_k theta_bar.
inline double received_rf_power_lifted(const ChannelRealization& ch, int k, const VectorXcd& theta, double p_t) {
  const VectorXcd tb = lift_phases(theta);
  return p_t * (tb.adjoint() * ch.q_lift[static_cast<std::size_t>(k)] * tb)(0, 0).real();
}

/// (|h_d,k| + sum_n |q_k,n|)^2, the largest gain any unit-modulus theta can reach.
inline double aligned_gain(const ChannelRealization& ch, int k) {
  double s = std::abs(ch.h_d(k));
  for (int i = 0; i < ch.n_elements; ++i) s += std::abs(ch.q(k, i));
  return s * s;
}

}  // namespace irswet
