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

// Sigmoidal RF-to-DC harvester:
//
//     Phi(p) = X / (1 + exp(-a (p - b))) - Y,
//     X = M (1 + e^{ab}) / e^{ab},   Y = M / e^{ab}.
//
// Phi(0) = 0 and Phi saturates at M.  With u = exp(-a p) the same curve is
// M (1 - u) / (1 + e^{ab} u), which avoids the X - Y cancellation at the
// microwatt input levels typical of far-field transfer.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "irswet/config.hpp"

namespace irswet::eh {

struct EhParams {
  double a = 0.0;
  double b = 0.0;
  double m = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Thrown when a DC target is at or above the saturation power.
class InfeasibleTarget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline EhParams derive_constants(double a, double b, double m) {
  if (!(a > 0.0) || !(b > 0.0) || !(m > 0.0))
    throw std::invalid_argument("derive_constants: a, b and m must be positive");
  const double eab = std::exp(a * b);
  EhParams p{a, b, m, 0.0, 0.0};
  p.y = m / eab;
  p.x = m + p.y;  // m (1 + e^{ab}) / e^{ab}
  return p;
}

inline EhParams derive_constants(const HarvesterCircuit& c) { return derive_constants(c.a, c.b, c.m); }

inline std::vector<EhParams> harvesters(const SystemConfig& cfg) {
  std::vector<EhParams> out;
  out.reserve(static_cast<std::size_t>(cfg.n_ers));
  for (int k = 0; k < cfg.n_ers; ++k) out.push_back(derive_constants(cfg.circuit(k)));
  return out;
}

inline double dc_power(const EhParams& p, double p_rf) {
  if (!(p_rf >= 0.0)) throw std::invalid_argument("dc_power: negative RF power");
  const double u = std::exp(-p.a * p_rf);
  const double v = -p.m * std::expm1(-p.a * p_rf) / (1.0 + std::exp(p.a * p.b) * u);
  return std::min(v, std::nextafter(p.m, 0.0));  // saturation is approached, never reached
}

/// Exact inverse of dc_power on [0, m).
inline double required_rf_power(const EhParams& p, double phi) {
  if (!(phi >= 0.0)) throw std::invalid_argument("required_rf_power: negative DC target");
  if (phi >= p.m) throw InfeasibleTarget("required_rf_power: target at or above saturation");
  // b - ln(X / (phi + Y) - 1) / a, rearranged as ln((m + e^{ab} phi) / (m - phi)) / a
  const double eab = std::exp(p.a * p.b);
  return (std::log1p(eab * phi / p.m) - std::log1p(-phi / p.m)) / p.a;
}

/// d Phi / d p_rf.
inline double dc_slope(const EhParams& p, double p_rf) {
  const double s = 1.0 / (1.0 + std::exp(-p.a * (p_rf - p.b)));
  return p.x * p.a * s * (1.0 - s);
}

}  // namespace irswet::eh
