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

// TDMA baseline: one slot per ER, each slot using that ER's matched phases,
// with only time and power re-optimized.  Every ER still harvests during the
// other ERs' slots.

#include <vector>

#include "irswet/dynamic_sca.hpp"

namespace irswet::tdma {

using sca::matched_phase;

inline sca::Schedule tdma_schedule(const ChannelRealization& ch, const SystemConfig& cfg) {
  sca::Schedule s;
  s.n_slots = ch.n_ers;
  for (int k = 0; k < ch.n_ers; ++k) {
    s.phases.push_back(matched_phase(ch, k));
    s.durations.push_back(cfg.horizon / ch.n_ers);
    s.powers.push_back(cfg.static_power());
  }
  return s;
}

inline sca::Solution solve_tdma(const ChannelRealization& ch, const std::vector<eh::EhParams>& ehs,
                                const SystemConfig& cfg, const sca::SubproblemOptions& base = {}) {
  if (ch.n_ers < 1) throw std::invalid_argument("solve_tdma: no ERs");
  auto opt = base;
  opt.optimize_phases = false;
  const auto start = sca::make_iterate(tdma_schedule(ch, cfg), ch, ehs, cfg);
  auto stage = sca::detail::run_stage(start, ch, ehs, cfg, opt);
  const double e_start = start.e;
  sca::Solution sol = sca::detail::finish(stage.it.e >= e_start ? stage.it.schedule : start.schedule, ch, ehs, cfg);
  sol.iterations = static_cast<int>(stage.history.size()) - 1;
  sol.converged = stage.converged;
  sol.resource_history = std::move(stage.history);
  if (!stage.message.empty() && stage.message != "audited objective decreased") sol.status = stage.message;
  return sol;
}

}  // namespace irswet::tdma
