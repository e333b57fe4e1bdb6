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

#include "irswet/eh.hpp"

#include <cmath>
#include <random>

using namespace irswet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Direct long-double evaluation of the textbook sigmoid, independent of the library's rearrangement.
long double sigmoid_oracle(long double a, long double b, long double m, long double p) {
  const long double eab = std::exp(a * b);
  const long double x = m * (1 + eab) / eab;
  const long double y = m / eab;
  return x / (1 + std::exp(-a * (p - b))) - y;
}

// Inverse by bisection on the oracle curve.
double bisect_inverse(double a, double b, double m, double phi) {
  long double lo = 0, hi = 1;
  while (sigmoid_oracle(a, b, m, hi) < phi) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (sigmoid_oracle(a, b, m, mid) < phi ? lo : hi) = mid;
  }
  return static_cast<double>((lo + hi) / 2);
}

}  // namespace

TEST_CASE("derived sigmoid constants", "[eh]") {
  const auto p = eh::derive_constants(150, 0.014, 0.024);
  const long double eab = std::exp(150.0L * 0.014L);
  CHECK_THAT(p.x, WithinRel(static_cast<double>(0.024L * (1 + eab) / eab), 1e-13));
  CHECK_THAT(p.y, WithinRel(static_cast<double>(0.024L / eab), 1e-13));
  // quoted reference values carry 6-7 digits
  CHECK_THAT(p.x, WithinAbs(0.0269388, 2e-7));
  CHECK_THAT(p.y, WithinAbs(0.0029389, 2e-7));
  CHECK_THAT(p.x - p.y, WithinRel(p.m, 1e-12));
  CHECK(p.x > p.y);
  CHECK(p.y > 0.0);

  const auto lim = eh::derive_constants(150, 1e-12, 0.024);
  CHECK_THAT(lim.y, WithinRel(0.024, 1e-8));
  CHECK_THAT(lim.x, WithinRel(0.048, 1e-8));

  CHECK_THROWS_AS(eh::derive_constants(0, 0.014, 0.024), std::invalid_argument);
  CHECK_THROWS_AS(eh::derive_constants(150, -1, 0.024), std::invalid_argument);
  CHECK_THROWS_AS(eh::derive_constants(150, 0.014, 0), std::invalid_argument);
}

TEST_CASE("dc_power values", "[eh]") {
  const auto p = eh::derive_constants(150, 0.014, 0.024);
  CHECK_THAT(eh::dc_power(p, 0.0), WithinAbs(0.0, 1e-12));
  CHECK_THAT(eh::dc_power(p, 0.014), WithinAbs(p.x / 2 - p.y, 1e-15));
  CHECK_THAT(eh::dc_power(p, 0.014), WithinAbs(0.0105305, 5e-8));
  CHECK_THAT(eh::dc_power(p, 10.0), WithinAbs(0.024, 1e-9));
  CHECK_THROWS_AS(eh::dc_power(p, -1e-3), std::invalid_argument);

  for (double prf : {1e-9, 1e-6, 1e-3, 0.01, 0.05, 0.3}) {
    const double ref = static_cast<double>(sigmoid_oracle(150, 0.014, 0.024, prf));
    CHECK_THAT(eh::dc_power(p, prf), WithinRel(ref, 1e-9));
  }
}

TEST_CASE("dc_power is monotone and bounded", "[eh][property]") {
  const auto p = eh::derive_constants(150, 0.014, 0.024);
  double prev = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double v = eh::dc_power(p, i / 10000.0);
    // once 1 - Phi/M drops below double resolution the curve is flat in floating point
    if (p.m - prev > 1e-12 * p.m) REQUIRE(v > prev);
    REQUIRE(v >= prev);
    REQUIRE(v >= 0.0);
    REQUIRE(v < p.m);
    prev = v;
  }
}

TEST_CASE("required_rf_power inverts dc_power", "[eh][property]") {
  const auto p = eh::derive_constants(150, 0.014, 0.024);
  CHECK(eh::required_rf_power(p, 0.0) == 0.0);
  CHECK_THAT(eh::required_rf_power(p, p.x / 2 - p.y), WithinRel(p.b, 1e-12));

  const double hi = eh::required_rf_power(p, 0.99 * p.m);
  CHECK(std::isfinite(hi));
  CHECK(hi > 0.0);
  CHECK_THAT(hi, WithinRel(bisect_inverse(150, 0.014, 0.024, 0.99 * 0.024), 1e-9));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.999 * p.m);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double phi = u(rng);
    worst = std::max(worst, std::abs(eh::dc_power(p, eh::required_rf_power(p, phi)) - phi));
  }
  CHECK(worst <= 1e-9 * p.m);

  CHECK_THROWS_AS(eh::required_rf_power(p, p.m), eh::InfeasibleTarget);
  CHECK_THROWS_AS(eh::required_rf_power(p, -1e-9), std::invalid_argument);
}

TEST_CASE("dc_slope matches finite differences", "[eh]") {
  const auto p = eh::derive_constants(150, 0.014, 0.024);
  for (double prf : {0.0, 1e-6, 0.01, 0.02}) {
    const double h = 1e-7;
    const double fd = (eh::dc_power(p, prf + h) - eh::dc_power(p, std::max(0.0, prf - h))) / (prf + h - std::max(0.0, prf - h));
    CHECK_THAT(eh::dc_slope(p, prf), WithinRel(fd, 1e-4));
  }
}
