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

#include "irswet/conic.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace irswet::conic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Re tr(H X) for Hermitian H given in dense form.
double re_trace(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& x) { return (h * x).trace().real(); }

}  // namespace

TEST_CASE("conic - one-constraint LP")
{
    ConicProgram p;
    const Var t = p.add_scalar("t");
    p.maximize(t);
    p.add_nonneg(3.0 - LinExpr(t));
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK_THAT(sol.value(t), WithinAbs(3.0, 1e-7));
    CHECK_THAT(sol.objective_value, WithinAbs(3.0, 1e-7));
}

TEST_CASE("conic - unit-diagonal 2x2 Hermitian SDP")
{
    ConicProgram p;
    const auto th = p.add_hermitian("theta", 2);
    p.add_hermitian_psd(th.as_affine());
    p.add_equality(LinExpr(th.diag(0)) - 1.0);
    p.add_equality(LinExpr(th.diag(1)) - 1.0);

    SECTION("C = diag(1, 2) gives 3 at the identity")
    {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
        c(0, 0) = 1.0;
        c(1, 1) = 2.0;
        p.maximize(th.trace_with(c));
        const auto sol = solve(p);
        REQUIRE(sol.status == Status::optimal);
        CHECK_THAT(sol.objective_value, WithinAbs(3.0, 1e-7));
        const auto x = sol.value(th);
        CHECK_THAT(x(0, 0).real(), WithinAbs(1.0, 1e-8));
        CHECK_THAT(x(1, 1).real(), WithinAbs(1.0, 1e-8));
    }

    SECTION("coupled C matches brute force over rho in the unit disk")
    {
        Eigen::MatrixXcd c(2, 2);
        c << 1.0, std::complex<double>(0.5, -1.0), std::complex<double>(0.5, 1.0), 2.0;
        p.maximize(th.trace_with(c));
        const auto sol = solve(p);
        REQUIRE(sol.status == Status::optimal);

        // Theta = [[1, rho], [conj(rho), 1]] is PSD iff |rho| <= 1.
        double best = -1e300;
        for (int i = 0; i <= 400; ++i) {
            const double r = i / 400.0;
            for (int k = 0; k < 720; ++k) {
                const double a = 2.0 * M_PI * k / 720.0;
                Eigen::MatrixXcd x(2, 2);
                const std::complex<double> rho = std::polar(r, a);
                x << 1.0, rho, std::conj(rho), 1.0;
                best = std::max(best, re_trace(c, x));
            }
        }
        CHECK(sol.objective_value >= best - 1e-7);
        CHECK_THAT(sol.objective_value, WithinAbs(best, 1e-4));
        CHECK_THAT(sol.objective_value, WithinAbs(3.0 + 2.0 * std::abs(std::complex<double>(0.5, 1.0)), 1e-7));
    }
}

TEST_CASE("conic - exponential cone encodes ln z")
{
    ConicProgram p;
    const Var u = p.add_scalar("u");
    const Var z = p.add_scalar("z");
    p.add_exp(u, 1.0, z);  // u <= ln z
    p.add_nonneg(std::exp(1.0) - LinExpr(z));
    p.maximize(u);
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK_THAT(sol.value(u), WithinAbs(1.0, 1e-7));
}

TEST_CASE("conic - rotated cone bounds 1/p")
{
    // minimize w + p subject to w p >= 1 -> w = p = 1
    ConicProgram p;
    const Var w = p.add_scalar("w");
    const Var q = p.add_scalar("p");
    p.add_rotated_soc(w, q, {LinExpr(std::sqrt(2.0))});
    p.maximize(-(LinExpr(w) + LinExpr(q)));
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK_THAT(sol.value(w), WithinAbs(1.0, 1e-6));
    CHECK_THAT(sol.value(q), WithinAbs(1.0, 1e-6));
}

TEST_CASE("conic - trace feasibility of unit-diagonal PSD matrices")
{
    for (int n : {2, 4}) {
        auto build = [n](double trace_floor) {
            ConicProgram p;
            const auto th = p.add_hermitian("theta", n);
            p.add_hermitian_psd(th.as_affine());
            LinExpr tr;
            for (int i = 0; i < n; ++i) {
                p.add_equality(LinExpr(th.diag(i)) - 1.0);
                tr += LinExpr(th.diag(i));
            }
            p.add_nonneg(tr - trace_floor);
            return std::make_pair(p, th);
        };
        {
            auto [p, th] = build(n);
            const auto f = check_feasibility(p);
            REQUIRE(f.feasible);
            CHECK(f.residual <= 1e-7);
            const auto x = th.value(f.witness);
            for (int i = 0; i < n; ++i) CHECK_THAT(x(i, i).real(), WithinAbs(1.0, 1e-7));
        }
        {
            auto [p, th] = build(n * n + 1.0);
            const auto f = check_feasibility(p);
            CHECK_FALSE(f.feasible);
            CHECK(f.status == Status::infeasible);
        }
    }
}

TEST_CASE("conic - solve reports infeasible programs")
{
    ConicProgram p;
    const Var x = p.add_scalar("x");
    p.add_nonneg(LinExpr(x) - 2.0);
    p.add_nonneg(1.0 - LinExpr(x));
    p.maximize(x);
    const auto sol = solve(p);
    CHECK(sol.status == Status::infeasible);
}

TEST_CASE("conic - feasibility agrees with zero-objective solve on random instances")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    int feasible_count = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ConicProgram p;
        const auto x = p.add_vector("x", 3);
        for (int r = 0; r < 6; ++r) {
            LinExpr e(nd(rng));
            for (const auto& v : x) e.add_term(v, nd(rng));
            p.add_nonneg(e);
        }
        p.add_soc(3.0, {LinExpr(x[0]), LinExpr(x[1]), LinExpr(x[2])});
        const auto f = check_feasibility(p);
        const auto s = solve(p);
        REQUIRE(f.status != Status::numerical_failure);
        CHECK(f.feasible == (s.status == Status::optimal));
        if (f.feasible) {
            ++feasible_count;
            CHECK(f.residual <= 1e-7);
        }
    }
    CHECK(feasible_count > 0);
    CHECK(feasible_count < 20);
}

TEST_CASE("conic - early stop returns the current interior point")
{
    ConicProgram p;
    const Var t = p.add_scalar("t");
    p.add_nonneg(10.0 - LinExpr(t));
    p.add_nonneg(t);
    p.maximize(t);
    SolveOptions opt;
    int calls = 0;
    opt.early_stop = [&](const ConicSolution& s) {
        ++calls;
        return s.objective_value > 5.0;
    };
    const auto sol = solve(p, opt);
    REQUIRE(sol.status == Status::optimal);
    CHECK(calls >= 1);
    CHECK(sol.objective_value > 5.0);
    CHECK(sol.objective_value < 10.0);
}

TEST_CASE("conic - duality gap on random SOC/EXP/PSD programs")
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4;
        ConicProgram p;
        const auto x = p.add_vector("x", n);
        auto random_expr = [&](double c0, double scale) {
            LinExpr e(c0);
            for (const auto& v : x) e.add_term(v, scale * nd(rng));
            return e;
        };

        std::vector<int> ids;
        std::vector<LinExpr> ball;
        for (const auto& v : x) ball.emplace_back(v);
        ids.push_back(p.add_soc(2.0, ball));
        ids.push_back(p.add_soc(random_expr(3.0, 0.3), {random_expr(0.5, 1.0), random_expr(-0.5, 1.0)}));
        ids.push_back(p.add_exp(random_expr(0.0, 0.5), 1.0, random_expr(2.0, 0.5)));
        ids.push_back(p.add_rotated_soc(random_expr(1.0, 0.2), random_expr(1.0, 0.2), {random_expr(0.2, 0.5)}));

        SymmetricAffine m;
        m.constant = Eigen::MatrixXd::Identity(3, 3);
        for (const auto& v : x) {
            Eigen::MatrixXd f = Eigen::MatrixXd::NullaryExpr(3, 3, [&]() { return 0.4 * nd(rng); });
            f = 0.5 * (f + f.transpose()).eval();
            m.terms.emplace_back(v.index, f.sparseView());
        }
        const SymmetricAffine m_copy = m;
        ids.push_back(p.add_psd(std::move(m)));

        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = nd(rng);
        LinExpr obj;
        for (int i = 0; i < n; ++i) obj.add_term(x[static_cast<std::size_t>(i)], c[i]);
        p.maximize(obj);

        const auto sol = solve(p);
        REQUIRE(sol.status == Status::optimal);

        // Lagrangian bound: c'x <= sum_i <z_i, h_i> whenever c + sum_i G_i' z_i = 0.
        Eigen::VectorXd stationarity = c;
        double dual_value = 0.0;
        const auto& cons = p.constraints();
        for (int id : ids) {
            const auto& con = cons[static_cast<std::size_t>(id)];
            const auto& z = sol.duals[static_cast<std::size_t>(id)];
            if (con.type == ConeType::psd) {
                Eigen::Map<const Eigen::MatrixXd> zm(z.data(), 3, 3);
                dual_value += (zm.cwiseProduct(m_copy.constant)).sum();
                for (const auto& [i, f] : m_copy.terms) stationarity[i] += (zm.cwiseProduct(Eigen::MatrixXd(f))).sum();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(zm);
                CHECK(es.eigenvalues().minCoeff() > 0.0);
                continue;
            }
            for (std::size_t r = 0; r < con.rows.size(); ++r) {
                dual_value += z[static_cast<Eigen::Index>(r)] * con.rows[r].constant();
                for (const auto& [i, a] : con.rows[r].terms()) stationarity[i] += z[static_cast<Eigen::Index>(r)] * a;
            }
            if (con.type == ConeType::exp) {
                // dual exponential cone: u < 0, -u exp(v/u) <= e w
                CHECK(z[0] < 0.0);
                CHECK(-z[0] * std::exp(z[1] / z[0]) <= std::exp(1.0) * z[2]);
            }
        }
        CHECK(stationarity.cwiseAbs().maxCoeff() < 1e-6);
        const double primal = sol.objective_value;
        CHECK(std::abs(dual_value - primal) <= 1e-6 * (1.0 + std::abs(primal)));
    }
}

TEST_CASE("conic - malformed programs are rejected")
{
    ConicProgram p;
    const Var a = p.add_scalar("a");
    ConicProgram other;
    other.add_scalar("b");
    const Var b2 = other.add_scalar("c");
    CHECK_THROWS_AS(p.add_nonneg(LinExpr(b2)), std::invalid_argument);
    CHECK_THROWS_AS(p.add_nonneg(LinExpr(a, std::nan(""))), std::invalid_argument);
    HermitianAffine bad;
    bad.constant = Eigen::MatrixXcd::Zero(2, 3);
    CHECK_THROWS_AS(p.add_hermitian_psd(bad), std::invalid_argument);
}

TEST_CASE("conic - program dump writes JSON")
{
    ConicProgram p;
    const Var a = p.add_scalar("a");
    p.add_nonneg(1.0 - LinExpr(a));
    p.maximize(a);
    const auto path = std::filesystem::temp_directory_path() / "irswet_conic_dump.json";
    p.dump_json(path.string());
    const auto j = nlohmann::json::parse(std::ifstream(path));
    CHECK(j["variables"][0]["name"] == "a");
    CHECK(j["constraints"][0]["type"] == "nonneg");
    std::filesystem::remove(path);
}
