// SPDX-License-Identifier: Apache-2.0
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

// Oracle checks run by `selftest`: closed-form array gain, STBC algebra,
// and the conic solver against brute force.

#pragma once

#include "squintbf/array_model.hpp"
#include "squintbf/conic_solver.hpp"
#include "squintbf/oracle.hpp"
#include "squintbf/stbc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace squintbf {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<CheckResult> checks;

    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

namespace detail {

inline WeightVector random_weights(std::mt19937_64& rng, std::size_t M)
{
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    std::vector<double> p(M);
    for (auto& x : p)
        x = ph(rng);
    return WeightVector::from_phases(p);
}

inline std::string fmt_sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

} // namespace detail

// max <C, X> subject to diag(X) = 1, X PSD.
inline conic::ConeProgram elliptope_program(const Eigen::MatrixXd& C)
{
    const Eigen::Index n = C.rows();
    conic::ConeProgram prog(n);
    prog.objective = C;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
        E(i, i) = 1.0;
        prog.add_equality(E, 1.0);
    }
    return prog;
}

// Closed-form fine-beam gain against the explicit inner product.
inline CheckResult check_dirichlet(const ArrayConfig& cfg, const BandSpec& band, std::uint64_t seed,
                                   std::size_t samples = 1000, double tol = 1e-9)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> th(-1.0, 1.0);
    std::uniform_real_distribution<double> fr(band.range_lo(), band.range_hi());
    std::size_t ok = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double theta0 = th(rng), f = fr(rng);
        const double direct = beam_gain(fine_beam_weights(cfg, theta0), steering_vector(cfg, f, theta0));
        const double err = std::abs(dirichlet_gain(cfg, theta0, f) - direct);
        worst = std::max(worst, err);
        if (err <= tol)
            ++ok;
    }
    return {"dirichlet", ok == samples,
            std::to_string(ok) + "/" + std::to_string(samples) + " within " + detail::fmt_sci(tol) +
                " (worst " + detail::fmt_sci(worst) + ")"};
}

// Gamma^H Gamma is diagonal and matched combining returns the symbols.
inline CheckResult check_stbc(const ArrayConfig& cfg, const BandSpec& band, std::uint64_t seed,
                              std::size_t draws = 10000)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> th(-1.0, 1.0);
    std::uniform_real_distribution<double> fr(band.range_lo(), band.range_hi());
    std::normal_distribution<double> nd;
    const std::size_t M = cfg.num_elements();
    double worst_off = 0.0, worst_rel = 0.0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const WeightVector w1 = detail::random_weights(rng, M), w2 = detail::random_weights(rng, M);
        const SteeringVector a = steering_vector(cfg, fr(rng), th(rng));
        const cdouble s1(nd(rng), nd(rng)), s2(nd(rng), nd(rng));
        const EquivalentChannel ch = equivalent_channel(w1, w2, a);
        const Eigen::Matrix2cd G = ch.gamma.adjoint() * ch.gamma;
        worst_off = std::max({worst_off, std::abs(G(0, 1)), std::abs(G(1, 0))});
        const CombinerOutput out = combine(ch, receive(w1, w2, a, encode(s1, s2)));
        if (out.unrecoverable) {
            ++skipped;
            continue;
        }
        const Eigen::Vector2cd s(s1, s2);
        const double rel = (out.estimates / ch.processing_gain() - s).norm() / s.norm();
        worst_rel = std::max(worst_rel, rel);
    }
    const bool pass = worst_off < 1e-12 && worst_rel < 1e-10 && skipped == 0;
    return {"stbc", pass,
            std::to_string(draws) + " draws, max off-diagonal " + detail::fmt_sci(worst_off) +
                ", max decode error " + detail::fmt_sci(worst_rel)};
}

// Random 3x3 elliptope instances against the grid oracle, plus the 2x2
// instance with known optimum 2.
inline CheckResult check_solver(const conic::SolverSettings& settings, std::uint64_t seed,
                                std::size_t instances = 100)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    std::size_t failed = 0;
    for (std::size_t t = 0; t < instances; ++t) {
        Eigen::Matrix3d C;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j)
                C(i, j) = C(j, i) = u(rng);
        const conic::ConeSolution sol = conic::solve(elliptope_program(C), settings);
        const double err = std::abs(sol.objective_value - oracle::elliptope3_max(C));
        worst = std::max(worst, err);
        if (sol.status != conic::SolveStatus::Optimal || !(err <= 1e-3))
            ++failed;
    }
    Eigen::MatrixXd C2(2, 2);
    C2 << 0.0, 1.0, 1.0, 0.0;
    const conic::ConeSolution two = conic::solve(elliptope_program(C2), settings);
    const double err2 = std::abs(two.objective_value - 2.0);
    const bool two_ok = two.status == conic::SolveStatus::Optimal && err2 <= 1e-5;
    return {"solver", failed == 0 && two_ok,
            std::to_string(instances - failed) + "/" + std::to_string(instances) +
                " elliptope instances within 1e-3 (worst " + detail::fmt_sci(worst) + "), 2x2 error " +
                detail::fmt_sci(err2)};
}

inline SelftestReport run_selftest(const ArrayConfig& cfg, const BandSpec& band,
                                   const conic::SolverSettings& settings, std::uint64_t seed)
{
    // Independent streams per suite so adding draws to one leaves the others alone.
    SelftestReport r;
    r.checks.push_back(check_dirichlet(cfg, band, seed));
    r.checks.push_back(check_stbc(cfg, band, seed + 1));
    r.checks.push_back(check_solver(settings, seed + 2));
    return r;
}

} // namespace squintbf
