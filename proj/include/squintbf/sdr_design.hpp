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

// Squint-compensating constant-modulus beamformer design by semidefinite
// relaxation.
//
// The lifted program over X = w w^H (M x M Hermitian) and the threshold
// gamma >= 0 reads
//
//   maximize    sum_f  q_f  a_f^H X a_f                  (main-lobe grid)
//   subject to  gamma <= a_f^H X a_f <= 10^(eps/10) gamma (main-lobe grid)
//               a_f^H X a_f >= 0                          (side-lobe grid)
//               sum_f  s_f  a_f^H X a_f <= zeta gamma       (side-lobe grid)
//               X(j, j) = 1/M,  X >= 0
//
// with trapezoidal weights q, s that each sum to one. X is handed to the
// real solver as Y = [[Re X, -Im X], [Im X, Re X]] (side 2M) and gamma as
// one extra diagonal entry, so the solver variable has side 2M + 1.
// Since tr(A Y_A) = 2 tr(H X) for embedded pairs, every complex trace is
// carried by half the embedded matrix.

#pragma once

#include "squintbf/array_model.hpp"
#include "squintbf/conic_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace squintbf {

using Eigen::MatrixXcd;

struct DesignSpec {
    ArrayConfig array;
    BandSpec band;
    double beam_focus = 0.0;
    double ripple_db = 5.0;
    double leakage_ratio = 0.1;
    double eigen_threshold = 0.1;
    std::size_t n_main_samples = 192;
    std::size_t n_side_samples = 128;
    conic::SolverSettings solver = default_solver();

    static conic::SolverSettings default_solver()
    {
        conic::SolverSettings s;
        s.tol = 1e-7;
        return s;
    }

    void validate() const
    {
        check_virtual_angle(beam_focus, "DesignSpec");
        if (!(ripple_db > 0.0))
            throw DomainError("DesignSpec: ripple_db must be > 0");
        if (!(leakage_ratio > 0.0 && leakage_ratio < 1.0))
            throw DomainError("DesignSpec: leakage_ratio must lie in (0, 1)");
        if (!(eigen_threshold > 0.0 && eigen_threshold < 1.0))
            throw DomainError("DesignSpec: eigen_threshold must lie in (0, 1)");
        if (n_main_samples < 8 || n_side_samples < 8)
            throw DomainError("DesignSpec: need at least 8 main and 8 side samples");
        if (std::abs(band.carrier_freq() - array.carrier_freq()) > 1e-9 * array.carrier_freq())
            throw DomainError("DesignSpec: band and array carrier frequencies differ");
    }
};

class DesignError : public std::runtime_error {
public:
    DesignError(const std::string& what, std::optional<conic::ConeSolution> report = std::nullopt)
        : std::runtime_error(what), report_(std::move(report))
    {
    }
    const std::optional<conic::ConeSolution>& report() const { return report_; }

private:
    std::optional<conic::ConeSolution> report_;
};

struct FrequencyGrid {
    std::vector<double> freqs;
    std::vector<double> weights;   // quadrature weights, sum to 1
};

namespace detail {

inline std::vector<double> trapezoid(std::size_t n)
{
    std::vector<double> w(n, 1.0 / static_cast<double>(n - 1));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

// [[Re H, -Im H], [Im H, Re H]].
inline Eigen::MatrixXd embed(const MatrixXcd& H)
{
    const Eigen::Index M = H.rows();
    Eigen::MatrixXd E(2 * M, 2 * M);
    E.topLeftCorner(M, M) = H.real();
    E.topRightCorner(M, M) = -H.imag();
    E.bottomLeftCorner(M, M) = H.imag();
    E.bottomRightCorner(M, M) = H.real();
    return E;
}

inline MatrixXcd outer(const SteeringVector& a) { return a.entries() * a.entries().adjoint(); }

} // namespace detail

// Main-lobe sample count actually used. Over a band that spans a small
// fraction of a beamwidth the rows are nearly parallel and the relaxation
// becomes degenerate, so sampling is capped at 128 points per beamwidth
// (1/M in phase cycles), with at least 3 points.
inline std::size_t effective_main_samples(const DesignSpec& spec)
{
    const double M = static_cast<double>(spec.array.num_elements());
    const double beamwidths = M * std::abs(spec.array.spatial_freq(spec.band.bandwidth(), spec.beam_focus));
    const double needed = std::ceil(128.0 * beamwidths) + 1.0;
    return std::min(spec.n_main_samples, static_cast<std::size_t>(std::max(3.0, needed)));
}

// Uniform main-lobe grid over [f_c - B/2, f_c + B/2] scaled by `refine`
// (refine = 4 gives 4(n-1)+1 points through the same nodes).
inline FrequencyGrid main_lobe_grid(const DesignSpec& spec, std::size_t refine = 1)
{
    const std::size_t n = refine * (effective_main_samples(spec) - 1) + 1;
    return {detail::linspace(spec.band.main_lo(), spec.band.main_hi(), n), detail::trapezoid(n)};
}

// Two uniform segments [f_c - f_0, f_c - B/2] and [f_c + B/2, f_c + f_0]
// with trapezoidal weights normalized over the side-lobe width 2 f_0 - B.
inline FrequencyGrid side_lobe_grid(const DesignSpec& spec, std::size_t refine = 1)
{
    const std::size_t left = (spec.n_side_samples + 1) / 2;
    const std::size_t right = spec.n_side_samples - left;
    const BandSpec& b = spec.band;
    const double seg = b.half_extent() - 0.5 * b.bandwidth();
    FrequencyGrid g;
    for (const auto& [lo, hi, count] : {std::tuple{b.range_lo(), b.main_lo(), left},
                                        std::tuple{b.main_hi(), b.range_hi(), right}}) {
        const std::size_t n = refine * (count - 1) + 1;
        const auto f = detail::linspace(lo, hi, n);
        const auto w = detail::trapezoid(n);
        for (std::size_t i = 0; i < n; ++i) {
            g.freqs.push_back(f[i]);
            g.weights.push_back(w[i] * seg / b.side_width());
        }
    }
    return g;
}

struct AssembledProblem {
    conic::ConeProgram program;
    FrequencyGrid main_grid;
    FrequencyGrid side_grid;
    Eigen::Index num_elements = 0;
    Eigen::Index gamma_index = 0;
};

// Inequality rows, in order: n lower ripple bounds, n upper ripple bounds
// (n = effective_main_samples), n_side nonnegativity rows, one leakage-average row. Equalities:
// the M diagonal entries.
inline AssembledProblem assemble_problem(const DesignSpec& spec)
{
    spec.validate();
    const auto M = static_cast<Eigen::Index>(spec.array.num_elements());
    const Eigen::Index n = 2 * M + 1;
    const Eigen::Index g = 2 * M;
    const double theta0 = spec.beam_focus;

    AssembledProblem out{conic::ConeProgram(n), main_lobe_grid(spec), side_lobe_grid(spec), M, g};

    // Resolution check in inter-element phase cycles: the pattern varies on
    // the scale 1/M, samples must be denser than half of that.
    const double limit = 0.5 / static_cast<double>(M);
    const BandSpec& band = spec.band;
    const std::size_t left = (spec.n_side_samples + 1) / 2;
    const std::size_t right = spec.n_side_samples - left;
    const double seg = band.half_extent() - 0.5 * band.bandwidth();
    const double main_step = band.bandwidth() / static_cast<double>(effective_main_samples(spec) - 1);
    const double side_step = seg / static_cast<double>(std::min(left, right) - 1);
    if (std::abs(spec.array.spatial_freq(std::max(main_step, side_step), theta0)) > limit)
        throw DesignError("assemble_problem: frequency grid too coarse to resolve the band edges "
                          "(increase n_main_samples / n_side_samples)");

    const double kappa = std::pow(10.0, spec.ripple_db / 10.0);
    auto half_embedded = [&](const MatrixXcd& H) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
        E.topLeftCorner(2 * M, 2 * M) = 0.5 * detail::embed(H);
        return E;
    };

    std::vector<Eigen::MatrixXd> main_mats;
    MatrixXcd objective = MatrixXcd::Zero(M, M);
    for (std::size_t i = 0; i < out.main_grid.freqs.size(); ++i) {
        const MatrixXcd A = detail::outer(steering_vector(spec.array, out.main_grid.freqs[i], theta0));
        objective += out.main_grid.weights[i] * A;
        main_mats.push_back(half_embedded(A));
    }
    out.program.objective = half_embedded(objective);

    for (const auto& E : main_mats) {
        Eigen::MatrixXd G = E;
        G(g, g) = -1.0;
        out.program.add_inequality(std::move(G), 0.0, conic::kInf);
    }
    for (const auto& E : main_mats) {
        Eigen::MatrixXd G = E;
        G(g, g) = -kappa;
        out.program.add_inequality(std::move(G), -conic::kInf, 0.0);
    }
    MatrixXcd side_avg = MatrixXcd::Zero(M, M);
    for (std::size_t i = 0; i < out.side_grid.freqs.size(); ++i) {
        const MatrixXcd A = detail::outer(steering_vector(spec.array, out.side_grid.freqs[i], theta0));
        side_avg += out.side_grid.weights[i] * A;
        out.program.add_inequality(half_embedded(A), 0.0, conic::kInf);
    }
    {
        Eigen::MatrixXd G = half_embedded(side_avg);
        G(g, g) = -spec.leakage_ratio;
        out.program.add_inequality(std::move(G), -conic::kInf, 0.0);
    }
    for (Eigen::Index j = 0; j < M; ++j) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
        E(j, j) = 1.0;
        E(j + M, j + M) = 1.0;
        out.program.add_equality(std::move(E), 2.0 / static_cast<double>(M));
    }
    return out;
}

// Hermitian X from the real embedded block of a solver variable.
inline MatrixXcd recover_hermitian(const Eigen::MatrixXd& Y, Eigen::Index M)
{
    const Eigen::MatrixXd re = 0.5 * (Y.topLeftCorner(M, M) + Y.block(M, M, M, M));
    const Eigen::MatrixXd im = 0.5 * (Y.block(M, 0, M, M) - Y.block(0, M, M, M));
    MatrixXcd X(M, M);
    X.real() = re;
    X.imag() = im;
    return 0.5 * (X + X.adjoint());
}

struct EigenSplit {
    Eigen::VectorXd values;        // descending
    MatrixXcd vectors;             // columns, first nonzero entry real positive
    std::size_t effective_rank = 0;
};

// Descending eigendecomposition and the count of eigenvalues above xi.
inline EigenSplit split_eigen(const MatrixXcd& X, double xi)
{
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(X);
    if (es.info() != Eigen::Success)
        throw NumericalError("split_eigen: eigendecomposition failed");
    const Eigen::Index M = X.rows();
    EigenSplit out;
    out.values.resize(M);
    out.vectors.resize(M, M);
    for (Eigen::Index i = 0; i < M; ++i) {
        const Eigen::Index src = M - 1 - i;
        out.values[i] = es.eigenvalues()[src];
        Eigen::VectorXcd u = es.eigenvectors().col(src);
        const double cut = 1e-9 * u.norm();
        for (Eigen::Index m = 0; m < M; ++m)
            if (std::abs(u[m]) > cut) {
                u *= std::conj(u[m]) / std::abs(u[m]);
                break;
            }
        out.vectors.col(i) = u;
    }
    for (Eigen::Index i = 0; i < M; ++i)
        if (out.values[i] > xi)
            ++out.effective_rank;
    return out;
}

struct SdrSolution {
    MatrixXcd x_star;
    double gamma_star = 0.0;
    double objective = 0.0;
    EigenSplit eigen;
    conic::ConeSolution report;
};

inline SdrSolution solve_relaxation(const DesignSpec& spec)
{
    const AssembledProblem prob = assemble_problem(spec);
    conic::ConeSolution sol = conic::solve(prob.program, spec.solver);
    if (sol.status != conic::SolveStatus::Optimal) {
        std::ostringstream os;
        os << "relaxation not solved: status " << conic::to_string(sol.status) << " after "
           << sol.iterations << " iterations (primal " << sol.primal_residual << ", dual "
           << sol.dual_residual << ")";
        if (!sol.diagnostic.empty())
            os << ": " << sol.diagnostic;
        throw DesignError(os.str(), std::move(sol));
    }
    SdrSolution out;
    out.x_star = recover_hermitian(sol.X, prob.num_elements);
    out.gamma_star = sol.X(prob.gamma_index, prob.gamma_index);
    out.objective = sol.objective_value;
    out.eigen = split_eigen(out.x_star, spec.eigen_threshold);
    out.report = std::move(sol);
    return out;
}

struct DirectMode {
    WeightVector w;
};

struct DiversityMode {
    WeightVector w1;
    WeightVector w2;
    std::size_t first = 0;   // eigenvector indices, 0-based
    std::size_t second = 1;
};

struct DesignOutcome {
    std::variant<DirectMode, DiversityMode> mode;
    std::vector<double> main_freqs {};
    std::vector<double> achieved_main_gain_db {};
    double achieved_ripple_db = 0.0;
    // Side-lobe average gain over the minimum main-lobe gain, after projection.
    double achieved_leakage_ratio = 0.0;
    // Relaxation summary.
    double relaxation_objective = 0.0;
    double gamma_star = 0.0;
    std::vector<double> eigenvalues {};
    std::size_t effective_rank = 0;
    conic::SolveStatus solver_status = conic::SolveStatus::Optimal;
    std::size_t solver_iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;

    bool is_direct() const { return std::holds_alternative<DirectMode>(mode); }
};

// Gain delivered by an outcome along a steering vector: the plain beam
// pattern for Direct, the STBC virtual pattern for Diversity.
inline double outcome_gain(const DesignOutcome& out, const SteeringVector& a)
{
    if (const auto* d = std::get_if<DirectMode>(&out.mode))
        return beam_gain(d->w, a);
    const auto& v = std::get<DiversityMode>(out.mode);
    return virtual_beam_gain(v.w1, v.w2, a);
}

// Beamformer extraction from a solved relaxation: rank-1 gives the phase-projected
// principal eigenvector, otherwise the best pair among the r effective
// eigenvectors under the main-lobe average of the virtual pattern.
inline DesignOutcome select_beamformers(const SdrSolution& sdr, const DesignSpec& spec)
{
    const EigenSplit& es = sdr.eigen;
    const std::size_t r = es.effective_rank;
    if (r == 0)
        throw DesignError("select_beamformers: no eigenvalue above the threshold (trace lost?)");

    const FrequencyGrid main = main_lobe_grid(spec);
    std::vector<SteeringVector> steer;
    for (double f : main.freqs)
        steer.push_back(steering_vector(spec.array, f, spec.beam_focus));

    DesignOutcome out{DirectMode{phase_projection(es.vectors.col(0))}, {}, {}, 0.0, 0.0, 0.0, 0.0, {}, 0,
                      sdr.report.status, sdr.report.iterations, sdr.report.primal_residual,
                      sdr.report.dual_residual};
    if (r > 1) {
        std::vector<WeightVector> cand;
        std::vector<std::vector<double>> gains;
        for (std::size_t i = 0; i < r; ++i) {
            cand.push_back(phase_projection(es.vectors.col(static_cast<Eigen::Index>(i))));
            std::vector<double> gi;
            for (const auto& a : steer)
                gi.push_back(beam_gain(cand.back(), a));
            gains.push_back(std::move(gi));
        }
        double best = -1.0;
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j) {
                double avg = 0.0;
                for (std::size_t k = 0; k < steer.size(); ++k)
                    avg += main.weights[k] * 0.5 * (gains[i][k] + gains[j][k]);
                if (avg > best) {
                    best = avg;
                    bi = i;
                    bj = j;
                }
            }
        out.mode = DiversityMode{cand[bi], cand[bj], bi, bj};
    }

    double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
    out.main_freqs = main.freqs;
    for (const auto& a : steer) {
        const double gval = outcome_gain(out, a);
        gmin = std::min(gmin, gval);
        gmax = std::max(gmax, gval);
        out.achieved_main_gain_db.push_back(to_db(gval));
    }
    out.achieved_ripple_db = to_db(gmax / gmin);
    const FrequencyGrid side = side_lobe_grid(spec);
    double side_avg = 0.0;
    for (std::size_t i = 0; i < side.freqs.size(); ++i)
        side_avg += side.weights[i] * outcome_gain(out, steering_vector(spec.array, side.freqs[i], spec.beam_focus));
    out.achieved_leakage_ratio = side_avg / gmin;

    out.relaxation_objective = sdr.objective;
    out.gamma_star = sdr.gamma_star;
    out.eigenvalues.assign(es.values.data(), es.values.data() + es.values.size());
    out.effective_rank = r;
    return out;
}

inline DesignOutcome run_algorithm1(const DesignSpec& spec)
{
    return select_beamformers(solve_relaxation(spec), spec);
}

// Post-hoc check of a relaxation against its constraints on a refined grid.
// Violations are scaled by the Frobenius norm of the corresponding solver row.
struct FeasibilityAudit {
    double diag_error = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;
    double ripple_lower = 0.0;
    double ripple_upper = 0.0;
    double side_nonneg = 0.0;
    double leakage = 0.0;
    bool grid_warning = false;

    double worst_sampled() const { return std::max({ripple_lower, ripple_upper, side_nonneg, leakage}); }
};

inline FeasibilityAudit audit_feasibility(const SdrSolution& sdr, const DesignSpec& spec,
                                          std::size_t refine = 4)
{
    FeasibilityAudit a;
    const MatrixXcd& X = sdr.x_star;
    const double M = static_cast<double>(X.rows());
    const double gamma = sdr.gamma_star;
    const double kappa = std::pow(10.0, spec.ripple_db / 10.0);
    a.diag_error = (X.diagonal().real().array() - 1.0 / M).abs().maxCoeff();
    a.trace_error = std::abs(X.trace().real() - 1.0);
    a.min_eigenvalue = Eigen::SelfAdjointEigenSolver<MatrixXcd>(X, Eigen::EigenvaluesOnly).eigenvalues()[0];

    // ||0.5 embed(a a^H)||_F^2 = 0.5 ||a a^H||_F^2 = 0.5 M^2.
    const double base = 0.5 * M * M;
    auto trace_at = [&](double f) {
        const SteeringVector s = steering_vector(spec.array, f, spec.beam_focus);
        return (s.entries().adjoint() * X * s.entries())(0, 0).real();
    };
    const FrequencyGrid main = main_lobe_grid(spec, refine);
    for (double f : main.freqs) {
        const double t = trace_at(f);
        a.ripple_lower = std::max(a.ripple_lower, (gamma - t) / std::sqrt(base + 1.0));
        a.ripple_upper = std::max(a.ripple_upper, (t - kappa * gamma) / std::sqrt(base + kappa * kappa));
    }
    const FrequencyGrid side = side_lobe_grid(spec, refine);
    MatrixXcd avg = MatrixXcd::Zero(X.rows(), X.cols());
    double side_avg = 0.0;
    for (std::size_t i = 0; i < side.freqs.size(); ++i) {
        const double t = trace_at(side.freqs[i]);
        a.side_nonneg = std::max(a.side_nonneg, -t / std::sqrt(base));
        side_avg += side.weights[i] * t;
        avg += side.weights[i] * detail::outer(steering_vector(spec.array, side.freqs[i], spec.beam_focus));
    }
    const double avg_norm = std::sqrt(0.5 * avg.squaredNorm() + spec.leakage_ratio * spec.leakage_ratio);
    a.leakage = std::max(0.0, (side_avg - spec.leakage_ratio * gamma) / avg_norm);
    a.grid_warning = a.worst_sampled() > 10.0 * spec.solver.tol;
    return a;
}

} // namespace squintbf
