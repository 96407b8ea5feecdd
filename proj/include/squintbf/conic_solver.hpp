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

// Real symmetric semidefinite programs in trace form:
//
//   maximize    <C, X>
//   subject to  <A_k, X>  = b_k                 (equalities)
//               lo_l <= <G_l, X> <= hi_l        (two-sided inequalities)
//               X >= 0                          (positive semidefinite)
//
// Two engines share one interface. The default is a primal-dual
// interior-point method (HKM direction, Mehrotra predictor-corrector)
// whose Schur complement exploits low-rank constraint matrices. The
// alternative is an operator-splitting iteration that alternates between
// the affine constraint set (slacks folded into the affine projection)
// and the PSD cone.
//
// All constraint rows are scaled to unit Frobenius norm before iterating;
// the reported primal residual is measured in that scaling.

#pragma once

#include "squintbf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace squintbf::conic {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ProgramError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EqualityConstraint {
    MatrixXd a;
    double b = 0.0;
};

struct InequalityConstraint {
    MatrixXd g;
    double lo = -kInf;
    double hi = kInf;
};

struct ConeProgram {
    Index dim = 0;
    MatrixXd objective;
    std::vector<EqualityConstraint> eq_constraints;
    std::vector<InequalityConstraint> ineq_constraints;

    explicit ConeProgram(Index n = 0) : dim(n), objective(MatrixXd::Zero(n, n)) {}

    void add_equality(MatrixXd a, double b) { eq_constraints.push_back({std::move(a), b}); }
    void add_inequality(MatrixXd g, double lo, double hi)
    {
        ineq_constraints.push_back({std::move(g), lo, hi});
    }

    // Throws ProgramError on a shape, symmetry or bound-order violation.
    void validate() const
    {
        if (dim < 1)
            throw ProgramError("ConeProgram: dim must be >= 1");
        auto check = [&](const MatrixXd& m, const std::string& what) {
            if (m.rows() != dim || m.cols() != dim)
                throw ProgramError("ConeProgram: " + what + " has wrong shape");
            if (!m.allFinite())
                throw ProgramError("ConeProgram: " + what + " has non-finite entries");
            const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
                throw ProgramError("ConeProgram: " + what + " is not symmetric");
        };
        check(objective, "objective");
        for (std::size_t k = 0; k < eq_constraints.size(); ++k) {
            check(eq_constraints[k].a, "equality " + std::to_string(k));
            if (!std::isfinite(eq_constraints[k].b))
                throw ProgramError("ConeProgram: equality rhs must be finite");
        }
        for (std::size_t l = 0; l < ineq_constraints.size(); ++l) {
            const auto& c = ineq_constraints[l];
            check(c.g, "inequality " + std::to_string(l));
            if (std::isnan(c.lo) || std::isnan(c.hi) || c.lo == kInf || c.hi == -kInf)
                throw ProgramError("ConeProgram: invalid bounds on inequality " + std::to_string(l));
            if (!(c.lo <= c.hi))
                throw ProgramError("ConeProgram: lo > hi on inequality " + std::to_string(l));
        }
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIterations: return "MaxIterations";
    }
    return "?";
}

enum class SolverMethod { InteriorPoint, Splitting };

struct SolverSettings {
    double tol = 1e-6;
    std::size_t max_iters = 50000;
    // Splitting: initial penalty rho (adapted on the fly).
    double step = 1.0;
    // Interior point: fraction of the distance to the cone boundary per step.
    double boundary_fraction = 0.98;
    SolverMethod method = SolverMethod::InteriorPoint;
};

struct ConeSolution {
    MatrixXd X;
    double objective_value = 0.0;
    double dual_objective = 0.0;
    SolveStatus status = SolveStatus::MaxIterations;
    double primal_residual = kInf;
    double dual_residual = kInf;
    double relative_gap = kInf;
    std::size_t iterations = 0;
    // Multipliers for the unscaled rows; the dual slack is
    // Z = sum_k y_k A_k + sum_l v_l G_l - C. v_l > 0 prices hi_l, v_l < 0 prices lo_l.
    VectorXd y_eq;
    VectorXd v_ineq;
    std::string diagnostic;
};

// Symmetric eigendecomposition (ascending). The tridiagonal QR can fail to
// converge on highly degenerate spectra; a shift by a multiple of the
// identity leaves the eigenvectors unchanged and usually cures it.
struct SymmetricEigen {
    VectorXd values;
    MatrixXd vectors;
};

inline SymmetricEigen symmetric_eigen(const MatrixXd& S, bool with_vectors = true)
{
    const int options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    const double scale = std::max(1e-300, S.cwiseAbs().maxCoeff());
    const MatrixXd I = MatrixXd::Identity(S.rows(), S.cols());
    for (double shift : {0.0, 0.5, 1.0, 2.0, -0.75}) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S + shift * scale * I, options);
        if (es.info() == Eigen::Success) {
            SymmetricEigen out;
            out.values = es.eigenvalues().array() - shift * scale;
            if (with_vectors)
                out.vectors = es.eigenvectors();
            return out;
        }
    }
    std::ostringstream os;
    os << "symmetric eigendecomposition failed (n=" << S.rows() << ", max|S|=" << scale
       << ", finite=" << S.allFinite() << ")";
    throw NumericalError(os.str());
}

// Frobenius-nearest PSD matrix: clip negative eigenvalues to zero.
inline MatrixXd project_psd(const MatrixXd& S)
{
    if (S.rows() != S.cols())
        throw DimensionError("project_psd: matrix must be square");
    const SymmetricEigen es = symmetric_eigen(S);
    const VectorXd lam = es.values.cwiseMax(0.0);
    MatrixXd P = es.vectors * lam.asDiagonal() * es.vectors.transpose();
    return 0.5 * (P + P.transpose());
}

inline double min_eigenvalue(const MatrixXd& S)
{
    return symmetric_eigen(S, false).values[0];
}

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double relative_gap = 0.0;
};

// Certificate quality of a primal/dual pair, computed from scratch.
// primal: worst violation of any row scaled to unit Frobenius norm, or of X >= 0.
// dual:   worst violation of Z >= 0 (and of multiplier signs against infinite
//         bounds), relative to 1 + ||C||_F.
inline Residuals evaluate_residuals(const ConeProgram& prog, const MatrixXd& X,
                                    const VectorXd& y_eq, const VectorXd& v_ineq)
{
    Residuals r;
    double primal = std::max(0.0, -min_eigenvalue(X));
    MatrixXd Z = -prog.objective;
    double dobj = 0.0;
    double sign_violation = 0.0;
    for (std::size_t k = 0; k < prog.eq_constraints.size(); ++k) {
        const auto& c = prog.eq_constraints[k];
        const double nrm = c.a.norm();
        const double val = (c.a.array() * X.array()).sum();
        if (nrm > 0.0)
            primal = std::max(primal, std::abs(val - c.b) / nrm);
        else
            primal = std::max(primal, std::abs(c.b));
        const double y = y_eq[static_cast<Index>(k)];
        Z += y * c.a;
        dobj += y * c.b;
    }
    for (std::size_t l = 0; l < prog.ineq_constraints.size(); ++l) {
        const auto& c = prog.ineq_constraints[l];
        const double nrm = c.g.norm();
        const double val = (c.g.array() * X.array()).sum();
        const double viol = std::max({0.0, c.lo - val, val - c.hi});
        primal = std::max(primal, nrm > 0.0 ? viol / nrm : viol);
        const double v = v_ineq[static_cast<Index>(l)];
        Z += v * c.g;
        if (v > 0.0) {
            if (std::isfinite(c.hi))
                dobj += v * c.hi;
            else
                sign_violation = std::max(sign_violation, v * std::max(nrm, 1.0));
        } else if (v < 0.0) {
            if (std::isfinite(c.lo))
                dobj += v * c.lo;
            else
                sign_violation = std::max(sign_violation, -v * std::max(nrm, 1.0));
        }
    }
    const double cscale = 1.0 + prog.objective.norm();
    r.primal = primal;
    r.dual = std::max(std::max(0.0, -min_eigenvalue(Z)), sign_violation) / cscale;
    r.primal_objective = (prog.objective.array() * X.array()).sum();
    r.dual_objective = dobj;
    r.relative_gap = std::abs(r.dual_objective - r.primal_objective) / (1.0 + std::abs(r.primal_objective));
    return r;
}

namespace detail {

// Inner product <A, B> for symmetric matrices.
inline double dot(const MatrixXd& A, const MatrixXd& B) { return (A.array() * B.array()).sum(); }

inline MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

// One scaled row of the standard form  <F_r, X> + slack_sign_r * s_r = rhs_r.
struct Row {
    std::size_t matrix = 0;   // index into the unique scaled matrices
    double rhs = 0.0;
    int slack_sign = 0;       // 0: equality, -1: lower bound, +1: upper bound
    double scale = 1.0;       // Frobenius norm of the unscaled matrix
    bool is_eq = false;
    std::size_t source = 0;   // index of the originating constraint
};

// Scaled, deduplicated view of a program shared by both engines.
struct StandardForm {
    Index n = 0;
    MatrixXd C;                      // unscaled objective (maximize)
    std::vector<MatrixXd> mats;      // unique unit-norm constraint matrices
    std::vector<Row> rows;
    std::size_t num_eq = 0;
    std::size_t num_ineq = 0;
    std::string trivial_infeasibility;

    static StandardForm build(const ConeProgram& prog)
    {
        StandardForm sf;
        sf.n = prog.dim;
        sf.C = prog.objective;
        sf.num_eq = prog.eq_constraints.size();
        sf.num_ineq = prog.ineq_constraints.size();
        for (std::size_t k = 0; k < prog.eq_constraints.size(); ++k) {
            const auto& c = prog.eq_constraints[k];
            const double nrm = c.a.norm();
            if (nrm == 0.0) {
                if (c.b != 0.0)
                    sf.trivial_infeasibility = "equality " + std::to_string(k) + " reads 0 = b with b != 0";
                continue;
            }
            sf.mats.push_back(c.a / nrm);
            sf.rows.push_back({sf.mats.size() - 1, c.b / nrm, 0, nrm, true, k});
        }
        for (std::size_t l = 0; l < prog.ineq_constraints.size(); ++l) {
            const auto& c = prog.ineq_constraints[l];
            const double nrm = c.g.norm();
            if (nrm == 0.0) {
                if (c.lo > 0.0 || c.hi < 0.0)
                    sf.trivial_infeasibility = "inequality " + std::to_string(l) + " excludes 0 = <0, X>";
                continue;
            }
            if (!std::isfinite(c.lo) && !std::isfinite(c.hi))
                continue;
            sf.mats.push_back(c.g / nrm);
            const std::size_t q = sf.mats.size() - 1;
            if (std::isfinite(c.lo))
                sf.rows.push_back({q, c.lo / nrm, -1, nrm, false, l});
            if (std::isfinite(c.hi))
                sf.rows.push_back({q, c.hi / nrm, +1, nrm, false, l});
        }
        return sf;
    }

    VectorXd apply(const MatrixXd& X) const
    {
        VectorXd per(static_cast<Index>(mats.size()));
        for (std::size_t q = 0; q < mats.size(); ++q)
            per[static_cast<Index>(q)] = dot(mats[q], X);
        VectorXd out(static_cast<Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            out[static_cast<Index>(r)] = per[static_cast<Index>(rows[r].matrix)];
        return out;
    }

    MatrixXd adjoint(const VectorXd& y) const
    {
        VectorXd per = VectorXd::Zero(static_cast<Index>(mats.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            per[static_cast<Index>(rows[r].matrix)] += y[static_cast<Index>(r)];
        MatrixXd out = MatrixXd::Zero(n, n);
        for (std::size_t q = 0; q < mats.size(); ++q)
            if (per[static_cast<Index>(q)] != 0.0)
                out += per[static_cast<Index>(q)] * mats[q];
        return out;
    }

    // Maps multipliers of the scaled rows (maximize convention) back to the
    // caller's unscaled equality / inequality multipliers.
    void unscale_multipliers(const VectorXd& y_rows, VectorXd& y_eq, VectorXd& v_ineq) const
    {
        y_eq = VectorXd::Zero(static_cast<Index>(num_eq));
        v_ineq = VectorXd::Zero(static_cast<Index>(num_ineq));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double val = y_rows[static_cast<Index>(r)] / rows[r].scale;
            if (rows[r].is_eq)
                y_eq[static_cast<Index>(rows[r].source)] += val;
            else
                v_ineq[static_cast<Index>(rows[r].source)] += val;
        }
    }
};

inline void finalize(const ConeProgram& prog, ConeSolution& sol)
{
    const Residuals r = evaluate_residuals(prog, sol.X, sol.y_eq, sol.v_ineq);
    sol.primal_residual = r.primal;
    sol.dual_residual = r.dual;
    sol.relative_gap = r.relative_gap;
    sol.objective_value = r.primal_objective;
    sol.dual_objective = r.dual_objective;
}

inline bool converged(const ConeProgram& prog, const MatrixXd& X, const VectorXd& y_eq,
                      const VectorXd& v_ineq, double tol)
{
    const Residuals r = evaluate_residuals(prog, X, y_eq, v_ineq);
    return r.primal <= tol && r.dual <= tol && r.relative_gap <= tol;
}

// Largest alpha with X + alpha*dX >= 0 (infinity if unbounded). X must be PD.
inline double max_psd_step(const MatrixXd& X, const MatrixXd& dX)
{
    Eigen::LLT<MatrixXd> llt(X);
    if (llt.info() != Eigen::Success)
        return 0.0;
    const MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(X.rows(), X.cols()));
    const MatrixXd S = sym(Linv * dX * Linv.transpose());
    const double lmin = min_eigenvalue(S);
    return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

inline double max_lp_step(const VectorXd& s, const VectorXd& ds)
{
    double a = kInf;
    for (Index i = 0; i < s.size(); ++i)
        if (ds[i] < 0.0)
            a = std::min(a, -s[i] / ds[i]);
    return a;
}

// Low-rank factorization F_q = V_q diag(d_q) V_q^T of every unique matrix,
// stacked column-wise.
struct LowRankStack {
    MatrixXd W;
    VectorXd d;
    std::vector<std::size_t> owner;

    static LowRankStack build(const StandardForm& sf)
    {
        std::vector<MatrixXd> vs;
        std::vector<VectorXd> ds;
        Index K = 0;
        for (const auto& F : sf.mats) {
            const SymmetricEigen es = symmetric_eigen(F);
            const VectorXd& lam = es.values;
            const double cut = 1e-13 * std::max(1.0, lam.cwiseAbs().maxCoeff());
            std::vector<Index> keep;
            for (Index i = 0; i < lam.size(); ++i)
                if (std::abs(lam[i]) > cut)
                    keep.push_back(i);
            MatrixXd V(F.rows(), static_cast<Index>(keep.size()));
            VectorXd dd(static_cast<Index>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j) {
                V.col(static_cast<Index>(j)) = es.vectors.col(keep[j]);
                dd[static_cast<Index>(j)] = lam[keep[j]];
            }
            K += V.cols();
            vs.push_back(std::move(V));
            ds.push_back(std::move(dd));
        }
        LowRankStack st;
        st.W.resize(sf.n, K);
        st.d.resize(K);
        Index col = 0;
        for (std::size_t q = 0; q < vs.size(); ++q) {
            const Index r = vs[q].cols();
            st.W.middleCols(col, r) = vs[q];
            st.d.segment(col, r) = ds[q];
            for (Index j = 0; j < r; ++j)
                st.owner.push_back(q);
            col += r;
        }
        return st;
    }
};

inline ConeSolution solve_interior_point(const ConeProgram& prog, const SolverSettings& set)
{
    ConeSolution sol;
    const StandardForm sf = StandardForm::build(prog);
    const Index n = sf.n;
    const Index R = static_cast<Index>(sf.rows.size());
    if (!sf.trivial_infeasibility.empty()) {
        sol.status = SolveStatus::Infeasible;
        sol.X = MatrixXd::Zero(n, n);
        sf.unscale_multipliers(VectorXd::Zero(R), sol.y_eq, sol.v_ineq);
        sol.diagnostic = sf.trivial_infeasibility;
        finalize(prog, sol);
        return sol;
    }

    // Slack bookkeeping: slack j belongs to row slack_row[j].
    std::vector<Index> slack_row;
    for (Index r = 0; r < R; ++r)
        if (sf.rows[static_cast<std::size_t>(r)].slack_sign != 0)
            slack_row.push_back(r);
    const Index p = static_cast<Index>(slack_row.size());
    VectorXd slack_sign(p);
    for (Index j = 0; j < p; ++j)
        slack_sign[j] = sf.rows[static_cast<std::size_t>(slack_row[static_cast<std::size_t>(j)])].slack_sign;

    VectorXd beta(R);
    for (Index r = 0; r < R; ++r)
        beta[r] = sf.rows[static_cast<std::size_t>(r)].rhs;
    const MatrixXd Chat = -sf.C;  // minimize <Chat, X>

    const LowRankStack st = LowRankStack::build(sf);
    const std::size_t U = sf.mats.size();
    // Column ranges of each unique matrix inside the stack.
    std::vector<Index> col_begin(U + 1, 0);
    for (std::size_t a = 0; a < st.owner.size(); ++a)
        col_begin[st.owner[a] + 1] += 1;
    for (std::size_t q = 0; q < U; ++q)
        col_begin[q + 1] += col_begin[q];

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double xi = std::max({10.0, sqrt_n, static_cast<double>(n) * (1.0 + (R > 0 ? beta.cwiseAbs().maxCoeff() : 0.0)) / 2.0});
    const double eta = std::max({10.0, sqrt_n, Chat.norm()});
    MatrixXd X = xi * MatrixXd::Identity(n, n);
    MatrixXd Z = eta * MatrixXd::Identity(n, n);
    VectorXd s = VectorXd::Constant(p, xi);
    VectorXd z = VectorXd::Constant(p, eta);
    VectorXd y = VectorXd::Zero(R);

    auto B_times = [&](const VectorXd& v) {  // R-vector from slack vector
        VectorXd out = VectorXd::Zero(R);
        for (Index j = 0; j < p; ++j)
            out[slack_row[static_cast<std::size_t>(j)]] += slack_sign[j] * v[j];
        return out;
    };
    auto Bt_times = [&](const VectorXd& v) {  // slack vector from R-vector
        VectorXd out(p);
        for (Index j = 0; j < p; ++j)
            out[j] = slack_sign[j] * v[slack_row[static_cast<std::size_t>(j)]];
        return out;
    };
    auto capture = [&]() {
        sol.X = X;
        sf.unscale_multipliers(-y, sol.y_eq, sol.v_ineq);
    };

    const double denom = static_cast<double>(n + p);
    int stalled = 0;
    // Best iterate by max(primal, dual, gap); returned when the run ends
    // without convergence.
    MatrixXd best_X = X;
    VectorXd best_y = y;
    double best_merit = kInf;
    std::size_t best_it = 0;
    for (std::size_t it = 0; it <= set.max_iters; ++it) {
        sol.iterations = it;
        capture();
        const Residuals res = evaluate_residuals(prog, sol.X, sol.y_eq, sol.v_ineq);
        if (res.primal <= set.tol && res.dual <= set.tol && res.relative_gap <= set.tol) {
            sol.status = SolveStatus::Optimal;
            break;
        }
        const double merit = std::max({res.primal, res.dual, res.relative_gap});
        if (merit < best_merit) {
            if (merit < 0.9 * best_merit)
                best_it = it;
            best_merit = merit;
            best_X = X;
            best_y = y;
        }
        if (it == set.max_iters) {
            sol.status = SolveStatus::MaxIterations;
            sol.diagnostic = "iteration limit reached";
            break;
        }
        if (it - best_it > 30) {
            sol.status = SolveStatus::MaxIterations;
            std::ostringstream os;
            os << "no progress over 30 iterations (best max residual " << best_merit << ")";
            sol.diagnostic = os.str();
            break;
        }

        const double mu = (detail::dot(X, Z) + s.dot(z)) / denom;
        const VectorXd Rp = beta - sf.apply(X) - B_times(s);
        const MatrixXd Rd = Chat - sf.adjoint(y) - Z;
        const VectorXd rd = -Bt_times(y) - z;

        // Farkas-type certificates.
        const double by = beta.dot(y);
        if (by > 0.0) {
            const double cert = std::max((Chat - Rd).norm(), rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0) / by;
            if (cert <= set.tol) {
                sol.status = SolveStatus::Infeasible;
                std::ostringstream os;
                os << "primal infeasible: Farkas multiplier with <b,y> = " << by
                   << ", normalized dual residual " << cert;
                sol.diagnostic = os.str();
                break;
            }
        }
        const double cx = detail::dot(Chat, X);
        if (cx < 0.0) {
            const double cert = (beta - Rp).norm() / -cx;
            if (cert <= set.tol) {
                sol.status = SolveStatus::Unbounded;
                std::ostringstream os;
                os << "dual infeasible: improving ray with <C,X> = " << -cx
                   << ", normalized primal residual " << cert;
                sol.diagnostic = os.str();
                break;
            }
        }

        Eigen::LLT<MatrixXd> zllt(Z);
        if (zllt.info() != Eigen::Success) {
            sol.status = SolveStatus::MaxIterations;
            sol.diagnostic = "dual slack lost definiteness";
            break;
        }
        const MatrixXd Zinv = sym(zllt.solve(MatrixXd::Identity(n, n)));

        // Schur complement  M_ij = <F_i, X F_j Z^-1>  via the low-rank stack.
        const MatrixXd XW = X * st.W;
        const MatrixXd ZW = Zinv * st.W;
        MatrixXd H = (st.W.transpose() * XW).cwiseProduct(st.W.transpose() * ZW);
        H = st.d.asDiagonal() * H * st.d.asDiagonal();
        MatrixXd Mq(static_cast<Index>(U), static_cast<Index>(U));
        for (std::size_t a = 0; a < U; ++a)
            for (std::size_t b = a; b < U; ++b) {
                const double v = H.block(col_begin[a], col_begin[b], col_begin[a + 1] - col_begin[a],
                                         col_begin[b + 1] - col_begin[b]).sum();
                Mq(static_cast<Index>(a), static_cast<Index>(b)) = v;
                Mq(static_cast<Index>(b), static_cast<Index>(a)) = v;
            }
        MatrixXd Msys(R, R);
        for (Index i = 0; i < R; ++i)
            for (Index j = 0; j < R; ++j)
                Msys(i, j) = Mq(static_cast<Index>(sf.rows[static_cast<std::size_t>(i)].matrix),
                                static_cast<Index>(sf.rows[static_cast<std::size_t>(j)].matrix));
        const VectorXd s_over_z = s.cwiseQuotient(z);
        for (Index j = 0; j < p; ++j)
            Msys(slack_row[static_cast<std::size_t>(j)], slack_row[static_cast<std::size_t>(j)]) += s_over_z[j];
        // Nearly parallel rows (dense sampling of a narrow band) make the
        // system close to singular; retry with a growing diagonal shift.
        Eigen::LDLT<MatrixXd> schur(Msys);
        const double shift_base = std::max(1.0, Msys.diagonal().cwiseAbs().maxCoeff()) * 1e-14;
        for (double shift = shift_base; schur.info() != Eigen::Success && shift < 1e6 * shift_base; shift *= 100.0) {
            MatrixXd reg = Msys;
            reg.diagonal().array() += shift;
            schur.compute(reg);
        }
        if (schur.info() != Eigen::Success) {
            sol.status = SolveStatus::MaxIterations;
            sol.diagnostic = "Schur complement factorization failed";
            break;
        }

        const MatrixXd XRdZ = sym(X * Rd * Zinv);
        struct Direction {
            MatrixXd dX, dZ;
            VectorXd dy, ds, dz;
        };
        auto direction = [&](const MatrixXd& Rc, const VectorXd& rc_s) {
            Direction d;
            const VectorXd rhs = Rp - sf.apply(Rc - XRdZ) - B_times(rc_s - s_over_z.cwiseProduct(rd));
            d.dy = schur.solve(rhs);
            for (int k = 0; k < 2; ++k)
                d.dy += schur.solve(rhs - Msys * d.dy);
            d.dZ = Rd - sf.adjoint(d.dy);
            d.dX = Rc - sym(X * d.dZ * Zinv);
            d.dz = rd - Bt_times(d.dy);
            d.ds = rc_s - s_over_z.cwiseProduct(d.dz);
            return d;
        };
        auto step_lengths = [&](const Direction& d, double frac) {
            double ap = std::min(max_psd_step(X, d.dX), max_lp_step(s, d.ds));
            double ad = std::min(max_psd_step(Z, d.dZ), max_lp_step(z, d.dz));
            return std::pair{std::min(1.0, frac * ap), std::min(1.0, frac * ad)};
        };

        // Predictor.
        const Direction aff = direction(-X, -s);
        const auto [ap_aff, ad_aff] = step_lengths(aff, 1.0);
        const double mu_aff = (detail::dot(X + ap_aff * aff.dX, Z + ad_aff * aff.dZ) +
                               (s + ap_aff * aff.ds).dot(z + ad_aff * aff.dz)) / denom;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector.
        const MatrixXd Rc = sym((sigma * mu * MatrixXd::Identity(n, n) - aff.dX * aff.dZ) * Zinv) - X;
        const VectorXd rc_s = (VectorXd::Constant(p, sigma * mu) - aff.ds.cwiseProduct(aff.dz)).cwiseQuotient(z) - s;
        const Direction dir = direction(Rc, rc_s);
        const double frac = std::min(set.boundary_fraction, 0.9 + 0.09 * std::min(ap_aff, ad_aff));
        const auto [ap, ad] = step_lengths(dir, std::max(frac, 0.5));
        if (ap < 1e-12 && ad < 1e-12) {
            if (++stalled > 5) {
                sol.status = SolveStatus::MaxIterations;
                sol.diagnostic = "interior point stalled (vanishing step length)";
                break;
            }
        } else {
            stalled = 0;
        }
        X = sym(X + ap * dir.dX);
        s += ap * dir.ds;
        y += ad * dir.dy;
        Z = sym(Z + ad * dir.dZ);
        z += ad * dir.dz;
    }
    if (sol.status == SolveStatus::MaxIterations && best_merit < kInf) {
        X = best_X;
        y = best_y;
    }
    capture();
    finalize(prog, sol);
    return sol;
}

inline ConeSolution solve_splitting(const ConeProgram& prog, const SolverSettings& set)
{
    ConeSolution sol;
    const StandardForm sf = StandardForm::build(prog);
    const Index n = sf.n;
    // Splitting works on one row per scaled matrix with box [lo, hi].
    const std::size_t U = sf.mats.size();
    const Index Ui = static_cast<Index>(U);
    VectorXd lo = VectorXd::Constant(Ui, -kInf), hi = VectorXd::Constant(Ui, kInf);
    std::vector<const Row*> any_row(U, nullptr);
    for (const auto& r : sf.rows) {
        const Index q = static_cast<Index>(r.matrix);
        any_row[r.matrix] = &r;
        if (r.slack_sign <= 0)
            lo[q] = r.rhs;
        if (r.slack_sign >= 0)
            hi[q] = r.rhs;
    }
    auto to_user = [&](const VectorXd& y_mats) {
        VectorXd y_eq = VectorXd::Zero(static_cast<Index>(sf.num_eq));
        VectorXd v = VectorXd::Zero(static_cast<Index>(sf.num_ineq));
        for (std::size_t q = 0; q < U; ++q) {
            const Row& r = *any_row[q];
            const double val = y_mats[static_cast<Index>(q)] / r.scale;
            (r.is_eq ? y_eq : v)[static_cast<Index>(r.source)] += val;
        }
        sol.y_eq = y_eq;
        sol.v_ineq = v;
    };
    if (!sf.trivial_infeasibility.empty()) {
        sol.status = SolveStatus::Infeasible;
        sol.X = MatrixXd::Zero(n, n);
        to_user(VectorXd::Zero(Ui));
        sol.diagnostic = sf.trivial_infeasibility;
        finalize(prog, sol);
        return sol;
    }

    auto apply = [&](const MatrixXd& X) {
        VectorXd out(Ui);
        for (std::size_t q = 0; q < U; ++q)
            out[static_cast<Index>(q)] = dot(sf.mats[q], X);
        return out;
    };
    auto adjoint = [&](const VectorXd& v) {
        MatrixXd out = MatrixXd::Zero(n, n);
        for (std::size_t q = 0; q < U; ++q)
            if (v[static_cast<Index>(q)] != 0.0)
                out += v[static_cast<Index>(q)] * sf.mats[q];
        return out;
    };
    MatrixXd gram(Ui, Ui);
    for (std::size_t a = 0; a < U; ++a)
        for (std::size_t b = a; b < U; ++b) {
            const double g = dot(sf.mats[a], sf.mats[b]);
            gram(static_cast<Index>(a), static_cast<Index>(b)) = g;
            gram(static_cast<Index>(b), static_cast<Index>(a)) = g;
        }
    const Eigen::LLT<MatrixXd> affine(MatrixXd::Identity(Ui, Ui) + gram);
    auto box = [&](const VectorXd& v) { return v.cwiseMax(lo).cwiseMin(hi); };

    double rho = set.step > 0.0 ? set.step : 1.0;
    const double alpha = 1.6;
    MatrixXd X = MatrixXd::Zero(n, n), Lam = MatrixXd::Zero(n, n);
    VectorXd u = box(VectorXd::Zero(Ui)), lam = VectorXd::Zero(Ui);
    VectorXd lam_prev = lam;
    double best = kInf;
    std::size_t since_best = 0;

    auto capture = [&]() {
        sol.X = X;
        to_user(rho * lam);
    };
    for (std::size_t it = 0; it < set.max_iters; ++it) {
        sol.iterations = it + 1;
        const MatrixXd rhsX = X - Lam + sf.C / rho + adjoint(u - lam);
        const MatrixXd Xt = rhsX - adjoint(affine.solve(apply(rhsX)));
        const VectorXd ut = apply(Xt);
        const MatrixXd Xh = alpha * Xt + (1.0 - alpha) * X;
        const VectorXd uh = alpha * ut + (1.0 - alpha) * u;
        const MatrixXd Xn = project_psd(Xh + Lam);
        const VectorXd un = box(uh + lam);
        Lam += Xh - Xn;
        lam_prev = lam;
        lam += uh - un;
        const double r_prim = std::max((Xt - Xn).norm(), (ut - un).norm());
        const double r_dual = rho * std::max((Xn - X).norm(), (un - u).norm());
        X = Xn;
        u = un;

        if ((it + 1) % 25 == 0) {
            capture();
            if (converged(prog, sol.X, sol.y_eq, sol.v_ineq, set.tol)) {
                sol.status = SolveStatus::Optimal;
                finalize(prog, sol);
                return sol;
            }
            // Diverging multipliers signal primal infeasibility.
            const VectorXd dy = rho * (lam - lam_prev);
            const double ndy = dy.norm();
            if (ndy > 1e-12) {
                double support = 0.0;
                bool finite = true;
                for (Index q = 0; q < Ui; ++q) {
                    if (dy[q] > 0.0) {
                        if (!std::isfinite(hi[q])) { finite = false; break; }
                        support += dy[q] * hi[q];
                    } else if (dy[q] < 0.0) {
                        if (!std::isfinite(lo[q])) { finite = false; break; }
                        support += dy[q] * lo[q];
                    }
                }
                const double lmin = min_eigenvalue(adjoint(dy));
                if (finite && lmin >= -1e-9 * ndy && support < -set.tol * ndy) {
                    sol.status = SolveStatus::Infeasible;
                    std::ostringstream os;
                    os << "primal infeasible: multiplier ray with support " << support / ndy;
                    sol.diagnostic = os.str();
                    finalize(prog, sol);
                    return sol;
                }
            }
        }
        // Penalty adaptation, with a restart when progress stalls.
        if ((it + 1) % 50 == 0) {
            double scale = 1.0;
            if (r_prim > 10.0 * r_dual)
                scale = 2.0;
            else if (r_dual > 10.0 * r_prim)
                scale = 0.5;
            const double combined = std::max(r_prim, r_dual);
            if (combined < 0.99 * best) {
                best = combined;
                since_best = 0;
            } else if (++since_best >= 20) {
                scale = (set.step > 0.0 ? set.step : 1.0) / rho;
                since_best = 0;
                best = combined;
            }
            if (scale != 1.0) {
                rho *= scale;
                Lam /= scale;
                lam /= scale;
                lam_prev /= scale;
            }
        }
    }
    sol.status = SolveStatus::MaxIterations;
    sol.diagnostic = "iteration limit reached";
    capture();
    finalize(prog, sol);
    return sol;
}

} // namespace detail

// Solves a program. Invalid programs are rejected with ProgramError before
// any iteration; an exhausted iteration budget returns the last iterate
// with status MaxIterations.
inline ConeSolution solve(const ConeProgram& prog, const SolverSettings& settings = {})
{
    prog.validate();
    if (!(settings.tol > 0.0))
        throw ProgramError("solve: tol must be > 0");
    if (settings.method == SolverMethod::Splitting)
        return detail::solve_splitting(prog, settings);
    return detail::solve_interior_point(prog, settings);
}

} // namespace squintbf::conic
