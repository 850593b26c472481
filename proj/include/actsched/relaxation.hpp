#pragma once

#include <utility>
#include <vector>

#include "actsched/riccati.hpp"
#include "actsched/solver.hpp"

namespace actsched {

/// Column layout of the relaxed program: per stage, the actuator weights
/// followed by svec(K_mid), svec(P_mid), svec(P). The terminal P is
/// eliminated (it is the constant inverse of the terminal Q).
struct RelaxationLayout {
    int n = 0, N = 0, T = 0;
    Eigen::Index q = 0;  // svec length of an n x n block

    static RelaxationLayout for_model(const SystemModel& model) {
        RelaxationLayout l;
        l.n = model.state_dim;
        l.N = model.num_actuators;
        l.T = model.horizon;
        l.q = svec_size(model.state_dim);
        return l;
    }

    Eigen::Index stage_stride() const { return N + 3 * q; }
    Eigen::Index theta_offset(int t) const { return t * stage_stride(); }
    Eigen::Index kmid_offset(int t) const { return t * stage_stride() + N; }
    Eigen::Index pmid_offset(int t) const { return t * stage_stride() + N + q; }
    Eigen::Index p_offset(int t) const { return t * stage_stride() + N + 2 * q; }
    Eigen::Index num_vars() const { return static_cast<Eigen::Index>(T) * stage_stride(); }
};

namespace detail {

inline Matrix actuation_gram(const SystemModel& model, int t, int j) {
    const Matrix& b = model.B[t][j];
    if (b.cols() == 0) return Matrix::Zero(model.state_dim, model.state_dim);
    return b * solve_spd(model.R[t][j], Matrix(b.transpose()));
}

}  // namespace detail

/// Build the convex relaxation of the scheduling problem as a standard-form
/// conic program. Per stage the constraints are: the inverse-space coupling
/// equality P_mid = P_next + sum_i theta_i V_i (V_i = B R^{-1} B^T), the
/// group-size simplex sum(theta) = group, theta bounds on the nonnegative
/// cone (the upper bound only when the group size exceeds one), and two
/// order-2n Schur-complement PSD blocks tying K_mid to 1/P_mid and P to the
/// propagated value. Objective: sum_t tr(K_mid wbar_{t-1}) plus the linear
/// actuation-cost term.
inline ConicProblem build_relaxed_program(const SystemModel& model) {
    model.validate();
    const RelaxationLayout l = RelaxationLayout::for_model(model);
    const int n = l.n, N = l.N, T = l.T;
    const Eigen::Index q = l.q;
    const Eigen::Index q2 = svec_size(2 * n);

    const Matrix qt_inv = inverse_spd(model.Q_terminal);

    // svec coordinate bookkeeping for an order-2n block
    auto svec_index = [](Eigen::Index order, Eigen::Index row, Eigen::Index col) {
        // column-major lower triangle; requires row >= col
        return col * order - col * (col - 1) / 2 + (row - col);
    };

    std::vector<Triplet> trips;
    std::vector<double> rhs_entries;
    ConeLayout cones;
    Eigen::Index row_at = 0;

    Vector cost = Vector::Zero(l.num_vars());
    for (int t = 0; t < T; ++t) {
        Vector wv = svec(model.wbar(t));
        cost.segment(l.kmid_offset(t), q) = wv;
        for (int i = 0; i < N; ++i) cost[l.theta_offset(t) + i] = model.actuation_cost[t][i];
    }

    Vector rhs;
    std::vector<double> b;

    // coupling equalities, one zero block of q rows per stage
    for (int t = 0; t < T; ++t) {
        for (Eigen::Index k = 0; k < q; ++k)
            trips.emplace_back(row_at + k, l.pmid_offset(t) + k, 1.0);
        if (t < T - 1) {
            for (Eigen::Index k = 0; k < q; ++k)
                trips.emplace_back(row_at + k, l.p_offset(t + 1) + k, -1.0);
        }
        for (int i = 0; i < N; ++i) {
            Vector vi = svec(SymMatrix(detail::actuation_gram(model, t, i)));
            for (Eigen::Index k = 0; k < q; ++k)
                if (vi[k] != 0.0) trips.emplace_back(row_at + k, l.theta_offset(t) + i, -vi[k]);
        }
        if (t == T - 1) {
            Vector bq = svec(SymMatrix(qt_inv));
            for (Eigen::Index k = 0; k < q; ++k) b.push_back(bq[k]);
        } else {
            for (Eigen::Index k = 0; k < q; ++k) b.push_back(0.0);
        }
        cones.blocks.push_back(ConeLayout::zero(q));
        row_at += q;
    }

    // group-size simplex equalities
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < N; ++i) trips.emplace_back(row_at, l.theta_offset(t) + i, 1.0);
        b.push_back(static_cast<double>(model.group_size[t]));
        row_at += 1;
    }
    cones.blocks.push_back(ConeLayout::zero(T));

    // theta bounds
    Eigen::Index bound_rows = 0;
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < N; ++i) {
            trips.emplace_back(row_at, l.theta_offset(t) + i, -1.0);
            b.push_back(0.0);
            ++row_at;
            ++bound_rows;
        }
        if (model.group_size[t] > 1) {
            // the simplex alone no longer implies theta <= 1
            for (int i = 0; i < N; ++i) {
                trips.emplace_back(row_at, l.theta_offset(t) + i, 1.0);
                b.push_back(1.0);
                ++row_at;
                ++bound_rows;
            }
        }
    }
    cones.blocks.push_back(ConeLayout::nonneg(bound_rows));

    // per stage: inverse-pairing block [[K_mid, I], [I, P_mid]] >= 0 and the
    // propagation block [[Qinv - P, Qinv A^T], [A Qinv, P_mid + A Qinv A^T]] >= 0
    static const double kSqrt2 = std::sqrt(2.0);
    for (int t = 0; t < T; ++t) {
        // pairing block
        {
            Eigen::Index k = 0;
            for (Eigen::Index col = 0; col < n; ++col)
                for (Eigen::Index row = col; row < n; ++row) {
                    trips.emplace_back(row_at + svec_index(2 * n, row, col), l.kmid_offset(t) + k, -1.0);
                    trips.emplace_back(row_at + svec_index(2 * n, n + row, n + col), l.pmid_offset(t) + k, -1.0);
                    ++k;
                }
            std::vector<double> blockb(static_cast<size_t>(q2), 0.0);
            for (Eigen::Index i = 0; i < n; ++i)
                blockb[static_cast<size_t>(svec_index(2 * n, n + i, i))] = kSqrt2;  // identity off-diagonal blocks
            b.insert(b.end(), blockb.begin(), blockb.end());
            cones.blocks.push_back(ConeLayout::psd(2 * n));
            row_at += q2;
        }
        // propagation block
        {
            const Matrix q_inv = inverse_spd(model.Q[t]);
            Matrix c2(2 * n, 2 * n);
            c2.topLeftCorner(n, n) = q_inv;
            c2.topRightCorner(n, n) = q_inv * model.A[t].transpose();
            c2.bottomLeftCorner(n, n) = model.A[t] * q_inv;
            c2.bottomRightCorner(n, n) = model.A[t] * q_inv * model.A[t].transpose();
            Eigen::Index k = 0;
            for (Eigen::Index col = 0; col < n; ++col)
                for (Eigen::Index row = col; row < n; ++row) {
                    trips.emplace_back(row_at + svec_index(2 * n, row, col), l.p_offset(t) + k, 1.0);
                    trips.emplace_back(row_at + svec_index(2 * n, n + row, n + col), l.pmid_offset(t) + k, -1.0);
                    ++k;
                }
            Vector blockb = svec(SymMatrix(Matrix(0.5 * (c2 + c2.transpose()))));
            for (Eigen::Index i = 0; i < q2; ++i) b.push_back(blockb[i]);
            cones.blocks.push_back(ConeLayout::psd(2 * n));
            row_at += q2;
        }
    }

    ConicProblem p;
    p.cost = std::move(cost);
    p.rhs = Eigen::Map<Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    p.constraints.resize(row_at, l.num_vars());
    p.constraints.setFromTriplets(trips.begin(), trips.end());
    p.constraints.makeCompressed();
    p.cones = cones;
    p.validate();
    return p;
}

/// Relaxed reference solution: per-stage actuator weights plus the reference
/// matrices, with solver diagnostics.
struct RelaxedSolution {
    Matrix theta;                  // T x N, clamped into [0, 1]
    std::vector<SymMatrix> k_mid;  // reference value matrices
    std::vector<SymMatrix> p_mid;
    std::vector<SymMatrix> p;      // t = 0..T-1 (terminal is the constant inverse of terminal Q)
    double objective = 0.0;
    SolveStatus status = SolveStatus::MaxIter;
    double primal_residual = 0.0, dual_residual = 0.0, gap_residual = 0.0;
    int iterations = 0;
};

/// Re-encode a solution as a primal vector (inverse of extraction).
inline Vector pack_solution(const SystemModel& model, const RelaxedSolution& sol) {
    const RelaxationLayout l = RelaxationLayout::for_model(model);
    Vector x(l.num_vars());
    for (int t = 0; t < l.T; ++t) {
        for (int i = 0; i < l.N; ++i) x[l.theta_offset(t) + i] = sol.theta(t, i);
        x.segment(l.kmid_offset(t), l.q) = svec(sol.k_mid[t]);
        x.segment(l.pmid_offset(t), l.q) = svec(sol.p_mid[t]);
        x.segment(l.p_offset(t), l.q) = svec(sol.p[t]);
    }
    return x;
}

/// Objective recomputed from the stored matrices and weights.
inline double relaxed_cost(const SystemModel& model, const RelaxedSolution& sol) {
    double obj = 0.0;
    for (int t = 0; t < model.horizon; ++t) {
        obj += (sol.k_mid[t].mat() * model.wbar(t).mat()).trace();
        for (int i = 0; i < model.num_actuators; ++i)
            obj += model.actuation_cost[t][i] * sol.theta(t, i);
    }
    return obj;
}

/// Worst scaled constraint violation of a solution, rechecked directly from
/// the matrices (independently of the conic encoding).
inline double max_constraint_violation(const SystemModel& model, const RelaxedSolution& sol) {
    const int T = model.horizon, N = model.num_actuators, n = model.state_dim;
    const Matrix qt_inv = inverse_spd(model.Q_terminal);
    double worst = 0.0;
    for (int t = 0; t < T; ++t) {
        Matrix mix = Matrix::Zero(n, n);
        for (int i = 0; i < N; ++i) mix += sol.theta(t, i) * detail::actuation_gram(model, t, i);
        const Matrix& p_next = (t == T - 1) ? qt_inv : sol.p[t + 1].mat();
        worst = std::max(worst, (sol.p_mid[t].mat() - p_next - mix).cwiseAbs().maxCoeff() /
                                    (1.0 + p_next.cwiseAbs().maxCoeff()));
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            sum += sol.theta(t, i);
            worst = std::max(worst, std::max(0.0, -sol.theta(t, i)));
            worst = std::max(worst, std::max(0.0, sol.theta(t, i) - 1.0));
        }
        worst = std::max(worst, std::abs(sum - model.group_size[t]));

        Matrix g1(2 * n, 2 * n);
        g1.topLeftCorner(n, n) = sol.k_mid[t].mat();
        g1.bottomRightCorner(n, n) = sol.p_mid[t].mat();
        g1.topRightCorner(n, n) = Matrix::Identity(n, n);
        g1.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
        SymMatrix block1{std::move(g1)};
        worst = std::max(worst, std::max(0.0, -min_eig(block1)) / (1.0 + frob_norm(block1)));

        const Matrix q_inv = inverse_spd(model.Q[t]);
        Matrix g2(2 * n, 2 * n);
        g2.topLeftCorner(n, n) = q_inv - sol.p[t].mat();
        g2.topRightCorner(n, n) = q_inv * model.A[t].transpose();
        g2.bottomLeftCorner(n, n) = model.A[t] * q_inv;
        g2.bottomRightCorner(n, n) = sol.p_mid[t].mat() + model.A[t] * q_inv * model.A[t].transpose();
        SymMatrix block2{Matrix(0.5 * (g2 + g2.transpose()))};
        worst = std::max(worst, std::max(0.0, -min_eig(block2)) / (1.0 + frob_norm(block2)));
    }
    return worst;
}

/// Unpack a solver result. Tiny bound violations (within solver accuracy) are
/// clamped; anything larger fails the feasibility recheck.
inline RelaxedSolution extract_solution(const SystemModel& model, const ConicProblem& problem,
                                        const SolverResult& result) {
    if (!result.usable())
        throw SolverError(
            std::string("extract_solution: solver status ") + to_string(result.status),
            result.primal_residual, result.dual_residual, result.gap_residual);
    const double loosen = (result.status == SolveStatus::SolvedInaccurate) ? 100.0 : 1.0;
    const RelaxationLayout l = RelaxationLayout::for_model(model);
    if (result.primal.size() != l.num_vars())
        throw ValidationError("extract_solution: solution size does not match the model");

    RelaxedSolution sol;
    sol.status = result.status;
    sol.primal_residual = result.primal_residual;
    sol.dual_residual = result.dual_residual;
    sol.gap_residual = result.gap_residual;
    sol.iterations = result.iterations;

    sol.theta.resize(l.T, l.N);
    double clamp_total = 0.0;
    for (int t = 0; t < l.T; ++t) {
        double sum = 0.0;
        for (int i = 0; i < l.N; ++i) {
            double v = result.primal[l.theta_offset(t) + i];
            const double clamped = std::min(1.0, std::max(0.0, v));
            clamp_total += std::abs(clamped - v);
            sol.theta(t, i) = clamped;
            sum += clamped;
        }
        if (std::abs(sum - model.group_size[t]) > 1e-6 * loosen)
            throw SolverError("extract_solution: stage " + std::to_string(t) +
                                  " weights violate the group-size equality",
                              result.primal_residual, result.dual_residual, result.gap_residual);
    }
    if (clamp_total > 1e-4 * loosen)
        throw SolverError("extract_solution: weights leave [0,1] beyond solver accuracy",
                          result.primal_residual, result.dual_residual, result.gap_residual);

    sol.k_mid.reserve(l.T);
    sol.p_mid.reserve(l.T);
    sol.p.reserve(l.T);
    for (int t = 0; t < l.T; ++t) {
        sol.k_mid.push_back(smat(result.primal.segment(l.kmid_offset(t), l.q), l.n));
        sol.p_mid.push_back(smat(result.primal.segment(l.pmid_offset(t), l.q), l.n));
        sol.p.push_back(smat(result.primal.segment(l.p_offset(t), l.q), l.n));
    }

    sol.objective = relaxed_cost(model, sol);
    if (std::abs(sol.objective - result.objective) >
        1e-9 * (1.0 + std::abs(result.objective)) + 2.0 * clamp_total * (1.0 + problem.cost.cwiseAbs().maxCoeff()))
        throw SolverError("extract_solution: recomputed objective deviates from the solver's",
                          result.primal_residual, result.dual_residual, result.gap_residual);

    const double viol = max_constraint_violation(model, sol);
    if (viol > 1e-5 * loosen)
        throw SolverError("extract_solution: feasibility recheck failed (violation " +
                              std::to_string(viol) + ")",
                          result.primal_residual, result.dual_residual, result.gap_residual);
    return sol;
}

/// Feasible reconstruction: rebuild the inverse-space recursion from the
/// relaxed solution's increments. The result satisfies the exact recursions,
/// never costs more than the relaxed solution, and sandwiches it in the
/// semidefinite order.
struct TightenedTrajectory {
    std::vector<SymMatrix> k_mid;  // T
    std::vector<SymMatrix> p_mid;  // T
    std::vector<SymMatrix> p;      // T+1, includes the terminal inverse
    std::vector<SymMatrix> v;      // T, implied actuation mixtures
    double objective = 0.0;
    double min_ordering_margin = 0.0;  // most negative eigenvalue across the three orderings
};

inline TightenedTrajectory tighten(const SystemModel& model, const RelaxedSolution& sol) {
    const int T = model.horizon;
    TightenedTrajectory out;
    out.k_mid.resize(T);
    out.p_mid.resize(T);
    out.p.resize(T + 1);
    out.v.resize(T);
    out.p[T] = SymMatrix(inverse_spd(model.Q_terminal));

    double margin = std::numeric_limits<double>::infinity();
    for (int t = T - 1; t >= 0; --t) {
        const Matrix& p_next_ref = (t == T - 1) ? out.p[T].mat() : sol.p[t + 1].mat();
        out.v[t] = SymMatrix(Matrix(sol.p_mid[t].mat() - p_next_ref));
        out.p_mid[t] = SymMatrix(Matrix(out.p[t + 1].mat() + out.v[t].mat()));
        out.k_mid[t] = SymMatrix(inverse_spd(out.p_mid[t]));
        out.p[t] = SymMatrix(inverse_spd(h_step(model, t, out.k_mid[t])));

        margin = std::min(margin, min_eig(SymMatrix(Matrix(out.p_mid[t].mat() - sol.p_mid[t].mat()))));
        margin = std::min(margin, min_eig(SymMatrix(Matrix(sol.k_mid[t].mat() - out.k_mid[t].mat()))));
        margin = std::min(margin, min_eig(SymMatrix(Matrix(out.p[t].mat() - sol.p[t].mat()))));
    }
    out.min_ordering_margin = margin;

    out.objective = 0.0;
    for (int t = 0; t < T; ++t) {
        out.objective += (out.k_mid[t].mat() * model.wbar(t).mat()).trace();
        for (int i = 0; i < model.num_actuators; ++i)
            out.objective += model.actuation_cost[t][i] * sol.theta(t, i);
    }
    return out;
}

}  // namespace actsched
