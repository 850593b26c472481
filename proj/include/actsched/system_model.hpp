#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actsched/sym_matrix.hpp"

namespace actsched {

/// Per-stage set of active actuator indices (0-based internally; stage t
/// holds exactly the group size many distinct indices).
struct Schedule {
    std::vector<std::vector<int>> stages;

    int horizon() const { return static_cast<int>(stages.size()); }

    /// The single-actuator schedule that uses actuator j at every stage.
    static Schedule constant(int horizon, int j, int group = 1) {
        Schedule s;
        s.stages.assign(horizon, {});
        for (auto& st : s.stages) {
            st.resize(group);
            for (int k = 0; k < group; ++k) st[k] = j + k;
        }
        return s;
    }
};

/// Finite-horizon stochastic linear-quadratic scheduling instance.
///
/// Stages run t = 0..T-1 with terminal index T. The initial-state covariance
/// is stored separately from the process covariances, so W before stage t is
/// w_before(t): w_init for t = 0 and process[t-1] afterwards.
struct SystemModel {
    int horizon = 0;        // T
    int state_dim = 0;      // n
    int num_actuators = 0;  // N

    std::vector<int> group_size;           // per stage, 1..N
    std::vector<Matrix> A;                 // [t], n x n
    std::optional<Matrix> A_terminal;      // optional extra stage matrix for bound evaluation
    std::vector<std::vector<Matrix>> B;    // [t][j], n x m_j
    std::vector<SymMatrix> Q;              // [t], > 0
    SymMatrix Q_terminal;                  // > 0
    std::vector<std::vector<SymMatrix>> R; // [t][j], > 0
    SymMatrix W_init;                      // covariance of x_0, >= 0
    std::vector<SymMatrix> W;              // [t], process noise covariance, >= 0
    std::vector<std::vector<double>> actuation_cost;  // [t][j], >= 0

    int input_dim(int t, int j) const { return static_cast<int>(B[t][j].cols()); }

    /// Noise covariance in effect before stage t (t = 0 -> initial covariance).
    const SymMatrix& w_before(int t) const { return t == 0 ? W_init : W[t - 1]; }

    /// A_t W_{t-1} A_t^T, the covariance weight of the mid-stage trace form.
    SymMatrix wbar(int t) const {
        return SymMatrix(Matrix(A[t] * w_before(t).mat() * A[t].transpose()));
    }

    std::vector<SymMatrix> all_wbar() const {
        std::vector<SymMatrix> out;
        out.reserve(horizon);
        for (int t = 0; t < horizon; ++t) out.push_back(wbar(t));
        return out;
    }

    /// Dynamics matrix indexed one past the last stage falls back to the
    /// optional terminal matrix, defaulting to the last stage's.
    const Matrix& a_at(int t) const {
        if (t < horizon) return A[t];
        return A_terminal ? *A_terminal : A.back();
    }

    /// Schedule-independent part of the quadratic cost: sum_t tr(Q_t W_{t-1}).
    double base_cost() const {
        double r = 0.0;
        for (int t = 0; t < horizon; ++t) r += (Q[t].mat() * w_before(t).mat()).trace();
        r += (Q_terminal.mat() * W[horizon - 1].mat()).trace();
        return r;
    }

    void validate() const {
        auto fail = [](const std::string& what) { throw ValidationError("SystemModel: " + what); };
        if (horizon < 1) fail("horizon must be >= 1");
        if (state_dim < 1) fail("state dimension must be >= 1");
        if (num_actuators < 1) fail("at least one actuator required");
        if (static_cast<int>(group_size.size()) != horizon) fail("group_size must have one entry per stage");
        for (int t = 0; t < horizon; ++t)
            if (group_size[t] < 1 || group_size[t] > num_actuators)
                fail("group_size[" + std::to_string(t) + "] out of range [1, N]");
        auto check_stage_list = [&](size_t have, const char* name) {
            if (static_cast<int>(have) != horizon) fail(std::string(name) + " must have one entry per stage");
        };
        check_stage_list(A.size(), "A");
        check_stage_list(B.size(), "B");
        check_stage_list(Q.size(), "Q");
        check_stage_list(R.size(), "R");
        check_stage_list(W.size(), "W");
        check_stage_list(actuation_cost.size(), "costs");
        for (int t = 0; t < horizon; ++t) {
            if (A[t].rows() != state_dim || A[t].cols() != state_dim)
                fail("A[" + std::to_string(t) + "] must be " + std::to_string(state_dim) + "x" + std::to_string(state_dim));
            if (!A[t].allFinite()) fail("A[" + std::to_string(t) + "] has non-finite entries");
            if (static_cast<int>(B[t].size()) != num_actuators) fail("B[" + std::to_string(t) + "] must list every actuator");
            if (static_cast<int>(R[t].size()) != num_actuators) fail("R[" + std::to_string(t) + "] must list every actuator");
            if (static_cast<int>(actuation_cost[t].size()) != num_actuators)
                fail("costs[" + std::to_string(t) + "] must list every actuator");
            for (int j = 0; j < num_actuators; ++j) {
                if (B[t][j].rows() != state_dim)
                    fail("B[" + std::to_string(t) + "][" + std::to_string(j) + "] row count != state dimension");
                if (!B[t][j].allFinite()) fail("B[" + std::to_string(t) + "][" + std::to_string(j) + "] has non-finite entries");
                if (R[t][j].dim() != B[t][j].cols())
                    fail("R[" + std::to_string(t) + "][" + std::to_string(j) + "] dimension != input width");
                if (B[t][j].cols() > 0 && min_eig(R[t][j]) <= 0.0)
                    fail("R[" + std::to_string(t) + "][" + std::to_string(j) + "] must be positive definite");
                if (actuation_cost[t][j] < 0.0)
                    fail("costs[" + std::to_string(t) + "][" + std::to_string(j) + "] must be >= 0");
            }
            if (Q[t].dim() != state_dim) fail("Q[" + std::to_string(t) + "] dimension mismatch");
            if (min_eig(Q[t]) <= 0.0) fail("Q[" + std::to_string(t) + "] must be positive definite");
            if (W[t].dim() != state_dim) fail("W[" + std::to_string(t) + "] dimension mismatch");
            if (min_eig(W[t]) < -1e-12) fail("W[" + std::to_string(t) + "] must be positive semidefinite");
        }
        if (Q_terminal.dim() != state_dim) fail("terminal Q dimension mismatch");
        if (min_eig(Q_terminal) <= 0.0) fail("terminal Q must be positive definite");
        if (W_init.dim() != state_dim) fail("initial covariance dimension mismatch");
        if (min_eig(W_init) < -1e-12) fail("initial covariance must be positive semidefinite");
        if (A_terminal && (A_terminal->rows() != state_dim || A_terminal->cols() != state_dim))
            fail("terminal A dimension mismatch");
    }

    void validate_schedule(const Schedule& s) const {
        if (s.horizon() != horizon)
            throw ValidationError("Schedule: expected " + std::to_string(horizon) + " stages, got " +
                                  std::to_string(s.horizon()));
        for (int t = 0; t < horizon; ++t) {
            const auto& set = s.stages[t];
            if (static_cast<int>(set.size()) != group_size[t])
                throw ValidationError("Schedule: stage " + std::to_string(t) + " must select exactly " +
                                      std::to_string(group_size[t]) + " actuators");
            for (size_t k = 0; k < set.size(); ++k) {
                if (set[k] < 0 || set[k] >= num_actuators)
                    throw ValidationError("Schedule: stage " + std::to_string(t) + " index out of range");
                for (size_t l = k + 1; l < set.size(); ++l)
                    if (set[k] == set[l])
                        throw ValidationError("Schedule: stage " + std::to_string(t) + " has duplicate indices");
            }
        }
    }
};

/// Convenience builder for time-invariant instances; every per-stage slot is
/// filled with the same data.
inline SystemModel make_time_invariant_model(int horizon, const Matrix& A,
                                             const std::vector<Matrix>& B, const SymMatrix& Q,
                                             const SymMatrix& Q_terminal,
                                             const std::vector<SymMatrix>& R, const SymMatrix& W_init,
                                             const SymMatrix& W, const std::vector<double>& cost,
                                             int group_size = 1) {
    SystemModel m;
    m.horizon = horizon;
    m.state_dim = static_cast<int>(A.rows());
    m.num_actuators = static_cast<int>(B.size());
    m.group_size.assign(horizon, group_size);
    m.A.assign(horizon, A);
    m.B.assign(horizon, B);
    m.Q.assign(horizon, Q);
    m.Q_terminal = Q_terminal;
    m.R.assign(horizon, R);
    m.W_init = W_init;
    m.W.assign(horizon, W);
    m.actuation_cost.assign(horizon, cost);
    m.validate();
    return m;
}

/// Sub-model keeping only the given actuators (0-based); used for
/// restricted-actuator experiments.
inline SystemModel restrict_actuators(const SystemModel& model, const std::vector<int>& keep) {
    if (keep.empty()) throw ValidationError("restrict_actuators: empty actuator set");
    for (int j : keep)
        if (j < 0 || j >= model.num_actuators)
            throw ValidationError("restrict_actuators: index out of range");
    SystemModel m = model;
    m.num_actuators = static_cast<int>(keep.size());
    for (int t = 0; t < model.horizon; ++t) {
        m.B[t].clear();
        m.R[t].clear();
        m.actuation_cost[t].clear();
        for (int j : keep) {
            m.B[t].push_back(model.B[t][j]);
            m.R[t].push_back(model.R[t][j]);
            m.actuation_cost[t].push_back(model.actuation_cost[t][j]);
        }
    }
    m.validate();
    return m;
}

/// Copy with all actuation costs zeroed; costs enter only objectives, never
/// dynamics, so this is the cost-free variant of the same plant.
inline SystemModel with_zero_actuation_costs(const SystemModel& model) {
    SystemModel m = model;
    for (auto& row : m.actuation_cost) std::fill(row.begin(), row.end(), 0.0);
    return m;
}

}  // namespace actsched
