#pragma once

#include <span>
#include <string>
#include <vector>

#include "actsched/system_model.hpp"

namespace actsched {

/// Horizontal concatenation of the selected input matrices and the matching
/// block-diagonal weight; reproduces simultaneous actuation by the set.
struct CombinedInput {
    Matrix B;     // n x sum(m_j)
    Matrix R;     // block diagonal
};

inline CombinedInput combined_input(const SystemModel& model, int t, std::span<const int> actuators) {
    Eigen::Index total = 0;
    for (int j : actuators) total += model.B[t][j].cols();
    CombinedInput out;
    out.B.resize(model.state_dim, total);
    out.R = Matrix::Zero(total, total);
    Eigen::Index at = 0;
    for (int j : actuators) {
        const Eigen::Index w = model.B[t][j].cols();
        out.B.middleCols(at, w) = model.B[t][j];
        out.R.block(at, at, w, w) = model.R[t][j].mat();
        at += w;
    }
    return out;
}

/// Value-matrix shrink from actuating the given set at stage t:
/// M - M B (B^T M B + R)^{-1} B^T M. Symmetric, PSD, and never above M.
inline SymMatrix g_step(const SystemModel& model, int t, std::span<const int> actuators,
                        const SymMatrix& M) {
    if (actuators.empty()) throw ValidationError("g_step: empty actuator set");
    CombinedInput in = combined_input(model, t, actuators);
    if (in.B.cols() == 0) return M;  // zero-width input leaves the value matrix unchanged
    Matrix mb = M.mat() * in.B;
    SymMatrix s(Matrix(in.B.transpose() * mb + in.R));
    Matrix update = mb * solve_spd(s, mb.transpose());
    return SymMatrix(Matrix(M.mat() - update));
}

inline SymMatrix g_step(const SystemModel& model, int t, int actuator, const SymMatrix& M) {
    const int set[1] = {actuator};
    return g_step(model, t, std::span<const int>(set), M);
}

/// Open-loop propagation at stage t: A^T M A + Q_t.
inline SymMatrix h_step(const SystemModel& model, int t, const SymMatrix& M) {
    return SymMatrix(Matrix(model.A[t].transpose() * M.mat() * model.A[t] + model.Q[t].mat()));
}

/// Feedback gain for the actuator set given the next-stage value matrix:
/// L = -(B^T K B + R)^{-1} B^T K A.
inline Matrix gain(const SystemModel& model, int t, std::span<const int> actuators,
                   const SymMatrix& K_next) {
    CombinedInput in = combined_input(model, t, actuators);
    if (in.B.cols() == 0) return Matrix::Zero(0, model.state_dim);
    SymMatrix s(Matrix(in.B.transpose() * K_next.mat() * in.B + in.R));
    return -solve_spd(s, Matrix(in.B.transpose() * K_next.mat() * model.A[t]));
}

/// Inverse-space form of the actuation step: P + B R^{-1} B^T, which equals
/// g_step(P^{-1})^{-1} by the Woodbury identity.
inline SymMatrix woodbury_pform(const SystemModel& model, int t, std::span<const int> actuators,
                                const SymMatrix& P_next) {
    CombinedInput in = combined_input(model, t, actuators);
    if (in.B.cols() == 0) return P_next;
    Matrix rinv_bt = solve_spd(SymMatrix(in.R), Matrix(in.B.transpose()));
    return SymMatrix(Matrix(P_next.mat() + in.B * rinv_bt));
}

struct RiccatiTrajectory {
    std::vector<SymMatrix> cost_to_go;      // K_t, t = 0..T
    std::vector<SymMatrix> mid_cost_to_go;  // K_{t|t+1}, t = 0..T-1
    std::vector<Matrix> gains;              // for the scheduled set, t = 0..T-1
    std::vector<double> stage_traces;       // tr(K_{t|t+1} wbar_{t-1})
    double base_cost = 0.0;                 // schedule-independent trace sum
};

/// Backward recursion under a fixed schedule: terminal value Q_T, then
/// alternate the actuation shrink and the open-loop propagation.
inline RiccatiTrajectory riccati_backward(const SystemModel& model, const Schedule& schedule) {
    model.validate_schedule(schedule);
    const int T = model.horizon;
    RiccatiTrajectory traj;
    traj.cost_to_go.resize(T + 1);
    traj.mid_cost_to_go.resize(T);
    traj.gains.resize(T);
    traj.stage_traces.resize(T);
    traj.base_cost = model.base_cost();
    traj.cost_to_go[T] = model.Q_terminal;
    for (int t = T - 1; t >= 0; --t) {
        try {
            traj.mid_cost_to_go[t] = g_step(model, t, schedule.stages[t], traj.cost_to_go[t + 1]);
            traj.gains[t] = gain(model, t, schedule.stages[t], traj.cost_to_go[t + 1]);
        } catch (const NumericalError& e) {
            throw NumericalError("riccati_backward: stage " + std::to_string(t) + ": " + e.what());
        }
        traj.cost_to_go[t] = h_step(model, t, traj.mid_cost_to_go[t]);
        traj.stage_traces[t] = (traj.mid_cost_to_go[t].mat() * model.wbar(t).mat()).trace();
    }
    return traj;
}

struct CostReport {
    double quadratic = 0.0;   // expected state/input cost
    double actuation = 0.0;   // per-use actuator cost
    double total = 0.0;
    double base_cost = 0.0;
    std::vector<double> stage_traces;
};

/// Quadratic cost via the direct trace sum; cheap path shared by the samplers.
inline double quadratic_cost(const SystemModel& model, const RiccatiTrajectory& traj) {
    double j1 = 0.0;
    for (int t = 0; t < model.horizon; ++t)
        j1 += (traj.cost_to_go[t].mat() * model.w_before(t).mat()).trace();
    j1 += (traj.cost_to_go[model.horizon].mat() * model.W[model.horizon - 1].mat()).trace();
    return j1;
}

inline double actuation_cost(const SystemModel& model, const Schedule& schedule) {
    double j2 = 0.0;
    for (int t = 0; t < model.horizon; ++t)
        for (int j : schedule.stages[t]) j2 += model.actuation_cost[t][j];
    return j2;
}

inline CostReport cost_of_schedule(const SystemModel& model, const Schedule& schedule) {
    RiccatiTrajectory traj = riccati_backward(model, schedule);
    CostReport report;
    report.quadratic = quadratic_cost(model, traj);
    report.actuation = actuation_cost(model, schedule);
    report.total = report.quadratic + report.actuation;
    report.base_cost = traj.base_cost;
    report.stage_traces = traj.stage_traces;
    return report;
}

}  // namespace actsched
