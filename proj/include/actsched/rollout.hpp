#pragma once

#include <cmath>
#include <vector>

#include "actsched/riccati.hpp"
#include "actsched/rng.hpp"

namespace actsched {

struct RolloutStats {
    double mean = 0.0;
    double std_error = 0.0;
    double sample_std = 0.0;
    int count = 0;
};

namespace detail {

/// PSD square root via eigenvalue clipping; tolerates singular covariances.
inline Matrix psd_sqrt(const SymMatrix& s) {
    EigenDecomposition ed = sym_eig(s);
    Vector root = ed.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return ed.eigenvectors * root.asDiagonal() * ed.eigenvectors.transpose();
}

}  // namespace detail

/// Monte-Carlo check of the closed-loop quadratic cost under the schedule's
/// optimal feedback gains. Each rollout draws from its own counter-based
/// substream, so the estimate does not depend on evaluation order.
inline RolloutStats simulate_rollout(const SystemModel& model, const Schedule& schedule,
                                     int num_rollouts, std::uint64_t seed) {
    if (num_rollouts < 1) throw ValidationError("simulate_rollout: need at least one rollout");
    RiccatiTrajectory traj = riccati_backward(model, schedule);
    const int T = model.horizon;
    const int n = model.state_dim;

    Matrix init_sqrt = detail::psd_sqrt(model.W_init);
    std::vector<Matrix> noise_sqrt;
    noise_sqrt.reserve(T);
    for (int t = 0; t < T; ++t) noise_sqrt.push_back(detail::psd_sqrt(model.W[t]));
    std::vector<CombinedInput> inputs;
    inputs.reserve(T);
    for (int t = 0; t < T; ++t) inputs.push_back(combined_input(model, t, schedule.stages[t]));

    double sum = 0.0, sum_sq = 0.0;
    Vector x(n), z(n), u;
    for (int k = 0; k < num_rollouts; ++k) {
        SubstreamRng rng(seed, static_cast<std::uint64_t>(k));
        for (int i = 0; i < n; ++i) z[i] = rng.next_gaussian();
        x = init_sqrt * z;
        double cost = 0.0;
        for (int t = 0; t < T; ++t) {
            cost += x.dot(model.Q[t].mat() * x);
            u = traj.gains[t] * x;
            if (u.size() > 0) cost += u.dot(inputs[t].R * u);
            for (int i = 0; i < n; ++i) z[i] = rng.next_gaussian();
            x = model.A[t] * x + inputs[t].B * u + noise_sqrt[t] * z;
        }
        cost += x.dot(model.Q_terminal.mat() * x);
        sum += cost;
        sum_sq += cost * cost;
    }

    RolloutStats stats;
    stats.count = num_rollouts;
    stats.mean = sum / num_rollouts;
    if (num_rollouts > 1) {
        const double var = (sum_sq - sum * sum / num_rollouts) / (num_rollouts - 1);
        stats.sample_std = std::sqrt(std::max(var, 0.0));
        stats.std_error = stats.sample_std / std::sqrt(static_cast<double>(num_rollouts));
    }
    return stats;
}

}  // namespace actsched
