#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "actsched/relaxation.hpp"
#include "actsched/riccati.hpp"
#include "actsched/rng.hpp"

namespace actsched {

namespace detail {

/// Indices of the k smallest scores, ties resolved toward the lowest index.
inline std::vector<int> smallest_k(const std::vector<double>& scores, int k) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] < scores[b]; });
    std::vector<int> out(order.begin(), order.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

/// All size-k subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> subsets_of_size(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k);
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

inline bool schedule_less(const Schedule& a, const Schedule& b) {
    return a.stages < b.stages;
}

}  // namespace detail

/// Backward pass that keeps the evolving value matrices close (in Frobenius
/// norm) to a reference trajectory: at each stage evaluate every actuator's
/// one-step update, commit the group whose updates land nearest to the
/// reference, and propagate. Cost per stage is linear in the actuator count.
inline Schedule track_reference(const SystemModel& model, std::span<const SymMatrix> k_ref) {
    if (static_cast<int>(k_ref.size()) != model.horizon)
        throw ValidationError("track_reference: reference needs one matrix per stage");
    for (const auto& k : k_ref)
        if (k.dim() != model.state_dim)
            throw ValidationError("track_reference: reference dimension mismatch");

    Schedule sched;
    sched.stages.resize(model.horizon);
    SymMatrix k_next = model.Q_terminal;
    for (int t = model.horizon - 1; t >= 0; --t) {
        std::vector<double> dist(model.num_actuators);
        for (int i = 0; i < model.num_actuators; ++i) {
            SymMatrix mi = g_step(model, t, i, k_next);
            dist[i] = (k_ref[t].mat() - mi.mat()).norm();
        }
        sched.stages[t] = detail::smallest_k(dist, model.group_size[t]);
        k_next = h_step(model, t, g_step(model, t, sched.stages[t], k_next));
    }
    return sched;
}

/// Backward greedy: at each stage pick the actuators individually minimizing
/// the immediate stage trace plus their actuation cost, then commit the
/// combined update.
inline Schedule greedy_schedule(const SystemModel& model) {
    Schedule sched;
    sched.stages.resize(model.horizon);
    SymMatrix k_next = model.Q_terminal;
    for (int t = model.horizon - 1; t >= 0; --t) {
        const SymMatrix wb = model.wbar(t);
        std::vector<double> score(model.num_actuators);
        for (int i = 0; i < model.num_actuators; ++i) {
            SymMatrix mi = g_step(model, t, i, k_next);
            score[i] = (mi.mat() * wb.mat()).trace() + model.actuation_cost[t][i];
        }
        sched.stages[t] = detail::smallest_k(score, model.group_size[t]);
        k_next = h_step(model, t, g_step(model, t, sched.stages[t], k_next));
    }
    return sched;
}

/// One uniformly random schedule (each stage's group drawn uniformly from all
/// size-N_t subsets, independently across stages).
inline Schedule random_schedule(const SystemModel& model, std::uint64_t seed,
                                std::uint64_t stream = 0) {
    SubstreamRng rng(seed, stream);
    Schedule sched;
    sched.stages.resize(model.horizon);
    std::vector<int> pool(model.num_actuators);
    for (int t = 0; t < model.horizon; ++t) {
        std::iota(pool.begin(), pool.end(), 0);
        // partial Fisher-Yates makes every subset equally likely
        for (int k = 0; k < model.group_size[t]; ++k) {
            const auto pick = k + static_cast<int>(rng.next_below(pool.size() - k));
            std::swap(pool[k], pool[pick]);
        }
        sched.stages[t].assign(pool.begin(), pool.begin() + model.group_size[t]);
        std::sort(sched.stages[t].begin(), sched.stages[t].end());
    }
    return sched;
}

struct CostDistribution {
    std::vector<double> costs;
    double min = 0.0, max = 0.0, mean = 0.0;
    int argmin = 0;
    Schedule best;
};

/// Seeded random-search baseline. Schedule k comes from substream k of the
/// seed, so results are independent of evaluation order.
inline CostDistribution sample_random(const SystemModel& model, int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("sample_random: count must be >= 1");
    CostDistribution dist;
    dist.costs.resize(count);
    dist.min = std::numeric_limits<double>::infinity();
    dist.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int k = 0; k < count; ++k) {
        Schedule s = random_schedule(model, seed, static_cast<std::uint64_t>(k));
        RiccatiTrajectory traj = riccati_backward(model, s);
        const double j = quadratic_cost(model, traj) + actuation_cost(model, s);
        dist.costs[k] = j;
        sum += j;
        if (j < dist.min) {
            dist.min = j;
            dist.argmin = k;
            dist.best = std::move(s);
        }
        dist.max = std::max(dist.max, j);
    }
    dist.mean = sum / count;
    return dist;
}

struct BruteForceResult {
    Schedule schedule;
    CostReport cost;
    std::uint64_t enumerated = 0;
};

/// Exhaustive enumeration over all per-stage groups. Shares suffix
/// computations across schedules via depth-first recursion from the terminal
/// stage; ties resolve to the lexicographically smallest schedule.
inline BruteForceResult brute_force(const SystemModel& model, std::uint64_t cap = 10'000'000) {
    model.validate();
    const int T = model.horizon;

    std::vector<std::vector<std::vector<int>>> choices(T);
    long double total = 1.0L;
    for (int t = 0; t < T; ++t) {
        choices[t] = detail::subsets_of_size(model.num_actuators, model.group_size[t]);
        total *= static_cast<long double>(choices[t].size());
    }
    if (total > static_cast<long double>(cap))
        throw CapExceededError("brute_force: enumeration needs " +
                                   std::to_string(static_cast<double>(total)) +
                                   " schedules, cap is " + std::to_string(cap),
                               static_cast<double>(total), cap);

    BruteForceResult result;
    double best = std::numeric_limits<double>::infinity();
    Schedule current;
    current.stages.resize(T);
    std::uint64_t visited = 0;

    // partial[t]: cost accumulated for stages t..T given the choices so far
    std::function<void(int, const SymMatrix&, double)> descend =
        [&](int t, const SymMatrix& k_next, double acc) {
            if (t < 0) {
                ++visited;
                const bool better =
                    acc < best || (acc == best && detail::schedule_less(current, result.schedule));
                if (better) {
                    best = acc;
                    result.schedule = current;
                }
                return;
            }
            for (const auto& subset : choices[t]) {
                current.stages[t] = subset;
                SymMatrix k_mid = g_step(model, t, subset, k_next);
                SymMatrix k_t = h_step(model, t, k_mid);
                double stage = (k_t.mat() * model.w_before(t).mat()).trace();
                for (int j : subset) stage += model.actuation_cost[t][j];
                descend(t - 1, k_t, acc + stage);
            }
        };

    const double terminal =
        (model.Q_terminal.mat() * model.W[T - 1].mat()).trace();
    descend(T - 1, model.Q_terminal, terminal);
    result.enumerated = visited;
    result.cost = cost_of_schedule(model, result.schedule);
    return result;
}

/// Per stage, the group with the largest relaxed weights (ties toward the
/// lowest index). Kept as a baseline; tracking the reference is usually
/// better.
inline Schedule max_theta_schedule(const SystemModel& model, const RelaxedSolution& relaxed) {
    Schedule sched;
    sched.stages.resize(model.horizon);
    for (int t = 0; t < model.horizon; ++t) {
        std::vector<double> neg(model.num_actuators);
        for (int i = 0; i < model.num_actuators; ++i) neg[i] = -relaxed.theta(t, i);
        sched.stages[t] = detail::smallest_k(neg, model.group_size[t]);
    }
    return sched;
}

/// Derivative kernel of the actuation shrink: H = I - M B (B^T M B + R)^{-1} B^T.
/// The directional derivative of the shrink at M along X is H X H^T.
inline Matrix h_matrix(const SystemModel& model, int t, std::span<const int> actuators,
                       const SymMatrix& M) {
    CombinedInput in = combined_input(model, t, actuators);
    const Eigen::Index n = model.state_dim;
    if (in.B.cols() == 0) return Matrix::Identity(n, n);
    Matrix mb = M.mat() * in.B;
    SymMatrix s(Matrix(in.B.transpose() * mb + in.R));
    return Matrix::Identity(n, n) - mb * solve_spd(s, Matrix(in.B.transpose()));
}

inline Matrix h_matrix(const SystemModel& model, int t, int actuator, const SymMatrix& M) {
    const int set[1] = {actuator};
    return h_matrix(model, t, std::span<const int>(set), M);
}

/// Value-matrix trajectory attributed to the relaxed weights, as consumed by
/// the suboptimality bound.
struct ReferenceTrajectory {
    std::vector<SymMatrix> cost_to_go;      // t = 0..T
    std::vector<SymMatrix> mid_cost_to_go;  // t = 0..T-1
    std::string source;                     // provenance note for reports

    static ReferenceTrajectory from_tightened(const SystemModel& model,
                                              const TightenedTrajectory& tt) {
        ReferenceTrajectory rt;
        rt.source = "tightened_relaxation";
        rt.mid_cost_to_go = tt.k_mid;
        rt.cost_to_go.resize(model.horizon + 1);
        rt.cost_to_go[model.horizon] = model.Q_terminal;
        for (int t = 0; t < model.horizon; ++t)
            rt.cost_to_go[t] = h_step(model, t, tt.k_mid[t]);
        return rt;
    }

    static ReferenceTrajectory from_schedule(const SystemModel& model, const Schedule& s) {
        ReferenceTrajectory rt;
        rt.source = "integral_schedule";
        RiccatiTrajectory traj = riccati_backward(model, s);
        rt.cost_to_go = std::move(traj.cost_to_go);
        rt.mid_cost_to_go = std::move(traj.mid_cost_to_go);
        return rt;
    }
};

struct BoundReport {
    std::vector<double> lambda_t;   // contraction factors per stage
    std::vector<double> beta_t;     // reference consistency gaps
    std::vector<double> mismatch_t; // relaxed-vs-optimal trajectory distance
    double lambda = 0.0;            // max over stages
    double epsilon = 0.0;
    double tracked_cost = 0.0;      // J of sigma
    double optimal_cost = 0.0;      // J of sigma_star
    bool bound_holds = false;
    Schedule sigma;
    Schedule sigma_star;
    std::string reference_source;
};

namespace detail {

inline double geometric_factor(double lambda, int t) {
    if (std::abs(lambda - 1.0) <= 1e-9) return static_cast<double>(t + 1);
    return (std::pow(lambda, t + 1) - 1.0) / (lambda - 1.0);
}

}  // namespace detail

/// Computable certificate for the tracked schedule: J(sigma) never exceeds
/// J(sigma_star) by more than epsilon, where epsilon combines per-stage
/// contraction factors, reference-consistency gaps, and the distance between
/// the relaxed and optimal trajectories.
inline BoundReport suboptimality_bound(const SystemModel& model, const Schedule& sigma,
                                       const ReferenceTrajectory& theta_traj,
                                       const Schedule& sigma_star) {
    if (sigma_star.stages.empty())
        throw ValidationError(
            "suboptimality_bound: the optimal schedule is required (run brute_force)");
    model.validate_schedule(sigma);
    model.validate_schedule(sigma_star);
    if (static_cast<int>(theta_traj.cost_to_go.size()) != model.horizon + 1 ||
        static_cast<int>(theta_traj.mid_cost_to_go.size()) != model.horizon)
        throw ValidationError("suboptimality_bound: reference trajectory has wrong length");

    const int T = model.horizon;
    BoundReport report;
    report.sigma = sigma;
    report.sigma_star = sigma_star;
    report.reference_source = theta_traj.source;
    report.lambda_t.resize(T);
    report.beta_t.resize(T);
    report.mismatch_t.resize(T);

    RiccatiTrajectory star = riccati_backward(model, sigma_star);

    double wbar_max = 0.0;
    for (int t = 0; t < T; ++t) {
        const auto& set = sigma_star.stages[t];
        const SymMatrix& k_next_theta = theta_traj.cost_to_go[t + 1];
        const double a_norm = spectral_norm(model.a_at(t + 1));
        const double h_norm = spectral_norm(Matrix(h_matrix(model, t, set, k_next_theta)));
        report.lambda_t[t] = a_norm * a_norm * h_norm * h_norm;
        report.beta_t[t] =
            (g_step(model, t, set, k_next_theta).mat() - theta_traj.mid_cost_to_go[t].mat()).norm();
        report.mismatch_t[t] =
            (theta_traj.mid_cost_to_go[t].mat() - star.mid_cost_to_go[t].mat()).norm();
        wbar_max = std::max(wbar_max, frob_norm(model.wbar(t)));
    }
    report.lambda = *std::max_element(report.lambda_t.begin(), report.lambda_t.end());

    double tracked_sum = 0.0, mismatch_sum = 0.0;
    for (int t = 0; t < T; ++t) {
        tracked_sum += detail::geometric_factor(report.lambda, t) * report.beta_t[t];
        mismatch_sum += report.mismatch_t[t];
    }
    report.epsilon = wbar_max * (tracked_sum + mismatch_sum);

    report.tracked_cost = cost_of_schedule(model, sigma).total;
    report.optimal_cost = quadratic_cost(model, star) + actuation_cost(model, sigma_star);
    report.bound_holds = report.tracked_cost <= report.optimal_cost + report.epsilon +
                                                    1e-9 * (1.0 + std::abs(report.optimal_cost));
    return report;
}

/// True when every stage puts essentially all weight on one group (largest
/// weights >= 1 - 1e-6), i.e. the relaxation already answered the discrete
/// question.
inline bool theta_is_integral(const SystemModel& model, const Matrix& theta, double tol = 1e-6) {
    for (int t = 0; t < theta.rows(); ++t) {
        std::vector<double> row(theta.cols());
        for (int i = 0; i < theta.cols(); ++i) row[i] = theta(t, i);
        std::sort(row.begin(), row.end(), std::greater<>());
        for (int k = 0; k < model.group_size[t]; ++k)
            if (row[k] < 1.0 - tol) return false;
    }
    return true;
}

/// The schedule encoded by an integral weight table.
inline Schedule schedule_from_theta(const SystemModel& model, const Matrix& theta) {
    Schedule s;
    s.stages.resize(model.horizon);
    for (int t = 0; t < model.horizon; ++t) {
        std::vector<double> neg(theta.cols());
        for (int i = 0; i < theta.cols(); ++i) neg[i] = -theta(t, i);
        s.stages[t] = detail::smallest_k(neg, model.group_size[t]);
    }
    return s;
}

}  // namespace actsched
