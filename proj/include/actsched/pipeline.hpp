#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "actsched/model_io.hpp"
#include "actsched/rollout.hpp"
#include "actsched/scheduling.hpp"

namespace actsched {

#ifndef ACTSCHED_VERSION
#define ACTSCHED_VERSION "0.0.0"
#endif

struct PipelineConfig {
    bool run_tracking = true;
    bool run_greedy = true;
    bool run_max_theta = true;
    int random_count = 0;               // 0 = skip the random baseline
    std::uint64_t random_seed = 12345;
    bool run_brute_force = false;       // enables the bound when it succeeds
    std::uint64_t brute_force_cap = 10'000'000;
    bool costfree_theta = false;        // also solve the relaxation without actuation costs
    SolverSettings solver;
};

struct MethodResult {
    std::string name;
    Schedule schedule;
    CostReport cost;
};

struct RelaxationSummary {
    double objective = 0.0;
    double lower_bound_total = 0.0;  // objective plus the schedule-independent trace sum
    std::string status;
    int iterations = 0;
    double primal_residual = 0.0, dual_residual = 0.0, gap_residual = 0.0;
    double tighten_margin = 0.0;     // most negative ordering eigenvalue after tightening
    Matrix theta;
};

struct RandomSummary {
    int count = 0;
    std::uint64_t seed = 0;
    double min = 0.0, mean = 0.0, max = 0.0;
    Schedule best;
};

struct ExperimentReport {
    std::string version;
    double solver_eps = 0.0;
    int solver_max_iter = 0;
    std::optional<RelaxationSummary> relaxation;
    std::optional<Matrix> theta_costfree;
    std::vector<MethodResult> methods;
    std::optional<RandomSummary> random;
    std::optional<BoundReport> bound;

    const MethodResult* method(const std::string& name) const {
        for (const auto& m : methods)
            if (m.name == name) return &m;
        return nullptr;
    }
};

/// Relax, solve, tighten, synthesize schedules, and price everything.
inline ExperimentReport run_pipeline(const SystemModel& model, const PipelineConfig& config) {
    model.validate();
    ExperimentReport report;
    report.version = ACTSCHED_VERSION;
    report.solver_eps = config.solver.eps_primal;
    report.solver_max_iter = config.solver.max_iter;

    const bool need_relaxation = config.run_tracking || config.run_max_theta ||
                                 config.run_brute_force || config.costfree_theta;
    std::optional<RelaxedSolution> sol;
    std::optional<TightenedTrajectory> tight;
    if (need_relaxation) {
        ConicProblem program = build_relaxed_program(model);
        SolverResult res = solve(program, config.solver);
        sol = extract_solution(model, program, res);
        tight = tighten(model, *sol);
        RelaxationSummary rs;
        rs.objective = sol->objective;
        rs.lower_bound_total = sol->objective + model.base_cost();
        rs.status = to_string(sol->status);
        rs.iterations = sol->iterations;
        rs.primal_residual = sol->primal_residual;
        rs.dual_residual = sol->dual_residual;
        rs.gap_residual = sol->gap_residual;
        rs.tighten_margin = tight->min_ordering_margin;
        rs.theta = sol->theta;
        report.relaxation = std::move(rs);
    }

    auto add_method = [&](std::string name, Schedule s) {
        CostReport cost = cost_of_schedule(model, s);
        report.methods.push_back({std::move(name), std::move(s), std::move(cost)});
    };

    if (config.run_tracking) add_method("tracking", track_reference(model, sol->k_mid));
    if (config.run_greedy) add_method("greedy", greedy_schedule(model));
    if (config.run_max_theta) add_method("max_theta", max_theta_schedule(model, *sol));
    if (config.random_count > 0) {
        CostDistribution dist = sample_random(model, config.random_count, config.random_seed);
        RandomSummary rsum;
        rsum.count = config.random_count;
        rsum.seed = config.random_seed;
        rsum.min = dist.min;
        rsum.mean = dist.mean;
        rsum.max = dist.max;
        rsum.best = dist.best;
        add_method("random_min", dist.best);
        report.random = std::move(rsum);
    }
    if (config.run_brute_force) {
        BruteForceResult bf = brute_force(model, config.brute_force_cap);
        report.methods.push_back({"brute_force", bf.schedule, bf.cost});
        if (config.run_tracking) {
            ReferenceTrajectory ref =
                theta_is_integral(model, sol->theta)
                    ? ReferenceTrajectory::from_schedule(model,
                                                         schedule_from_theta(model, sol->theta))
                    : ReferenceTrajectory::from_tightened(model, *tight);
            report.bound = suboptimality_bound(model, report.method("tracking")->schedule, ref,
                                               bf.schedule);
        }
    }

    if (config.costfree_theta) {
        SystemModel free_model = with_zero_actuation_costs(model);
        ConicProblem program = build_relaxed_program(free_model);
        SolverResult res = solve(program, config.solver);
        RelaxedSolution free_sol = extract_solution(free_model, program, res);
        report.theta_costfree = free_sol.theta;
    }
    return report;
}

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j) { return parse_matrix(j, "$"); }

inline Json method_to_json(const MethodResult& m) {
    return Json{{"name", m.name},
                {"schedule", schedule_to_json(m.schedule)},
                {"quadratic", m.cost.quadratic},
                {"actuation", m.cost.actuation},
                {"total", m.cost.total}};
}

inline Json bound_to_json(const BoundReport& b) {
    return Json{{"epsilon", b.epsilon},
                {"lambda", b.lambda},
                {"lambda_t", b.lambda_t},
                {"beta_t", b.beta_t},
                {"mismatch_t", b.mismatch_t},
                {"tracked_cost", b.tracked_cost},
                {"optimal_cost", b.optimal_cost},
                {"holds", b.bound_holds},
                {"schedule", schedule_to_json(b.sigma)},
                {"optimal_schedule", schedule_to_json(b.sigma_star)},
                {"reference_source", b.reference_source}};
}

}  // namespace detail

inline Json report_to_json(const ExperimentReport& r) {
    Json j;
    j["meta"] = {{"version", r.version},
                 {"solver_eps", r.solver_eps},
                 {"solver_max_iter", r.solver_max_iter}};
    if (r.relaxation) {
        const auto& rs = *r.relaxation;
        j["relaxation"] = {{"objective", rs.objective},
                           {"lower_bound_total", rs.lower_bound_total},
                           {"status", rs.status},
                           {"iterations", rs.iterations},
                           {"primal_residual", rs.primal_residual},
                           {"dual_residual", rs.dual_residual},
                           {"gap_residual", rs.gap_residual},
                           {"tighten_margin", rs.tighten_margin},
                           {"theta", detail::matrix_to_json(rs.theta)}};
    }
    if (r.theta_costfree) j["theta_costfree"] = detail::matrix_to_json(*r.theta_costfree);
    j["methods"] = Json::array();
    for (const auto& m : r.methods) j["methods"].push_back(detail::method_to_json(m));
    if (r.random) {
        j["random"] = {{"count", r.random->count},
                       {"seed", r.random->seed},
                       {"min", r.random->min},
                       {"mean", r.random->mean},
                       {"max", r.random->max},
                       {"best_schedule", schedule_to_json(r.random->best)}};
    }
    if (r.bound) j["bound"] = detail::bound_to_json(*r.bound);
    return j;
}

inline Schedule schedule_from_json(const Json& j) {
    Schedule s;
    for (const auto& stage : j) {
        std::vector<int> set;
        for (const auto& idx : stage) set.push_back(idx.get<int>() - 1);
        s.stages.push_back(std::move(set));
    }
    return s;
}

inline ExperimentReport report_from_json(const Json& j) {
    ExperimentReport r;
    r.version = j.at("meta").at("version").get<std::string>();
    r.solver_eps = j.at("meta").at("solver_eps").get<double>();
    r.solver_max_iter = j.at("meta").at("solver_max_iter").get<int>();
    if (j.contains("relaxation")) {
        const Json& js = j["relaxation"];
        RelaxationSummary rs;
        rs.objective = js.at("objective").get<double>();
        rs.lower_bound_total = js.at("lower_bound_total").get<double>();
        rs.status = js.at("status").get<std::string>();
        rs.iterations = js.at("iterations").get<int>();
        rs.primal_residual = js.at("primal_residual").get<double>();
        rs.dual_residual = js.at("dual_residual").get<double>();
        rs.gap_residual = js.at("gap_residual").get<double>();
        rs.tighten_margin = js.at("tighten_margin").get<double>();
        rs.theta = detail::matrix_from_json(js.at("theta"));
        r.relaxation = std::move(rs);
    }
    if (j.contains("theta_costfree"))
        r.theta_costfree = detail::matrix_from_json(j["theta_costfree"]);
    for (const auto& mj : j.at("methods")) {
        MethodResult m;
        m.name = mj.at("name").get<std::string>();
        m.schedule = schedule_from_json(mj.at("schedule"));
        m.cost.quadratic = mj.at("quadratic").get<double>();
        m.cost.actuation = mj.at("actuation").get<double>();
        m.cost.total = mj.at("total").get<double>();
        r.methods.push_back(std::move(m));
    }
    if (j.contains("random")) {
        RandomSummary rs;
        rs.count = j["random"].at("count").get<int>();
        rs.seed = j["random"].at("seed").get<std::uint64_t>();
        rs.min = j["random"].at("min").get<double>();
        rs.mean = j["random"].at("mean").get<double>();
        rs.max = j["random"].at("max").get<double>();
        rs.best = schedule_from_json(j["random"].at("best_schedule"));
        r.random = std::move(rs);
    }
    if (j.contains("bound")) {
        const Json& jb = j["bound"];
        BoundReport b;
        b.epsilon = jb.at("epsilon").get<double>();
        b.lambda = jb.at("lambda").get<double>();
        b.lambda_t = jb.at("lambda_t").get<std::vector<double>>();
        b.beta_t = jb.at("beta_t").get<std::vector<double>>();
        b.mismatch_t = jb.at("mismatch_t").get<std::vector<double>>();
        b.tracked_cost = jb.at("tracked_cost").get<double>();
        b.optimal_cost = jb.at("optimal_cost").get<double>();
        b.bound_holds = jb.at("holds").get<bool>();
        b.sigma = schedule_from_json(jb.at("schedule"));
        b.sigma_star = schedule_from_json(jb.at("optimal_schedule"));
        b.reference_source = jb.at("reference_source").get<std::string>();
        r.bound = std::move(b);
    }
    return r;
}

namespace detail {

inline std::string actuator_list(const std::vector<int>& set) {
    std::string out;
    for (size_t k = 0; k < set.size(); ++k) {
        if (k) out += '|';
        out += std::to_string(set[k] + 1);
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << contents;
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace detail

/// Per-stage schedule table: stage,method,actuators (1-based, |-separated).
inline std::string report_schedule_csv(const ExperimentReport& r) {
    std::string csv = "stage,method,actuators\n";
    for (const auto& m : r.methods)
        for (int t = 0; t < m.schedule.horizon(); ++t)
            csv += std::to_string(t) + "," + m.name + "," + detail::actuator_list(m.schedule.stages[t]) + "\n";
    return csv;
}

enum class ReportFormat { Json, Csv };

inline void emit_report(const ExperimentReport& report, ReportFormat format,
                        const std::string& out_path) {
    if (format == ReportFormat::Json)
        detail::write_file(out_path, report_to_json(report).dump(2) + "\n");
    else
        detail::write_file(out_path, report_schedule_csv(report));
}

inline ExperimentReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report file: " + path);
    return report_from_json(Json::parse(in));
}

namespace detail {

inline std::string double_csv(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Sampled-cost table plus the cumulative distribution: index,cost gives the
/// raw draws, sorted_cost,percentile gives the fraction of trials at or below
/// each cost level.
inline void random_histogram(const SystemModel& model, int count, std::uint64_t seed,
                             const std::string& out_path) {
    CostDistribution dist = sample_random(model, count, seed);
    std::vector<double> sorted = dist.costs;
    std::sort(sorted.begin(), sorted.end());
    std::string csv = "index,cost,sorted_cost,percentile\n";
    for (int k = 0; k < count; ++k) {
        csv += std::to_string(k) + ',' + detail::double_csv(dist.costs[k]) + ',' +
               detail::double_csv(sorted[k]) + ',' +
               detail::double_csv(100.0 * (k + 1) / count) + "\n";
    }
    detail::write_file(out_path, csv);
}

/// Weight table: stage,theta_1..theta_N.
inline std::string theta_csv(const Matrix& theta) {
    std::string csv = "stage";
    for (Eigen::Index i = 0; i < theta.cols(); ++i) csv += ",theta_" + std::to_string(i + 1);
    csv += "\n";
    for (Eigen::Index t = 0; t < theta.rows(); ++t) {
        csv += std::to_string(t);
        for (Eigen::Index i = 0; i < theta.cols(); ++i) csv += "," + detail::double_csv(theta(t, i));
        csv += "\n";
    }
    return csv;
}

}  // namespace actsched
