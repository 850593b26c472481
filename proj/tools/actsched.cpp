// Command-line front end: model validation, relaxation solves, schedule
// synthesis, cost evaluation, suboptimality bounds, and the bundled
// six-node benchmark experiment.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "actsched/pipeline.hpp"

namespace {

using namespace actsched;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCap = 4;

struct GlobalOptions {
    bool json_errors = false;
};

void report_error(const GlobalOptions& g, const std::string& type, const std::string& message,
                  int code) {
    if (g.json_errors) {
        Json j{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error: " << message << "\n";
    }
}

std::string default_out_dir() {
    if (const char* env = std::getenv("ACTSCHED_OUT_DIR")) return env;
    return ".";
}

SolverSettings make_settings(double eps, int max_iter) {
    SolverSettings s;
    s.eps_primal = s.eps_dual = s.eps_gap = eps;
    s.max_iter = max_iter;
    return s;
}

void print_cost(const CostReport& cost) {
    Json j{{"quadratic", cost.quadratic},
           {"actuation", cost.actuation},
           {"total", cost.total},
           {"base_cost", cost.base_cost}};
    std::cout << j.dump(2) << "\n";
}

int run_validate(const std::string& model_path) {
    SystemModel model = load_model(model_path);
    std::cout << "valid model: state_dim=" << model.state_dim
              << " actuators=" << model.num_actuators << " horizon=" << model.horizon << "\n";
    return kExitOk;
}

int run_relax(const std::string& model_path, double eps, int max_iter,
              const std::string& out_path, const std::string& dump_path,
              const std::string& theta_path, const std::string& iter_log_path) {
    SystemModel model = load_model(model_path);
    ConicProblem program = build_relaxed_program(model);
    if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        if (!dump) throw ValidationError("cannot write program dump: " + dump_path);
        program.dump(dump);
    }
    SolverSettings settings = make_settings(eps, max_iter);
    std::ofstream iter_log;
    if (!iter_log_path.empty()) {
        iter_log.open(iter_log_path);
        if (!iter_log) throw ValidationError("cannot write iteration log: " + iter_log_path);
        settings.iter_log = &iter_log;
    }
    SolverResult res = solve(program, settings);
    RelaxedSolution sol = extract_solution(model, program, res);
    Json j{{"objective", sol.objective},
           {"lower_bound_total", sol.objective + model.base_cost()},
           {"status", to_string(sol.status)},
           {"iterations", sol.iterations},
           {"primal_residual", sol.primal_residual},
           {"dual_residual", sol.dual_residual},
           {"gap_residual", sol.gap_residual}};
    std::cout << j.dump(2) << "\n";
    if (!theta_path.empty()) detail::write_file(theta_path, theta_csv(sol.theta));
    if (!out_path.empty()) {
        Json full = j;
        full["theta"] = detail::matrix_to_json(sol.theta);
        detail::write_file(out_path, full.dump(2) + "\n");
    }
    return kExitOk;
}

int run_schedule(const std::string& model_path, const std::string& method, std::uint64_t seed,
                 bool seed_given, int count, std::uint64_t cap, double eps, int max_iter,
                 const std::string& out_path) {
    SystemModel model = load_model(model_path);
    Schedule schedule;
    if (method == "track" || method == "maxtheta") {
        ConicProblem program = build_relaxed_program(model);
        SolverResult res = solve(program, make_settings(eps, max_iter));
        RelaxedSolution sol = extract_solution(model, program, res);
        schedule = (method == "track") ? track_reference(model, sol.k_mid)
                                       : max_theta_schedule(model, sol);
    } else if (method == "greedy") {
        schedule = greedy_schedule(model);
    } else if (method == "random") {
        if (!seed_given) std::cout << "seed: " << seed << "\n";
        if (count > 1) {
            CostDistribution dist = sample_random(model, count, seed);
            schedule = dist.best;
            std::cout << "sampled " << count << " schedules, min total " << dist.min << "\n";
        } else {
            schedule = random_schedule(model, seed);
        }
    } else if (method == "brute") {
        BruteForceResult bf = brute_force(model, cap);
        schedule = bf.schedule;
        std::cout << "enumerated " << bf.enumerated << " schedules\n";
    } else {
        throw CLI::ValidationError("--method", "unknown method: " + method);
    }
    print_cost(cost_of_schedule(model, schedule));
    if (!out_path.empty())
        save_schedule(schedule, out_path);
    else
        std::cout << schedule_to_json(schedule).dump() << "\n";
    return kExitOk;
}

int run_evaluate(const std::string& model_path, const std::string& schedule_path) {
    SystemModel model = load_model(model_path);
    Schedule schedule = load_schedule(schedule_path, model);
    print_cost(cost_of_schedule(model, schedule));
    return kExitOk;
}

int run_bound(const std::string& model_path, std::uint64_t cap, double eps, int max_iter) {
    SystemModel model = load_model(model_path);
    PipelineConfig config;
    config.run_greedy = false;
    config.run_max_theta = false;
    config.run_brute_force = true;
    config.brute_force_cap = cap;
    config.solver = make_settings(eps, max_iter);
    ExperimentReport report = run_pipeline(model, config);
    std::cout << detail::bound_to_json(*report.bound).dump(2) << "\n";
    return kExitOk;
}

int run_experiment(const std::string& name, std::string out_dir, std::vector<int> actuators,
                   int random_count, std::uint64_t seed, bool seed_given, double eps,
                   int max_iter) {
    if (name != "section5")
        throw CLI::ValidationError("experiment", "unknown experiment: " + name);
    SystemModel model = section5_model();
    if (!actuators.empty()) {
        std::vector<int> keep;
        for (int a : actuators) keep.push_back(a - 1);
        model = restrict_actuators(model, keep);
    }
    if (!seed_given) std::cout << "seed: " << seed << "\n";

    PipelineConfig config;
    config.random_count = random_count;
    config.random_seed = seed;
    config.costfree_theta = true;
    config.solver = make_settings(eps, max_iter);
    ExperimentReport report = run_pipeline(model, config);

    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* file) { return (std::filesystem::path(out_dir) / file).string(); };
    emit_report(report, ReportFormat::Json, path("report.json"));
    emit_report(report, ReportFormat::Csv, path("schedules.csv"));
    detail::write_file(path("theta.csv"), theta_csv(report.relaxation->theta));
    if (report.theta_costfree)
        detail::write_file(path("theta_costfree.csv"), theta_csv(*report.theta_costfree));
    if (random_count > 0) random_histogram(model, random_count, seed, path("histogram.csv"));

    std::cout << "relaxed objective: " << report.relaxation->objective
              << " (plus base cost " << model.base_cost() << ")\n";
    for (const auto& m : report.methods)
        std::cout << m.name << ": quadratic " << m.cost.quadratic << ", actuation "
                  << m.cost.actuation << ", total " << m.cost.total << "\n";
    std::cout << "outputs in " << out_dir << "\n";
    return kExitOk;
}

int run_histogram(const std::string& model_path, int count, std::uint64_t seed, bool seed_given,
                  std::string out_path) {
    SystemModel model = load_model(model_path);
    if (!seed_given) std::cout << "seed: " << seed << "\n";
    if (out_path.empty())
        out_path = (std::filesystem::path(default_out_dir()) / "histogram.csv").string();
    random_histogram(model, count, seed, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Actuator scheduling for stochastic linear-quadratic control"};
    app.set_version_flag("--version", std::string("actsched ") + ACTSCHED_VERSION);
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_flag("--json-errors", global.json_errors, "emit machine-readable errors");

    std::string model_path, schedule_path, out_path, dump_path, theta_path, iter_log_path;
    std::string method = "track", experiment_name;
    std::string out_dir = default_out_dir();
    double eps = 1e-6;
    int max_iter = 200000;
    std::uint64_t seed = 12345, cap = 10'000'000;
    int count = 1, random_count = 50000;
    std::vector<int> actuators;

    auto* validate = app.add_subcommand("validate", "check a model file");
    validate->add_option("model", model_path, "model JSON file")->required();

    auto* relax = app.add_subcommand("relax", "solve the convex relaxation");
    relax->add_option("model", model_path)->required();
    relax->add_option("--eps", eps, "solver tolerance");
    relax->add_option("--max-iter", max_iter, "iteration cap");
    relax->add_option("--out", out_path, "write solution JSON here");
    relax->add_option("--theta-csv", theta_path, "write the weight table here");
    relax->add_option("--dump-program", dump_path, "write the conic program in sparse text form");
    relax->add_option("--iter-log", iter_log_path, "write per-iteration residuals (CSV)");

    auto* sched = app.add_subcommand("schedule", "synthesize a schedule");
    sched->add_option("model", model_path)->required();
    sched->add_option("--method", method, "track|greedy|random|maxtheta|brute")->required();
    auto* seed_opt = sched->add_option("--seed", seed, "random seed");
    sched->add_option("--count", count, "random candidates to sample");
    sched->add_option("--cap", cap, "enumeration cap for brute force");
    sched->add_option("--eps", eps);
    sched->add_option("--max-iter", max_iter);
    sched->add_option("--out", out_path, "write the schedule JSON here");

    auto* eval = app.add_subcommand("evaluate", "price a schedule file");
    eval->add_option("model", model_path)->required();
    eval->add_option("schedule", schedule_path)->required();

    auto* bound = app.add_subcommand("bound", "exact optimum plus suboptimality certificate");
    bound->add_option("model", model_path)->required();
    bound->add_option("--cap", cap, "enumeration cap for brute force");
    bound->add_option("--eps", eps);
    bound->add_option("--max-iter", max_iter);

    auto* experiment = app.add_subcommand("experiment", "run a bundled experiment");
    experiment->add_option("name", experiment_name, "experiment name (section5)")->required();
    experiment->add_option("--out-dir", out_dir, "output directory");
    experiment->add_option("--actuators", actuators, "restrict to these actuators (1-based)");
    experiment->add_option("--count", random_count, "random baseline sample count");
    auto* exp_seed_opt = experiment->add_option("--seed", seed);
    experiment->add_option("--eps", eps);
    experiment->add_option("--max-iter", max_iter);

    auto* histogram = app.add_subcommand("histogram", "random-schedule cost distribution");
    histogram->add_option("model", model_path)->required();
    histogram->add_option("--count", count, "sample count")->required();
    auto* hist_seed_opt = histogram->add_option("--seed", seed);
    histogram->add_option("--out", out_path, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(global, "usage", e.what(), kExitUsage);
        return kExitUsage;
    }

    try {
        if (validate->parsed()) return run_validate(model_path);
        if (relax->parsed())
            return run_relax(model_path, eps, max_iter, out_path, dump_path, theta_path,
                             iter_log_path);
        if (sched->parsed())
            return run_schedule(model_path, method, seed, seed_opt->count() > 0, count, cap, eps,
                                max_iter, out_path);
        if (eval->parsed()) return run_evaluate(model_path, schedule_path);
        if (bound->parsed()) return run_bound(model_path, cap, eps, max_iter);
        if (experiment->parsed())
            return run_experiment(experiment_name, out_dir, actuators, random_count, seed,
                                  exp_seed_opt->count() > 0, eps, max_iter);
        if (histogram->parsed())
            return run_histogram(model_path, count, seed, hist_seed_opt->count() > 0, out_path);
    } catch (const CLI::ValidationError& e) {
        report_error(global, "usage", e.what(), kExitUsage);
        return kExitUsage;
    } catch (const CapExceededError& e) {
        report_error(global, "cap_exceeded", e.what(), kExitCap);
        return kExitCap;
    } catch (const SolverError& e) {
        report_error(global, "solver", e.what(), kExitSolver);
        return kExitSolver;
    } catch (const NumericalError& e) {
        report_error(global, "numerical", e.what(), kExitSolver);
        return kExitSolver;
    } catch (const ValidationError& e) {
        report_error(global, "validation", e.what(), kExitValidation);
        return kExitValidation;
    } catch (const std::exception& e) {
        report_error(global, "internal", e.what(), kExitValidation);
        return kExitValidation;
    }
    return kExitUsage;
}
