#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "actsched/system_model.hpp"

namespace actsched {

using Json = nlohmann::json;

/// Weighted undirected interconnection; expands to row-stochastic dynamics
/// with one canonical-basis actuator per node.
struct NetworkSpec {
    int num_nodes = 0;
    std::vector<std::tuple<int, int, double>> edges;  // 1-based node ids
    std::vector<int> actuator_nodes;                  // 1-based; empty = all nodes

    Matrix dynamics() const {
        Matrix a = Matrix::Zero(num_nodes, num_nodes);
        for (size_t e = 0; e < edges.size(); ++e) {
            auto [i, j, w] = edges[e];
            if (i < 1 || i > num_nodes || j < 1 || j > num_nodes)
                throw ValidationError("network edge " + std::to_string(e) + " references node out of range");
            if (i == j)
                throw ValidationError("network edge " + std::to_string(e) + " is a self-loop");
            if (w < 0.0)
                throw ValidationError("network edge " + std::to_string(e) + " (" + std::to_string(i) +
                                      "," + std::to_string(j) + ") has negative weight");
            a(i - 1, j - 1) = w;
            a(j - 1, i - 1) = w;
        }
        for (int i = 0; i < num_nodes; ++i) {
            const double off = a.row(i).sum() - a(i, i);
            if (off > 1.0 + 1e-12)
                throw ValidationError("network node " + std::to_string(i + 1) +
                                      " has total link weight above 1");
            a(i, i) = 1.0 - off;
        }
        return a;
    }
};

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
    throw ValidationError("model schema: " + path + ": " + what);
}

inline Matrix parse_matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) schema_fail(path, "expected a 2-D array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
            schema_fail(path + "[" + std::to_string(r) + "]", "ragged row");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                schema_fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                            "expected a number");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

inline bool is_matrix(const Json& j) { return j.is_array() && !j.empty() && j[0].is_array() && (j[0].empty() || !j[0][0].is_array()); }

/// A single matrix broadcasts to every stage; a list must match the horizon.
inline std::vector<Matrix> parse_stage_matrices(const Json& j, int horizon, const std::string& path) {
    if (is_matrix(j)) return std::vector<Matrix>(horizon, parse_matrix(j, path));
    if (!j.is_array()) schema_fail(path, "expected a matrix or a list of matrices");
    if (static_cast<int>(j.size()) != horizon)
        schema_fail(path, "expected " + std::to_string(horizon) + " stage entries");
    std::vector<Matrix> out;
    out.reserve(horizon);
    for (int t = 0; t < horizon; ++t) out.push_back(parse_matrix(j[t], path + "[" + std::to_string(t) + "]"));
    return out;
}

inline SymMatrix to_sym(const Matrix& m, const std::string& path) {
    try {
        return SymMatrix(m);
    } catch (const ValidationError& e) {
        schema_fail(path, e.what());
    }
}

}  // namespace detail

inline SystemModel parse_model(const Json& j) {
    using detail::schema_fail;
    if (!j.is_object()) schema_fail("$", "expected an object");
    if (!j.contains("kind") || !j["kind"].is_string()) schema_fail("$.kind", "missing or not a string");
    const std::string kind = j["kind"].get<std::string>();
    if (!j.contains("horizon") || !j["horizon"].is_number_integer())
        schema_fail("$.horizon", "missing or not an integer");
    const int T = j["horizon"].get<int>();
    if (T < 1) schema_fail("$.horizon", "must be >= 1");

    auto parse_group = [&](int num_actuators) {
        std::vector<int> group(T, 1);
        if (j.contains("group_size")) {
            const Json& g = j["group_size"];
            if (g.is_number_integer()) {
                group.assign(T, g.get<int>());
            } else if (g.is_array() && static_cast<int>(g.size()) == T) {
                for (int t = 0; t < T; ++t) group[t] = g[t].get<int>();
            } else {
                schema_fail("$.group_size", "expected an integer or a per-stage list");
            }
        }
        for (int t = 0; t < T; ++t)
            if (group[t] < 1 || group[t] > num_actuators)
                schema_fail("$.group_size[" + std::to_string(t) + "]", "out of range [1, N]");
        return group;
    };

    SystemModel m;
    m.horizon = T;

    if (kind == "network") {
        NetworkSpec net;
        if (!j.contains("nodes") || !j["nodes"].is_number_integer())
            schema_fail("$.nodes", "missing or not an integer");
        net.num_nodes = j["nodes"].get<int>();
        if (net.num_nodes < 1) schema_fail("$.nodes", "must be >= 1");
        if (j.contains("edges")) {
            if (!j["edges"].is_array()) schema_fail("$.edges", "expected a list of [i, j, weight]");
            for (size_t e = 0; e < j["edges"].size(); ++e) {
                const Json& edge = j["edges"][e];
                if (!edge.is_array() || edge.size() != 3)
                    schema_fail("$.edges[" + std::to_string(e) + "]", "expected [i, j, weight]");
                net.edges.emplace_back(edge[0].get<int>(), edge[1].get<int>(), edge[2].get<double>());
            }
        }
        const int n = net.num_nodes;
        std::vector<int> act_nodes(n);
        std::iota(act_nodes.begin(), act_nodes.end(), 1);
        if (j.contains("actuators")) {
            act_nodes.clear();
            for (const auto& a : j["actuators"]) act_nodes.push_back(a.get<int>());
            for (int a : act_nodes)
                if (a < 1 || a > n) schema_fail("$.actuators", "node id out of range");
        }
        Matrix a;
        try {
            a = net.dynamics();
        } catch (const ValidationError& e) {
            schema_fail("$.edges", e.what());
        }
        auto scalar = [&](const char* key, bool required, double fallback) {
            if (!j.contains(key)) {
                if (required) schema_fail(std::string("$.") + key, "missing");
                return fallback;
            }
            if (!j[key].is_number()) schema_fail(std::string("$.") + key, "expected a number");
            return j[key].get<double>();
        };
        const double q = scalar("q", true, 0.0);
        const double q_term = scalar("q_terminal", false, q);
        const double r = scalar("r", true, 0.0);
        const double w = scalar("w", true, 0.0);
        const double w_init = scalar("w_init", false, w);

        const int num_act = static_cast<int>(act_nodes.size());
        std::vector<double> costs(num_act, 0.0);
        if (j.contains("costs")) {
            if (!j["costs"].is_array() || static_cast<int>(j["costs"].size()) != num_act)
                schema_fail("$.costs", "expected one entry per actuator");
            for (int i = 0; i < num_act; ++i) costs[i] = j["costs"][i].get<double>();
        }

        std::vector<Matrix> bs;
        for (int node : act_nodes) {
            Matrix b = Matrix::Zero(n, 1);
            b(node - 1, 0) = 1.0;
            bs.push_back(b);
        }
        m.state_dim = n;
        m.num_actuators = num_act;
        m.group_size = parse_group(num_act);
        m.A.assign(T, a);
        m.B.assign(T, bs);
        m.Q.assign(T, detail::to_sym(q * Matrix::Identity(n, n), "$.q"));
        m.Q_terminal = detail::to_sym(q_term * Matrix::Identity(n, n), "$.q_terminal");
        m.R.assign(T, std::vector<SymMatrix>(num_act, SymMatrix::scalar(r)));
        m.W_init = detail::to_sym(w_init * Matrix::Identity(n, n), "$.w_init");
        m.W.assign(T, detail::to_sym(w * Matrix::Identity(n, n), "$.w"));
        m.actuation_cost.assign(T, costs);
    } else if (kind == "generic") {
        for (const char* key : {"A", "B", "Q", "Q_terminal", "R", "W", "W_init", "costs"})
            if (!j.contains(key)) schema_fail(std::string("$.") + key, "missing");
        m.A = detail::parse_stage_matrices(j["A"], T, "$.A");
        m.state_dim = static_cast<int>(m.A[0].rows());

        const Json& bj = j["B"];
        if (!bj.is_array() || bj.empty()) schema_fail("$.B", "expected one entry per actuator");
        m.num_actuators = static_cast<int>(bj.size());
        std::vector<std::vector<Matrix>> per_act;
        for (int i = 0; i < m.num_actuators; ++i)
            per_act.push_back(detail::parse_stage_matrices(bj[i], T, "$.B[" + std::to_string(i) + "]"));
        m.B.assign(T, {});
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < m.num_actuators; ++i) m.B[t].push_back(per_act[i][t]);

        auto stage_syms = [&](const char* key) {
            auto mats = detail::parse_stage_matrices(j[key], T, std::string("$.") + key);
            std::vector<SymMatrix> out;
            for (int t = 0; t < T; ++t)
                out.push_back(detail::to_sym(mats[t], std::string("$.") + key + "[" + std::to_string(t) + "]"));
            return out;
        };
        m.Q = stage_syms("Q");
        m.Q_terminal = detail::to_sym(detail::parse_matrix(j["Q_terminal"], "$.Q_terminal"), "$.Q_terminal");
        const Json& rj = j["R"];
        if (!rj.is_array() || static_cast<int>(rj.size()) != m.num_actuators)
            schema_fail("$.R", "expected one entry per actuator");
        std::vector<std::vector<SymMatrix>> r_per_act;
        for (int i = 0; i < m.num_actuators; ++i) {
            auto mats = detail::parse_stage_matrices(rj[i], T, "$.R[" + std::to_string(i) + "]");
            std::vector<SymMatrix> out;
            for (int t = 0; t < T; ++t)
                out.push_back(detail::to_sym(mats[t], "$.R[" + std::to_string(i) + "][" + std::to_string(t) + "]"));
            r_per_act.push_back(std::move(out));
        }
        m.R.assign(T, {});
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < m.num_actuators; ++i) m.R[t].push_back(r_per_act[i][t]);
        m.W = stage_syms("W");
        m.W_init = detail::to_sym(detail::parse_matrix(j["W_init"], "$.W_init"), "$.W_init");

        const Json& cj = j["costs"];
        if (!cj.is_array() || static_cast<int>(cj.size()) != m.num_actuators)
            schema_fail("$.costs", "expected one entry per actuator");
        m.actuation_cost.assign(T, std::vector<double>(m.num_actuators, 0.0));
        for (int i = 0; i < m.num_actuators; ++i) {
            if (cj[i].is_number()) {
                for (int t = 0; t < T; ++t) m.actuation_cost[t][i] = cj[i].get<double>();
            } else if (cj[i].is_array() && static_cast<int>(cj[i].size()) == T) {
                for (int t = 0; t < T; ++t) m.actuation_cost[t][i] = cj[i][t].get<double>();
            } else {
                schema_fail("$.costs[" + std::to_string(i) + "]", "expected a number or a per-stage list");
            }
        }
        m.group_size = parse_group(m.num_actuators);
        if (j.contains("A_terminal"))
            m.A_terminal = detail::parse_matrix(j["A_terminal"], "$.A_terminal");
    } else {
        schema_fail("$.kind", "must be \"generic\" or \"network\"");
    }

    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    return m;
}

inline SystemModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("model file " + path + " is not valid JSON: " + e.what());
    }
    return parse_model(j);
}

/// Schedule files are arrays of per-stage index arrays, 1-based to match the
/// usual actuator numbering.
inline Schedule load_schedule(const std::string& path, const SystemModel& model) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open schedule file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("schedule file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw ValidationError("schedule file: expected an array of stage arrays");
    Schedule s;
    for (const auto& stage : j) {
        std::vector<int> set;
        if (stage.is_number_integer()) {
            set.push_back(stage.get<int>() - 1);
        } else if (stage.is_array()) {
            for (const auto& idx : stage) set.push_back(idx.get<int>() - 1);
        } else {
            throw ValidationError("schedule file: stages must be index arrays");
        }
        s.stages.push_back(std::move(set));
    }
    model.validate_schedule(s);
    return s;
}

inline Json schedule_to_json(const Schedule& s) {
    Json j = Json::array();
    for (const auto& stage : s.stages) {
        Json st = Json::array();
        for (int idx : stage) st.push_back(idx + 1);
        j.push_back(st);
    }
    return j;
}

inline void save_schedule(const Schedule& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write schedule file: " + path);
    out << schedule_to_json(s).dump(2) << "\n";
}

/// The bundled six-node benchmark network.
inline SystemModel section5_model() {
    Json j = {
        {"kind", "network"},
        {"horizon", 30},
        {"group_size", 1},
        {"nodes", 6},
        {"edges", Json::array({Json::array({1, 2, 0.2}), Json::array({1, 3, 0.1}),
                               Json::array({2, 3, 0.1}), Json::array({1, 4, 0.2}),
                               Json::array({1, 5, 0.1}), Json::array({1, 6, 0.1})})},
        {"q", 0.5},
        {"q_terminal", 1.0},
        {"r", 1.0},
        {"w", 0.25},
        {"w_init", 0.5},
        {"costs", Json::array({1.0, 1.0, 1.0, 1.0, 1.5, 2.0})},
    };
    return parse_model(j);
}

}  // namespace actsched
