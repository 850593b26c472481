#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "actsched/model_io.hpp"

using namespace actsched;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        path = std::string("model_io_tmp_") + std::to_string(counter++) + ".json";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
    static int counter;
};
int TempFile::counter = 0;

}  // namespace

TEST_CASE("six-node network expands to the documented dynamics") {
    SystemModel m = section5_model();
    CHECK(m.state_dim == 6);
    CHECK(m.num_actuators == 6);
    CHECK(m.horizon == 30);
    const Matrix& a = m.A[0];
    CHECK(a(0, 0) == Catch::Approx(0.3));
    CHECK(a(1, 1) == Catch::Approx(0.7));
    CHECK(a(2, 2) == Catch::Approx(0.8));
    CHECK(a(3, 3) == Catch::Approx(0.8));
    CHECK(a(4, 4) == Catch::Approx(0.9));
    CHECK(a(5, 5) == Catch::Approx(0.9));
    for (int i = 0; i < 6; ++i) CHECK(a.row(i).sum() == Catch::Approx(1.0));
    CHECK(a(0, 1) == Catch::Approx(0.2));
    CHECK(a(1, 0) == Catch::Approx(0.2));
    // canonical-basis actuators
    for (int j = 0; j < 6; ++j) {
        CHECK(m.B[0][j](j, 0) == 1.0);
        CHECK(m.B[0][j].col(0).sum() == 1.0);
    }
    CHECK(m.actuation_cost[0][4] == 1.5);
    CHECK(m.actuation_cost[0][5] == 2.0);
}

TEST_CASE("bundled model file matches the built-in instance") {
    SystemModel file = load_model(std::string(ACTSCHED_DATA_DIR) + "/section5.json");
    SystemModel builtin = section5_model();
    CHECK((file.A[0] - builtin.A[0]).norm() == 0.0);
    CHECK((file.Q[0].mat() - builtin.Q[0].mat()).norm() == 0.0);
    CHECK(file.actuation_cost == builtin.actuation_cost);
}

TEST_CASE("empty edge list gives identity dynamics") {
    Json j = {{"kind", "network"}, {"horizon", 2}, {"nodes", 3},
              {"q", 1.0}, {"r", 1.0}, {"w", 0.1}};
    SystemModel m = parse_model(j);
    CHECK((m.A[0] - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("schema violations name the offending path") {
    Json bad_weight = {{"kind", "network"}, {"horizon", 2}, {"nodes", 3},
                       {"edges", Json::array({Json::array({1, 2, -0.1})})},
                       {"q", 1.0}, {"r", 1.0}, {"w", 0.1}};
    CHECK_THROWS_WITH(parse_model(bad_weight),
                      Catch::Matchers::ContainsSubstring("$.edges") &&
                          Catch::Matchers::ContainsSubstring("negative weight"));

    Json too_heavy = {{"kind", "network"}, {"horizon", 2}, {"nodes", 2},
                      {"edges", Json::array({Json::array({1, 2, 1.5})})},
                      {"q", 1.0}, {"r", 1.0}, {"w", 0.1}};
    CHECK_THROWS_WITH(parse_model(too_heavy),
                      Catch::Matchers::ContainsSubstring("total link weight above 1"));

    Json missing = {{"kind", "network"}, {"horizon", 2}, {"nodes", 2}};
    CHECK_THROWS_WITH(parse_model(missing), Catch::Matchers::ContainsSubstring("$.q"));

    Json bad_kind = {{"kind", "magic"}, {"horizon", 2}};
    CHECK_THROWS_WITH(parse_model(bad_kind), Catch::Matchers::ContainsSubstring("$.kind"));

    Json ragged = {{"kind", "generic"}, {"horizon", 1},
                   {"A", Json::array({Json::array({1.0, 0.0}), Json::array({0.0})})},
                   {"B", Json::array({Json::array({Json::array({1.0}), Json::array({0.0})})})},
                   {"Q", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 1.0})})},
                   {"Q_terminal", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 1.0})})},
                   {"R", Json::array({Json::array({Json::array({1.0})})})},
                   {"W", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 1.0})})},
                   {"W_init", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 1.0})})},
                   {"costs", Json::array({0.0})}};
    CHECK_THROWS_WITH(parse_model(ragged), Catch::Matchers::ContainsSubstring("$.A[1]"));
}

TEST_CASE("generic form broadcasts constants and accepts per-stage lists") {
    Json j = {{"kind", "generic"},
              {"horizon", 2},
              {"A", Json::array({Json::array({0.5})})},
              {"B", Json::array({Json::array({Json::array({1.0})}),
                                 Json::array({Json::array({2.0})})})},
              {"Q", Json::array({Json::array({1.0})})},
              {"Q_terminal", Json::array({Json::array({2.0})})},
              {"R", Json::array({Json::array({Json::array({1.0})}),
                                 Json::array({Json::array({1.0})})})},
              {"W", Json::array({Json::array({0.25})})},
              {"W_init", Json::array({Json::array({0.5})})},
              {"costs", Json::array({1.0, Json::array({0.5, 0.75})})}};
    SystemModel m = parse_model(j);
    CHECK(m.horizon == 2);
    CHECK(m.num_actuators == 2);
    CHECK(m.A[1](0, 0) == 0.5);
    CHECK(m.B[1][1](0, 0) == 2.0);
    CHECK(m.actuation_cost[0][0] == 1.0);
    CHECK(m.actuation_cost[0][1] == 0.5);
    CHECK(m.actuation_cost[1][1] == 0.75);
}

TEST_CASE("model invariants are enforced after parsing") {
    Json j = {{"kind", "generic"},
              {"horizon", 1},
              {"A", Json::array({Json::array({1.0})})},
              {"B", Json::array({Json::array({Json::array({1.0})})})},
              {"Q", Json::array({Json::array({-1.0})})},  // not positive definite
              {"Q_terminal", Json::array({Json::array({1.0})})},
              {"R", Json::array({Json::array({Json::array({1.0})})})},
              {"W", Json::array({Json::array({0.25})})},
              {"W_init", Json::array({Json::array({0.5})})},
              {"costs", Json::array({0.0})}};
    CHECK_THROWS_WITH(parse_model(j), Catch::Matchers::ContainsSubstring("positive definite"));
}

TEST_CASE("network actuator restriction") {
    Json j = {{"kind", "network"}, {"horizon", 2}, {"nodes", 3},
              {"edges", Json::array({Json::array({1, 2, 0.3})})},
              {"actuators", Json::array({2, 3})},
              {"q", 1.0}, {"r", 1.0}, {"w", 0.1},
              {"costs", Json::array({1.0, 2.0})}};
    SystemModel m = parse_model(j);
    CHECK(m.num_actuators == 2);
    CHECK(m.B[0][0](1, 0) == 1.0);  // node 2
    CHECK(m.B[0][1](2, 0) == 1.0);  // node 3
}

TEST_CASE("schedule files round trip with 1-based indices") {
    SystemModel m = section5_model();
    Schedule s = Schedule::constant(30, 4);  // actuator 5 in file terms
    TempFile f("");
    save_schedule(s, f.path);
    std::ifstream in(f.path);
    Json j = Json::parse(in);
    CHECK(j[0][0] == 5);
    Schedule back = load_schedule(f.path, m);
    CHECK(back.stages == s.stages);

    TempFile bad("[[0]]");
    CHECK_THROWS_AS(load_schedule(bad.path, m), ValidationError);
    TempFile short_file("[[1]]");
    CHECK_THROWS_AS(load_schedule(short_file.path, m), ValidationError);
}

TEST_CASE("file-level errors are reported with the path") {
    CHECK_THROWS_WITH(load_model("nonexistent_model.json"),
                      Catch::Matchers::ContainsSubstring("nonexistent_model.json"));
    TempFile garbage("{not json");
    CHECK_THROWS_WITH(load_model(garbage.path),
                      Catch::Matchers::ContainsSubstring("not valid JSON"));
}
