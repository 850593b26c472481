#include <catch2/catch_amalgamated.hpp>

#include "actsched/rng.hpp"
#include "actsched/solver.hpp"

using namespace actsched;

namespace {

ConicProblem lp_min_x_geq_1() {
    // minimize x subject to x >= 1, written as -x + s = -1, s nonnegative
    ConicProblem p;
    p.cost = Vector::Constant(1, 1.0);
    p.rhs = Vector::Constant(1, -1.0);
    p.constraints.resize(1, 1);
    p.constraints.insert(0, 0) = -1.0;
    p.cones.blocks = {ConeLayout::nonneg(1)};
    return p;
}

ConicProblem sdp_min_trace_above_identity() {
    // minimize tr(X) subject to X - I (2x2) PSD
    ConicProblem p;
    p.cost = svec(SymMatrix::identity(2));
    p.rhs = -svec(SymMatrix::identity(2));
    p.constraints.resize(3, 3);
    for (int i = 0; i < 3; ++i) p.constraints.insert(i, i) = -1.0;
    p.cones.blocks = {ConeLayout::psd(2)};
    return p;
}

SolverSettings tight_settings(double eps = 1e-9) {
    SolverSettings s;
    s.eps_primal = s.eps_dual = s.eps_gap = eps;
    return s;
}

Matrix random_dense(SubstreamRng& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

}  // namespace

TEST_CASE("one-variable LP solves to high accuracy") {
    SolverResult r = solve(lp_min_x_geq_1(), tight_settings());
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.primal[0] == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(r.objective == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("equality-constrained LP uses the zero cone") {
    ConicProblem p;
    p.cost = Vector::Constant(1, 1.0);
    p.rhs = Vector::Constant(1, 3.0);
    p.constraints.resize(1, 1);
    p.constraints.insert(0, 0) = 1.0;
    p.cones.blocks = {ConeLayout::zero(1)};
    SolverResult r = solve(p, tight_settings());
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.primal[0] == Catch::Approx(3.0).epsilon(1e-8));
    CHECK(r.dual[0] == Catch::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("trace-minimization SDP lands on the identity") {
    SolverResult r = solve(sdp_min_trace_above_identity(), tight_settings());
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.objective == Catch::Approx(2.0).epsilon(1e-8));
    SymMatrix x = smat(r.primal, 2);
    CHECK((x.mat() - Matrix::Identity(2, 2)).norm() <= 1e-7);
}

TEST_CASE("KKT-constructed SDP instances recover the planted objective") {
    for (int trial = 0; trial < 5; ++trial) {
        SubstreamRng rng(500 + trial, 0);
        const int d = 3, k = 6, p_eq = 3;
        Matrix g = random_dense(rng, d, d);
        SymMatrix x_star{Matrix(g * g.transpose() + Matrix::Identity(d, d))};  // strictly feasible
        Matrix a_eq = random_dense(rng, p_eq, k);
        Vector y_eq = random_dense(rng, p_eq, 1).col(0);

        ConicProblem prob;
        prob.constraints.resize(p_eq + k, k);
        std::vector<Triplet> trips;
        for (int i = 0; i < p_eq; ++i)
            for (int j = 0; j < k; ++j) trips.emplace_back(i, j, a_eq(i, j));
        for (int j = 0; j < k; ++j) trips.emplace_back(p_eq + j, j, -1.0);
        prob.constraints.setFromTriplets(trips.begin(), trips.end());
        prob.rhs = Vector::Zero(p_eq + k);
        prob.rhs.head(p_eq) = a_eq * svec(x_star);
        prob.cost = -a_eq.transpose() * y_eq;  // dual-feasible with zero PSD multiplier
        prob.cones.blocks = {ConeLayout::zero(p_eq), ConeLayout::psd(d)};

        SolverResult r = solve(prob, tight_settings(1e-8));
        REQUIRE(r.usable());
        const double planted = -y_eq.dot(prob.rhs.head(p_eq));
        CHECK(std::abs(r.objective - planted) <= 1e-5 * (1.0 + std::abs(planted)));
    }
}

TEST_CASE("cone projections") {
    ConeLayout layout;
    layout.blocks = {ConeLayout::nonneg(2)};
    Vector v(2);
    v << -1.0, 2.0;
    Vector pv = project_cone(v, layout);
    CHECK(pv[0] == 0.0);
    CHECK(pv[1] == 2.0);

    ConeLayout psd;
    psd.blocks = {ConeLayout::psd(2)};
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -2.0;
    Vector proj = project_cone(svec(SymMatrix(d)), psd);
    SymMatrix back = smat(proj, 2);
    CHECK(back(0, 0) == Catch::Approx(1.0));
    CHECK(back(1, 1) == Catch::Approx(0.0).margin(1e-14));

    ConeLayout mixed;
    mixed.blocks = {ConeLayout::zero(2), ConeLayout::nonneg(3), ConeLayout::psd(3)};
    SubstreamRng rng(77, 0);
    for (int trial = 0; trial < 100; ++trial) {
        Vector x(2 + 3 + 6);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.next_gaussian();
        Vector once = project_cone(x, mixed);
        Vector twice = project_cone(once, mixed);
        CHECK((twice - once).norm() <= 1e-12 * (1.0 + once.norm()));
        // Moreau split: the dual-cone projection of the negation is orthogonal
        Vector dual = project_dual_cone(-x, mixed);
        CHECK(std::abs(once.dot(dual)) <= 1e-10 * (1.0 + once.norm() * dual.norm()));
    }
}

TEST_CASE("residuals on an exact KKT triple and under perturbation") {
    ConicProblem p = lp_min_x_geq_1();
    Vector x = Vector::Constant(1, 1.0);
    Vector s = Vector::Zero(1);
    Vector y = Vector::Constant(1, 1.0);
    Residuals r = residuals(p, x, y, s);
    CHECK(r.primal <= 1e-12);
    CHECK(r.dual <= 1e-12);
    CHECK(r.gap <= 1e-12);

    for (double delta : {1e-4, 1e-3, 1e-2}) {
        Vector xd = x;
        xd[0] += delta;
        Residuals rd = residuals(p, xd, y, s);
        CHECK(rd.primal == Catch::Approx(delta / (1.0 + p.rhs.norm())).epsilon(1e-9));
    }
}

TEST_CASE("equilibration balances and round-trips") {
    // already balanced: scales stay within 10% of one
    ConicProblem p = sdp_min_trace_above_identity();
    auto [scaled, sd] = equilibrate(p);
    for (Eigen::Index i = 0; i < sd.row_scale.size(); ++i)
        CHECK(std::abs(sd.row_scale[i] - 1.0) <= 0.1);
    for (Eigen::Index j = 0; j < sd.col_scale.size(); ++j)
        CHECK(std::abs(sd.col_scale[j] - 1.0) <= 0.1);

    // unscale inverts the solution map exactly
    SolverResult fake;
    fake.primal = Vector::Constant(3, 2.0);
    fake.slack = Vector::Constant(3, 3.0);
    fake.dual = Vector::Constant(3, 4.0);
    SolverResult scaled_fake = fake;
    scaled_fake.primal = fake.primal.cwiseQuotient(sd.col_scale);
    scaled_fake.slack = sd.row_scale.cwiseProduct(fake.slack);
    scaled_fake.dual = fake.dual.cwiseQuotient(sd.row_scale);
    SolverResult round = unscale(scaled_fake, sd);
    CHECK((round.primal - fake.primal).norm() <= 1e-12);
    CHECK((round.slack - fake.slack).norm() <= 1e-12);
    CHECK((round.dual - fake.dual).norm() <= 1e-12);
}

TEST_CASE("badly scaled LP needs equilibration") {
    // minimize x1 + x2 subject to 1e6 x1 >= 1, 1e-6 x2 >= 1, x >= 0
    ConicProblem p;
    p.cost = Vector::Ones(2);
    p.rhs = Vector::Zero(4);
    p.rhs[0] = -1.0;
    p.rhs[1] = -1.0;
    std::vector<Triplet> trips = {{0, 0, -1e6}, {1, 1, -1e-6}, {2, 0, -1.0}, {3, 1, -1.0}};
    p.constraints.resize(4, 2);
    p.constraints.setFromTriplets(trips.begin(), trips.end());
    p.cones.blocks = {ConeLayout::nonneg(4)};

    SolverSettings with_eq = tight_settings(1e-9);
    SolverResult r_eq = solve(p, with_eq);
    REQUIRE(r_eq.status == SolveStatus::Solved);
    CHECK(r_eq.objective == Catch::Approx(1e6).epsilon(1e-6));

    SolverSettings without_eq = with_eq;
    without_eq.equilibrate = false;
    without_eq.max_iter = 20000;
    SolverResult r_raw = solve(p, without_eq);
    // the unscaled run takes more iterations (or never reaches tolerance)
    CHECK((r_raw.status != SolveStatus::Solved || r_raw.iterations > r_eq.iterations));
}

TEST_CASE("identical solves are bit-identical") {
    ConicProblem p = sdp_min_trace_above_identity();
    SolverResult a = solve(p, tight_settings());
    SolverResult b = solve(p, tight_settings());
    REQUIRE(a.primal.size() == b.primal.size());
    for (Eigen::Index i = 0; i < a.primal.size(); ++i) CHECK(a.primal[i] == b.primal[i]);
    CHECK(a.iterations == b.iterations);
    CHECK(a.objective == b.objective);
}

TEST_CASE("infeasible bounds produce a certifying dual ray") {
    // x >= 1 and x <= 0 simultaneously
    ConicProblem p;
    p.cost = Vector::Zero(1);
    p.rhs = Vector::Zero(2);
    p.rhs[0] = -1.0;
    std::vector<Triplet> trips = {{0, 0, -1.0}, {1, 0, 1.0}};
    p.constraints.resize(2, 1);
    p.constraints.setFromTriplets(trips.begin(), trips.end());
    p.cones.blocks = {ConeLayout::nonneg(2)};

    SolverResult r = solve(p, SolverSettings{});
    REQUIRE(r.status == SolveStatus::Infeasible);
    const Vector& y = r.dual;
    CHECK(p.rhs.dot(y) < 0.0);
    CHECK((p.constraints.transpose() * y).norm() <= 1e-6 * (1.0 + y.norm()));
    CHECK(distance_to_dual_cone(y, p.cones) <= 1e-6 * (1.0 + y.norm()));
}

TEST_CASE("unbounded objective produces a primal ray") {
    // minimize -x subject to x >= 0
    ConicProblem p;
    p.cost = Vector::Constant(1, -1.0);
    p.rhs = Vector::Zero(1);
    p.constraints.resize(1, 1);
    p.constraints.insert(0, 0) = -1.0;
    p.cones.blocks = {ConeLayout::nonneg(1)};

    SolverResult r = solve(p, SolverSettings{});
    REQUIRE(r.status == SolveStatus::Unbounded);
    const Vector& ray = r.primal;
    CHECK(p.cost.dot(ray) < 0.0);
    Vector s_ray = -(p.constraints * ray);
    CHECK(distance_to_cone(s_ray, p.cones) <= 1e-6 * (1.0 + ray.norm()));
}

TEST_CASE("structural validation happens before iterating") {
    ConicProblem p = lp_min_x_geq_1();
    p.cones.blocks = {ConeLayout::nonneg(2)};  // claims more rows than exist
    CHECK_THROWS_AS(solve(p, SolverSettings{}), ValidationError);

    SolverSettings bad;
    bad.alpha = 2.5;
    CHECK_THROWS_AS(solve(lp_min_x_geq_1(), bad), ValidationError);
}
