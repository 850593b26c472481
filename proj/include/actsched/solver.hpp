#pragma once

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <ostream>

#include "actsched/conic_problem.hpp"

namespace actsched {

struct SolverSettings {
    double eps_primal = 1e-6;
    double eps_dual = 1e-6;
    double eps_gap = 1e-6;
    double eps_infeasible = 1e-7;
    int max_iter = 200000;
    double rho = 1.0;              // penalty weight on the consensus term
    double alpha = 1.5;            // over-relaxation, in (1, 2)
    bool equilibrate = true;
    bool adaptive_rho = true;
    int check_interval = 25;       // termination checks amortize the eigensolves
    int rho_update_interval = 100;
    int verbosity = 0;
    std::ostream* iter_log = nullptr;  // CSV: iter,primal,dual,gap

    void validate() const {
        if (eps_primal <= 0 || eps_dual <= 0 || eps_gap <= 0)
            throw ValidationError("SolverSettings: tolerances must be positive");
        if (alpha <= 1.0 || alpha >= 2.0)
            throw ValidationError("SolverSettings: over-relaxation must lie in (1, 2)");
        if (rho <= 0) throw ValidationError("SolverSettings: rho must be positive");
        if (max_iter < 1) throw ValidationError("SolverSettings: max_iter must be >= 1");
    }
};

enum class SolveStatus { Solved, SolvedInaccurate, MaxIter, Infeasible, Unbounded };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::SolvedInaccurate: return "solved_inaccurate";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

struct SolverResult {
    Vector primal;  // x (or the unbounded ray)
    Vector dual;    // y (or the infeasibility certificate)
    Vector slack;   // s
    SolveStatus status = SolveStatus::MaxIter;
    double primal_residual = std::numeric_limits<double>::infinity();
    double dual_residual = std::numeric_limits<double>::infinity();
    double gap_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double objective = std::numeric_limits<double>::quiet_NaN();

    bool usable() const {
        return status == SolveStatus::Solved || status == SolveStatus::SolvedInaccurate;
    }
};

/// Diagonal row/column scaling produced by equilibration.
struct ScalingData {
    Vector row_scale;  // D
    Vector col_scale;  // E
};

/// Ruiz-style iterative norm balancing. All svec rows of a PSD block share
/// one scalar so the scaled slack stays inside the same cone.
inline std::pair<ConicProblem, ScalingData> equilibrate(const ConicProblem& p, int passes = 15) {
    const Eigen::Index m = p.num_rows(), n = p.num_vars();
    ScalingData sd{Vector::Ones(m), Vector::Ones(n)};
    Eigen::MatrixXd dense;  // small programs only pay for sparse iteration
    SparseMatrix a = p.constraints;

    Vector row_norm(m), col_norm(n);
    for (int pass = 0; pass < passes; ++pass) {
        row_norm.setZero();
        col_norm.setZero();
        for (Eigen::Index k = 0; k < a.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
                const double v = std::abs(it.value());
                row_norm[it.row()] = std::max(row_norm[it.row()], v);
                col_norm[it.col()] = std::max(col_norm[it.col()], v);
            }
        // share one scale across each PSD block
        Eigen::Index at = 0;
        for (const auto& b : p.cones.blocks) {
            if (b.kind == ConeLayout::Kind::Psd) {
                const double blockmax = row_norm.segment(at, b.rows).maxCoeff();
                row_norm.segment(at, b.rows).setConstant(blockmax);
            }
            at += b.rows;
        }
        bool settled = true;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double s = row_norm[i] > 0 ? 1.0 / std::sqrt(row_norm[i]) : 1.0;
            if (std::abs(s - 1.0) > 1e-3) settled = false;
            sd.row_scale[i] *= s;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = col_norm[j] > 0 ? 1.0 / std::sqrt(col_norm[j]) : 1.0;
            if (std::abs(s - 1.0) > 1e-3) settled = false;
            sd.col_scale[j] *= s;
        }
        a = p.constraints;
        for (Eigen::Index k = 0; k < a.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(a, k); it; ++it)
                it.valueRef() *= sd.row_scale[it.row()] * sd.col_scale[it.col()];
        if (settled) break;
    }

    ConicProblem scaled;
    scaled.constraints = a;
    scaled.rhs = sd.row_scale.cwiseProduct(p.rhs);
    scaled.cost = sd.col_scale.cwiseProduct(p.cost);
    scaled.cones = p.cones;
    return {scaled, sd};
}

/// Map a scaled-space solution back to the original problem's coordinates.
inline SolverResult unscale(SolverResult r, const ScalingData& sd) {
    if (r.primal.size() == sd.col_scale.size()) r.primal = sd.col_scale.cwiseProduct(r.primal);
    if (r.slack.size() == sd.row_scale.size()) r.slack = r.slack.cwiseQuotient(sd.row_scale);
    if (r.dual.size() == sd.row_scale.size()) r.dual = sd.row_scale.cwiseProduct(r.dual);
    return r;
}

namespace detail {

/// One (x, s) half-step: projection onto the affine set {Ax + s = b} shifted
/// by the objective, using the cached factorization of I + A^T A.
struct AffineStep {
    const SparseMatrix* a = nullptr;
    Eigen::SimplicialLLT<SparseMatrix> llt;

    void factorize(const SparseMatrix& constraints) {
        a = &constraints;
        SparseMatrix normal = SparseMatrix(constraints.transpose()) * constraints;
        SparseMatrix eye(constraints.cols(), constraints.cols());
        eye.setIdentity();
        normal = normal + eye;
        llt.compute(normal);
        if (llt.info() != Eigen::Success)
            throw NumericalError("conic solver: failed to factorize the affine-step system");
    }

    void run(const Vector& xt, const Vector& st, const Vector& u, const Vector& b,
             const Vector& c_over_rho, Vector& x_out, Vector& s_out) const {
        x_out = llt.solve(xt - c_over_rho + a->transpose() * (b - st + u));
        s_out = b - (*a) * x_out;
    }
};

}  // namespace detail

/// Operator-splitting (ADMM) solve of a standard-form conic program. The
/// iteration alternates the affine projection with the cone projection; the
/// factorization is independent of rho, so adaptive penalty updates only
/// rescale the dual variable. Deterministic: no randomized or
/// timing-dependent reductions anywhere.
inline SolverResult solve(const ConicProblem& problem, const SolverSettings& settings = {}) {
    problem.validate();
    settings.validate();

    ConicProblem scaled;
    ScalingData sd{Vector::Ones(problem.num_rows()), Vector::Ones(problem.num_vars())};
    if (settings.equilibrate) {
        auto pair = equilibrate(problem);
        scaled = std::move(pair.first);
        sd = std::move(pair.second);
    } else {
        scaled = problem;
    }

    const Eigen::Index n = scaled.num_vars();
    const Eigen::Index m = scaled.num_rows();

    detail::AffineStep affine;
    affine.factorize(scaled.constraints);

    double rho = settings.rho;
    Vector xt = Vector::Zero(n), st = Vector::Zero(m), u = Vector::Zero(m);
    Vector x(n), s(m), v(m);
    Vector xt_mark = xt, u_mark = u;

    SolverResult result;
    result.primal = Vector::Zero(problem.num_vars());
    result.dual = Vector::Zero(problem.num_rows());
    result.slack = Vector::Zero(problem.num_rows());

    if (settings.iter_log) (*settings.iter_log) << "iter,primal,dual,gap\n";

    const double alpha = settings.alpha;
    int iter = 0;
    while (iter < settings.max_iter) {
        ++iter;
        affine.run(xt, st, u, scaled.rhs, Vector(scaled.cost / rho), x, s);
        xt = alpha * x + (1.0 - alpha) * xt;
        v = alpha * s + (1.0 - alpha) * st + u;
        st = project_cone(v, scaled.cones);
        u = v - st;

        if (iter % settings.check_interval != 0 && iter != settings.max_iter) continue;

        // residuals refer to the original problem
        Vector x_o = sd.col_scale.cwiseProduct(xt);
        Vector s_o = st.cwiseQuotient(sd.row_scale);
        Vector y_o = -rho * sd.row_scale.cwiseProduct(u);
        Residuals res = residuals(problem, x_o, y_o, s_o);

        if (settings.iter_log)
            (*settings.iter_log) << iter << ',' << res.primal << ',' << res.dual << ',' << res.gap
                                 << "\n";
        result.primal = x_o;
        result.dual = y_o;
        result.slack = s_o;
        result.primal_residual = res.primal;
        result.dual_residual = res.dual;
        result.gap_residual = res.gap;
        result.iterations = iter;
        result.objective = res.primal_objective;

        if (res.primal <= settings.eps_primal && res.dual <= settings.eps_dual &&
            res.gap <= settings.eps_gap) {
            result.status = SolveStatus::Solved;
            return result;
        }

        // certificate candidates from the displacement of the iterates
        Vector du = u - u_mark;
        if (du.norm() > 1e-12 * (1.0 + u.norm())) {
            Vector y_ray = -sd.row_scale.cwiseProduct(du);
            const double bty = problem.rhs.dot(y_ray);
            if (bty < 0 &&
                distance_to_dual_cone(y_ray, problem.cones) <= 1e-4 * y_ray.norm()) {
                Vector cert = y_ray / (-bty);
                const double feas = (problem.constraints.transpose() * cert).norm();
                if (feas <= settings.eps_infeasible * (1.0 + cert.norm()) &&
                    distance_to_dual_cone(cert, problem.cones) <=
                        settings.eps_infeasible * (1.0 + cert.norm())) {
                    result.status = SolveStatus::Infeasible;
                    result.dual = cert;
                    result.objective = std::numeric_limits<double>::quiet_NaN();
                    return result;
                }
            }
        }
        Vector dx = xt - xt_mark;
        if (dx.norm() > 1e-12 * (1.0 + xt.norm())) {
            Vector x_ray = sd.col_scale.cwiseProduct(dx);
            const double ctd = problem.cost.dot(x_ray);
            if (ctd < 0) {
                Vector ray = x_ray / (-ctd);
                Vector s_ray = -(problem.constraints * ray);
                if (distance_to_cone(s_ray, problem.cones) <=
                    settings.eps_infeasible * (1.0 + ray.norm() + s_ray.norm())) {
                    result.status = SolveStatus::Unbounded;
                    result.primal = ray;
                    result.objective = std::numeric_limits<double>::quiet_NaN();
                    return result;
                }
            }
        }
        xt_mark = xt;
        u_mark = u;

        if (settings.adaptive_rho && iter % settings.rho_update_interval == 0 &&
            res.dual > 0 && res.primal > 0) {
            const double ratio = res.primal / res.dual;
            double rho_new = rho;
            if (ratio > 5.0)
                rho_new = std::min(rho * std::sqrt(ratio), 1e4);
            else if (ratio < 0.2)
                rho_new = std::max(rho * std::sqrt(ratio), 1e-4);
            if (rho_new != rho) {
                u *= rho / rho_new;         // keep y = -rho u continuous
                u_mark *= rho / rho_new;
                rho = rho_new;
            }
        }
    }

    const bool near = result.primal_residual <= 100.0 * settings.eps_primal &&
                      result.dual_residual <= 100.0 * settings.eps_dual &&
                      result.gap_residual <= 100.0 * settings.eps_gap;
    result.status = near ? SolveStatus::SolvedInaccurate : SolveStatus::MaxIter;
    return result;
}

}  // namespace actsched
