#pragma once

#include <Eigen/SparseCore>
#include <ostream>
#include <tuple>
#include <vector>

#include "actsched/cones.hpp"

namespace actsched {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Standard-form conic program: minimize c^T x subject to A x + s = b with s
/// in an ordered product of zero / nonnegative / PSD cones.
struct ConicProblem {
    Vector cost;               // c
    SparseMatrix constraints;  // A, rows grouped by cone block
    Vector rhs;                // b
    ConeLayout cones;

    Eigen::Index num_vars() const { return cost.size(); }
    Eigen::Index num_rows() const { return rhs.size(); }

    void validate() const {
        cones.validate();
        if (constraints.rows() != rhs.size() || constraints.cols() != cost.size())
            throw ValidationError("ConicProblem: constraint matrix shape mismatch");
        if (cones.total_rows() != rhs.size())
            throw ValidationError("ConicProblem: cone layout covers " +
                                  std::to_string(cones.total_rows()) + " rows, expected " +
                                  std::to_string(rhs.size()));
        if (!rhs.allFinite() || !cost.allFinite())
            throw ValidationError("ConicProblem: non-finite data");
        for (Eigen::Index k = 0; k < constraints.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(constraints, k); it; ++it)
                if (!std::isfinite(it.value())) throw ValidationError("ConicProblem: non-finite data");
    }

    /// Sparse text dump for cross-checking against external solvers.
    /// Layout: `cone <id> <kind> <rows> [order]`, then `obj <col> <value>`,
    /// `rhs <cone> <row> <value>`, and `a <cone> <row> <col> <value>` lines
    /// (rows are global indices).
    void dump(std::ostream& os) const {
        os << "# conic program vars=" << num_vars() << " rows=" << num_rows() << "\n";
        Eigen::Index at = 0;
        std::vector<Eigen::Index> block_start;
        for (size_t id = 0; id < cones.blocks.size(); ++id) {
            const auto& b = cones.blocks[id];
            block_start.push_back(at);
            os << "cone " << id << ' ';
            switch (b.kind) {
                case ConeLayout::Kind::Zero: os << "zero " << b.rows; break;
                case ConeLayout::Kind::NonNeg: os << "nonneg " << b.rows; break;
                case ConeLayout::Kind::Psd: os << "psd " << b.rows << ' ' << b.order; break;
            }
            os << "\n";
            at += b.rows;
        }
        auto cone_of_row = [&](Eigen::Index row) {
            size_t id = 0;
            while (id + 1 < block_start.size() && block_start[id + 1] <= row) ++id;
            return id;
        };
        os.precision(17);
        for (Eigen::Index j = 0; j < cost.size(); ++j)
            if (cost[j] != 0.0) os << "obj " << j << ' ' << cost[j] << "\n";
        for (Eigen::Index i = 0; i < rhs.size(); ++i)
            if (rhs[i] != 0.0) os << "rhs " << cone_of_row(i) << ' ' << i << ' ' << rhs[i] << "\n";
        for (Eigen::Index k = 0; k < constraints.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(constraints, k); it; ++it)
                os << "a " << cone_of_row(it.row()) << ' ' << it.row() << ' ' << it.col() << ' '
                   << it.value() << "\n";
    }
};

struct Residuals {
    double primal = 0.0;  // ||Ax + s - b|| / (1 + ||b||)
    double dual = 0.0;    // ||A^T y + c|| / (1 + ||c||)
    double gap = 0.0;     // |c^T x + b^T y| / (1 + |c^T x| + |b^T y|)
    double primal_objective = 0.0;
    double dual_objective = 0.0;
};

inline Residuals residuals(const ConicProblem& p, const Vector& x, const Vector& y,
                           const Vector& s) {
    Residuals r;
    r.primal = (p.constraints * x + s - p.rhs).norm() / (1.0 + p.rhs.norm());
    r.dual = (p.constraints.transpose() * y + p.cost).norm() / (1.0 + p.cost.norm());
    r.primal_objective = p.cost.dot(x);
    r.dual_objective = -p.rhs.dot(y);
    const double ctx = r.primal_objective;
    const double bty = p.rhs.dot(y);
    r.gap = std::abs(ctx + bty) / (1.0 + std::abs(ctx) + std::abs(bty));
    return r;
}

}  // namespace actsched
