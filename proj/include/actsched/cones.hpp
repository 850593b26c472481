#pragma once

#include <string>
#include <vector>

#include "actsched/sym_matrix.hpp"

namespace actsched {

/// Ordered product of zero, nonnegative, and PSD cones. A PSD block of order
/// d occupies d(d+1)/2 svec rows.
struct ConeLayout {
    enum class Kind { Zero, NonNeg, Psd };

    struct Block {
        Kind kind;
        Eigen::Index rows;   // rows occupied in the constraint matrix
        Eigen::Index order;  // matrix order for Psd blocks, 0 otherwise
    };

    std::vector<Block> blocks;

    static Block zero(Eigen::Index rows) { return {Kind::Zero, rows, 0}; }
    static Block nonneg(Eigen::Index rows) { return {Kind::NonNeg, rows, 0}; }
    static Block psd(Eigen::Index order) { return {Kind::Psd, svec_size(order), order}; }

    Eigen::Index total_rows() const {
        Eigen::Index total = 0;
        for (const auto& b : blocks) total += b.rows;
        return total;
    }

    void validate() const {
        for (const auto& b : blocks) {
            if (b.rows < 1) throw ValidationError("ConeLayout: empty block");
            if (b.kind == Kind::Psd && b.rows != svec_size(b.order))
                throw ValidationError("ConeLayout: PSD block row count does not match its order");
        }
    }
};

/// Projection onto the cone product. Zero blocks project to the origin,
/// nonnegative blocks clamp, PSD blocks clip eigenvalues.
inline Vector project_cone(const Vector& v, const ConeLayout& layout) {
    if (v.size() != layout.total_rows())
        throw ValidationError("project_cone: vector length does not match layout");
    Vector out(v.size());
    Eigen::Index at = 0;
    for (const auto& b : layout.blocks) {
        switch (b.kind) {
            case ConeLayout::Kind::Zero:
                out.segment(at, b.rows).setZero();
                break;
            case ConeLayout::Kind::NonNeg:
                out.segment(at, b.rows) = v.segment(at, b.rows).cwiseMax(0.0);
                break;
            case ConeLayout::Kind::Psd:
                out.segment(at, b.rows) = svec(psd_project(smat(v.segment(at, b.rows), b.order)));
                break;
        }
        at += b.rows;
    }
    return out;
}

/// Projection onto the dual cone (zero blocks become free, the others are
/// self-dual).
inline Vector project_dual_cone(const Vector& v, const ConeLayout& layout) {
    if (v.size() != layout.total_rows())
        throw ValidationError("project_dual_cone: vector length does not match layout");
    Vector out(v.size());
    Eigen::Index at = 0;
    for (const auto& b : layout.blocks) {
        switch (b.kind) {
            case ConeLayout::Kind::Zero:
                out.segment(at, b.rows) = v.segment(at, b.rows);
                break;
            case ConeLayout::Kind::NonNeg:
                out.segment(at, b.rows) = v.segment(at, b.rows).cwiseMax(0.0);
                break;
            case ConeLayout::Kind::Psd:
                out.segment(at, b.rows) = svec(psd_project(smat(v.segment(at, b.rows), b.order)));
                break;
        }
        at += b.rows;
    }
    return out;
}

inline double distance_to_cone(const Vector& v, const ConeLayout& layout) {
    return (v - project_cone(v, layout)).norm();
}

inline double distance_to_dual_cone(const Vector& v, const ConeLayout& layout) {
    return (v - project_dual_cone(v, layout)).norm();
}

}  // namespace actsched
