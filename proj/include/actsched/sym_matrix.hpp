#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "actsched/errors.hpp"

namespace actsched {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real symmetric matrix. Construction symmetrizes (S+S^T)/2 after
/// checking the input is symmetric to within 1e-12 * (1 + max|S|); repeated
/// backward-recursion updates therefore cannot drift away from symmetry.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(Matrix s) {
        if (s.rows() != s.cols() || s.rows() < 1)
            throw ValidationError("SymMatrix: expected a square matrix of dimension >= 1, got " +
                                  std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
        if (!s.allFinite())
            throw ValidationError("SymMatrix: non-finite entries");
        const double scale = 1.0 + s.cwiseAbs().maxCoeff();
        const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * scale)
            throw ValidationError("SymMatrix: asymmetry " + std::to_string(asym) +
                                  " exceeds tolerance for dimension " + std::to_string(s.rows()));
        m_ = 0.5 * (s + s.transpose());
    }

    static SymMatrix identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }
    static SymMatrix zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }
    /// Scalar convenience (1x1).
    static SymMatrix scalar(double v) { return SymMatrix(Matrix::Constant(1, 1, v)); }

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

struct EigenDecomposition {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthogonal, columns
};

/// Full symmetric eigendecomposition.
inline EigenDecomposition sym_eig(const SymMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.mat());
    if (es.info() != Eigen::Success)
        throw NumericalError("sym_eig: eigendecomposition did not converge for dimension " +
                             std::to_string(s.dim()));
    return {es.eigenvalues(), es.eigenvectors()};
}

/// Nearest positive-semidefinite matrix in Frobenius norm (eigenvalue clipping).
inline SymMatrix psd_project(const SymMatrix& s) {
    EigenDecomposition ed = sym_eig(s);
    Vector clipped = ed.eigenvalues.cwiseMax(0.0);
    Matrix p = ed.eigenvectors * clipped.asDiagonal() * ed.eigenvectors.transpose();
    return SymMatrix(0.5 * (p + p.transpose()));
}

inline Eigen::Index svec_size(Eigen::Index dim) { return dim * (dim + 1) / 2; }

/// Lower-triangle vectorization, column by column, off-diagonals scaled by
/// sqrt(2) so that svec(S1).dot(svec(S2)) == trace(S1*S2).
inline Vector svec(const SymMatrix& s) {
    const Eigen::Index n = s.dim();
    static const double kSqrt2 = std::sqrt(2.0);
    Vector v(svec_size(n));
    Eigen::Index k = 0;
    for (Eigen::Index col = 0; col < n; ++col)
        for (Eigen::Index row = col; row < n; ++row)
            v[k++] = (row == col) ? s(row, col) : kSqrt2 * s(row, col);
    return v;
}

/// Inverse of svec. The vector length must be a triangular number matching dim.
inline SymMatrix smat(const Vector& v, Eigen::Index dim) {
    if (svec_size(dim) != v.size())
        throw ValidationError("smat: vector length " + std::to_string(v.size()) +
                              " does not match dimension " + std::to_string(dim));
    static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
    Matrix s(dim, dim);
    Eigen::Index k = 0;
    for (Eigen::Index col = 0; col < dim; ++col)
        for (Eigen::Index row = col; row < dim; ++row) {
            const double x = (row == col) ? v[k] : kInvSqrt2 * v[k];
            s(row, col) = x;
            s(col, row) = x;
            ++k;
        }
    return SymMatrix(std::move(s));
}

/// smat with the dimension recovered from the vector length.
inline SymMatrix smat(const Vector& v) {
    const auto dim = static_cast<Eigen::Index>((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0 + 0.5);
    if (svec_size(dim) != v.size())
        throw ValidationError("smat: vector length " + std::to_string(v.size()) +
                              " is not a triangular number");
    return smat(v, dim);
}

/// Solve S X = B for symmetric positive definite S via Cholesky.
inline Matrix solve_spd(const SymMatrix& s, const Matrix& b) {
    if (s.dim() != b.rows())
        throw ValidationError("solve_spd: dimension mismatch");
    Eigen::LLT<Matrix> llt(s.mat());
    if (llt.info() != Eigen::Success)
        throw NumericalError("solve_spd: matrix of dimension " + std::to_string(s.dim()) +
                             " is not positive definite");
    const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
    const double floor = 1e-12 * s.mat().trace() / static_cast<double>(s.dim());
    if (min_pivot * min_pivot <= floor)
        throw NumericalError("solve_spd: matrix of dimension " + std::to_string(s.dim()) +
                             " is not positive definite (pivot " + std::to_string(min_pivot * min_pivot) + ")");
    return llt.solve(b);
}

inline Matrix inverse_spd(const SymMatrix& s) {
    return solve_spd(s, Matrix::Identity(s.dim(), s.dim()));
}

inline double frob_norm(const SymMatrix& s) { return s.mat().norm(); }

inline double min_eig(const SymMatrix& s) { return sym_eig(s).eigenvalues.minCoeff(); }

/// Largest absolute eigenvalue.
inline double spectral_norm(const SymMatrix& s) {
    return sym_eig(s).eigenvalues.cwiseAbs().maxCoeff();
}

/// Largest singular value of a general square matrix (via eig of A^T A).
inline double spectral_norm(const Matrix& a) {
    SymMatrix gram(Matrix(a.transpose() * a));
    const double lam = sym_eig(gram).eigenvalues.maxCoeff();
    return std::sqrt(std::max(lam, 0.0));
}

}  // namespace actsched
