// Rank-revealing subspace helpers and the PSD square root.
#pragma once

#include <algorithm>
#include <vector>

#include "pidil/matrix.hpp"

namespace pidil {

/// Principal square root of a positive semidefinite matrix via its
/// eigendecomposition; eigenvalues in [-eps_rank, 0) are clamped to zero.
/// Throws NotHermitian / NotPSD when the input fails those gates.
/// Hermitian square root with eigenvalues clamped at a relative floor.
/// Eigenvalues that are zero up to rounding must not leak into the root:
/// sqrt(1e-16) = 1e-8 is large enough to fool every rank threshold later.
/// `scale` lets callers state the magnitude the matrix was formed at, so a
/// difference of unit-norm terms that cancels exactly still floors its noise.
inline Matrix psd_sqrt(const Matrix& a, const ToleranceConfig& tol = {}, double scale = 0.0) {
    require_square(a, "psd_sqrt");
    if (!is_hermitian(a, tol))
        fail(errc::not_hermitian, "psd_sqrt: input is not Hermitian at eps_rel");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
    Eigen::VectorXd lam = es.eigenvalues();
    const double floor =
        tol.eps_rel * std::max({lam.size() ? lam.maxCoeff() : 0.0, scale, 0.0});
    for (Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -tol.eps_rank)
            fail(errc::not_psd, "psd_sqrt: eigenvalue " + std::to_string(lam(i)) +
                                    " below -eps_rank");
        lam(i) = lam(i) <= floor ? 0.0 : std::sqrt(lam(i));
    }
    Matrix b = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    return hermitian_part(b);
}

/// Number of singular values strictly above eps_rank.
inline int rank_tol(const Matrix& a, const ToleranceConfig& tol = {}) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > tol.eps_rank) ++r;
    return r;
}

/// Orthonormal basis of the column span (left singular vectors with
/// singular value > eps_rank). A zero (or empty) matrix yields 0 columns.
inline Matrix range_basis(const Matrix& a, const ToleranceConfig& tol = {}) {
    if (a.rows() == 0 || a.cols() == 0) return Matrix(a.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) > tol.eps_rank) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthogonal projection onto the column span of a.
inline Matrix projection_onto(const Matrix& a, const ToleranceConfig& tol = {}) {
    Matrix b = range_basis(a, tol);
    if (b.cols() == 0) return Matrix::Zero(a.rows(), a.rows());
    return hermitian_part(b * b.adjoint());
}

/// True when two orthonormal-column bases span orthogonal subspaces:
/// max |a* b| <= eps_rank entrywise. Empty bases are orthogonal to everything.
inline bool subspaces_orthogonal(const Matrix& a, const Matrix& b,
                                 const ToleranceConfig& tol = {}) {
    if (a.cols() == 0 || b.cols() == 0) return true;
    if (a.rows() != b.rows())
        fail(errc::dimension_mismatch, "subspaces_orthogonal: ambient dimensions differ");
    return (a.adjoint() * b).cwiseAbs().maxCoeff() <= tol.eps_rank;
}

/// Maximum entrywise overlap between two orthonormal bases (0 when either is empty).
inline double subspace_overlap(const Matrix& a, const Matrix& b) {
    if (a.cols() == 0 || b.cols() == 0) return 0.0;
    return (a.adjoint() * b).cwiseAbs().maxCoeff();
}

/// Orthonormal basis of the range of a Hermitian matrix (eigenvectors with
/// |eigenvalue| > eps_rank). Cheaper than an SVD for the large Gram-type
/// matrices produced by truncated models.
inline Matrix hermitian_range_basis(const Matrix& a, const ToleranceConfig& tol = {}) {
    require_square(a, "hermitian_range_basis");
    if (a.rows() == 0) return Matrix(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
    std::vector<Index> keep;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > tol.eps_rank) keep.push_back(i);
    Matrix b(a.rows(), static_cast<Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) b.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
    return b;
}

/// Orthonormal basis of the orthogonal complement of span(basis) in C^n.
inline Matrix complement_basis(const Matrix& basis, Index ambient_dim,
                               const ToleranceConfig& tol = {}) {
    if (basis.cols() == 0) return Matrix::Identity(ambient_dim, ambient_dim);
    if (basis.rows() != ambient_dim)
        fail(errc::dimension_mismatch, "complement_basis: ambient dimension mismatch");
    Matrix p = Matrix::Identity(ambient_dim, ambient_dim) - basis * basis.adjoint();
    return hermitian_range_basis(p, tol);
}

/// Snap a nearly-idempotent Hermitian matrix to the projection onto the span
/// of its eigenvectors with eigenvalue > 1/2.
inline Matrix nearest_projection(const Matrix& m) {
    require_square(m, "nearest_projection");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
    std::vector<Index> keep;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
    Matrix p = Matrix::Zero(m.rows(), m.rows());
    for (Index j : keep) {
        Vector v = es.eigenvectors().col(j);
        p += v * v.adjoint();
    }
    return hermitian_part(p);
}

} // namespace pidil
