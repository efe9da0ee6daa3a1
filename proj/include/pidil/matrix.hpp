// Dense complex matrices (Eigen-backed) and the tolerance knobs used everywhere.
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "pidil/errors.hpp"

namespace pidil {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// eps_rank gates rank/subspace decisions, eps_rel gates relative residual checks.
struct ToleranceConfig {
    double eps_rank = 1e-8;
    double eps_rel = 1e-9;

    void validate() const {
        if (!(eps_rank > 0.0) || !(eps_rel > 0.0))
            fail(errc::dimension_mismatch, "tolerances must be positive");
        if (eps_rel > eps_rank)
            fail(errc::dimension_mismatch, "eps_rel must not exceed eps_rank");
    }
};

inline double fro_norm(const Matrix& a) { return a.norm(); }

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

inline bool is_hermitian(const Matrix& a, const ToleranceConfig& tol) {
    if (a.rows() != a.cols()) return false;
    return fro_norm(a - a.adjoint()) <= tol.eps_rel * std::max(1.0, fro_norm(a));
}

// Extremal eigenvalues of a Hermitian matrix (input is symmetrized first).
inline double min_eigenvalue(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

inline void require_square(const Matrix& a, const char* who) {
    if (a.rows() != a.cols())
        fail(errc::dimension_mismatch, std::string(who) + ": matrix must be square");
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* who) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(errc::dimension_mismatch, std::string(who) + ": shape mismatch");
}

// Submatrix on a retained index set (used for depth-truncated verification).
inline Matrix compress(const Matrix& a, const std::vector<int>& keep) {
    Matrix out(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) = a(keep[i], keep[j]);
    return out;
}

} // namespace pidil
