#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixctl/prob_vector.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Hermitian, unit-trace, positive-semidefinite (within tolerances) state.
/// The stored matrix is symmetrized once the hermiticity defect is checked.
class DensityMatrix {
  public:
    DensityMatrix() = default;

    explicit DensityMatrix(const CMatrix& m, double tol_herm = tol::herm,
                           double tol_trace = 1e-10, double eig_floor = tol::eig_floor) {
        require_square(m, "DensityMatrix");
        if (herm_defect(m) > tol_herm)
            throw ValidationError("DensityMatrix: hermiticity defect " +
                                  std::to_string(herm_defect(m)));
        mat_ = 0.5 * (m + m.adjoint().eval());
        const double tr = mat_.trace().real();
        if (std::abs(tr - 1.0) > tol_trace)
            throw ValidationError("DensityMatrix: trace " + std::to_string(tr));
        mat_ /= tr;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -eig_floor)
            throw ValidationError("DensityMatrix: eigenvalue " +
                                  std::to_string(es.eigenvalues().minCoeff()) + " below floor");
    }

    static DensityMatrix maximally_mixed(Eigen::Index d) {
        return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
    }

    static DensityMatrix pure(const CVector& psi) {
        CVector v = psi / psi.norm();
        return DensityMatrix(v * v.adjoint());
    }

    static DensityMatrix diagonal(const ProbVector& p) {
        const auto d = static_cast<Eigen::Index>(p.dim());
        CMatrix m = CMatrix::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i) m(i, i) = p[static_cast<std::size_t>(i)];
        return DensityMatrix(m);
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const CMatrix& mat() const { return mat_; }

    /// Eigenvalues sorted descending and matching eigenvector columns.
    std::pair<RVector, CMatrix> eig_sorted() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_);
        const Eigen::Index d = dim();
        RVector vals(d);
        CMatrix vecs(d, d);
        for (Eigen::Index k = 0; k < d; ++k) {
            vals(k) = es.eigenvalues()(d - 1 - k);
            vecs.col(k) = es.eigenvectors().col(d - 1 - k);
        }
        return {std::move(vals), std::move(vecs)};
    }

    /// Spectrum, sorted descending, as a probability vector.
    ProbVector spectrum() const {
        const RVector vals = eig_sorted().first;
        return ProbVector::from_eigen(vals, 1e-9, 1e-9);
    }

  private:
    CMatrix mat_;
};

/// Orthonormal basis, stored as the unitary whose columns are the vectors.
class Basis {
  public:
    Basis() = default;

    explicit Basis(CMatrix columns, double tol_unitary = 1e-10) : cols_(std::move(columns)) {
        require_square(cols_, "Basis");
        const CMatrix g = cols_.adjoint() * cols_;
        if (max_abs(CMatrix(g - CMatrix::Identity(cols_.rows(), cols_.cols()))) > tol_unitary)
            throw ValidationError("Basis: columns not orthonormal");
    }

    static Basis computational(Eigen::Index d) { return Basis(CMatrix::Identity(d, d)); }

    Eigen::Index dim() const { return cols_.rows(); }
    const CMatrix& matrix() const { return cols_; }
    CVector vector(Eigen::Index i) const { return cols_.col(i); }

  private:
    CMatrix cols_;
};

inline bool is_unitary(const CMatrix& u, double tol_u = 1e-10) {
    if (u.rows() != u.cols()) return false;
    return max_abs(CMatrix(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()))) <= tol_u;
}

/// Sorted-descending spectra ell_1 distance between two Hermitian states.
inline double spectral_l1(const DensityMatrix& a, const DensityMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "spectral_l1");
    const RVector va = a.eig_sorted().first, vb = b.eig_sorted().first;
    return (va - vb).cwiseAbs().sum();
}

}  // namespace mixctl
