#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mixctl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct MajorizationViolated : Error {
    using Error::Error;
};
struct InvalidTime : Error {
    using Error::Error;
};
struct NonpositiveRate : Error {
    using Error::Error;
};
struct ZeroLindbladian : Error {
    using Error::Error;
};
struct NotOptimal : Error {
    using Error::Error;
};
struct NotDephasing : Error {
    using Error::Error;
};
struct NoMixingPair : Error {
    using Error::Error;
};
struct SOutOfRange : Error {
    using Error::Error;
};

/// Default numerical tolerances. All of them can be overridden per call;
/// the CLI additionally reads MIXCTL_TOL_SUM / MIXCTL_TOL_HERM.
namespace tol {
inline constexpr double neg = 1e-12;        // negative-entry clamping on probability vectors
inline constexpr double sum = 1e-10;        // probability normalization
inline constexpr double herm = 1e-10;       // hermiticity of matrices
inline constexpr double eig_floor = 1e-10;  // density-matrix eigenvalue floor
inline constexpr double unital = 1e-10;
inline constexpr double majorize = 1e-10;
inline constexpr double form = 1e-8;      // optimal-form residual
inline constexpr double dephase = 1e-8;   // dephasing classification / residual coherence
inline constexpr double rank = 1e-9;      // algebra-closure rank threshold
}  // namespace tol

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }
inline double max_abs(const RMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + ": matrix not square");
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b)
        throw DimensionMismatch(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
}

/// Hermiticity defect, max |m - m^dagger| entrywise.
inline double herm_defect(const CMatrix& m) { return max_abs(CMatrix(m - m.adjoint())); }

}  // namespace mixctl
