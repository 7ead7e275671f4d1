#pragma once

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "mixctl/density.hpp"
#include "mixctl/majorization.hpp"
#include "mixctl/prob_vector.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Generator of (bi)stochastic semigroups: nonnegative off-diagonal, columns
/// summing to zero; bistochastic when rows sum to zero as well.
struct QGenerator {
    RMatrix entries;
    bool bistochastic = false;

    void validate(double tol_neg = tol::neg, double tol_sum = tol::sum) const {
        const Eigen::Index d = entries.rows();
        if (entries.cols() != d) throw ValidationError("QGenerator: not square");
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                if (i != j && entries(i, j) < -tol_neg)
                    throw ValidationError("QGenerator: negative off-diagonal entry");
        for (Eigen::Index j = 0; j < d; ++j)
            if (std::abs(entries.col(j).sum()) > tol_sum)
                throw ValidationError("QGenerator: column sum nonzero");
        if (bistochastic)
            for (Eigen::Index i = 0; i < d; ++i)
                if (std::abs(entries.row(i).sum()) > tol_sum)
                    throw ValidationError("QGenerator: row sum nonzero for bistochastic flag");
    }
};

/// X_ij = sum_a |<i| L_a |j>|^2 for the basis columns |i>.
inline RMatrix x_matrix(const std::vector<CMatrix>& ops, const Basis& basis) {
    const Eigen::Index d = basis.dim();
    RMatrix x = RMatrix::Zero(d, d);
    for (const auto& l : ops) {
        require_same_dim(l.rows(), d, "x_matrix");
        const CMatrix t = basis.matrix().adjoint() * l * basis.matrix();
        x += t.cwiseAbs2();
    }
    return x;
}

/// Q_ij = X_ij - delta_ij sum_k X_kj. Always a stochastic generator; the
/// bistochastic flag reflects the row sums (zero whenever the dissipator is
/// unital, for every basis).
inline QGenerator q_matrix(const std::vector<CMatrix>& ops, const Basis& basis,
                           double tol_sum = tol::sum) {
    RMatrix q = x_matrix(ops, basis);
    const Eigen::Index d = q.rows();
    for (Eigen::Index j = 0; j < d; ++j) q(j, j) -= q.col(j).sum();
    bool bi = true;
    for (Eigen::Index i = 0; i < d && bi; ++i)
        if (std::abs(q.row(i).sum()) > tol_sum) bi = false;
    return QGenerator{std::move(q), bi};
}

/// exp(Q t) lambda0 at a constant prescribed basis.
inline ProbVector evolve_spectrum(const QGenerator& q, const ProbVector& lambda0, double t) {
    if (t < 0.0) throw InvalidTime("evolve_spectrum: t < 0");
    require_same_dim(q.entries.rows(), static_cast<Eigen::Index>(lambda0.dim()),
                     "evolve_spectrum");
    const RMatrix e = (t * q.entries).exp();
    return ProbVector::from_eigen(e * lambda0.to_eigen(), 1e-9, 1e-9);
}

/// T-transform weight reached by holding a two-level mixing generator of rate
/// gamma for time t: s(t) = (1/2)(1 - e^{-2 gamma t}), in [0, 1/2).
inline double ttransform_from_hold(double gamma, double t) {
    if (gamma <= 0.0) throw NonpositiveRate("ttransform_from_hold: gamma <= 0");
    if (t < 0.0) throw InvalidTime("ttransform_from_hold: t < 0");
    return -0.5 * std::expm1(-2.0 * gamma * t);
}

/// Hold duration realizing weight s < 1/2: t = -ln(1 - 2s) / (2 gamma).
inline double hold_duration_for_s(double gamma, double s) {
    if (gamma <= 0.0) throw NonpositiveRate("hold_duration_for_s: gamma <= 0");
    if (s < 0.0 || s >= 0.5) throw SOutOfRange("hold_duration_for_s: s outside [0, 1/2)");
    return -std::log1p(-2.0 * s) / (2.0 * gamma);
}

}  // namespace mixctl
