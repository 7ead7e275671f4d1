#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "mixctl/density.hpp"
#include "mixctl/lindblad.hpp"
#include "mixctl/majorization.hpp"
#include "mixctl/prob_vector.hpp"
#include "mixctl/types.hpp"

namespace mixctl::rnd {

using Engine = std::mt19937_64;

inline Engine engine(std::uint64_t seed) { return Engine(seed ^ 0xa5a5a5a5deadbeefull); }

inline CMatrix ginibre(Engine& eng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(eng), g(eng));
    return m;
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase-fixed R).
inline CMatrix haar_unitary(Engine& eng, Eigen::Index d) {
    const CMatrix z = ginibre(eng, d, d);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < d; ++k) {
        const Complex rkk = r(k, k);
        q.col(k) *= std::abs(rkk) > 0 ? rkk / std::abs(rkk) : 1.0;
    }
    return q;
}

/// Flat (Dirichlet(1,...,1)) random probability vector.
inline ProbVector probvector(Engine& eng, std::size_t d) {
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> v(d);
    double s = 0.0;
    for (double& x : v) s += (x = ex(eng));
    for (double& x : v) x /= s;
    return ProbVector(std::move(v));
}

inline DensityMatrix density(Engine& eng, Eigen::Index d) {
    const ProbVector p = probvector(eng, static_cast<std::size_t>(d));
    const CMatrix u = haar_unitary(eng, d);
    CMatrix m = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = p[static_cast<std::size_t>(i)];
    return DensityMatrix(u * m * u.adjoint());
}

/// q = (product of random T-transforms) p, guaranteeing p > q.
inline ProbVector mixed_from(Engine& eng, const ProbVector& p, int transforms = 8) {
    std::uniform_int_distribution<std::size_t> pick(0, p.dim() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ProbVector q = p;
    for (int k = 0; k < transforms; ++k) {
        std::size_t i = pick(eng), j = pick(eng);
        if (i == j) continue;
        q = apply_ttransform(TTransform(i, j, unit(eng)), q);
    }
    return q;
}

inline std::pair<ProbVector, ProbVector> majorized_pair(Engine& eng, std::size_t d) {
    const ProbVector p = probvector(eng, d);
    return {p, mixed_from(eng, p)};
}

/// Rejection-sampled pair with neither p > q nor q > p (needs d >= 3).
inline std::pair<ProbVector, ProbVector> incomparable_pair(Engine& eng, std::size_t d) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        ProbVector p = probvector(eng, d), q = probvector(eng, d);
        if (!majorizes(p, q) && !majorizes(q, p)) return {p, q};
    }
    throw Error("incomparable_pair: sampling failed");
}

/// Random dephasing Lindbladian: diagonal operators in a Haar basis, constant
/// on blocks, with distinct per-block eigenvalue tuples.
inline Lindbladian dephasing_lindbladian(Engine& eng, Eigen::Index d, int n_ops = 2) {
    // Random composition of d into blocks (about half the levels start blocks).
    std::vector<Eigen::Index> sizes;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::Index left = d;
    while (left > 0) {
        Eigen::Index s = 1;
        while (s < left && unit(eng) < 0.4) ++s;
        sizes.push_back(s);
        left -= s;
    }
    if (sizes.size() < 2) {  // a single block dephases nothing
        sizes = {d - 1, 1};
    }

    const CMatrix basis = haar_unitary(eng, d);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CMatrix> ops;
    for (int a = 0; a < n_ops; ++a) {
        CMatrix diag = CMatrix::Zero(d, d);
        Eigen::Index at = 0;
        for (Eigen::Index s : sizes) {
            const Complex v(g(eng), g(eng));
            for (Eigen::Index k = 0; k < s; ++k) diag(at + k, at + k) = v;
            at += s;
        }
        ops.push_back(basis * diag * basis.adjoint());
    }
    return Lindbladian(CMatrix::Zero(d, d), std::move(ops));
}

/// Random planted one-block instance: operators of the form V (M (+) D) V^dag
/// with a shared Haar V; each non-normal 2x2 block is paired with its adjoint
/// so the family is unital.
inline Lindbladian planted_optimal_lindbladian(Engine& eng, Eigen::Index d, int n_pairs = 1) {
    const CMatrix v = haar_unitary(eng, d);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CMatrix> ops;
    for (int a = 0; a < n_pairs; ++a) {
        CMatrix block = CMatrix::Zero(d, d);
        block.topLeftCorner(2, 2) = ginibre(eng, 2, 2);
        for (Eigen::Index k = 2; k < d; ++k) block(k, k) = Complex(g(eng), g(eng));
        ops.push_back(v * block * v.adjoint());
        ops.push_back(v * block.adjoint() * v.adjoint());
    }
    return Lindbladian(CMatrix::Zero(d, d), std::move(ops));
}

/// Amplitude damping |0><1| at rate gamma (non-unital).
inline Lindbladian amplitude_damping(Eigen::Index d, double gamma) {
    CMatrix l = CMatrix::Zero(d, d);
    l(0, 1) = std::sqrt(gamma);
    return Lindbladian(CMatrix::Zero(d, d), {l});
}

}  // namespace mixctl::rnd
