#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "mixctl/density.hpp"
#include "mixctl/prob_vector.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Markovian master-equation generator: effective Hamiltonian plus Lindblad
/// operators. An empty operator list (zero dissipator) is allowed.
struct Lindbladian {
    CMatrix hamiltonian;
    std::vector<CMatrix> ops;

    Lindbladian() = default;

    Lindbladian(CMatrix h, std::vector<CMatrix> lindblad_ops, double tol_herm = tol::herm)
        : hamiltonian(std::move(h)), ops(std::move(lindblad_ops)) {
        require_square(hamiltonian, "Lindbladian H");
        if (herm_defect(hamiltonian) > tol_herm)
            throw ValidationError("Lindbladian: H not Hermitian");
        for (const auto& l : ops) {
            require_square(l, "Lindbladian op");
            require_same_dim(l.rows(), hamiltonian.rows(), "Lindbladian op");
        }
    }

    static Lindbladian dissipative(std::vector<CMatrix> lindblad_ops) {
        if (lindblad_ops.empty()) throw ValidationError("Lindbladian: no operators");
        const Eigen::Index d = lindblad_ops.front().rows();
        return Lindbladian(CMatrix::Zero(d, d), std::move(lindblad_ops));
    }

    Eigen::Index dim() const { return hamiltonian.rows(); }

    bool is_zero(double tol_zero = 1e-14) const {
        for (const auto& l : ops)
            if (max_abs(l) > tol_zero) return false;
        return max_abs(hamiltonian) <= tol_zero;
    }
};

/// L(X) = -i[H,X] + sum_a (L_a X L_a^dag - (1/2){L_a^dag L_a, X}).
inline CMatrix apply_lindbladian(const Lindbladian& lb, const CMatrix& x) {
    require_square(x, "apply_lindbladian");
    require_same_dim(x.rows(), lb.dim(), "apply_lindbladian");
    const Complex mi(0.0, -1.0);
    CMatrix out = mi * (lb.hamiltonian * x - x * lb.hamiltonian);
    for (const auto& l : lb.ops) {
        const CMatrix ldl = l.adjoint() * l;
        out += l * x * l.adjoint() - 0.5 * (ldl * x + x * ldl);
    }
    return out;
}

/// Unitality: sum L^dag L == sum L L^dag. The Hamiltonian part never matters.
inline bool is_unital(const Lindbladian& lb, double tol_u = tol::unital) {
    const Eigen::Index d = lb.dim();
    CMatrix diff = CMatrix::Zero(d, d);
    for (const auto& l : lb.ops) diff += l.adjoint() * l - l * l.adjoint();
    return max_abs(diff) <= tol_u;
}

inline CVector vec(const CMatrix& x) {
    return Eigen::Map<const CVector>(x.data(), x.size());
}

inline CMatrix unvec(const CVector& v, Eigen::Index d) {
    return Eigen::Map<const CMatrix>(v.data(), d, d);
}

/// Column-stacking superoperator: the returned d^2 x d^2 matrix applied to
/// vec(X) equals vec(L(X)), using vec(AXB) = (B^T kron A) vec(X).
inline CMatrix to_superoperator(const Lindbladian& lb) {
    const Eigen::Index d = lb.dim();
    const CMatrix id = CMatrix::Identity(d, d);
    const Complex mi(0.0, -1.0);
    CMatrix s = mi * (Eigen::kroneckerProduct(id, lb.hamiltonian).eval() -
                      Eigen::kroneckerProduct(lb.hamiltonian.transpose(), id).eval());
    for (const auto& l : lb.ops) {
        const CMatrix ldl = l.adjoint() * l;
        s += Eigen::kroneckerProduct(l.conjugate(), l).eval();
        s -= 0.5 * Eigen::kroneckerProduct(id, ldl).eval();
        s -= 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval();
    }
    return s;
}

/// Hamiltonian-only superoperator for K_H(X) = -i[H, X].
inline CMatrix hamiltonian_superoperator(const CMatrix& h) {
    const Eigen::Index d = h.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    const Complex mi(0.0, -1.0);
    return mi * (Eigen::kroneckerProduct(id, h).eval() -
                 Eigen::kroneckerProduct(h.transpose(), id).eval());
}

/// Precomputed exp(t S) for repeated propagation with a fixed step.
class Propagator {
  public:
    Propagator(const CMatrix& superop, double t) : e_((t * superop).exp()), d_(0) {
        d_ = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(superop.rows()))));
    }

    CMatrix apply_raw(const CMatrix& x) const { return unvec(e_ * vec(x), d_); }

    DensityMatrix apply(const DensityMatrix& rho) const {
        CMatrix out = apply_raw(rho.mat());
        out = 0.5 * (out + out.adjoint().eval());
        const double tr = out.trace().real();
        if (std::abs(tr - 1.0) > 1e-10)
            throw ValidationError("Propagator: trace drift " + std::to_string(tr - 1.0));
        return DensityMatrix(out / tr, 1e-8, 1e-8, 1e-8);
    }

  private:
    CMatrix e_;
    Eigen::Index d_;
};

/// exp(t L) applied to rho via the vectorized superoperator.
inline DensityMatrix propagate(const Lindbladian& lb, const DensityMatrix& rho, double t) {
    if (t < 0.0) throw InvalidTime("propagate: t < 0");
    require_same_dim(rho.dim(), lb.dim(), "propagate");
    return Propagator(to_superoperator(lb), t).apply(rho);
}

/// Depolarizing Lindbladian L0(X) = (I/d) Tr X - X, realized with the d^2
/// Heisenberg--Weyl (clock-and-shift) unitaries X^a Z^b scaled by 1/d.
inline Lindbladian depolarizing(Eigen::Index d) {
    if (d < 2) throw ValidationError("depolarizing: d < 2");
    CMatrix shift = CMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) shift((k + 1) % d, k) = 1.0;
    CMatrix clock = CMatrix::Zero(d, d);
    const double w = 2.0 * std::numbers::pi / static_cast<double>(d);
    for (Eigen::Index k = 0; k < d; ++k)
        clock(k, k) = std::polar(1.0, w * static_cast<double>(k));

    std::vector<CMatrix> ops;
    ops.reserve(static_cast<std::size_t>(d * d));
    CMatrix xa = CMatrix::Identity(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        CMatrix u = xa;
        for (Eigen::Index b = 0; b < d; ++b) {
            ops.push_back(u / static_cast<double>(d));
            u = u * clock;
        }
        xa = shift * xa;
    }
    return Lindbladian(CMatrix::Zero(d, d), std::move(ops));
}

/// True if L acts as the closed-form depolarizer (I/d) Tr X - X, checked on a
/// full basis of matrix units.
inline bool matches_depolarizing(const Lindbladian& lb, double tol_match = 1e-10) {
    const Eigen::Index d = lb.dim();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            CMatrix e = CMatrix::Zero(d, d);
            e(i, j) = 1.0;
            CMatrix want = -e;
            if (i == j) want += CMatrix::Identity(d, d) / static_cast<double>(d);
            if (max_abs(CMatrix(apply_lindbladian(lb, e) - want)) > tol_match) return false;
        }
    return true;
}

/// Joint-eigenbasis structure of a dephasing Lindbladian: complete family of
/// orthogonal projectors onto the maximal subspaces where every L_a and H act
/// as scalars. Basis columns are grouped so blocks occupy consecutive levels.
struct DephasingStructure {
    Basis basis;
    std::vector<CMatrix> projectors;
    std::vector<Eigen::Index> block_sizes;
    /// Slowest inter-block coherence decay rate (superoperator spectral gap).
    double decay_gap = 0.0;

    Eigen::Index block_of(Eigen::Index level) const {
        Eigen::Index acc = 0;
        for (std::size_t b = 0; b < block_sizes.size(); ++b) {
            acc += block_sizes[b];
            if (level < acc) return static_cast<Eigen::Index>(b);
        }
        throw DimensionMismatch("DephasingStructure: level out of range");
    }
};

namespace detail {

/// Refine a list of orthonormal blocks by the eigenspaces of Hermitian `op`
/// restricted to each block. Eigenvalue clusters split where the gap exceeds
/// `gap`.
inline void refine_blocks(std::vector<CMatrix>& blocks, const CMatrix& op, double gap) {
    std::vector<CMatrix> next;
    for (const auto& v : blocks) {
        if (v.cols() == 1) {
            next.push_back(v);
            continue;
        }
        CMatrix m = v.adjoint() * op * v;
        m = 0.5 * (m + m.adjoint().eval());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
        const RVector& vals = es.eigenvalues();
        Eigen::Index start = 0;
        for (Eigen::Index k = 1; k <= vals.size(); ++k) {
            if (k == vals.size() || vals(k) - vals(k - 1) > gap) {
                next.push_back(v * es.eigenvectors().middleCols(start, k - start));
                start = k;
            }
        }
    }
    blocks = std::move(next);
}

}  // namespace detail

/// Structural dephasing test on the given representation: all Lindblad
/// operators normal, pairwise commuting, and commuting with H (within tol).
/// Returns the joint eigenbasis and projector family when the infinite-time
/// limit is a genuine projector-pinching, absent otherwise. Two blocks whose
/// L-eigenvalue tuples coincide (so the coherence between them only
/// oscillates under H and never decays) disqualify the Lindbladian.
inline std::optional<DephasingStructure> classify_dephasing(const Lindbladian& lb,
                                                            double tol_c = tol::dephase) {
    const Eigen::Index d = lb.dim();
    bool ops_zero = true;
    for (const auto& l : lb.ops)
        if (max_abs(l) > tol_c) ops_zero = false;
    if (ops_zero && max_abs(lb.hamiltonian) <= tol_c)
        throw ZeroLindbladian("classify_dephasing: zero Lindbladian");

    double scale = std::max(1.0, max_abs(lb.hamiltonian));
    for (const auto& l : lb.ops) scale = std::max(scale, max_abs(l));
    const double ctol = tol_c * scale * scale;

    for (const auto& l : lb.ops) {
        if (max_abs(CMatrix(l * l.adjoint() - l.adjoint() * l)) > ctol) return std::nullopt;
        if (max_abs(CMatrix(l * lb.hamiltonian - lb.hamiltonian * l)) > ctol) return std::nullopt;
    }
    for (std::size_t a = 0; a < lb.ops.size(); ++a)
        for (std::size_t b = a + 1; b < lb.ops.size(); ++b)
            if (max_abs(CMatrix(lb.ops[a] * lb.ops[b] - lb.ops[b] * lb.ops[a])) > ctol)
                return std::nullopt;

    // Joint eigenspaces, refined by the Hermitian and anti-Hermitian parts.
    std::vector<CMatrix> blocks{CMatrix::Identity(d, d)};
    const double gap = std::max(tol_c, 1e-8) * scale;
    const Complex mhi(0.0, -0.5);
    for (const auto& l : lb.ops) {
        detail::refine_blocks(blocks, CMatrix(0.5 * (l + l.adjoint())), gap);
        detail::refine_blocks(blocks, CMatrix(mhi * (l - l.adjoint())), gap);
    }
    detail::refine_blocks(blocks, lb.hamiltonian, gap);

    // Scalar-action verification and per-block eigenvalue tuples.
    std::vector<std::vector<Complex>> tuples(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const CMatrix& v = blocks[b];
        const auto k = static_cast<double>(v.cols());
        for (const auto& l : lb.ops) {
            const CMatrix c = v.adjoint() * l * v;
            const Complex lam = c.trace() / k;
            if (max_abs(CMatrix(l * v - lam * v)) > 100.0 * ctol) return std::nullopt;
            tuples[b].push_back(lam);
        }
    }

    // Every pair of distinct blocks must differ in some L eigenvalue,
    // otherwise the inter-block coherence has zero decay rate.
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t b1 = 0; b1 < blocks.size(); ++b1)
        for (std::size_t b2 = b1 + 1; b2 < blocks.size(); ++b2) {
            double rate = 0.0;
            for (std::size_t a = 0; a < tuples[b1].size(); ++a)
                rate += 0.5 * std::norm(tuples[b1][a] - tuples[b2][a]);
            if (rate <= ctol) return std::nullopt;
            min_rate = std::min(min_rate, rate);
        }
    if (blocks.size() < 2) return std::nullopt;  // pinching with one block is the identity map

    DephasingStructure ds;
    CMatrix cols(d, d);
    Eigen::Index at = 0;
    for (const auto& v : blocks) {
        cols.middleCols(at, v.cols()) = v;
        ds.block_sizes.push_back(v.cols());
        ds.projectors.push_back(v * v.adjoint());
        at += v.cols();
    }
    ds.basis = Basis(cols);
    ds.decay_gap = min_rate;
    return ds;
}

}  // namespace mixctl
