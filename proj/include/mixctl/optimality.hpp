#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixctl/density.hpp"
#include "mixctl/lindblad.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Outcome of the optimality decision. `optimal` always carries a verified
/// basis and block pair; `not_optimal` is only reported on a sound
/// obstruction (non-unitality, zero dissipator, or an algebra structure
/// incompatible with the one-block form); `unknown` records that the
/// probabilistic basis search came up empty without a disproof.
struct OptimalityVerdict {
    enum class Status { optimal, not_optimal, unknown };
    Status status = Status::unknown;
    std::optional<Basis> basis;
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    double residual = 0.0;
};

inline const char* to_string(OptimalityVerdict::Status s) {
    switch (s) {
        case OptimalityVerdict::Status::optimal: return "optimal";
        case OptimalityVerdict::Status::not_optimal: return "not_optimal";
        default: return "unknown";
    }
}

/// Max magnitude among the entries that must vanish for the M (+) D form on
/// levels `pair` of basis B: every off-diagonal entry outside the 2x2 block.
inline std::pair<bool, double> check_form_in_basis(const std::vector<CMatrix>& ops,
                                                   const Basis& basis,
                                                   std::pair<std::size_t, std::size_t> pair,
                                                   double tol_form = tol::form) {
    if (pair.first == pair.second) throw ValidationError("check_form_in_basis: i == j");
    const auto d = basis.dim();
    const auto i = static_cast<Eigen::Index>(pair.first);
    const auto j = static_cast<Eigen::Index>(pair.second);
    if (i >= d || j >= d) throw DimensionMismatch("check_form_in_basis: pair out of range");
    double residual = 0.0;
    for (const auto& l : ops) {
        const CMatrix t = basis.matrix().adjoint() * l * basis.matrix();
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index m = 0; m < d; ++m) {
                if (k == m) continue;
                if ((k == i && m == j) || (k == j && m == i)) continue;
                residual = std::max(residual, std::abs(t(k, m)));
            }
    }
    return {residual <= tol_form, residual};
}

namespace algebra {

inline CVector vecm(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

/// Orthonormal (Frobenius) spanning set maintained under a numerical rank
/// threshold; add() returns true when the candidate enlarged the span.
class Span {
  public:
    explicit Span(double rank_tol = tol::rank) : rank_tol_(rank_tol) {}

    bool add(CMatrix m) {
        const double n0 = m.norm();
        if (!(n0 > 0.0)) return false;
        m /= n0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis_) m -= (vecm(b).dot(vecm(m))) * b;
        const double n = m.norm();
        if (n <= rank_tol_) return false;
        basis_.push_back(m / n);
        return true;
    }

    const std::vector<CMatrix>& basis() const { return basis_; }
    std::size_t dim() const { return basis_.size(); }

  private:
    double rank_tol_;
    std::vector<CMatrix> basis_;
};

/// Orthonormal basis of the associative *-algebra generated by
/// {I, L_a, L_a^dag}, closed under products until the dimension stabilizes.
inline std::vector<CMatrix> star_algebra_basis(const std::vector<CMatrix>& ops,
                                               double rank_tol = tol::rank) {
    const Eigen::Index d = ops.front().rows();
    Span span(rank_tol);
    span.add(CMatrix::Identity(d, d));
    for (const auto& l : ops) {
        span.add(l);
        span.add(l.adjoint());
    }
    bool grew = true;
    while (grew && span.dim() < static_cast<std::size_t>(d * d)) {
        grew = false;
        const auto snapshot = span.basis();
        for (const auto& a : snapshot)
            for (const auto& b : snapshot)
                if (span.add(a * b)) grew = true;
    }
    return span.basis();
}

/// Null space (right) of the stacked constraint operators, via the Gram
/// matrix. Returns vectors whose constraint residual is below rel_tol
/// relative to the largest singular value.
inline std::vector<CVector> gram_nullspace(const std::vector<CMatrix>& constraints,
                                           Eigen::Index n, double rel_tol = 1e-7) {
    CMatrix g = CMatrix::Zero(n, n);
    for (const auto& k : constraints) g += k.adjoint() * k;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    const double cut = std::max(top * rel_tol * rel_tol, 1e-24);
    std::vector<CVector> null;
    for (Eigen::Index k = 0; k < n; ++k)
        if (es.eigenvalues()(k) <= cut) null.push_back(es.eigenvectors().col(k));
    return null;
}

/// Basis of the commutant {Y : [Y, L_a] = [Y, L_a^dag] = 0 for all a}.
/// Commuting with the generators implies commuting with the whole algebra.
inline std::vector<CMatrix> commutant_basis(const std::vector<CMatrix>& ops) {
    const Eigen::Index d = ops.front().rows();
    const CMatrix id = CMatrix::Identity(d, d);
    std::vector<CMatrix> constraints;
    for (const auto& l : ops) {
        for (const CMatrix& a : {CMatrix(l / std::max(1.0, max_abs(l))),
                                 CMatrix(l.adjoint() / std::max(1.0, max_abs(l)))}) {
            constraints.push_back(Eigen::kroneckerProduct(id, a).eval() -
                                  Eigen::kroneckerProduct(a.transpose(), id).eval());
        }
    }
    std::vector<CMatrix> out;
    for (const auto& v : gram_nullspace(constraints, d * d))
        out.push_back(Eigen::Map<const CMatrix>(v.data(), d, d));
    return out;
}

/// Dimension of the center: elements of span{alg_basis} commuting with all
/// generators.
inline std::size_t center_dimension(const std::vector<CMatrix>& alg_basis,
                                    const std::vector<CMatrix>& ops) {
    const Eigen::Index d = ops.front().rows();
    const auto n = static_cast<Eigen::Index>(alg_basis.size());
    std::vector<CMatrix> rows;
    for (const auto& l : ops)
        for (const CMatrix& g : {l, CMatrix(l.adjoint())}) {
            CMatrix f(d * d, n);
            const CMatrix gn = g / std::max(1.0, max_abs(g));
            for (Eigen::Index k = 0; k < n; ++k) {
                const CMatrix c = alg_basis[static_cast<std::size_t>(k)] * gn -
                                  gn * alg_basis[static_cast<std::size_t>(k)];
                f.col(k) = vecm(c);
            }
            rows.push_back(std::move(f));
        }
    return gram_nullspace(rows, n).size();
}

/// Partition feasibility: can d_rest be written as exactly `parts` positive
/// integers whose squares sum to sq? Decides whether the 2x2 irrep can have
/// multiplicity one given the measured commutant dimension.
inline bool multiplicity_one_feasible(std::size_t parts, std::size_t d_rest, std::size_t sq) {
    if (parts == 0) return d_rest == 0 && sq == 0;
    std::vector<std::vector<std::vector<bool>>> dp(
        parts + 1, std::vector<std::vector<bool>>(d_rest + 1, std::vector<bool>(sq + 1, false)));
    dp[0][0][0] = true;
    for (std::size_t p = 1; p <= parts; ++p)
        for (std::size_t s = 1; s <= d_rest; ++s)
            for (std::size_t q = 1; q <= sq; ++q)
                for (std::size_t m = 1; m <= s && m * m <= q; ++m)
                    if (dp[p - 1][s - m][q - m * m]) {
                        dp[p][s][q] = true;
                        break;
                    }
    return dp[parts][d_rest][sq];
}

}  // namespace algebra

/// Search for a basis realizing the one-block form: eigenspaces of a random
/// Hermitian commutant element split the space into irreducible invariant
/// subspaces; a candidate needs all parts of dimension 1 except at most one
/// of dimension 2. Every candidate is verified with check_form_in_basis, so
/// a returned basis is always sound.
inline std::optional<std::pair<Basis, std::pair<std::size_t, std::size_t>>> find_optimal_basis(
    const std::vector<CMatrix>& ops, int trials = 16, double tol_form = tol::form,
    std::uint64_t seed = 0) {
    if (ops.empty()) return std::nullopt;
    const Eigen::Index d = ops.front().rows();
    if (d < 2) return std::nullopt;

    const auto comm = algebra::commutant_basis(ops);
    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 eng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(trial) + 1);
        std::normal_distribution<double> gauss(0.0, 1.0);
        CMatrix y = CMatrix::Zero(d, d);
        for (const auto& c : comm) y += Complex(gauss(eng), gauss(eng)) * c;
        y = 0.5 * (y + y.adjoint().eval());
        const double scale = std::max(1.0, max_abs(y));

        Eigen::SelfAdjointEigenSolver<CMatrix> es(y);
        const RVector& vals = es.eigenvalues();
        std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // (start, size)
        Eigen::Index start = 0;
        for (Eigen::Index k = 1; k <= d; ++k)
            if (k == d || vals(k) - vals(k - 1) > 1e-6 * scale) {
                clusters.emplace_back(start, k - start);
                start = k;
            }

        Eigen::Index two_at = -1;
        bool usable = true;
        int twos = 0;
        for (const auto& [s0, len] : clusters) {
            if (len > 2) usable = false;
            if (len == 2) {
                ++twos;
                two_at = s0;
            }
        }
        if (!usable || twos > 1) continue;

        CMatrix cols(d, d);
        Eigen::Index at = 0;
        if (two_at >= 0) {
            cols.middleCols(0, 2) = es.eigenvectors().middleCols(two_at, 2);
            at = 2;
        }
        for (const auto& [s0, len] : clusters) {
            if (s0 == two_at) continue;
            cols.middleCols(at, len) = es.eigenvectors().middleCols(s0, len);
            at += len;
        }
        Basis candidate(cols, 1e-8);

        for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(d); ++i)
            for (std::size_t j = i + 1; j < static_cast<std::size_t>(d); ++j) {
                auto [ok, res] = check_form_in_basis(ops, candidate, {i, j}, tol_form);
                if (ok) return std::make_pair(candidate, std::make_pair(i, j));
            }
    }
    return std::nullopt;
}

/// Optimality decision for a unital Lindbladian. The verified-search route
/// gives soundness for `optimal`; the representation-theoretic dimension
/// counts (algebra, center, commutant) give sound obstructions for
/// `not_optimal`; everything else is reported `unknown`.
inline OptimalityVerdict is_optimal(const Lindbladian& lb, int trials = 16,
                                    std::uint64_t seed = 0, double tol_form = tol::form) {
    OptimalityVerdict v;
    const Eigen::Index d = lb.dim();

    if (!is_unital(lb)) {
        v.status = OptimalityVerdict::Status::not_optimal;
        return v;
    }
    // Zero dissipator (includes ops proportional to identity).
    const Lindbladian dissipator(CMatrix::Zero(d, d), lb.ops);
    bool zero = true;
    for (Eigen::Index i = 0; i < d && zero; ++i)
        for (Eigen::Index j = 0; j < d && zero; ++j) {
            CMatrix e = CMatrix::Zero(d, d);
            e(i, j) = 1.0;
            if (max_abs(apply_lindbladian(dissipator, e)) > 1e-12) zero = false;
        }
    if (zero) {
        v.status = OptimalityVerdict::Status::not_optimal;
        return v;
    }

    if (d == 2) {
        // The form is vacuous in d = 2: any unital nonzero dissipator mixes
        // the only two levels.
        v.status = OptimalityVerdict::Status::optimal;
        v.basis = Basis::computational(2);
        v.pair = {{0, 1}};
        v.residual = 0.0;
        return v;
    }

    const auto alg = algebra::star_algebra_basis(lb.ops);
    const std::size_t a = alg.size();
    const std::size_t z = algebra::center_dimension(alg, lb.ops);

    if (a != z) {  // noncommutative
        // Admissible noncommutative structure: exactly one 2-dim irrep class
        // and z-1 one-dim classes, so dim A = z + 3; the 2x2 class must have
        // multiplicity one, which constrains the commutant dimension.
        if (a != z + 3) {
            v.status = OptimalityVerdict::Status::not_optimal;
            return v;
        }
        const std::size_t c = algebra::commutant_basis(lb.ops).size();
        if (c < 1 ||
            !algebra::multiplicity_one_feasible(z - 1, static_cast<std::size_t>(d) - 2, c - 1)) {
            v.status = OptimalityVerdict::Status::not_optimal;
            return v;
        }
    }

    if (auto found = find_optimal_basis(lb.ops, trials, tol_form, seed)) {
        v.status = OptimalityVerdict::Status::optimal;
        v.basis = found->first;
        v.pair = found->second;
        v.residual = check_form_in_basis(lb.ops, found->first, found->second, tol_form).second;
        return v;
    }
    v.status = OptimalityVerdict::Status::unknown;
    return v;
}

}  // namespace mixctl
