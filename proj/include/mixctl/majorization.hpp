#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "mixctl/prob_vector.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Two-level mixing with weight s: the pair (p_i, p_j) is replaced by
/// ((1-s) p_i + s p_j, s p_i + (1-s) p_j).
struct TTransform {
    std::size_t i = 0;
    std::size_t j = 0;
    double s = 0.0;

    TTransform() = default;
    TTransform(std::size_t i_, std::size_t j_, double s_) : i(i_), j(j_), s(s_) {
        if (i == j) throw ValidationError("TTransform: i == j");
        if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("TTransform: s outside [0,1]");
    }

    /// d x d embedding: identity except [[1-s, s],[s, 1-s]] on rows/cols (i,j).
    RMatrix to_matrix(std::size_t d) const {
        if (i >= d || j >= d) throw DimensionMismatch("TTransform: index out of range");
        RMatrix m = RMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        m(a, a) = 1.0 - s;
        m(b, b) = 1.0 - s;
        m(a, b) = s;
        m(b, a) = s;
        return m;
    }
};

enum class StochasticKind { stochastic, bistochastic };

/// Column-stochastic matrix (each column sums to 1); bistochastic if rows do too.
struct StochasticMatrix {
    RMatrix entries;
    StochasticKind kind = StochasticKind::stochastic;

    void validate(double tol_neg = tol::neg, double tol_sum = tol::sum) const {
        if (entries.rows() != entries.cols())
            throw ValidationError("StochasticMatrix: not square");
        if (entries.minCoeff() < -tol_neg)
            throw ValidationError("StochasticMatrix: negative entry");
        for (Eigen::Index j = 0; j < entries.cols(); ++j)
            if (std::abs(entries.col(j).sum() - 1.0) > tol_sum)
                throw ValidationError("StochasticMatrix: column sum off 1");
        if (kind == StochasticKind::bistochastic)
            for (Eigen::Index i = 0; i < entries.rows(); ++i)
                if (std::abs(entries.row(i).sum() - 1.0) > tol_sum)
                    throw ValidationError("StochasticMatrix: row sum off 1");
    }
};

/// Stable descending sort. Returns (p_sorted, perm) with p_sorted[k] = p[perm[k]];
/// ties keep the original index order so permutations are reproducible.
inline std::pair<ProbVector, PermutationMap> sort_descending(const ProbVector& p) {
    std::vector<std::size_t> idx(p.dim());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<double> sorted(p.dim());
    for (std::size_t k = 0; k < p.dim(); ++k) sorted[k] = p[idx[k]];
    return {ProbVector::unchecked(std::move(sorted)), PermutationMap(std::move(idx))};
}

/// p majorizes q: every top-k prefix sum of p's sorted entries dominates q's
/// (within tol). The k = d case holds automatically by normalization.
inline bool majorizes(const ProbVector& p, const ProbVector& q, double tol = tol::majorize) {
    require_same_dim(static_cast<Eigen::Index>(p.dim()), static_cast<Eigen::Index>(q.dim()),
                     "majorizes");
    const auto ps = sort_descending(p).first;
    const auto qs = sort_descending(q).first;
    double sp = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < p.dim(); ++k) {
        sp += ps[k];
        sq += qs[k];
        if (sp < sq - tol) return false;
    }
    return true;
}

/// Prefix-sum gaps sum_{i<=k} p_down_i - sum_{i<=k} q_down_i for k = 1..d, plus
/// the first failing prefix (1-based k) if any. Used by the CLI report.
struct MajorizationReport {
    bool majorizes = false;
    std::vector<double> prefix_gaps;
    std::optional<std::size_t> first_failing_prefix;
};

inline MajorizationReport majorization_report(const ProbVector& p, const ProbVector& q,
                                              double tol = tol::majorize) {
    require_same_dim(static_cast<Eigen::Index>(p.dim()), static_cast<Eigen::Index>(q.dim()),
                     "majorization_report");
    const auto ps = sort_descending(p).first;
    const auto qs = sort_descending(q).first;
    MajorizationReport rep;
    rep.majorizes = true;
    double sp = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < p.dim(); ++k) {
        sp += ps[k];
        sq += qs[k];
        rep.prefix_gaps.push_back(sp - sq);
        if (sp < sq - tol && !rep.first_failing_prefix) {
            rep.majorizes = false;
            rep.first_failing_prefix = k + 1;
        }
    }
    return rep;
}

inline ProbVector apply_ttransform(const TTransform& t, const ProbVector& p) {
    if (t.i >= p.dim() || t.j >= p.dim())
        throw DimensionMismatch("apply_ttransform: index out of range");
    std::vector<double> v = p.entries();
    const double a = v[t.i], b = v[t.j];
    v[t.i] = (1.0 - t.s) * a + t.s * b;
    v[t.j] = t.s * a + (1.0 - t.s) * b;
    return ProbVector::unchecked(std::move(v));
}

inline ProbVector apply_chain(const std::vector<TTransform>& chain, ProbVector p) {
    for (const auto& t : chain) p = apply_ttransform(t, p);
    return p;
}

/// Decompose p > q into at most d-1 T-transforms acting on the sorted
/// representatives: chain[k-1] o ... o chain[0] maps p_down to q_down. The
/// sorting permutations are obtained separately via sort_descending.
///
/// Classical constructive scheme: repeatedly take the largest index k with
/// p_k > q_k and the smallest l > k with p_l < q_l, and transfer
/// delta = min(p_k - q_k, q_l - p_l), which matches at least one coordinate
/// exactly. The transfer weight is s = delta / (p_k - p_l) <= 1/2.
inline std::vector<TTransform> decompose_into_ttransforms(const ProbVector& p,
                                                          const ProbVector& q,
                                                          double tol = tol::majorize) {
    if (!majorizes(p, q, tol))
        throw MajorizationViolated("decompose_into_ttransforms: p does not majorize q");
    const std::size_t d = p.dim();
    std::vector<double> a = sort_descending(p).first.entries();
    const std::vector<double> b = sort_descending(q).first.entries();

    std::vector<TTransform> chain;
    // Entries within eps_eq are treated as already matched; exact-assignment
    // matching below keeps the loop at d-1 rounds.
    constexpr double eps_eq = 1e-13;
    for (std::size_t round = 0; round + 1 < d; ++round) {
        std::ptrdiff_t k = -1;
        for (std::size_t m = 0; m < d; ++m)
            if (a[m] > b[m] + eps_eq) k = static_cast<std::ptrdiff_t>(m);
        if (k < 0) break;
        std::ptrdiff_t l = -1;
        for (std::size_t m = static_cast<std::size_t>(k) + 1; m < d; ++m)
            if (a[m] < b[m] - eps_eq) {
                l = static_cast<std::ptrdiff_t>(m);
                break;
            }
        if (l < 0) break;  // only tolerance-level residue left
        const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
        const double delta = std::min(a[uk] - b[uk], b[ul] - a[ul]);
        const double s = delta / (a[uk] - a[ul]);
        chain.emplace_back(uk, ul, s);
        if (a[uk] - b[uk] <= b[ul] - a[ul]) {
            a[ul] += a[uk] - b[uk];
            a[uk] = b[uk];
        } else {
            a[uk] -= b[ul] - a[ul];
            a[ul] = b[ul];
        }
    }
    return chain;
}

/// Rewrite a chain so every s lies in [0, 1/2], using
/// T_(ij)(s) = P_(ij) T_(ij)(1-s) and pushing the transpositions to the right
/// (P_(ij) T_(kl) = T_((ij)k,(ij)l) P_(ij)). Returns (chain', pi) with
/// chain' o pi == original chain as a map on vectors.
inline std::pair<std::vector<TTransform>, PermutationMap> normalize_half_interval(
    const std::vector<TTransform>& chain, std::size_t d) {
    std::vector<TTransform> out;
    PermutationMap sigma = PermutationMap::identity(d);
    for (const auto& t : chain) {
        if (t.s <= 0.5) {
            out.push_back(t);
            continue;
        }
        // Relabel everything already emitted by the transposition (i j).
        auto swap_idx = [&](std::size_t m) { return m == t.i ? t.j : (m == t.j ? t.i : m); };
        for (auto& e : out) {
            e.i = swap_idx(e.i);
            e.j = swap_idx(e.j);
        }
        out.emplace_back(t.i, t.j, 1.0 - t.s);
        sigma = PermutationMap::compose(PermutationMap::transposition(d, t.i, t.j), sigma);
    }
    return {std::move(out), std::move(sigma)};
}

/// Explicit bistochastic witness M with M p = q, assembled from the
/// T-transform chain on sorted representatives and the two sorting
/// permutations.
inline StochasticMatrix birkhoff_witness(const ProbVector& p, const ProbVector& q,
                                         double tol = tol::majorize) {
    if (!majorizes(p, q, tol)) throw MajorizationViolated("birkhoff_witness: p does not majorize q");
    const std::size_t d = p.dim();
    const auto [ps, perm_p] = sort_descending(p);
    const auto [qs, perm_q] = sort_descending(q);
    const auto chain = decompose_into_ttransforms(p, q, tol);

    RMatrix m = perm_p.to_matrix();
    for (const auto& t : chain) m = t.to_matrix(d) * m;
    m = perm_q.to_matrix().transpose() * m;

    StochasticMatrix out{std::move(m), StochasticKind::bistochastic};
    out.validate();
    return out;
}

}  // namespace mixctl
