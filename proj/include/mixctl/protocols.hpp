#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "mixctl/density.hpp"
#include "mixctl/lindblad.hpp"
#include "mixctl/majorization.hpp"
#include "mixctl/optimality.hpp"
#include "mixctl/spectrum_dynamics.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

/// Instantaneous (ideal-pulse) unitary kick.
struct InstantUnitary {
    CMatrix u;
};

/// Dissipative segment at a prescribed eigenbasis. An annotated hold is a
/// steered two-level mixing segment (the annotation records which hold-basis
/// levels mix with which weight); an unannotated hold is free dissipation,
/// as in the dephasing protocol.
struct HoldBasis {
    Basis basis;
    double duration = 0.0;
    std::optional<TTransform> ttransform;
};

struct ControlStep {
    std::variant<InstantUnitary, HoldBasis> step;

    static ControlStep unitary(CMatrix u, double tol_u = 1e-10) {
        if (!is_unitary(u, tol_u)) throw ValidationError("ControlStep: matrix not unitary");
        return ControlStep{InstantUnitary{std::move(u)}};
    }

    static ControlStep hold(Basis b, double duration, std::optional<TTransform> tt = {}) {
        if (duration < 0.0) throw ValidationError("ControlStep: negative duration");
        return ControlStep{HoldBasis{std::move(b), duration, std::move(tt)}};
    }

    bool is_unitary_step() const { return std::holds_alternative<InstantUnitary>(step); }
    const InstantUnitary& as_unitary() const { return std::get<InstantUnitary>(step); }
    const HoldBasis& as_hold() const { return std::get<HoldBasis>(step); }

    Eigen::Index dim() const {
        return is_unitary_step() ? as_unitary().u.rows() : as_hold().basis.dim();
    }
};

struct ModeHints {
    double s_cap = 1e-8;
    double dephase_tol = tol::dephase;
};

/// Ordered control protocol realizing rho -> sigma; target_spectrum is the
/// sorted-descending spectrum of sigma.
struct ConversionPlan {
    std::vector<ControlStep> steps;
    ProbVector target_spectrum;
    ModeHints mode_hints;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(target_spectrum.dim()); }

    void validate() const {
        for (const auto& s : steps)
            require_same_dim(s.dim(), dim(), "ConversionPlan");
    }

    double total_hold_duration() const {
        double t = 0.0;
        for (const auto& s : steps)
            if (!s.is_unitary_step()) t += s.as_hold().duration;
        return t;
    }

    std::size_t hold_count() const {
        std::size_t n = 0;
        for (const auto& s : steps)
            if (!s.is_unitary_step()) ++n;
        return n;
    }

    std::size_t unitary_count() const { return steps.size() - hold_count(); }
};

namespace detail {

/// Permutation matrix for sigma: level m -> level sigma[m], i.e. P e_m = e_{sigma(m)}.
inline CMatrix permutation_matrix(const std::vector<std::size_t>& sigma) {
    const auto d = static_cast<Eigen::Index>(sigma.size());
    CMatrix p = CMatrix::Zero(d, d);
    for (Eigen::Index m = 0; m < d; ++m)
        p(static_cast<Eigen::Index>(sigma[static_cast<std::size_t>(m)]), m) = 1.0;
    return p;
}

/// Bijection on levels sending src1 -> dst1 and src2 -> dst2, built from two
/// swaps so overlapping indices stay consistent.
inline std::vector<std::size_t> routing_permutation(std::size_t d, std::size_t src1,
                                                    std::size_t dst1, std::size_t src2,
                                                    std::size_t dst2) {
    std::vector<std::size_t> f(d);
    std::iota(f.begin(), f.end(), std::size_t{0});
    auto send = [&](std::size_t src, std::size_t dst) {
        for (std::size_t k = 0; k < d; ++k)
            if (f[k] == dst) {
                std::swap(f[src], f[k]);
                return;
            }
    };
    send(src1, dst1);
    send(src2, dst2);
    return f;
}

inline CMatrix hadamard_on_pair(Eigen::Index d, std::size_t p, std::size_t q) {
    CMatrix h = CMatrix::Identity(d, d);
    const double r = 1.0 / std::sqrt(2.0);
    const auto a = static_cast<Eigen::Index>(p), b = static_cast<Eigen::Index>(q);
    h(a, a) = r;
    h(a, b) = r;
    h(b, a) = r;
    h(b, b) = -r;
    return h;
}

/// Collapse runs of adjacent InstantUnitary steps into single products.
inline void merge_adjacent_unitaries(std::vector<ControlStep>& steps) {
    std::vector<ControlStep> out;
    for (auto& s : steps) {
        if (s.is_unitary_step() && !out.empty() && out.back().is_unitary_step()) {
            CMatrix u = s.as_unitary().u * out.back().as_unitary().u;
            out.back() = ControlStep::unitary(std::move(u));
        } else {
            out.push_back(std::move(s));
        }
    }
    steps = std::move(out);
}

}  // namespace detail

/// Steps realizing the T-transform with weight s on canonical levels
/// (target_pair) of a B'-diagonal state: route the pair onto a mixing pair,
/// hold at the mixing basis, route back.
///
/// Case (i): some block M_a is non-diagonal, mix directly on the block pair at
/// basis B' with gamma = sum_a |(M_a)_{12}|^2. Case (ii): all operators are
/// diagonal in B'; pick the diagonal pair maximizing
/// gamma = (1/4) sum_a |(L_a)_{ii} - (L_a)_{jj}|^2 and mix at B' composed with
/// the Hadamard rotation on that pair. Hold duration t = -ln(1-2s)/(2 gamma).
inline std::vector<ControlStep> synthesize_ttransform_step(
    const Lindbladian& lb, const Basis& bprime, std::pair<std::size_t, std::size_t> block_pair,
    std::pair<std::size_t, std::size_t> target_pair, double s) {
    if (s < 0.0 || s >= 0.5) throw SOutOfRange("synthesize_ttransform_step: s outside [0, 1/2)");
    const Eigen::Index d = bprime.dim();
    require_same_dim(d, lb.dim(), "synthesize_ttransform_step");

    std::vector<CMatrix> transformed;
    double scale = 0.0;
    for (const auto& l : lb.ops) {
        transformed.push_back(bprime.matrix().adjoint() * l * bprime.matrix());
        scale = std::max(scale, max_abs(transformed.back()));
    }
    const double gamma_tol = 1e-12 * std::max(1.0, scale * scale);

    double gamma_block = 0.0;
    for (const auto& t : transformed)
        gamma_block += std::norm(t(static_cast<Eigen::Index>(block_pair.first),
                                   static_cast<Eigen::Index>(block_pair.second)));

    std::size_t p, q;
    Basis hold_basis;
    double gamma;
    if (gamma_block > gamma_tol) {
        p = block_pair.first;
        q = block_pair.second;
        hold_basis = bprime;
        gamma = gamma_block;
    } else {
        double best = 0.0;
        std::size_t bk = 0, bl = 0;
        for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(d); ++k)
            for (std::size_t l = k + 1; l < static_cast<std::size_t>(d); ++l) {
                double g = 0.0;
                for (const auto& t : transformed)
                    g += 0.25 * std::norm(t(static_cast<Eigen::Index>(k),
                                            static_cast<Eigen::Index>(k)) -
                                          t(static_cast<Eigen::Index>(l),
                                            static_cast<Eigen::Index>(l)));
                if (g > best) {
                    best = g;
                    bk = k;
                    bl = l;
                }
            }
        if (best <= gamma_tol)
            throw NoMixingPair("synthesize_ttransform_step: no pair with gamma > 0");
        p = bk;
        q = bl;
        hold_basis = Basis(bprime.matrix() * detail::hadamard_on_pair(d, p, q));
        gamma = best;
    }

    const auto sigma =
        detail::routing_permutation(static_cast<std::size_t>(d), target_pair.first, p,
                                    target_pair.second, q);
    const CMatrix route = detail::permutation_matrix(sigma);
    const CMatrix u_in = hold_basis.matrix() * route * bprime.matrix().adjoint();
    const double t_hold = s == 0.0 ? 0.0 : hold_duration_for_s(gamma, s);

    std::vector<ControlStep> steps;
    steps.push_back(ControlStep::unitary(u_in));
    steps.push_back(ControlStep::hold(hold_basis, t_hold, TTransform(p, q, s)));
    steps.push_back(ControlStep::unitary(u_in.adjoint()));
    return steps;
}

/// Full conversion plan for an optimal Lindbladian: initial unitary into the
/// verified basis (sorted, with the half-interval permutation folded in), one
/// T-transform step group per chain element with s capped at 1/2 -
/// s_cap_epsilon, final rotation into sigma's eigenbasis. Adjacent unitaries
/// are merged, so the plan has at most d-1 holds and d+1 unitaries.
inline ConversionPlan synthesize_conversion(const Lindbladian& lb, const DensityMatrix& rho,
                                            const DensityMatrix& sigma,
                                            double s_cap_epsilon = 1e-8, int trials = 16,
                                            std::uint64_t seed = 0) {
    require_same_dim(rho.dim(), lb.dim(), "synthesize_conversion");
    require_same_dim(sigma.dim(), lb.dim(), "synthesize_conversion");
    const auto verdict = is_optimal(lb, trials, seed);
    if (verdict.status != OptimalityVerdict::Status::optimal)
        throw NotOptimal("synthesize_conversion: Lindbladian not verified optimal");

    const auto [lam_rho, v_rho] = rho.eig_sorted();
    const auto [lam_sig, v_sig] = sigma.eig_sorted();
    const ProbVector spec_rho = ProbVector::from_eigen(lam_rho, 1e-9, 1e-9);
    const ProbVector spec_sig = ProbVector::from_eigen(lam_sig, 1e-9, 1e-9);
    if (!majorizes(spec_rho, spec_sig))
        throw MajorizationViolated("synthesize_conversion: spec(rho) does not majorize spec(sigma)");

    const std::size_t d = spec_rho.dim();
    auto chain = decompose_into_ttransforms(spec_rho, spec_sig);
    auto [chain_half, pi] = normalize_half_interval(chain, d);

    const Basis& bprime = *verdict.basis;
    std::vector<ControlStep> steps;
    steps.push_back(ControlStep::unitary(
        bprime.matrix() * pi.to_matrix().cast<Complex>() * v_rho.adjoint()));
    for (const auto& t : chain_half) {
        const double s_used = std::min(t.s, 0.5 - s_cap_epsilon);
        auto group = synthesize_ttransform_step(lb, bprime, *verdict.pair, {t.i, t.j}, s_used);
        for (auto& g : group) steps.push_back(std::move(g));
    }
    steps.push_back(ControlStep::unitary(v_sig * bprime.matrix().adjoint()));
    detail::merge_adjacent_unitaries(steps);

    ConversionPlan plan{std::move(steps), spec_sig, ModeHints{s_cap_epsilon, tol::dephase}};
    plan.validate();
    return plan;
}

/// Unitary U with diag(U rho U^dag) = target_diag entrywise, built by
/// realizing the T-transform decomposition of spec(rho) > target_diag as real
/// Givens rotations on the corresponding 2-planes. The decomposition's
/// pair-selection rule guarantees the rotated entry is untouched before each
/// rotation, so every rotation moves the two diagonal entries exactly.
inline CMatrix schur_horn_unitary(const DensityMatrix& rho, const ProbVector& target_diag) {
    require_same_dim(rho.dim(), static_cast<Eigen::Index>(target_diag.dim()),
                     "schur_horn_unitary");
    const auto [lam, v] = rho.eig_sorted();
    const ProbVector spec = ProbVector::from_eigen(lam, 1e-9, 1e-9);
    if (!majorizes(spec, target_diag))
        throw MajorizationViolated("schur_horn_unitary: spec(rho) does not majorize target");

    const auto [target_sorted, perm_t] = sort_descending(target_diag);
    const auto chain = decompose_into_ttransforms(spec, target_sorted);

    const Eigen::Index d = rho.dim();
    CMatrix a = CMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) a(k, k) = lam(k);
    CMatrix w = CMatrix::Identity(d, d);
    for (const auto& t : chain) {
        const auto k = static_cast<Eigen::Index>(t.i), l = static_cast<Eigen::Index>(t.j);
        const double c = std::sqrt(1.0 - t.s), sn = std::sqrt(t.s);
        CMatrix g = CMatrix::Identity(d, d);
        g(k, k) = c;
        g(k, l) = sn;
        g(l, k) = -sn;
        g(l, l) = c;
        a = g * a * g.transpose();
        w = g * w;
    }

    CMatrix u = perm_t.to_matrix().transpose().cast<Complex>() * w * v.adjoint();
    const CMatrix check = u * rho.mat() * u.adjoint();
    for (Eigen::Index m = 0; m < d; ++m)
        if (std::abs(check(m, m).real() - target_diag[static_cast<std::size_t>(m)]) > 1e-10)
            throw Error("schur_horn_unitary: diagonal did not converge");
    return u;
}

/// Schur--Horn rotate-and-dephase plan for a dephasing Lindbladian: rotate so
/// the dephasing-basis diagonal carries spec(sigma), hold for the spectral-gap
/// duration, and while projector blocks of rank > 1 keep intra-block
/// coherences alive, permute them to inter-block positions and dephase again.
inline ConversionPlan synthesize_dephasing_conversion(const Lindbladian& lb,
                                                      const DensityMatrix& rho,
                                                      const DensityMatrix& sigma,
                                                      double dephase_tol = tol::dephase) {
    require_same_dim(rho.dim(), lb.dim(), "synthesize_dephasing_conversion");
    require_same_dim(sigma.dim(), lb.dim(), "synthesize_dephasing_conversion");
    const auto ds = classify_dephasing(lb);
    if (!ds) throw NotDephasing("synthesize_dephasing_conversion: Lindbladian does not dephase");

    const auto [lam_sig, v_sig] = sigma.eig_sorted();
    const ProbVector spec_rho = rho.spectrum();
    const ProbVector spec_sig = ProbVector::from_eigen(lam_sig, 1e-9, 1e-9);
    if (!majorizes(spec_rho, spec_sig))
        throw MajorizationViolated(
            "synthesize_dephasing_conversion: spec(rho) does not majorize spec(sigma)");

    const Eigen::Index d = lb.dim();
    const std::size_t du = static_cast<std::size_t>(d);
    const CMatrix u_sh = schur_horn_unitary(rho, spec_sig);
    const CMatrix bdeph = ds->basis.matrix();

    std::vector<ControlStep> steps;
    steps.push_back(ControlStep::unitary(bdeph * u_sh));

    // State tracked in the dephasing frame; holds act as the ideal pinching.
    CMatrix m = u_sh * rho.mat() * u_sh.adjoint();
    std::vector<double> arr = spec_sig.entries();
    const double t_deph = std::log(1.0 / dephase_tol) / ds->decay_gap;

    auto block_of = [&](Eigen::Index k) { return ds->block_of(k); };
    auto pinch = [&](CMatrix& x) {
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                if (block_of(r) != block_of(c)) x(r, c) = 0.0;
    };
    auto offdiag_max = [&](const CMatrix& x) {
        double v = 0.0;
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                if (r != c) v = std::max(v, std::abs(x(r, c)));
        return v;
    };

    if (offdiag_max(m) >= dephase_tol) {
        steps.push_back(ControlStep::hold(ds->basis, t_deph));
        pinch(m);
    }

    for (std::size_t round = 0; round <= du * du; ++round) {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> surviving;
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = r + 1; c < d; ++c)
                if (std::abs(m(r, c)) >= dephase_tol) surviving.emplace_back(r, c);
        if (surviving.empty()) break;
        if (round == du * du)
            throw Error("synthesize_dephasing_conversion: dephasing loop did not terminate");

        // Cyclic shift chosen per round; with consecutive blocks some shift
        // always separates at least one surviving pair.
        std::size_t best_shift = 0, best_kills = 0;
        for (std::size_t a = 1; a < du; ++a) {
            std::size_t kills = 0;
            for (const auto& [r, c] : surviving)
                if (block_of((r + static_cast<Eigen::Index>(a)) % d) !=
                    block_of((c + static_cast<Eigen::Index>(a)) % d))
                    ++kills;
            if (kills > best_kills) {
                best_kills = kills;
                best_shift = a;
                if (kills == surviving.size()) break;
            }
        }
        if (best_kills == 0)
            throw Error("synthesize_dephasing_conversion: no shift separates coherences");

        std::vector<std::size_t> sigma_shift(du);
        for (std::size_t k = 0; k < du; ++k) sigma_shift[k] = (k + best_shift) % du;
        const CMatrix pm = detail::permutation_matrix(sigma_shift);
        steps.push_back(ControlStep::unitary(bdeph * pm * bdeph.adjoint()));
        m = (pm * m * pm.transpose()).eval();
        std::vector<double> arr2(du);
        for (std::size_t k = 0; k < du; ++k) arr2[sigma_shift[k]] = arr[k];
        arr = std::move(arr2);

        steps.push_back(ControlStep::hold(ds->basis, t_deph));
        pinch(m);
    }

    const auto [arr_sorted, perm_a] = sort_descending(ProbVector(arr));
    steps.push_back(
        ControlStep::unitary(v_sig * perm_a.to_matrix().cast<Complex>() * bdeph.adjoint()));
    detail::merge_adjacent_unitaries(steps);

    ConversionPlan plan{std::move(steps), spec_sig, ModeHints{1e-8, dephase_tol}};
    plan.validate();
    return plan;
}

/// Mixing-line test for depolarizing noise: s in [0,1] with
/// spec(sigma) = s spec(rho) + (1-s)/d entrywise, if it exists.
inline std::optional<double> depolarizing_reachable(const DensityMatrix& rho,
                                                    const DensityMatrix& sigma,
                                                    double tol_fit = 1e-8) {
    require_same_dim(rho.dim(), sigma.dim(), "depolarizing_reachable");
    const RVector lp = rho.eig_sorted().first, lq = sigma.eig_sorted().first;
    const double u = 1.0 / static_cast<double>(rho.dim());

    Eigen::Index pivot = -1;
    double dev = tol_fit;
    for (Eigen::Index i = 0; i < lp.size(); ++i)
        if (std::abs(lp(i) - u) > dev) {
            dev = std::abs(lp(i) - u);
            pivot = i;
        }
    if (pivot < 0) {
        // rho is maximally mixed; only sigma = I/d is on the line.
        if ((lq.array() - u).abs().maxCoeff() <= tol_fit) return 1.0;
        return std::nullopt;
    }
    double s = (lq(pivot) - u) / (lp(pivot) - u);
    if (s < -tol_fit || s > 1.0 + tol_fit) return std::nullopt;
    s = std::clamp(s, 0.0, 1.0);
    for (Eigen::Index i = 0; i < lp.size(); ++i)
        if (std::abs(lq(i) - (s * lp(i) + (1.0 - s) * u)) > tol_fit) return std::nullopt;
    return s;
}

}  // namespace mixctl
