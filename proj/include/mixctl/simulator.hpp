#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mixctl/density.hpp"
#include "mixctl/lindblad.hpp"
#include "mixctl/majorization.hpp"
#include "mixctl/protocols.hpp"
#include "mixctl/spectrum_dynamics.hpp"
#include "mixctl/types.hpp"

namespace mixctl {

enum class SimMode { ideal, physical };

inline const char* to_string(SimMode m) { return m == SimMode::ideal ? "ideal" : "physical"; }

struct SimulationResult {
    DensityMatrix final_state;
    std::vector<std::pair<double, DensityMatrix>> trajectory;
    double spectral_error = 0.0;
    SimMode mode = SimMode::ideal;
};

struct EntropyProfile {
    std::vector<double> alphas;
    std::vector<std::vector<double>> values_over_time;  // [sample][alpha]
};

struct AuditViolation {
    std::size_t step_index = 0;  // transition trajectory[k] -> trajectory[k+1]
    std::string kind;            // "entropy" or "majorization"
    double alpha = 0.0;          // for entropy violations
    double magnitude = 0.0;
};

namespace detail {

inline constexpr int kHoldSamples = 32;

inline double spectral_error_vs(const DensityMatrix& state, const ProbVector& target) {
    RVector lam = state.eig_sorted().first;
    std::vector<double> tg = target.entries();
    std::sort(tg.begin(), tg.end(), std::greater<double>());
    double err = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        err += std::abs(lam(i) - tg[static_cast<std::size_t>(i)]);
    return err;
}

inline DensityMatrix basis_diagonal_state(const Basis& b, const ProbVector& lam) {
    const Eigen::Index d = b.dim();
    CMatrix m = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = lam[static_cast<std::size_t>(i)];
    return DensityMatrix(b.matrix() * m * b.matrix().adjoint(), 1e-8, 1e-8, 1e-8);
}

inline ProbVector basis_diagonal_of(const Basis& b, const CMatrix& rho) {
    const Eigen::Index d = b.dim();
    std::vector<double> lam(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i)
        lam[static_cast<std::size_t>(i)] =
            (b.vector(i).adjoint() * rho * b.vector(i))(0, 0).real();
    return ProbVector(std::move(lam), 1e-9, 1e-8);
}

inline CMatrix clean_state(CMatrix rho) {
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8) throw ValidationError("simulator: trace drift");
    return rho / tr;
}

/// Corrective unitary pinning the instantaneous eigenbasis onto B, matching
/// eigenvalue order by maximal-overlap assignment (greedy on |<b_i|v_j>|^2).
inline CMatrix repin_unitary(const Basis& b, const CMatrix& rho) {
    const Eigen::Index d = b.dim();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    const CMatrix& v = es.eigenvectors();
    RMatrix overlap = (b.matrix().adjoint() * v).cwiseAbs2();

    std::vector<Eigen::Index> assign(static_cast<std::size_t>(d), -1);
    std::vector<bool> used_row(static_cast<std::size_t>(d), false),
        used_col(static_cast<std::size_t>(d), false);
    for (Eigen::Index n = 0; n < d; ++n) {
        double best = -1.0;
        Eigen::Index bi = 0, bj = 0;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (used_row[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < d; ++j) {
                if (used_col[static_cast<std::size_t>(j)]) continue;
                if (overlap(i, j) > best) {
                    best = overlap(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        assign[static_cast<std::size_t>(bi)] = bj;
        used_row[static_cast<std::size_t>(bi)] = true;
        used_col[static_cast<std::size_t>(bj)] = true;
    }

    CMatrix w = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        w += b.vector(i) * v.col(assign[static_cast<std::size_t>(i)]).adjoint();
    return w;
}

/// Hamiltonian generating U over time tau: H = (i/tau) log U, principal
/// branch with eigenphases in (-pi, pi].
inline CMatrix pulse_hamiltonian(const CMatrix& u, double tau) {
    Eigen::ComplexSchur<CMatrix> schur(u);
    const Eigen::Index d = u.rows();
    CMatrix h = CMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        double theta = std::arg(schur.matrixT()(k, k));
        if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
        h(k, k) = -theta / tau;
    }
    return schur.matrixU() * h * schur.matrixU().adjoint();
}

}  // namespace detail

/// Ideal-pulse execution: InstantUnitary steps act exactly; a HoldBasis step
/// evolves the basis-diagonal populations by exp(Q t) while the eigenbasis is
/// pinned at B (coherences in B do not survive the idealized hold).
inline SimulationResult run_plan_ideal(const Lindbladian& lb, const DensityMatrix& rho,
                                       const ConversionPlan& plan) {
    require_same_dim(rho.dim(), lb.dim(), "run_plan_ideal");
    plan.validate();
    require_same_dim(plan.dim(), lb.dim(), "run_plan_ideal");

    SimulationResult res;
    res.mode = SimMode::ideal;
    DensityMatrix state = rho;
    double t = 0.0;
    res.trajectory.emplace_back(t, state);

    for (const auto& step : plan.steps) {
        if (step.is_unitary_step()) {
            const CMatrix& u = step.as_unitary().u;
            state = DensityMatrix(u * state.mat() * u.adjoint(), 1e-8, 1e-8, 1e-8);
            res.trajectory.emplace_back(t, state);
        } else {
            const auto& hold = step.as_hold();
            const ProbVector lam0 = detail::basis_diagonal_of(hold.basis, state.mat());
            const QGenerator q = q_matrix(lb.ops, hold.basis);
            state = detail::basis_diagonal_state(hold.basis, lam0);
            res.trajectory.emplace_back(t, state);
            if (hold.duration > 0.0) {
                for (int k = 1; k <= detail::kHoldSamples; ++k) {
                    const double tau =
                        hold.duration * static_cast<double>(k) / detail::kHoldSamples;
                    const ProbVector lam = evolve_spectrum(q, lam0, tau);
                    state = detail::basis_diagonal_state(hold.basis, lam);
                    res.trajectory.emplace_back(t + tau, state);
                }
            }
            t += hold.duration;
        }
    }
    res.final_state = state;
    res.spectral_error = detail::spectral_error_vs(state, plan.target_spectrum);
    return res;
}

/// Finite-fidelity execution. InstantUnitary steps run as evolution under
/// K_H + L0 for pulse_tau with H = (i/pulse_tau) log U (dissipation stays on
/// during the pulse). Annotated holds are Trotterized steering: free
/// propagation for steer_dt alternating with an instantaneous re-pin of the
/// eigenbasis onto B. Unannotated holds are free dissipation.
inline SimulationResult run_plan_physical(const Lindbladian& lb, const DensityMatrix& rho,
                                          const ConversionPlan& plan, double pulse_tau = 1e-4,
                                          double steer_dt = 1e-3) {
    if (pulse_tau <= 0.0 || steer_dt <= 0.0)
        throw ValidationError("run_plan_physical: step parameters must be positive");
    require_same_dim(rho.dim(), lb.dim(), "run_plan_physical");
    plan.validate();
    require_same_dim(plan.dim(), lb.dim(), "run_plan_physical");

    const CMatrix s0 = to_superoperator(lb);
    SimulationResult res;
    res.mode = SimMode::physical;
    CMatrix state = rho.mat();
    double t = 0.0;
    res.trajectory.emplace_back(t, rho);

    auto push_sample = [&](double time, const CMatrix& x) {
        res.trajectory.emplace_back(time, DensityMatrix(x, 1e-7, 1e-7, 1e-6));
    };

    for (const auto& step : plan.steps) {
        if (step.is_unitary_step()) {
            const CMatrix h = detail::pulse_hamiltonian(step.as_unitary().u, pulse_tau);
            const Propagator prop(CMatrix(s0 + hamiltonian_superoperator(h)), pulse_tau);
            state = detail::clean_state(prop.apply_raw(state));
            t += pulse_tau;
            push_sample(t, state);
        } else {
            const auto& hold = step.as_hold();
            if (hold.duration <= 0.0) continue;
            const bool steered = hold.ttransform.has_value();
            const int n = steered
                              ? static_cast<int>(std::ceil(hold.duration / steer_dt))
                              : detail::kHoldSamples;
            const double dt = hold.duration / n;
            const Propagator prop(s0, dt);
            const int stride = std::max(1, n / detail::kHoldSamples);
            for (int k = 1; k <= n; ++k) {
                state = prop.apply_raw(state);
                if (steered) {
                    const CMatrix w = detail::repin_unitary(hold.basis, state);
                    state = w * state * w.adjoint();
                }
                state = detail::clean_state(state);
                if (k % stride == 0 || k == n) push_sample(t + k * dt, state);
            }
            t += hold.duration;
        }
    }
    res.final_state = DensityMatrix(state, 1e-7, 1e-7, 1e-6);
    res.spectral_error = detail::spectral_error_vs(res.final_state, plan.target_spectrum);
    return res;
}

/// Renyi entropy S_alpha in nats; alpha = 1 is von Neumann, alpha = inf is
/// -log lambda_max, alpha = 0 is log rank (threshold 1e-12). Eigenvalues at
/// the solver noise floor (1e-14) count as exact zeros, so numerically pure
/// states report zero entropy for every alpha > 0.
inline double renyi_entropy(const DensityMatrix& rho, double alpha) {
    if (alpha < 0.0) throw ValidationError("renyi_entropy: alpha < 0");
    const RVector lam = rho.eig_sorted().first;
    if (std::isinf(alpha)) return -std::log(lam(0));
    if (alpha == 0.0) {
        int rank = 0;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (lam(i) > 1e-12) ++rank;
        return std::log(static_cast<double>(rank));
    }
    constexpr double floor = 1e-14;
    if (alpha == 1.0) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (lam(i) > floor) s -= lam(i) * std::log(lam(i));
        return s;
    }
    double z = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) > floor) z += std::pow(lam(i), alpha);
    return std::log(z) / (1.0 - alpha);
}

/// Entropy profile along the trajectory plus flagged monotonicity breaches:
/// any S_alpha decrease beyond 1e-6, and (in ideal mode) any step where
/// spec(rho(t_k)) fails to majorize spec(rho(t_{k+1})) within 1e-8.
inline std::pair<EntropyProfile, std::vector<AuditViolation>> audit_monotonicity(
    const SimulationResult& result, const std::vector<double>& alphas,
    double entropy_tol = 1e-6, double major_tol = 1e-8) {
    if (result.trajectory.empty()) throw ValidationError("audit_monotonicity: empty trajectory");

    EntropyProfile profile;
    profile.alphas = alphas;
    for (const auto& [time, state] : result.trajectory) {
        std::vector<double> row;
        row.reserve(alphas.size());
        for (double a : alphas) row.push_back(renyi_entropy(state, a));
        profile.values_over_time.push_back(std::move(row));
    }

    std::vector<AuditViolation> violations;
    for (std::size_t k = 0; k + 1 < result.trajectory.size(); ++k) {
        for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
            const double drop = profile.values_over_time[k][ai] -
                                profile.values_over_time[k + 1][ai];
            if (drop > entropy_tol)
                violations.push_back({k, "entropy", alphas[ai], drop});
        }
        if (result.mode == SimMode::ideal) {
            const ProbVector a = result.trajectory[k].second.spectrum();
            const ProbVector b = result.trajectory[k + 1].second.spectrum();
            if (!majorizes(a, b, major_tol))
                violations.push_back({k, "majorization", 0.0, 0.0});
        }
    }
    return {std::move(profile), std::move(violations)};
}

/// Trace distance (1/2)||a - b||_1 via the eigenvalues of the Hermitian
/// difference.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "trace_distance");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(a.mat() - b.mat()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace mixctl
