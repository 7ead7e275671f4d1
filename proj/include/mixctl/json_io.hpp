#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixctl/density.hpp"
#include "mixctl/lindblad.hpp"
#include "mixctl/majorization.hpp"
#include "mixctl/optimality.hpp"
#include "mixctl/prob_vector.hpp"
#include "mixctl/protocols.hpp"
#include "mixctl/simulator.hpp"

/// JSON file formats. Probability vectors are plain arrays; complex matrices
/// are {"d": n, "re": [[...]], "im": [[...]]}; a Lindbladian file is
/// {"H": matrix, "L": [matrix, ...]}. nlohmann's shortest-round-trip number
/// output preserves doubles exactly and orders keys deterministically.
namespace mixctl::io {

using json = nlohmann::json;

inline json to_json(const ProbVector& p) { return json(p.entries()); }

inline ProbVector probvector_from_json(const json& j, double tol_sum = tol::sum) {
    if (!j.is_array()) throw ValidationError("ProbVector JSON: expected an array");
    return ProbVector(j.get<std::vector<double>>(), tol::neg, tol_sum);
}

inline json to_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rrow.push_back(m(i, j).real());
            irow.push_back(m(i, j).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return json{{"d", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline CMatrix cmatrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("d") || !j.contains("re") || !j.contains("im"))
        throw ValidationError("matrix JSON: expected {d, re, im}");
    const auto d = j.at("d").get<Eigen::Index>();
    if (d < 1) throw ValidationError("matrix JSON: d < 1");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (static_cast<Eigen::Index>(re.size()) != d || static_cast<Eigen::Index>(im.size()) != d)
        throw ValidationError("matrix JSON: row count mismatch");
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& rrow = re.at(static_cast<std::size_t>(i));
        const auto& irow = im.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(rrow.size()) != d ||
            static_cast<Eigen::Index>(irow.size()) != d)
            throw ValidationError("matrix JSON: column count mismatch");
        for (Eigen::Index k = 0; k < d; ++k)
            m(i, k) = Complex(rrow.at(static_cast<std::size_t>(k)).get<double>(),
                              irow.at(static_cast<std::size_t>(k)).get<double>());
    }
    return m;
}

inline json to_json(const TTransform& t) {
    return json{{"i", t.i}, {"j", t.j}, {"s", t.s}};
}

inline TTransform ttransform_from_json(const json& j) {
    return TTransform(j.at("i").get<std::size_t>(), j.at("j").get<std::size_t>(),
                      j.at("s").get<double>());
}

inline json to_json(const Lindbladian& lb) {
    json ops = json::array();
    for (const auto& l : lb.ops) ops.push_back(to_json(l));
    return json{{"H", to_json(lb.hamiltonian)}, {"L", std::move(ops)}};
}

inline Lindbladian lindbladian_from_json(const json& j, double tol_herm = tol::herm) {
    if (!j.is_object() || !j.contains("H") || !j.contains("L"))
        throw ValidationError("Lindbladian JSON: expected {H, L}");
    std::vector<CMatrix> ops;
    for (const auto& o : j.at("L")) ops.push_back(cmatrix_from_json(o));
    return Lindbladian(cmatrix_from_json(j.at("H")), std::move(ops), tol_herm);
}

inline json to_json(const DensityMatrix& rho) { return to_json(rho.mat()); }

inline DensityMatrix density_from_json(const json& j, double tol_herm = tol::herm) {
    return DensityMatrix(cmatrix_from_json(j), tol_herm);
}

inline json to_json(const ControlStep& step) {
    if (step.is_unitary_step()) return json{{"type", "unitary"}, {"U", to_json(step.as_unitary().u)}};
    const auto& h = step.as_hold();
    json out{{"type", "hold"}, {"basis", to_json(h.basis.matrix())}, {"t", h.duration}};
    if (h.ttransform) out["ttransform"] = to_json(*h.ttransform);
    return out;
}

inline ControlStep controlstep_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "unitary") return ControlStep::unitary(cmatrix_from_json(j.at("U")));
    if (type == "hold") {
        std::optional<TTransform> tt;
        if (j.contains("ttransform")) tt = ttransform_from_json(j.at("ttransform"));
        return ControlStep::hold(Basis(cmatrix_from_json(j.at("basis"))),
                                 j.at("t").get<double>(), tt);
    }
    throw ValidationError("ControlStep JSON: unknown type '" + type + "'");
}

/// FNV-1a over the canonical serialization; stable provenance tag for plans.
inline std::string content_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline json to_json(const ConversionPlan& plan, const std::string& lindbladian_hash) {
    json steps = json::array();
    for (const auto& s : plan.steps) steps.push_back(to_json(s));
    return json{{"steps", std::move(steps)},
                {"target_spectrum", to_json(plan.target_spectrum)},
                {"mode_hints",
                 {{"s_cap", plan.mode_hints.s_cap}, {"dephase_tol", plan.mode_hints.dephase_tol}}},
                {"provenance",
                 {{"lindbladian_hash", lindbladian_hash},
                  {"s_cap", plan.mode_hints.s_cap},
                  {"tolerances", {{"sum", tol::sum}, {"herm", tol::herm}}}}}};
}

inline ConversionPlan plan_from_json(const json& j) {
    ConversionPlan plan;
    for (const auto& s : j.at("steps")) plan.steps.push_back(controlstep_from_json(s));
    plan.target_spectrum = probvector_from_json(j.at("target_spectrum"));
    if (j.contains("mode_hints")) {
        plan.mode_hints.s_cap = j.at("mode_hints").value("s_cap", 1e-8);
        plan.mode_hints.dephase_tol = j.at("mode_hints").value("dephase_tol", tol::dephase);
    }
    plan.validate();
    return plan;
}

inline json to_json(const OptimalityVerdict& v) {
    json out{{"status", to_string(v.status)}, {"residual", v.residual}};
    if (v.pair) out["pair"] = json::array({v.pair->first, v.pair->second});
    if (v.basis) out["basis"] = to_json(v.basis->matrix());
    return out;
}

inline json to_json(const DephasingStructure& ds) {
    json projs = json::array();
    json ranks = json::array();
    for (std::size_t b = 0; b < ds.projectors.size(); ++b) {
        projs.push_back(to_json(ds.projectors[b]));
        ranks.push_back(ds.block_sizes[b]);
    }
    return json{{"basis", to_json(ds.basis.matrix())},
                {"projector_ranks", std::move(ranks)},
                {"projectors", std::move(projs)},
                {"decay_gap", ds.decay_gap}};
}

/// Non-finite alpha (the max-entropy order) serializes as the string "inf";
/// nlohmann would otherwise emit null.
inline json alpha_to_json(double a) {
    if (std::isinf(a)) return json("inf");
    return json(a);
}

inline json to_json(const EntropyProfile& profile) {
    json alphas = json::array();
    for (double a : profile.alphas) alphas.push_back(alpha_to_json(a));
    return json{{"alphas", std::move(alphas)}, {"values_over_time", profile.values_over_time}};
}

inline json to_json(const AuditViolation& v) {
    return json{{"step_index", v.step_index},
                {"kind", v.kind},
                {"alpha", alpha_to_json(v.alpha)},
                {"magnitude", v.magnitude}};
}

inline json to_json(const SimulationResult& res, std::size_t traj_stride = 1) {
    json traj = json::array();
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
        if (k % traj_stride != 0 && k + 1 != res.trajectory.size()) continue;
        traj.push_back(
            json{{"t", res.trajectory[k].first}, {"state", to_json(res.trajectory[k].second)}});
    }
    return json{{"final_state", to_json(res.final_state)},
                {"spectral_error", res.spectral_error},
                {"mode", to_string(res.mode)},
                {"trajectory", std::move(traj)}};
}

}  // namespace mixctl::io
