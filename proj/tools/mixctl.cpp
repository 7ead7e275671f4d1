// mixctl: decide majorization-convertibility under unital Markovian noise plus
// coherent control, synthesize conversion plans, and verify them by simulation.

#include <cstdint>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixctl/json_io.hpp"
#include "mixctl/random_gen.hpp"

namespace {

using mixctl::io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNotMajorized = 3;
constexpr int kExitPreconditionMajorization = 4;
constexpr int kExitNoRoute = 5;

struct Config {
    double tol_sum = mixctl::tol::sum;
    double tol_herm = mixctl::tol::herm;
    std::uint64_t seed = 0;
    int trials = 16;
    std::string output;  // empty = stdout
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mixctl::ValidationError("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

void emit(const Config& cfg, const json& j) {
    const std::string text = j.dump(2);
    if (cfg.output.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(cfg.output);
        if (!out) throw mixctl::ValidationError("cannot write file: " + cfg.output);
        out << text << "\n";
    }
}

int cmd_majorize(const Config& cfg, const std::string& p_file, const std::string& q_file) {
    const auto p = mixctl::io::probvector_from_json(read_json_file(p_file), cfg.tol_sum);
    const auto q = mixctl::io::probvector_from_json(read_json_file(q_file), cfg.tol_sum);
    const auto rep = mixctl::majorization_report(p, q);

    json out{{"majorizes", rep.majorizes}, {"prefix_gaps", rep.prefix_gaps}};
    if (rep.first_failing_prefix) out["first_failing_prefix"] = *rep.first_failing_prefix;
    if (rep.majorizes) {
        const auto chain = mixctl::decompose_into_ttransforms(p, q);
        json jchain = json::array();
        for (const auto& t : chain) jchain.push_back(mixctl::io::to_json(t));
        out["ttransform_chain"] = std::move(jchain);
        const auto witness = mixctl::birkhoff_witness(p, q);
        json rows = json::array();
        for (Eigen::Index i = 0; i < witness.entries.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < witness.entries.cols(); ++j)
                row.push_back(witness.entries(i, j));
            rows.push_back(std::move(row));
        }
        out["witness_matrix"] = std::move(rows);
    }
    emit(cfg, out);
    return rep.majorizes ? kExitOk : kExitNotMajorized;
}

int cmd_classify(const Config& cfg, const std::string& lind_file) {
    const auto lb = mixctl::io::lindbladian_from_json(read_json_file(lind_file), cfg.tol_herm);
    json out;
    out["unital"] = mixctl::is_unital(lb);
    out["depolarizing"] = mixctl::matches_depolarizing(lb);
    try {
        const auto ds = mixctl::classify_dephasing(lb);
        out["dephasing"] = ds ? mixctl::io::to_json(*ds) : json(nullptr);
    } catch (const mixctl::ZeroLindbladian&) {
        out["dephasing"] = nullptr;
    }
    out["optimal"] = mixctl::io::to_json(mixctl::is_optimal(lb, cfg.trials, cfg.seed));
    emit(cfg, out);
    return kExitOk;
}

/// Route order: dephasing-specialized, then general optimal, then the
/// depolarizing mixing line. Returns the plan or kExitNoRoute.
std::pair<std::optional<mixctl::ConversionPlan>, int> synthesize_route(
    const Config& cfg, const mixctl::Lindbladian& lb, const mixctl::DensityMatrix& rho,
    const mixctl::DensityMatrix& sigma) {
    if (!mixctl::majorizes(rho.spectrum(), sigma.spectrum()))
        return {std::nullopt, kExitPreconditionMajorization};

    try {
        if (mixctl::classify_dephasing(lb))
            return {mixctl::synthesize_dephasing_conversion(lb, rho, sigma), kExitOk};
    } catch (const mixctl::ZeroLindbladian&) {
        return {std::nullopt, kExitNoRoute};
    }

    if (mixctl::is_optimal(lb, cfg.trials, cfg.seed).status ==
        mixctl::OptimalityVerdict::Status::optimal)
        return {mixctl::synthesize_conversion(lb, rho, sigma, 1e-8, cfg.trials, cfg.seed),
                kExitOk};

    if (mixctl::matches_depolarizing(lb)) {
        const auto s = mixctl::depolarizing_reachable(rho, sigma);
        if (!s) return {std::nullopt, kExitNoRoute};
        const auto [lam_sig, v_sig] = sigma.eig_sorted();
        const auto [lam_rho, v_rho] = rho.eig_sorted();
        const double t = -std::log(std::max(*s, 1e-12));
        std::vector<mixctl::ControlStep> steps;
        steps.push_back(mixctl::ControlStep::unitary(v_sig * v_rho.adjoint()));
        if (t > 0.0) steps.push_back(mixctl::ControlStep::hold(mixctl::Basis(v_sig), t));
        mixctl::ConversionPlan plan{std::move(steps),
                                    mixctl::ProbVector::from_eigen(lam_sig, 1e-9, 1e-9),
                                    mixctl::ModeHints{}};
        return {std::move(plan), kExitOk};
    }
    return {std::nullopt, kExitNoRoute};
}

int cmd_synthesize(const Config& cfg, const std::string& lind_file, const std::string& rho_file,
                   const std::string& sigma_file) {
    const auto lb = mixctl::io::lindbladian_from_json(read_json_file(lind_file), cfg.tol_herm);
    const auto rho = mixctl::io::density_from_json(read_json_file(rho_file), cfg.tol_herm);
    const auto sigma = mixctl::io::density_from_json(read_json_file(sigma_file), cfg.tol_herm);

    auto [plan, code] = synthesize_route(cfg, lb, rho, sigma);
    if (!plan) return code;
    emit(cfg, mixctl::io::to_json(*plan,
                                  mixctl::io::content_hash(mixctl::io::to_json(lb))));
    return kExitOk;
}

int cmd_simulate(const Config& cfg, const std::string& lind_file, const std::string& rho_file,
                 const std::string& plan_file, const std::string& mode, double steer_dt,
                 double pulse_tau, std::size_t traj_stride) {
    const auto lb = mixctl::io::lindbladian_from_json(read_json_file(lind_file), cfg.tol_herm);
    const auto rho = mixctl::io::density_from_json(read_json_file(rho_file), cfg.tol_herm);
    const auto plan = mixctl::io::plan_from_json(read_json_file(plan_file));

    mixctl::SimulationResult res;
    if (mode == "ideal") {
        res = mixctl::run_plan_ideal(lb, rho, plan);
    } else if (mode == "physical") {
        res = mixctl::run_plan_physical(lb, rho, plan, pulse_tau, steer_dt);
    } else {
        throw mixctl::ValidationError("simulate: mode must be 'ideal' or 'physical'");
    }

    const std::vector<double> alphas{0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()};
    const auto [profile, violations] = mixctl::audit_monotonicity(res, alphas);
    json out = mixctl::io::to_json(res, traj_stride);
    json jv = json::array();
    for (const auto& v : violations) jv.push_back(mixctl::io::to_json(v));
    out["audit"] = json{{"profile", mixctl::io::to_json(profile)},
                        {"violations", std::move(jv)}};
    emit(cfg, out);
    return kExitOk;
}

struct BatchEntry {
    mixctl::Lindbladian lb;
    mixctl::DensityMatrix rho;
    mixctl::DensityMatrix sigma;
};

BatchEntry load_batch_entry(const json& e, const Config& cfg, std::uint64_t entry_seed) {
    if (e.contains("generate")) {
        const auto& g = e.at("generate");
        const auto kind = g.at("kind").get<std::string>();
        const auto d = g.value("d", 4);
        auto eng = mixctl::rnd::engine(g.value("seed", entry_seed));
        mixctl::Lindbladian lb;
        if (kind == "dephasing") {
            lb = mixctl::rnd::dephasing_lindbladian(eng, d);
        } else if (kind == "planted") {
            lb = mixctl::rnd::planted_optimal_lindbladian(eng, d);
        } else if (kind == "depolarizing") {
            lb = mixctl::depolarizing(d);
        } else {
            throw mixctl::ValidationError("verify-batch: unknown generator kind '" + kind + "'");
        }
        const auto rho = mixctl::rnd::density(eng, d);
        const auto sigma = mixctl::DensityMatrix::diagonal(
            mixctl::rnd::mixed_from(eng, rho.spectrum()));
        return BatchEntry{std::move(lb), rho, sigma};
    }
    return BatchEntry{
        mixctl::io::lindbladian_from_json(read_json_file(e.at("lindbladian").get<std::string>()),
                                          cfg.tol_herm),
        mixctl::io::density_from_json(read_json_file(e.at("rho").get<std::string>()),
                                      cfg.tol_herm),
        mixctl::io::density_from_json(read_json_file(e.at("sigma").get<std::string>()),
                                      cfg.tol_herm)};
}

json run_batch_entry(const json& e, const Config& cfg, std::uint64_t entry_seed,
                     double threshold) {
    json row;
    try {
        const auto entry = load_batch_entry(e, cfg, entry_seed);
        auto [plan, code] = synthesize_route(cfg, entry.lb, entry.rho, entry.sigma);
        if (!plan) {
            row["status"] =
                code == kExitPreconditionMajorization ? "fail-majorization" : "no-route";
            return row;
        }
        const auto res = mixctl::run_plan_ideal(entry.lb, entry.rho, *plan);
        row["spectral_error"] = res.spectral_error;
        row["status"] = res.spectral_error <= threshold ? "pass" : "fail";
    } catch (const std::exception& ex) {
        row["status"] = "error";
        row["message"] = ex.what();
    }
    return row;
}

int cmd_verify_batch(const Config& cfg, const std::string& manifest_file, int jobs,
                     double threshold) {
    const json manifest = read_json_file(manifest_file);
    if (!manifest.contains("entries") || !manifest.at("entries").is_array() ||
        manifest.at("entries").empty())
        throw mixctl::ValidationError("verify-batch: manifest has no entries");
    const auto& entries = manifest.at("entries");

    std::vector<json> rows(entries.size());
    if (jobs < 1) jobs = 1;
    std::size_t next = 0;
    while (next < entries.size()) {
        const std::size_t chunk =
            std::min<std::size_t>(static_cast<std::size_t>(jobs), entries.size() - next);
        std::vector<std::future<json>> futs;
        for (std::size_t k = 0; k < chunk; ++k) {
            const std::size_t idx = next + k;
            futs.push_back(std::async(std::launch::async, [&, idx] {
                return run_batch_entry(entries.at(idx), cfg, cfg.seed + idx, threshold);
            }));
        }
        for (std::size_t k = 0; k < chunk; ++k) rows[next + k] = futs[k].get();
        next += chunk;
    }

    json table = json::array();
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i]["index"] = i;
        if (rows[i].at("status").get<std::string>() != "pass") ++failures;
        table.push_back(rows[i]);
    }
    emit(cfg, json{{"entries", std::move(table)},
                   {"total", rows.size()},
                   {"failures", failures},
                   {"threshold", threshold}});
    return failures == 0 ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum state mixing toolkit: majorization decisions, control-protocol "
                 "synthesis under unital Lindblad dissipation, and verification by simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    Config cfg;
    app.add_option("--tol-sum", cfg.tol_sum, "Probability normalization tolerance")
        ->envname("MIXCTL_TOL_SUM");
    app.add_option("--tol-herm", cfg.tol_herm, "Hermiticity tolerance")
        ->envname("MIXCTL_TOL_HERM");
    app.add_option("--seed", cfg.seed, "Seed for randomized searches and generators")
        ->envname("MIXCTL_SEED");
    app.add_option("--trials", cfg.trials, "Basis-search trials for the optimality decision");
    app.add_option("-o,--output", cfg.output, "Output file (default: stdout)");

    std::string p_file, q_file, lind_file, rho_file, sigma_file, plan_file, manifest_file;
    std::string mode = "ideal";
    double steer_dt = 1e-3, pulse_tau = 1e-4, threshold = 1e-6;
    std::size_t traj_stride = 1;
    int jobs = 1;

    auto* majorize = app.add_subcommand("majorize", "Decide p > q and emit the witness");
    majorize->add_option("p", p_file, "ProbVector JSON file")->required();
    majorize->add_option("q", q_file, "ProbVector JSON file")->required();

    auto* classify =
        app.add_subcommand("classify", "Classify a Lindbladian (unital/dephasing/optimal)");
    classify->add_option("lindbladian", lind_file, "Lindbladian JSON file")->required();

    auto* synthesize =
        app.add_subcommand("synthesize", "Synthesize a conversion plan rho -> sigma");
    synthesize->add_option("lindbladian", lind_file)->required();
    synthesize->add_option("rho", rho_file)->required();
    synthesize->add_option("sigma", sigma_file)->required();

    auto* simulate = app.add_subcommand("simulate", "Execute a plan and audit monotonicity");
    simulate->add_option("lindbladian", lind_file)->required();
    simulate->add_option("rho", rho_file)->required();
    simulate->add_option("plan", plan_file)->required();
    simulate->add_option("--mode", mode, "ideal or physical");
    simulate->add_option("--steer-dt", steer_dt, "Steering step (physical mode)");
    simulate->add_option("--pulse-tau", pulse_tau, "Pulse duration (physical mode)");
    simulate->add_option("--traj-stride", traj_stride, "Keep every n-th trajectory sample");

    auto* batch = app.add_subcommand("verify-batch", "Synthesize+simulate a manifest of cases");
    batch->add_option("manifest", manifest_file, "Manifest JSON file")->required();
    batch->add_option("--jobs", jobs, "Parallel workers");
    batch->add_option("--threshold", threshold, "Pass threshold on spectral error");

    CLI11_PARSE(app, argc, argv);

    try {
        if (majorize->parsed()) return cmd_majorize(cfg, p_file, q_file);
        if (classify->parsed()) return cmd_classify(cfg, lind_file);
        if (synthesize->parsed()) return cmd_synthesize(cfg, lind_file, rho_file, sigma_file);
        if (simulate->parsed())
            return cmd_simulate(cfg, lind_file, rho_file, plan_file, mode, steer_dt, pulse_tau,
                                traj_stride);
        if (batch->parsed()) return cmd_verify_batch(cfg, manifest_file, jobs, threshold);
    } catch (const mixctl::MajorizationViolated& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitPreconditionMajorization;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
