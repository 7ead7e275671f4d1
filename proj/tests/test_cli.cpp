#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "mixctl/json_io.hpp"
#include "mixctl/random_gen.hpp"

using namespace mixctl;
using io::json;

namespace {

struct CliResult {
    int exit_code;
    std::string stdout_text;
};

std::string work_dir() {
    static const std::string dir = [] {
        std::string d = "/tmp/mixctl_cli_test_XXXXXX";
        REQUIRE(mkdtemp(d.data()) != nullptr);
        return d;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const std::string path = work_dir() + "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string write_json(const std::string& name, const json& j) {
    return write_file(name, j.dump());
}

CliResult run_cli(const std::string& args) {
    const std::string out_path = work_dir() + "/stdout.txt";
    const std::string cmd = std::string(MIXCTL_BIN) + " " + args + " > " + out_path + " 2> " +
                            work_dir() + "/stderr.txt";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {WEXITSTATUS(status), text};
}

json diag_matrix_json(const std::vector<double>& vals) {
    const auto d = static_cast<Eigen::Index>(vals.size());
    CMatrix m = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = vals[static_cast<std::size_t>(i)];
    return io::to_json(m);
}

}  // namespace

TEST_CASE("cli majorize") {
    const auto p = write_json("p.json", json::array({1.0, 0.0, 0.0}));
    const auto q = write_json("q.json", json::array({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    SECTION("majorizing pair exits 0 with a short chain") {
        const auto res = run_cli("majorize " + p + " " + q);
        CHECK(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK(j.at("majorizes").get<bool>());
        CHECK(j.at("ttransform_chain").size() <= 2);
        CHECK(j.contains("witness_matrix"));
    }
    SECTION("incomparable pair exits 3 and reports the failing prefix") {
        const auto a = write_json("a.json", json::array({0.5, 0.5, 0.0}));
        const auto b = write_json("b.json", json::array({0.6, 0.2, 0.2}));
        const auto res = run_cli("majorize " + a + " " + b);
        CHECK(res.exit_code == 3);
        const json j = json::parse(res.stdout_text);
        CHECK_FALSE(j.at("majorizes").get<bool>());
        CHECK(j.at("first_failing_prefix").get<int>() == 1);
    }
    SECTION("malformed input exits 2") {
        const auto bad = write_file("bad.json", "{{{");
        CHECK(run_cli("majorize " + bad + " " + q).exit_code == 2);
        const auto notprob = write_json("notprob.json", json::array({0.9, 0.9}));
        CHECK(run_cli("majorize " + notprob + " " + q).exit_code == 2);
    }
    SECTION("tolerance precedence: flag beats env beats default") {
        const auto loose = write_json("loose.json", json::array({0.9995, 0.0}));
        const auto target = write_json("target.json", json::array({0.5, 0.4995}));
        auto run_with_env = [&](const std::string& env, const std::string& args) {
            const std::string cmd =
                env + " " + MIXCTL_BIN + " " + args + " > /dev/null 2>&1";
            return WEXITSTATUS(std::system(cmd.c_str()));
        };
        // Default tolerance rejects the off-normalized vector.
        CHECK(run_cli("majorize " + loose + " " + target).exit_code == 2);
        // Env loosens it.
        CHECK(run_with_env("MIXCTL_TOL_SUM=1e-2", "majorize " + loose + " " + target) == 0);
        // Flag overrides the env back to strict.
        CHECK(run_with_env("MIXCTL_TOL_SUM=1e-2",
                           "--tol-sum 1e-12 majorize " + loose + " " + target) == 2);
    }
}

TEST_CASE("cli classify") {
    SECTION("depolarizing(3)") {
        const auto file = write_json("depol3.json", io::to_json(depolarizing(3)));
        const auto res = run_cli("classify " + file);
        REQUIRE(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK(j.at("unital").get<bool>());
        CHECK(j.at("depolarizing").get<bool>());
        CHECK(j.at("dephasing").is_null());
        CHECK(j.at("optimal").at("status").get<std::string>() == "not_optimal");
    }
    SECTION("diagonal operators classify as dephasing and optimal") {
        CMatrix l = CMatrix::Zero(3, 3);
        l(0, 0) = 1.0;
        l(1, 1) = 2.0;
        l(2, 2) = 3.0;
        const auto file =
            write_json("deph.json", io::to_json(Lindbladian::dissipative({l})));
        const auto res = run_cli("classify " + file);
        REQUIRE(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK_FALSE(j.at("dephasing").is_null());
        CHECK(j.at("dephasing").at("projector_ranks").size() == 3);
        CHECK(j.at("optimal").at("status").get<std::string>() == "optimal");
    }
    SECTION("non-unital input") {
        const auto file =
            write_json("damp.json", io::to_json(rnd::amplitude_damping(2, 0.5)));
        const auto res = run_cli("classify " + file);
        REQUIRE(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK_FALSE(j.at("unital").get<bool>());
        CHECK(j.at("optimal").at("status").get<std::string>() == "not_optimal");
    }
    SECTION("byte-identical output on identical input and seed") {
        const auto file = write_json("depol4.json", io::to_json(depolarizing(4)));
        const auto r1 = run_cli("--seed 5 classify " + file);
        const auto r2 = run_cli("--seed 5 classify " + file);
        CHECK(r1.stdout_text == r2.stdout_text);
    }
}

TEST_CASE("cli synthesize") {
    CMatrix l = CMatrix::Zero(3, 3);
    l(0, 0) = 1.0;
    l(1, 1) = 2.0;
    l(2, 2) = 3.0;
    const auto deph = write_json("deph3.json", io::to_json(Lindbladian::dissipative({l})));
    const auto depol = write_json("depol3b.json", io::to_json(depolarizing(3)));
    const auto rho = write_json("rho.json", diag_matrix_json({0.6, 0.3, 0.1}));
    const auto sigma = write_json("sigma.json", diag_matrix_json({0.5, 0.3, 0.2}));

    SECTION("dephasing route emits a plan with a hold") {
        const std::string plan_path = work_dir() + "/plan.json";
        const auto res = run_cli("synthesize " + deph + " " + rho + " " + sigma + " -o " +
                                 plan_path);
        CHECK(res.exit_code == 0);
        const json plan = json::parse(std::ifstream(plan_path));
        bool has_hold = false;
        for (const auto& s : plan.at("steps"))
            has_hold |= s.at("type").get<std::string>() == "hold";
        CHECK(has_hold);
        CHECK(plan.at("provenance").contains("lindbladian_hash"));
    }
    SECTION("depolarizing off the mixing line exits 5") {
        CHECK(run_cli("synthesize " + depol + " " + rho + " " + sigma).exit_code == 5);
    }
    SECTION("rho not majorizing sigma exits 4") {
        CHECK(run_cli("synthesize " + deph + " " + sigma + " " + rho).exit_code == 4);
    }
    SECTION("no synthesis route exits 5") {
        // Unital but neither dephasing, nor verified optimal, nor depolarizing.
        const auto bad = write_json("m2m2.json", [] {
            auto eng = rnd::engine(99);
            const CMatrix m = rnd::ginibre(eng, 2, 2);
            CMatrix big = CMatrix::Zero(4, 4);
            big.topLeftCorner(2, 2) = m;
            big.bottomRightCorner(2, 2) = m;
            return io::to_json(Lindbladian::dissipative({big, big.adjoint()}));
        }());
        const auto rho4 = write_json("rho4.json", diag_matrix_json({0.6, 0.3, 0.08, 0.02}));
        const auto sig4 = write_json("sig4.json", diag_matrix_json({0.4, 0.3, 0.2, 0.1}));
        CHECK(run_cli("synthesize " + bad + " " + rho4 + " " + sig4).exit_code == 5);
    }
}

TEST_CASE("cli simulate") {
    CMatrix l = CMatrix::Zero(3, 3);
    l(0, 0) = 1.0;
    l(1, 1) = 2.0;
    l(2, 2) = 3.0;
    const auto deph = write_json("sim_deph.json", io::to_json(Lindbladian::dissipative({l})));
    const auto rho = write_json("sim_rho.json", diag_matrix_json({0.6, 0.3, 0.1}));
    const auto sigma = write_json("sim_sigma.json", diag_matrix_json({0.45, 0.35, 0.2}));
    const std::string plan_path = work_dir() + "/sim_plan.json";
    REQUIRE(run_cli("synthesize " + deph + " " + rho + " " + sigma + " -o " + plan_path)
                .exit_code == 0);

    SECTION("ideal mode") {
        const auto res =
            run_cli("simulate " + deph + " " + rho + " " + plan_path + " --mode ideal");
        REQUIRE(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK(j.at("spectral_error").get<double>() <= 1e-6);
        CHECK(j.at("audit").at("violations").empty());
    }
    SECTION("physical mode with trajectory thinning") {
        const auto res = run_cli("simulate " + deph + " " + rho + " " + plan_path +
                                 " --mode physical --steer-dt 1e-3 --traj-stride 8");
        REQUIRE(res.exit_code == 0);
        const json j = json::parse(res.stdout_text);
        CHECK(j.at("spectral_error").get<double>() <= 1e-2);
    }
    SECTION("invalid mode exits 2") {
        CHECK(run_cli("simulate " + deph + " " + rho + " " + plan_path + " --mode warp")
                  .exit_code == 2);
    }
}

TEST_CASE("cli verify-batch") {
    SECTION("generated manifest passes and is seed-deterministic") {
        const auto manifest = write_json(
            "manifest.json",
            json{{"entries", json::array({json{{"generate", {{"kind", "dephasing"}, {"d", 4}}}},
                                          json{{"generate", {{"kind", "planted"}, {"d", 4}}}}})}});
        const auto r1 = run_cli("--seed 11 verify-batch " + manifest);
        CHECK(r1.exit_code == 0);
        const auto r2 = run_cli("--seed 11 verify-batch " + manifest + " --jobs 2");
        CHECK(r1.stdout_text == r2.stdout_text);
        const json j = json::parse(r1.stdout_text);
        CHECK(j.at("failures").get<int>() == 0);
    }
    SECTION("incomparable entry is reported and fails the batch") {
        const auto lind = write_json("vb_deph.json", [] {
            CMatrix l = CMatrix::Zero(3, 3);
            l(0, 0) = 1.0;
            l(1, 1) = 2.0;
            l(2, 2) = 5.0;
            return io::to_json(Lindbladian::dissipative({l}));
        }());
        const auto rho = write_json("vb_rho.json", diag_matrix_json({0.5, 0.5, 0.0}));
        const auto sigma = write_json("vb_sigma.json", diag_matrix_json({0.6, 0.2, 0.2}));
        const auto manifest = write_json(
            "manifest2.json",
            json{{"entries", json::array({json{{"lindbladian", lind},
                                               {"rho", rho},
                                               {"sigma", sigma}}})}});
        const auto res = run_cli("verify-batch " + manifest);
        CHECK(res.exit_code != 0);
        const json j = json::parse(res.stdout_text);
        CHECK(j.at("entries").at(0).at("status").get<std::string>() == "fail-majorization");
    }
    SECTION("empty manifest exits 2") {
        const auto manifest = write_json("manifest3.json", json{{"entries", json::array()}});
        CHECK(run_cli("verify-batch " + manifest).exit_code == 2);
    }
}
