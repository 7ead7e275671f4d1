#include <catch2/catch.hpp>

#include "mixctl/json_io.hpp"
#include "mixctl/random_gen.hpp"

using namespace mixctl;
using io::json;

TEST_CASE("matrix JSON round-trip preserves doubles exactly") {
    auto eng = rnd::engine(3);
    for (int it = 0; it < 20; ++it) {
        const CMatrix m = rnd::ginibre(eng, 4, 4);
        const json j = json::parse(io::to_json(m).dump());
        const CMatrix back = io::cmatrix_from_json(j);
        CHECK(m == back);  // bitwise equality through decimal serialization
    }
}

TEST_CASE("probvector and ttransform round-trip") {
    auto eng = rnd::engine(9);
    const ProbVector p = rnd::probvector(eng, 6);
    CHECK(io::probvector_from_json(json::parse(io::to_json(p).dump())).entries() == p.entries());

    const TTransform t(2, 4, 0.1234567890123456789);
    const TTransform back = io::ttransform_from_json(json::parse(io::to_json(t).dump()));
    CHECK(back.i == t.i);
    CHECK(back.j == t.j);
    CHECK(back.s == t.s);
}

TEST_CASE("lindbladian and plan round-trip") {
    auto eng = rnd::engine(15);
    const auto lb = rnd::dephasing_lindbladian(eng, 3);
    const auto back = io::lindbladian_from_json(json::parse(io::to_json(lb).dump()));
    CHECK(back.hamiltonian == lb.hamiltonian);
    REQUIRE(back.ops.size() == lb.ops.size());
    for (std::size_t k = 0; k < lb.ops.size(); ++k) CHECK(back.ops[k] == lb.ops[k]);

    const auto rho = rnd::density(eng, 3);
    const auto sigma = DensityMatrix::diagonal(rnd::mixed_from(eng, rho.spectrum()));
    const auto plan = synthesize_dephasing_conversion(lb, rho, sigma);
    const json j = json::parse(io::to_json(plan, "cafe").dump());
    const auto plan_back = io::plan_from_json(j);
    REQUIRE(plan_back.steps.size() == plan.steps.size());
    CHECK(plan_back.target_spectrum.entries() == plan.target_spectrum.entries());

    // The deserialized plan drives the simulator to the same result.
    const auto r1 = run_plan_ideal(lb, rho, plan);
    const auto r2 = run_plan_ideal(lb, rho, plan_back);
    CHECK(r1.spectral_error == r2.spectral_error);
    CHECK(max_abs(CMatrix(r1.final_state.mat() - r2.final_state.mat())) == 0.0);
}

TEST_CASE("malformed JSON rejected") {
    CHECK_THROWS_AS(io::probvector_from_json(json::object()), ValidationError);
    CHECK_THROWS_AS(io::cmatrix_from_json(json{{"d", 2}, {"re", json::array()}}),
                    ValidationError);
    CHECK_THROWS_AS(io::controlstep_from_json(json{{"type", "warp"}}), ValidationError);
    CHECK_THROWS_AS(io::lindbladian_from_json(json{{"H", 1}}), ValidationError);
}

TEST_CASE("serialization is deterministic") {
    auto eng = rnd::engine(77);
    const auto lb = rnd::planted_optimal_lindbladian(eng, 4);
    CHECK(io::to_json(lb).dump() == io::to_json(lb).dump());
    CHECK(io::content_hash(io::to_json(lb)) == io::content_hash(io::to_json(lb)));
    CHECK(io::content_hash(io::to_json(lb)).size() == 16);
}
