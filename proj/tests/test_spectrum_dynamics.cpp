#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "mixctl/lindblad.hpp"
#include "mixctl/random_gen.hpp"
#include "mixctl/spectrum_dynamics.hpp"

using namespace mixctl;

namespace {

CMatrix sigma_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

}  // namespace

TEST_CASE("x_matrix") {
    SECTION("identity operator in any basis") {
        auto eng = rnd::engine(1);
        const Basis b(rnd::haar_unitary(eng, 3));
        const RMatrix x = x_matrix({CMatrix::Identity(3, 3)}, b);
        CHECK((x - RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("sigma_x in the computational basis") {
        const double g = 0.9;
        const RMatrix x = x_matrix({std::sqrt(g) * sigma_x()}, Basis::computational(2));
        CHECK(x(0, 0) == Approx(0.0).margin(1e-14));
        CHECK(x(0, 1) == Approx(g).margin(1e-14));
        CHECK(x(1, 0) == Approx(g).margin(1e-14));
        CHECK(x(1, 1) == Approx(0.0).margin(1e-14));
    }
    SECTION("diagonal operator") {
        CMatrix l = CMatrix::Zero(2, 2);
        l(0, 0) = Complex(0.3, 0.4);
        l(1, 1) = 2.0;
        const RMatrix x = x_matrix({l}, Basis::computational(2));
        CHECK(x(0, 0) == Approx(0.25));
        CHECK(x(1, 1) == Approx(4.0));
        CHECK(x(0, 1) == 0.0);
    }
}

TEST_CASE("q_matrix") {
    SECTION("two-level mixing generator") {
        const double g = 0.6;
        const QGenerator q = q_matrix({std::sqrt(g) * sigma_x()}, Basis::computational(2));
        CHECK(q.bistochastic);
        CHECK(std::abs(q.entries(0, 0) + g) < 1e-14);
        CHECK(std::abs(q.entries(0, 1) - g) < 1e-14);
        CHECK(std::abs(q.entries(1, 0) - g) < 1e-14);
        CHECK(std::abs(q.entries(1, 1) + g) < 1e-14);
    }
    SECTION("identity operator gives zero generator") {
        const QGenerator q = q_matrix({CMatrix::Identity(3, 3)}, Basis::computational(3));
        CHECK(q.entries.cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("depolarizing gives the uniform mixer in any basis") {
        auto eng = rnd::engine(8);
        const Eigen::Index d = 4;
        const Basis b(rnd::haar_unitary(eng, d));
        const QGenerator q = q_matrix(depolarizing(d).ops, b);
        const RMatrix want =
            RMatrix::Constant(d, d, 1.0 / static_cast<double>(d)) - RMatrix::Identity(d, d);
        CHECK((q.entries - want).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(q.bistochastic);
    }
    SECTION("always a stochastic generator; bistochastic iff unital") {
        auto eng = rnd::engine(17);
        for (int it = 0; it < 30; ++it) {
            const Eigen::Index d = 4;
            std::vector<CMatrix> ops{rnd::ginibre(eng, d, d), rnd::ginibre(eng, d, d)};
            const Basis b(rnd::haar_unitary(eng, d));
            const QGenerator q = q_matrix(ops, b);
            CHECK_NOTHROW(q.validate());
            CHECK_FALSE(q.bistochastic);  // generic non-unital family

            std::vector<CMatrix> herm;
            for (const auto& o : ops) herm.push_back(0.5 * (o + o.adjoint().eval()));
            const QGenerator qh = q_matrix(herm, b);
            CHECK(qh.bistochastic);
            CHECK_NOTHROW(qh.validate());
        }
    }
    SECTION("exp(Qt) is (bi)stochastic") {
        auto eng = rnd::engine(23);
        const Eigen::Index d = 4;
        std::vector<CMatrix> herm;
        for (int a = 0; a < 2; ++a) {
            CMatrix g = rnd::ginibre(eng, d, d);
            herm.push_back(0.5 * (g + g.adjoint().eval()));
        }
        const QGenerator q = q_matrix(herm, Basis::computational(d));
        for (double t : {0.1, 1.0, 10.0}) {
            const RMatrix e = (t * q.entries).exp();
            CHECK(e.minCoeff() > -1e-12);
            for (Eigen::Index j = 0; j < d; ++j) CHECK(std::abs(e.col(j).sum() - 1.0) < 1e-10);
            for (Eigen::Index i = 0; i < d; ++i) CHECK(std::abs(e.row(i).sum() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("evolve_spectrum") {
    SECTION("t = 0") {
        const QGenerator q = q_matrix({sigma_x()}, Basis::computational(2));
        const ProbVector p({0.9, 0.1});
        CHECK(l1_distance(evolve_spectrum(q, p, 0.0), p) < 1e-14);
        CHECK_THROWS_AS(evolve_spectrum(q, p, -1.0), InvalidTime);
    }
    SECTION("two-level closed form s(t)") {
        const double g = 0.8;
        const QGenerator q = q_matrix({std::sqrt(g) * sigma_x()}, Basis::computational(2));
        for (double t : {0.1, 1.0, 5.0}) {
            const ProbVector out = evolve_spectrum(q, ProbVector({1.0, 0.0}), t);
            const double s = 0.5 * (1.0 - std::exp(-2.0 * g * t));
            CHECK(out[0] == Approx(1.0 - s).margin(1e-12));
            CHECK(out[1] == Approx(s).margin(1e-12));
        }
    }
    SECTION("depolarizing mixing line") {
        auto eng = rnd::engine(3);
        const Eigen::Index d = 4;
        const QGenerator q = q_matrix(depolarizing(d).ops, Basis::computational(d));
        const ProbVector p = rnd::probvector(eng, 4);
        for (double t : {0.2, 1.0, 3.0}) {
            const ProbVector out = evolve_spectrum(q, p, t);
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(out[i] ==
                      Approx(std::exp(-t) * p[i] + (1 - std::exp(-t)) / 4.0).margin(1e-12));
        }
    }
    SECTION("bistochastic flow is majorization-monotone") {
        auto eng = rnd::engine(29);
        std::uniform_real_distribution<double> ut(0.0, 5.0);
        for (int it = 0; it < 30; ++it) {
            const Eigen::Index d = 5;
            CMatrix g = rnd::ginibre(eng, d, d);
            const QGenerator q =
                q_matrix({CMatrix(0.5 * (g + g.adjoint().eval()))}, Basis::computational(d));
            const ProbVector p = rnd::probvector(eng, 5);
            CHECK(majorizes(p, evolve_spectrum(q, p, ut(eng)), 1e-8));
        }
    }
}

TEST_CASE("ttransform_from_hold") {
    CHECK(ttransform_from_hold(1.3, 0.0) == 0.0);
    CHECK(ttransform_from_hold(1.0, std::log(10.0) / 2.0) == Approx(0.45).margin(1e-14));
    CHECK_THROWS_AS(ttransform_from_hold(0.0, 1.0), NonpositiveRate);
    CHECK_THROWS_AS(ttransform_from_hold(-1.0, 1.0), NonpositiveRate);

    // Monotone approach to 1/2 (saturates to 0.5 only at the fp limit).
    double prev = -1.0;
    for (double t : {0.1, 0.5, 1.0, 5.0, 20.0}) {
        const double s = ttransform_from_hold(0.7, t);
        CHECK(s > prev);
        CHECK(s < 0.5);
        prev = s;
    }
    CHECK(prev == Approx(0.5).margin(1e-12));
    CHECK(ttransform_from_hold(0.7, 1000.0) <= 0.5);

    // hold_duration_for_s inverts s(t).
    for (double s : {0.0, 0.1, 0.3, 0.49}) {
        const double t = hold_duration_for_s(0.9, s);
        CHECK(ttransform_from_hold(0.9, t) == Approx(s).margin(1e-12));
    }
    CHECK_THROWS_AS(hold_duration_for_s(0.9, 0.5), SOutOfRange);
}
