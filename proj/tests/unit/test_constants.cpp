#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ltlab/constants.hpp"
#include "ltlab/error.hpp"

using namespace ltlab;

TEST_CASE("the Sobolev constant matches its closed form") {
    const double exact = 3.0 * std::pow(std::numbers::pi / 2.0, 4.0 / 3.0);
    CHECK(sobolevS() == doctest::Approx(exact).epsilon(1e-10));
    // Any other radial function has a larger quotient.
    const double g = sobolevQuotientRadial([](double r) { return std::exp(-r * r); },
                                           [](double r) { return -2.0 * r * std::exp(-r * r); });
    CHECK(g > exact);
}

TEST_CASE("Poincare-Sobolev quotient of a linear function") {
    const double q = poincareSobolevQuotient([](const Vec3& x) { return x.x; },
                                             [](const Vec3&) { return Vec3{1, 0, 0}; });
    CHECK(q == doctest::Approx(std::cbrt(448.0)).epsilon(1e-10));
    // Shifting the cube and adding a constant changes nothing.
    const Vec3 c{2, -1, 0.5};
    const double s = poincareSobolevQuotient([&](const Vec3& x) { return 3.0 + x.x - c.x; },
                                             [](const Vec3&) { return Vec3{1, 0, 0}; }, c);
    CHECK(s == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("small S~ search") {
    STildeOptions o;
    o.degrees = {1, 2, 3};
    o.iterations = 80;
    o.randomStarts = 1;
    o.bubbleWidths = {0.2};
    const STildeEstimate e = poincareSobolevSTilde(o);
    REQUIRE(e.polynomialMinima.size() == 3);
    CHECK(e.polynomialMinima[0] <= std::cbrt(448.0) * (1.0 + 1e-9));
    for (std::size_t i = 1; i < 3; ++i) CHECK(e.polynomialMinima[i] <= e.polynomialMinima[i - 1] * (1.0 + 1e-12));
    CHECK(e.trialMinimum <= e.polynomialMinima.back());
    for (double b : e.bubbleQuotients) CHECK(e.trialMinimum <= b);
    CHECK(e.cornerLimit == doctest::Approx(sobolevS() / 4.0));
    CHECK(e.trialMinimum <= e.cornerLimit);
    CHECK(e.value == doctest::Approx(0.5 * e.trialMinimum));
    CHECK(e.value > 0.0);
}

TEST_CASE("corner bubbles approach a quarter of the Sobolev constant") {
    double last = INFINITY;
    for (double eps : {0.05, 0.01, 0.002}) {
        const auto levels = static_cast<std::size_t>(std::ceil(std::log2(1.0 / eps)) + 4.0);
        const double q = poincareSobolevQuotient(
            [eps](const Vec3& x) { return 1.0 / std::sqrt(eps * eps + norm2(x)); },
            [eps](const Vec3& x) { return x * (-1.0 / std::pow(eps * eps + norm2(x), 1.5)); }, {}, 8, levels);
        CHECK(q < last);
        CHECK(q > sobolevS() / 4.0);
        last = q;
    }
    CHECK(last == doctest::Approx(sobolevS() / 4.0).epsilon(0.02));
}

TEST_CASE("kappa optimum") {
    const KappaOptimum k = kappaOptimum();
    CHECK(k.closedForm == doctest::Approx((239.0 - std::sqrt(56977.0)) / 6.0).epsilon(1e-15));
    CHECK(k.kappaStar > 2.0);
    CHECK(k.kappaStar < 4.0);
    CHECK(k.supValue == doctest::Approx(k.closedForm).epsilon(1e-12));
    CHECK(kappaObjective(k.kappaStar) == doctest::Approx(k.supValue).epsilon(1e-12));
    // The objective is maximal at the crossing.
    for (double d : {-1e-3, 1e-3, -0.1, 0.1}) CHECK(kappaObjective(k.kappaStar + d) < k.supValue);
    CHECK(kappaObjective(2.0) == 0.0);
}

TEST_CASE("Poincare constants") {
    const PoincareConstants p = poincareConstants(1.0);
    const double ball = std::pow(std::numbers::pi, 3) / 6.0;
    CHECK(ball == doctest::Approx(kUnitBall6Volume).epsilon(1e-14));
    CHECK(p.kPoincare == doctest::Approx(1.0 / (8.0 * 729.0 * ball * ball * std::pow(6.0, 7))).epsilon(1e-14));
    CHECK(p.k == doctest::Approx(p.kPoincare / 2.0).epsilon(1e-15));
    CHECK(poincareConstants(2.0).kPoincare == doctest::Approx(p.kPoincare / 8.0).epsilon(1e-14));
    CHECK_THROWS_AS(poincareConstants(0.5), InvalidArgumentError);
}

TEST_CASE("assembled constants satisfy their defining identities") {
    const double k = 6e-16, S = sobolevS(), St = 0.7;
    const ConstantsReport r = assembleConstants(k, S, St);
    CHECK(r.lambda == doctest::Approx(1.0 / (1.0 + 9.0 * k / (2.0 * St))).epsilon(1e-15));
    CHECK(r.oneMinusLambda == doctest::Approx(9.0 * k / (2.0 * St)).epsilon(1e-12));
    CHECK(r.mixingResidual < 1e-12);
    CHECK(r.CTilde == doctest::Approx(std::pow(2.0, -11.0 / 3.0) * r.supValue / (2.0 / k + 9.0 / St)).epsilon(1e-14));
    CHECK(r.C == std::min(r.CTilde, std::pow(2.0, -2.0 / 3.0) * S / 9.0));
    CHECK(r.C == r.CTilde);
    CHECK(r.provenance.count("kappaStar") == 1);
    // With large k and S~ the Sobolev branch wins.
    const ConstantsReport big = assembleConstants(1e5, S, 1e5);
    CHECK(big.C == doctest::Approx(std::pow(2.0, -2.0 / 3.0) * S / 9.0));
    CHECK_THROWS_AS(assembleConstants(0.0, S, St), InvalidArgumentError);
}

TEST_CASE("M_omega of a constant weight is one") {
    MOmegaOptions o;
    o.centers = 200;
    o.innerSamples = 64;
    o.refineTop = 4;
    o.refineSamples = 256;
    const MOmegaEstimate e = estimateMOmega([](const Vec3&, const Vec3&) { return 2.0; }, o);
    CHECK(e.raw == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.value == doctest::Approx(1.5));
    const MOmegaEstimate lin = estimateMOmega([](const Vec3& a, const Vec3&) { return 1.0 + a.x; }, o);
    CHECK(lin.raw > 1.0);
    CHECK(lin.raw < 2.0);
}

TEST_CASE("M_omega for g^2 is deterministic and at least one") {
    MOmegaOptions o;
    o.centers = 300;
    o.innerSamples = 64;
    o.refineTop = 4;
    o.refineSamples = 512;
    o.threads = 1;
    const MOmegaEstimate a = estimateMOmega(std::vector<Vec3>{}, o);
    o.threads = 2;
    const MOmegaEstimate b = estimateMOmega(std::vector<Vec3>{}, o);
    CHECK(a.raw == b.raw);
    CHECK(a.raw >= 1.0);
    CHECK(a.value == doctest::Approx(a.raw * a.safety));
    const MOmegaSweep s = sweepMOmega(3, 2, o);
    CHECK(s.runs.size() == 3);
    for (const auto& r : s.runs) CHECK(s.best.raw >= r.raw);
}
