#include <cmath>

#include "doctest.h"
#include "ltlab/error.hpp"
#include "ltlab/presets.hpp"
#include "ltlab/rng.hpp"

using namespace ltlab;

namespace {

Configuration randomConfig(Rng& rng, std::size_t n) {
    std::vector<Vec3> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(rng.uniformInBox({{-0.6, -0.6, -0.6}, {0.6, 0.6, 0.6}}));
    return Configuration(p);
}

}  // namespace

TEST_CASE("partitions must cover the particles exactly once") {
    CHECK_NOTHROW(SymmetryPartition({{0, 2}, {1}}, 3));
    CHECK_THROWS_AS(SymmetryPartition({{0, 1}}, 3), InvalidArgumentError);
    CHECK_THROWS_AS(SymmetryPartition({{0, 1}, {1, 2}}, 3), InvalidArgumentError);
    CHECK_THROWS_AS(SymmetryPartition({{0, 3}, {1, 2}}, 3), InvalidArgumentError);
    CHECK(SymmetryPartition::singletons(4).q() == 4);
    CHECK(SymmetryPartition::single(4).largestBlock() == 4);
}

TEST_CASE("slater cores are antisymmetric within blocks") {
    for (const auto& p : standardSuite()) {
        const SymmetryReport r = checkSymmetryClass(p.f, 50, 9);
        CHECK_MESSAGE(r.pass, p.name);
    }
    CHECK_FALSE(checkFullySymmetric(presetTrial("n3-q1-slater"), 20, 1).pass);
    CHECK(checkFullySymmetric(presetTrial("n4-symmetric"), 20, 1).pass);
}

TEST_CASE("trial gradients match central differences") {
    Rng rng(5);
    for (const char* name : {"n2-q1-slater", "n3-q2-blocks", "n3-q3-product"}) {
        const TrialFunction f = presetTrial(name);
        const std::size_t n = f.particles();
        for (int rep = 0; rep < 5; ++rep) {
            const Configuration X = randomConfig(rng, n);
            std::vector<Vec3> grads(n);
            const double v = f.valueAndGradients(X, grads);
            CHECK(v == doctest::Approx(f.value(X)));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t d = 0; d < 3; ++d) {
                    const double h = 1e-6;
                    Configuration P = X, M = X;
                    P[i][d] += h;
                    M[i][d] -= h;
                    const double fd = (f.value(P) - f.value(M)) / (2 * h);
                    CHECK(grads[i][d] == doctest::Approx(fd).epsilon(1e-5).scale(std::abs(v) + 1e-8));
                }
        }
    }
}

TEST_CASE("weighted density and kinetic terms agree with g and grad f") {
    Rng rng(6);
    const TrialFunction f = presetTrial("n3-q2-blocks");
    for (int rep = 0; rep < 10; ++rep) {
        const Configuration X = randomConfig(rng, 3);
        const double g = evalWeight(X, f.weight());
        const double v = f.value(X);
        CHECK(f.weightedDensity(X) == doctest::Approx(g * g * v * v));
        std::vector<Vec3> grads(3);
        f.valueAndGradients(X, grads);
        double kin = 0.0;
        std::vector<double> per(3);
        for (const auto& gr : grads) kin += g * g * norm2(gr);
        CHECK(f.weightedKinetic(X, per) == doctest::Approx(kin).epsilon(1e-9));
        CHECK(per[0] + per[1] + per[2] == doctest::Approx(kin).epsilon(1e-9));
        const double psi = f.coreValue(X);
        CHECK(psi * psi == doctest::Approx(f.weightedDensity(X)));
    }
}

TEST_CASE("the quotient trial is bounded at coincidences when the core is antisymmetric") {
    const TrialFunction f = presetTrial("n2-q1-slater");
    const Configuration X({{0.1, 0.2, 0.0}, {0.1, 0.2, 0.0}});
    CHECK(f.value(X) == 0.0);
    CHECK(f.weightedDensity(X) == doctest::Approx(0.0).epsilon(1e-30));
}

TEST_CASE("scaling multiplies values, densities by c^2") {
    Rng rng(7);
    const TrialFunction f = presetTrial("n3-q1-slater");
    const TrialFunction h = f.scaled(-2.5);
    const Configuration X = randomConfig(rng, 3);
    CHECK(h.value(X) == doctest::Approx(-2.5 * f.value(X)));
    CHECK(h.weightedKinetic(X) == doctest::Approx(6.25 * f.weightedKinetic(X)));
}

TEST_CASE("symmetrization averages |f|^2 over permutations") {
    Rng rng(8);
    const TrialFunction f = presetTrial("n3-q2-blocks");
    const TrialFunction s = symmetrize(f);
    CHECK(s.partition().q() == 3);
    CHECK(checkFullySymmetric(s, 20, 3).pass);
    const Configuration X = randomConfig(rng, 3);
    const std::vector<std::vector<std::size_t>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double mean = 0.0;
    for (const auto& p : perms) {
        const double v = f.value(Configuration({X[p[0]], X[p[1]], X[p[2]]}));
        mean += v * v / 6.0;
    }
    CHECK(s.value(X) == doctest::Approx(std::sqrt(mean)));
    // For a single-block antisymmetric f, |f|^2 is already symmetric, so f~ = |f|.
    const TrialFunction a = presetTrial("n3-q1-slater");
    CHECK(symmetrize(a).value(X) == doctest::Approx(std::abs(a.value(X))));
}

TEST_CASE("invalid trial construction") {
    SmoothCore core{CoreForm::SlaterProduct, {GaussianOrbital{{0, 0, 0}, 0.3}}, Cutoff::none()};
    CHECK_THROWS_AS(TrialFunction::quotient(core, CoulombWeight{}, SymmetryPartition::single(2), kPresetSupport),
                    InvalidArgumentError);
    CHECK_THROWS_AS(symmetrize(presetTrial("n3-q1-slater").scaled(1.0), 1.0).value(Configuration({{0, 0, 0}})),
                    DimensionMismatchError);
}
