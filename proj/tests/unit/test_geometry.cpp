#include <cmath>

#include "doctest.h"
#include "ltlab/error.hpp"
#include "ltlab/geometry.hpp"
#include "ltlab/rng.hpp"

using namespace ltlab;

namespace {

Configuration randomConfig(Rng& rng, std::size_t n, double minDist) {
    for (;;) {
        std::vector<Vec3> p;
        for (std::size_t i = 0; i < n; ++i) p.push_back(rng.uniformInBox({{-1, -1, -1}, {1, 1, 1}}));
        Configuration X(p);
        if (minPairDistance(X) > minDist) return X;
    }
}

}  // namespace

TEST_CASE("coulomb weight of two and three particles") {
    const Configuration X({{0, 0, 0}, {3, 4, 0}});
    CHECK(evalWeight(X, CoulombWeight{}) == doctest::Approx(0.2));
    const Configuration Y({{0, 0, 0}, {1, 0, 0}, {0, 2, 0}});
    CHECK(evalWeight(Y, CoulombWeight{}) == doctest::Approx(1.0 + 0.5 + 1.0 / std::sqrt(5.0)));
}

TEST_CASE("finite scattering length shifts every pair by -1/a") {
    const Configuration X({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    const double a = -2.0;
    CHECK(evalWeight(X, FiniteScatteringWeight{a}) == doctest::Approx(evalWeight(X, CoulombWeight{}) + 1.5));
    CHECK_THROWS_AS(validate(WeightSpec{FiniteScatteringWeight{1.0}}), InvalidArgumentError);
    CHECK_THROWS_AS(validate(WeightSpec{FiniteScatteringWeight{0.0}}), InvalidArgumentError);
}

TEST_CASE("coincident particles are rejected by singular weights") {
    const Configuration X({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
    CHECK_THROWS_AS(evalWeight(X, CoulombWeight{}), SingularInputError);
    CHECK(std::isfinite(evalWeight(X, SmoothPairWeight::gaussian(0.3))));
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(3);
    const SmoothPairWeight smooth = SmoothPairWeight::gaussian(0.7);
    for (const WeightSpec& w : {WeightSpec{CoulombWeight{}}, WeightSpec{FiniteScatteringWeight{-0.5}}, WeightSpec{smooth}}) {
        for (int rep = 0; rep < 10; ++rep) {
            Configuration X = randomConfig(rng, 4, 0.2);
            std::vector<Vec3> grads(4);
            const double g = weightAndGradients(X, w, grads);
            CHECK(g == doctest::Approx(evalWeight(X, w)));
            for (std::size_t i = 0; i < 4; ++i) {
                const Vec3 gi = gradWeight(X, i, w);
                for (std::size_t d = 0; d < 3; ++d) {
                    const double h = 1e-6;
                    Configuration P = X, M = X;
                    P[i][d] += h;
                    M[i][d] -= h;
                    const double fd = (evalWeight(P, w) - evalWeight(M, w)) / (2 * h);
                    CHECK(gi[d] == doctest::Approx(fd).epsilon(1e-6));
                    CHECK(grads[i][d] == doctest::Approx(gi[d]));
                }
            }
        }
    }
}

TEST_CASE("sum of particle laplacians of g vanishes away from coincidences") {
    Rng rng(11);
    for (std::size_t n : {2u, 3u, 5u}) {
        for (int rep = 0; rep < 20; ++rep) {
            const Configuration X = randomConfig(rng, n, 0.1);
            const double r = harmonicityResidual(X, CoulombWeight{}, 1e-4);
            CHECK(std::abs(r) / harmonicityScale(X, CoulombWeight{}) < 1e-4);
        }
    }
}

TEST_CASE("smooth pair weight is not harmonic and the residual matches its laplacian") {
    Rng rng(12);
    const SmoothPairWeight w = SmoothPairWeight::gaussian(0.5);
    const Configuration X = randomConfig(rng, 3, 0.1);
    const double fd = harmonicityResidual(X, w, 1e-4);
    const double exact = smoothLaplacianSum(X, w);
    CHECK(std::abs(exact) > 1e-2);
    CHECK(fd == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("configurations reject non-finite coordinates") {
    CHECK_THROWS_AS(Configuration({{0, 0, 0}, {NAN, 0, 0}}), InvalidArgumentError);
    CHECK(minPairDistance(Configuration({{0, 0, 0}, {0, 0, 2}, {0, 1, 0}})) == doctest::Approx(1.0));
}

TEST_CASE("boxes and cubes") {
    const Box b{{0, 0, 0}, {2, 1, 1}};
    CHECK(b.volume() == doctest::Approx(2.0));
    CHECK(b.contains({2, 1, 1}));
    const Cube c{{0, 0, 0}, 1.0};
    CHECK(c.containsHalfOpen({0, 0, 0}));
    CHECK_FALSE(c.containsHalfOpen({1, 0.5, 0.5}));
    double total = 0.0;
    for (int k = 0; k < 8; ++k) total += c.octant(k).volume();
    CHECK(total == doctest::Approx(1.0));
    CHECK(c.octant(7).corner.x == doctest::Approx(0.5));
    CHECK(overlapVolume(Box{{0, 0, 0}, {1, 1, 1}}, Box{{0.5, 0.5, 0.5}, {2, 2, 2}}) == doctest::Approx(0.125));
}
