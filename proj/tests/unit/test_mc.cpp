#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "ltlab/functionals.hpp"
#include "ltlab/mc.hpp"
#include "ltlab/presets.hpp"

using namespace ltlab;

TEST_CASE("rng streams are reproducible and derived seeds differ") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(deriveSeed(1, 0) != deriveSeed(1, 1));
    CHECK(deriveSeed(1, 0) != deriveSeed(2, 0));
    Rng c(1);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) mean += c.uniform() / 100000.0;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform sampling of a constant returns the exact volume") {
    SamplingStrategy s;
    s.kind = SamplingKind::UniformBox;
    s.box = {{0, 0, 0}, {2, 1, 1}};
    s.samples = 1000;
    const MCEstimate e = integrate([](const Configuration&) { return 1.0; }, 2, s);
    CHECK(e.mean == doctest::Approx(4.0));
    CHECK(e.stdError == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pair-stratified sampling is unbiased for 1/r^2") {
    // int over [0,1]^3 x [0,1]^3 of a Gaussian product, and of the same times |x1 - x2|^-2 via its
    // MC estimate compared with the uniform-box estimate.
    SamplingStrategy s;
    s.box = {{-1, -1, -1}, {1, 1, 1}};
    s.samples = 200000;
    auto gauss = [](const Configuration& X) { return std::exp(-norm2(X[0]) - norm2(X[1])); };
    const double exact = std::pow(std::sqrt(std::numbers::pi) * std::erf(1.0), 6);
    const MCEstimate e = integrate(gauss, 2, s);
    CHECK(std::abs(e.mean - exact) < 4.0 * e.stdError);
    auto sing = [&](const Configuration& X) { return gauss(X) / norm2(X[0] - X[1]); };
    SamplingStrategy u = s;
    u.kind = SamplingKind::UniformBox;
    u.samples = 400000;
    const MCEstimate a = integrate(sing, 2, s), b = integrate(sing, 2, u);
    CHECK(std::abs(a.mean - b.mean) < 4.0 * std::hypot(a.stdError, b.stdError));
    CHECK(a.stdError < b.stdError);
}

TEST_CASE("estimates are independent of the thread count") {
    const TrialFunction f = presetTrial("n3-q1-slater");
    SamplingStrategy s = defaultStrategy(f, 20000, 5);
    s.threads = 1;
    const MCEstimate a = energyQ(f, s);
    s.threads = 3;
    const MCEstimate b = energyQ(f, s);
    CHECK(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.stdError, &b.stdError, sizeof(double)) == 0);
    s.seed = 6;
    CHECK(energyQ(f, s).mean != a.mean);
}

TEST_CASE("non-finite integrands are reported") {
    SamplingStrategy s;
    s.samples = 100;
    CHECK_THROWS_AS(integrate([](const Configuration&) { return NAN; }, 2, s), NonFiniteValueError);
}

TEST_CASE("invalid strategies are rejected") {
    SamplingStrategy s;
    s.samples = 0;
    CHECK_THROWS_AS(validate(s), InvalidArgumentError);
    s = {};
    s.shellFraction = 1.5;
    CHECK_THROWS_AS(validate(s), InvalidArgumentError);
    s = {};
    s.uniformFraction = 0.5;  // lobes requested without centres
    CHECK_THROWS_AS(validate(s), InvalidArgumentError);
}

TEST_CASE("gauss-legendre integrates polynomials of degree 2m-1 exactly") {
    for (std::size_t m : {1u, 2u, 5u, 12u}) {
        const GaussLegendre gl(m);
        double w = 0.0, top = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            w += gl.weights[k];
            top += gl.weights[k] * std::pow(gl.nodes[k], 2.0 * static_cast<double>(m) - 2.0);
            if (k > 0) CHECK(gl.nodes[k] > gl.nodes[k - 1]);
        }
        CHECK(w == doctest::Approx(2.0));
        CHECK(top == doctest::Approx(2.0 / (2.0 * static_cast<double>(m) - 1.0)));
    }
}

TEST_CASE("pyramid quadrature handles the 1/r^2 singularity") {
    // The R-range depends on r, so convergence is algebraic; delta (fine - coarse) bounds the error.
    const Box unit{{0, 0, 0}, {1, 1, 1}};
    auto gauss = [](const Configuration& X) { return std::exp(-norm2(X[0]) - norm2(X[1])); };
    const double exact = std::pow(std::sqrt(std::numbers::pi) / 2.0 * std::erf(1.0), 6);
    double last = 1.0;
    for (std::size_t m : {4u, 8u, 16u}) {
        const QuadratureResult q = quadratureN2(gauss, unit, unit, m);
        const double err = std::abs(q.value - exact);
        CHECK(err < q.delta);
        CHECK(err < last);
        last = err;
    }
    auto inv2 = [](const Configuration& X) { return 1.0 / norm2(X[0] - X[1]); };
    const QuadratureResult q = quadratureN2(inv2, unit, unit, 12);
    SamplingStrategy s;
    s.box = unit;
    s.samples = 400000;
    const MCEstimate e = integrate(inv2, 2, s);
    CHECK(std::abs(q.value - e.mean) < 4.0 * e.stdError + q.delta);
    CHECK(q.delta < 1e-2 * q.value);
    CHECK_THROWS_AS(quadratureN2(inv2, unit, unit, 2, 1e-12), QuadratureResolutionError);
}

TEST_CASE("weighted samples estimate the norm") {
    const TrialFunction f = presetTrial("n2-q1-slater");
    const SamplingStrategy s = defaultStrategy(f, 50000, 2);
    const WeightedSamples w = sampleDensityWeighted(f, s);
    CHECK(w.size() == 50000);
    CHECK(w.meanWeight() == doctest::Approx(norm2(f, s).mean));
    CHECK_FALSE(w.lowEss);
}
