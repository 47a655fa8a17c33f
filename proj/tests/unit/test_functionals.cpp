#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "ltlab/error.hpp"
#include "ltlab/functionals.hpp"
#include "ltlab/presets.hpp"

using namespace ltlab;

namespace {

// Core and support of gaussianSlaterN2 stretched by s: Psi_s(X) = Psi(X / s).
TrialFunction stretchedSlaterN2(double s) {
    SmoothCore core{CoreForm::SlaterProduct,
                    {GaussianOrbital{{-0.25 * s, 0, 0}, 0.5 * s}, GaussianOrbital{{0.25 * s, 0, 0}, 0.5 * s}},
                    Cutoff{{0, 0, 0}, s}};
    return TrialFunction::quotient(std::move(core), CoulombWeight{}, SymmetryPartition::single(2),
                                   {{-s, -s, -s}, {s, s, s}});
}

}  // namespace

TEST_CASE("Q scales like s^(3N-2) and the norm like s^(3N) under dilation") {
    const double s = 1.7;
    const TrialFunction f = stretchedSlaterN2(1.0), h = stretchedSlaterN2(s);
    SamplingStrategy a = defaultStrategy(f, 40000, 3);
    SamplingStrategy b = a;
    b.box = h.supportBox();
    b.shellRadius *= s;
    b.lobeWidth *= s;
    for (auto& c : b.lobeCenters) c = c * s;
    const double qf = energyQ(f, a).mean, qh = energyQ(h, b).mean;
    const double nf = norm2(f, a).mean, nh = norm2(h, b).mean;
    CHECK(qh / qf == doctest::Approx(std::pow(s, 4)).epsilon(1e-6));
    CHECK(nh / nf == doctest::Approx(std::pow(s, 6)).epsilon(1e-6));
}

TEST_CASE("the weighted norm equals the core norm for quotient trials") {
    const TrialFunction f = presetTrial("n3-q2-blocks");
    const SamplingStrategy s = defaultStrategy(f, 20000, 4);
    const MCEstimate a = norm2(f, s), b = coreNorm2(f, s);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
    const double gl = coreNorm2Quadrature(gaussianSlaterN2(), 12);
    const MCEstimate c = norm2(gaussianSlaterN2(), defaultStrategy(gaussianSlaterN2(), 200000, 4));
    CHECK(std::abs(c.mean - gl) < 4.0 * c.stdError);
}

TEST_CASE("energy estimates agree with the quadrature oracle for N = 2") {
    const TrialFunction f = gaussianSlaterN2();
    const MCEstimate q = energyQ(f, defaultStrategy(f, 200000, 9));
    const QuadratureResult e = energyQuadrature(f, 10);
    CHECK(std::abs(q.mean - e.value) < 4.0 * q.stdError + e.delta);
}

TEST_CASE("density carries N particles and localised energies add up") {
    const TrialFunction f = presetTrial("n3-q1-slater");
    const SamplingStrategy s = defaultStrategy(f, 60000, 5);
    const DensityGrid d = density(f, GridSpec::cubic(f.supportBox(), 12), s);
    CHECK(d.totalMass() == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(d.massIn(f.supportBox()).value == doctest::Approx(3.0).epsilon(1e-9));
    // Octants of the support partition it, so their localised energies sum to Q on the same samples.
    std::vector<Box> octs;
    const Cube root{{-1, -1, -1}, 2.0};
    for (std::size_t o = 0; o < 8; ++o) octs.push_back(root.octant(o).box());
    double sum = 0.0;
    for (const auto& e : localizedEnergies(f, octs, s)) sum += e.mean;
    CHECK(sum == doctest::Approx(energyQ(f, s).mean).epsilon(1e-9));
}

TEST_CASE("grad sqrt rho of a Gaussian density") {
    const double sigma = 0.25;
    auto rho = [&](const Vec3& x) { return std::exp(-norm2(x) / (2 * sigma * sigma)); };
    const DensityGrid d = DensityGrid::fromFunction(GridSpec::cubic({{-1, -1, -1}, {1, 1, 1}}, 32), rho);
    const double exact = 0.75 * std::pow(2.0 * std::numbers::pi, 1.5) * sigma;
    const GradSqrtResult r = gradSqrtDensityNorm(d, 0.0);
    CHECK(r.value == doctest::Approx(exact).epsilon(0.02));
    CHECK(std::abs(r.value - exact) < 2.0 * r.delta);
    CHECK(r.noise == 0.0);
    const double mass = std::pow(std::sqrt(2.0 * std::numbers::pi) * sigma * std::erf(1.0 / (std::sqrt(2.0) * sigma)), 3);
    CHECK(d.totalMass() == doctest::Approx(mass).epsilon(1e-6));
    CHECK(densityPowerIntegral(d, d.box(), 1.0).value == doctest::Approx(mass).epsilon(1e-9));
}

TEST_CASE("binary grid round trip") {
    DensityGrid d(GridSpec{{{-1, -2, -3}, {1, 2, 3}}, 4, 3, 2});
    for (std::size_t i = 0; i < d.cellCount(); ++i) {
        d.values()[i] = 0.5 * static_cast<double>(i);
        d.errors()[i] = 1e-3 * static_cast<double>(i);
    }
    std::stringstream ss;
    writeBinary(d, ss);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "LTDG");
    CHECK(bytes.size() == 16 + 8 * (6 + 2 * 24));
    const DensityGrid r = readBinary(ss);
    CHECK(r.nx() == 4);
    CHECK(r.ny() == 3);
    CHECK(r.nz() == 2);
    CHECK(r.box().hi.z == 3.0);
    CHECK(r.values() == d.values());
    CHECK(r.errors() == d.errors());

    std::stringstream bad(std::string("XXXX") + bytes.substr(4));
    CHECK_THROWS_AS(readBinary(bad), Error);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(readBinary(truncated), Error);
}

TEST_CASE("csv output") {
    DensityGrid d(GridSpec::cubic({{0, 0, 0}, {1, 1, 1}}, 2));
    std::ostringstream os;
    writeCsv(d, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,y,z,value,error");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 8);
}

TEST_CASE("coarsening preserves mass") {
    DensityGrid d = DensityGrid::fromFunction(GridSpec::cubic({{0, 0, 0}, {1, 1, 1}}, 8),
                                              [](const Vec3& x) { return 1.0 + x.x * x.y; });
    CHECK(d.coarsened().totalMass() == doctest::Approx(d.totalMass()));
    CHECK(d.totalMass() == doctest::Approx(1.25));
    CHECK(d.scaled(2.0).totalMass() == doctest::Approx(2.5));
    CHECK_THROWS(DensityGrid(GridSpec::cubic({{0, 0, 0}, {1, 1, 1}}, 3)).coarsened());
}

TEST_CASE("the decomposition needs a symmetric Coulomb trial") {
    SamplingStrategy s;
    s.samples = 100;
    CHECK_THROWS_AS(densityDecompositionCheck(presetTrial("n3-q1-slater"), {{0, 0, 0}}, s), InvalidArgumentError);
    CHECK(DecompositionTerms::n4(3) == 0.0);
    CHECK(DecompositionTerms::n3(4) == 2 * DecompositionTerms::n2(4));
}

TEST_CASE("ratio combines relative errors") {
    MCEstimate a, b;
    a.mean = 2.0;
    a.stdError = 0.02;
    b.mean = 4.0;
    b.stdError = 0.04;
    const Estimate r = ratio(a, b);
    CHECK(r.value == doctest::Approx(0.5));
    CHECK(r.error == doctest::Approx(0.5 * std::hypot(0.01, 0.01)));
}
