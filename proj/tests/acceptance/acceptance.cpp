// Acceptance suite: one numbered criterion per invocation (or all of them without arguments).
// Each prints a single PASS/FAIL line followed by indented detail lines.

#include <algorithm>
#include <array>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ltlab/constants.hpp"
#include "ltlab/cubes.hpp"
#include "ltlab/functionals.hpp"
#include "ltlab/presets.hpp"

using namespace ltlab;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void note(const std::string& s) { details.push_back(s); }
    void require(bool ok, const std::string& s) {
        if (!ok) pass = false;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + s);
    }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

constexpr std::uint64_t kSamples = 300000;
constexpr std::size_t kGrid = 24;

struct Assembled {
    double k = 0.0, S = 0.0, STilde = 0.0, C = 0.0, lambda = 0.0, oneMinusLambda = 0.0, kappa = 0.0;
};

const Assembled& constants() {
    static const Assembled a = [] {
        MOmegaOptions mo;
        mo.centers = 4000;
        const MOmegaSweep sweep = sweepMOmega(5, 3, mo);
        const PoincareConstants pc = poincareConstants(sweep.best.value);
        const STildeEstimate st = poincareSobolevSTilde();
        const ConstantsReport r = assembleConstants(pc.k, sobolevS(), st.value);
        return Assembled{r.k, r.S, r.STilde, r.C, r.lambda, r.oneMinusLambda, r.kappaStar};
    }();
    return a;
}

/// Q / ||f||^2, rho / ||f||^2 on the standard grid, and the strategy used.
struct TrialData {
    std::string name;
    TrialFunction f;
    SamplingStrategy strategy;
    Estimate q;
    DensityGrid rho;
};

TrialData measure(const PresetTrial& p, std::uint64_t seed = 11) {
    TrialData t{p.name, p.f, defaultStrategy(p.f, kSamples, seed), {}, {}};
    t.q = ratio(energyQ(t.f, t.strategy), norm2(t.f, t.strategy));
    t.rho = density(t.f, GridSpec::cubic(t.f.supportBox(), kGrid), t.strategy);
    return t;
}

Cube gridCube(const DensityGrid& d) { return {d.box().lo, d.box().extent(0)}; }

std::string verdictLine(const InequalityCheck& c) {
    return fmt("%s: %.6g >= %.6g  margin %.3g  band %.3g  %s", c.id.c_str(), c.left.value, c.right.value, c.margin,
               c.threshold * c.sigma + c.delta, std::string(toString(c.verdict)).c_str());
}

// ---------------------------------------------------------------------------

Outcome harmonicity() {
    Outcome o;
    Rng rng(20240101);
    for (std::size_t N : {2u, 3u, 5u}) {
        for (const WeightSpec& w : {WeightSpec{CoulombWeight{}}, WeightSpec{FiniteScatteringWeight{-0.7}}}) {
            double worst = 0.0;
            for (int c = 0; c < 100; ++c) {
                std::vector<Vec3> pts;
                do {
                    pts.clear();
                    for (std::size_t i = 0; i < N; ++i) pts.push_back(rng.uniformInBox({{0, 0, 0}, {1, 1, 1}}));
                } while (minPairDistance(Configuration(pts)) <= 0.1);
                const Configuration X(pts);
                worst = std::max(worst, std::abs(harmonicityResidual(X, w, 1e-4)) / harmonicityScale(X, w));
            }
            o.require(worst < 1e-3, fmt("N=%zu %s: max normalised residual %.3g over 100 configurations", N,
                                        std::holds_alternative<CoulombWeight>(w) ? "coulomb" : "finite a=-0.7",
                                        worst));
        }
    }
    return o;
}

Outcome quotientIdentity() {
    Outcome o;
    const TrialFunction f = gaussianSlaterN2();
    const QuadratureResult lhs = energyQuadrature(f, 14);
    const double rhs = coreDirichletQuadrature(f, 12);
    const double gap = std::abs(lhs.value - rhs) / rhs;
    o.note(fmt("sum int g^2|grad f|^2 (pyramid quadrature, m=14) = %.10g", lhs.value));
    o.note(fmt("sum int |grad Psi|^2 (tensor Gauss-Legendre, m=12) = %.10g", rhs));
    o.require(gap < 1e-3, fmt("relative gap %.3g < 1e-3", gap));
    return o;
}

Outcome hoBound() {
    Outcome o;
    for (const auto& p : standardSuite()) {
        const TrialData t = measure(p);
        const GradSqrtResult gs = gradSqrtDensityNorm(t.rho);
        const auto c = checkGreaterEqual("9Q - int|grad sqrt rho|^2 " + t.name, {9.0 * t.q.value, 9.0 * t.q.error},
                                         {gs.value, 0.0}, gs.error());
        o.require(c.notViolated(), verdictLine(c));
    }
    for (const auto& p : standardSuite()) {
        if (p.f.particles() != 2) continue;
        const double q = energyQuadrature(p.f, 10).value / norm2Quadrature(p.f, 10).value;
        const DensityGrid d = quadratureDensityN2(p.f, GridSpec::cubic(p.f.supportBox(), 16), 1, 14);
        const double gs = gradSqrtDensityNorm(d).value;
        o.require(9.0 * q - gs > 0.0,
                  fmt("%s quadrature: 9Q = %.6g, int|grad sqrt rho|^2 = %.6g, margin %.6g > 0", p.name.c_str(),
                      9.0 * q, gs, 9.0 * q - gs));
    }
    return o;
}

Outcome localExclusion() {
    Outcome o;
    const double k = constants().k;
    o.note(fmt("k = %.6g", k));
    Rng rng(77);
    std::size_t cases = 0, held = 0;
    for (const auto& p : standardSuite()) {
        if (p.f.particles() != 3) continue;
        const TrialData t = measure(p);
        std::vector<Box> cubes;
        std::vector<double> sides;
        for (int c = 0; c < 10; ++c) {
            const double L = std::array{0.5, 1.0, 2.0}[c % 3];
            const Vec3 centre = rng.uniformInBox({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}});
            const Vec3 h{L / 2, L / 2, L / 2};
            cubes.push_back({centre - h, centre + h});
            sides.push_back(L);
        }
        const auto local = localizedEnergies(t.f, cubes, t.strategy);
        const MCEstimate n = norm2(t.f, t.strategy);
        const double q = static_cast<double>(t.f.partition().q());
        for (std::size_t c = 0; c < cubes.size(); ++c) {
            const Estimate left = ratio(local[c], n);
            const Estimate mass = t.rho.massIn(cubes[c]);
            const double s = k / (sides[c] * sides[c]);
            const auto chk = checkGreaterEqual(fmt("%s L=%.1f", t.name.c_str(), sides[c]), left,
                                               {s * (mass.value - q), s * mass.error});
            ++cases;
            if (chk.notViolated()) ++held;
            o.note(verdictLine(chk));
        }
    }
    o.require(cases == 30 && held == cases, fmt("%zu of %zu cases hold at 3 sigma", held, cases));
    return o;
}

Outcome mainTheorem() {
    Outcome o;
    const Assembled& a = constants();
    o.note(fmt("C = %.6g (estimated constants), S = %.10g", a.C, a.S));
    bool sobolevQN = false;
    for (const auto& p : standardSuite()) {
        const TrialData t = measure(p);
        const double q = static_cast<double>(t.f.partition().q());
        const double N = static_cast<double>(t.f.particles());
        const Estimate p53 = densityPowerIntegral(t.rho, t.rho.box(), 5.0 / 3.0);
        const double c = a.C / std::cbrt(q * q);
        const auto main = checkGreaterEqual("Q >= C q^{-2/3} int rho^{5/3} " + t.name, t.q,
                                            {c * p53.value, c * p53.error});
        o.require(main.notViolated(), verdictLine(main));
        if (N <= 2.0 * q) {
            const double s = a.S / (9.0 * std::cbrt(4.0 * q * q));
            const auto sob = checkGreaterEqual("Sobolev path Q >= S/(9 (2q)^{2/3}) int rho^{5/3} " + t.name, t.q,
                                               {s * p53.value, s * p53.error});
            o.require(sob.notViolated(), verdictLine(sob));
            sobolevQN = sobolevQN || q == N;
        }
    }
    o.require(sobolevQN, "the N <= 2q Sobolev path ran on a q = N trial");
    return o;
}

Outcome symmetrization() {
    Outcome o;
    for (const char* name : {"n3-q1-slater", "n3-q2-blocks"}) {
        const TrialFunction f = presetTrial(name);
        const TrialFunction ft = symmetrize(f);
        SamplingStrategy s = defaultStrategy(f, 200000, 5);
        const MCEstimate dq = integrate(
            [&](const Configuration& X) { return ft.weightedKinetic(X) - f.weightedKinetic(X); }, 3, s);
        const MCEstimate dn = integrate(
            [&](const Configuration& X) { return ft.weightedDensity(X) - f.weightedDensity(X); }, 3, s);
        const MCEstimate q = energyQ(f, s);
        const MCEstimate n = norm2(f, s), nt = norm2(ft, s);
        o.note(fmt("%s: Q(f) = %.6g +- %.2g", name, q.mean, q.stdError));
        o.require(dq.mean <= 3.0 * dq.stdError,
                  fmt("%s: Q(f~) - Q(f) = %.4g +- %.2g <= 3 sigma (paired samples)", name, dq.mean, dq.stdError));
        const double sigma = std::hypot(n.stdError, nt.stdError);
        o.require(std::abs(nt.mean - n.mean) <= 3.0 * sigma,
                  fmt("%s: ||f~||^2 = %.8g, ||f||^2 = %.8g, |diff| %.3g <= 3 sigma = %.3g (paired diff %.3g +- %.2g)",
                      name, nt.mean, n.mean, std::abs(nt.mean - n.mean), 3.0 * sigma, dn.mean, dn.stdError));
    }
    return o;
}

Outcome subdivision() {
    Outcome o;
    {
        const double q = 1.0;
        const Cube root{{0, 0, 0}, 1.0};
        const CubeTree t = subdivide([&](const Cube& c) { return 16.0 * q * c.volume(); }, root, q);
        std::size_t level1B = 0;
        for (std::size_t leaf : t.leaves())
            if (t.nodes[leaf].label == CubeLabel::B && t.nodes[leaf].level == 1) ++level1B;
        o.require(level1B == 8 && t.count(CubeLabel::B) == 8 && t.count(CubeLabel::A) == 0,
                  fmt("uniform mass 16q: %zu B leaves at level 1, %zu B and %zu A leaves in total", level1B,
                      t.count(CubeLabel::B), t.count(CubeLabel::A)));
    }
    std::size_t passed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(deriveSeed(900, seed));
        const double q = static_cast<double>(1 + rng.below(3));
        const std::size_t bumps = 2 + rng.below(5);
        std::vector<std::pair<Vec3, double>> b;
        std::vector<double> amp;
        for (std::size_t i = 0; i < bumps; ++i) {
            b.push_back({rng.uniformInBox({{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}}), rng.uniform(0.03, 0.2)});
            amp.push_back(rng.uniform(0.2, 1.0));
        }
        DensityGrid d = DensityGrid::fromFunction(GridSpec::cubic({{0, 0, 0}, {1, 1, 1}}, 16), [&](const Vec3& x) {
            double v = 0.05;
            for (std::size_t i = 0; i < bumps; ++i)
                v += amp[i] * std::exp(-0.5 * norm2(x - b[i].first) / (b[i].second * b[i].second));
            return v;
        }, 2);
        const double target = q * rng.uniform(20.0, 400.0);
        d = d.scaled(target / d.totalMass());
        CubeTree t = subdivide(gridMass(d), {{0, 0, 0}, 1.0}, q);
        associate(t);
        const TreeAudit a = auditTree(t);
        if (a.pass()) ++passed;
        std::string why;
        for (const auto& f : a.failures) why += " " + f;
        o.require(a.pass(), fmt("seed %2llu q=%.0f mass %.1f: %zu nodes, %zu A, %zu B, max A per level per B %zu%s",
                                static_cast<unsigned long long>(seed), q, target, t.nodes.size(),
                                t.count(CubeLabel::A), t.count(CubeLabel::B), a.maxPerLevel, why.c_str()));
    }
    o.note(fmt("%zu of 20 random grids pass the audit", passed));
    return o;
}

Outcome boundAssembly() {
    Outcome o;
    const Assembled& a = constants();
    o.note(fmt("k = %.6g, lambda* = %.17g, 1 - lambda* = %.6g, kappa* = %.10g", a.k, a.lambda, a.oneMinusLambda,
               a.kappa));
    auto trials = standardSuite();
    trials.push_back({"n4-q1-offset", presetTrial("n4-q1-offset")});
    for (const auto& p : trials) {
        const TrialData t = measure(p);
        const double q = static_cast<double>(t.f.partition().q());
        const MassFn mass = gridMass(t.rho);
        const Cube root = gridCube(t.rho);
        CubeTree tree = mass(root) >= 2.0 * q ? subdivide(mass, root, q) : singleCubeTree(mass, root, q);
        if (tree.nodes.size() > 1) associate(tree);
        for (const auto& [label, lambda, mu] : {std::tuple{"0", 0.0, 1.0}, std::tuple{"lambda*", a.lambda, a.oneMinusLambda},
                                                std::tuple{"1", 1.0, 0.0}}) {
            const LowerBoundReport r = assembleLowerBound(tree, t.rho, a.k, lambda, a.kappa, 1e-3, mu);
            if (lambda == 0.0 && tree.nodes.size() > 1) {
                const TreeAudit audit = auditTree(tree);
                o.require(audit.pass() && r.bHalfMass && r.groupsHold,
                          fmt("%s tree: %zu A, %zu B leaves; audit %s, B half-mass %s, A-group mass bounds %s",
                              t.name.c_str(), tree.count(CubeLabel::A), tree.count(CubeLabel::B),
                              audit.pass() ? "pass" : "fail", r.bHalfMass ? "hold" : "fail",
                              r.groupsHold ? "hold" : "fail"));
            }
            const auto c = checkGreaterEqual(fmt("%s lambda=%s (%zu leaves)", t.name.c_str(), label, r.leaves.size()),
                                             t.q, {r.total, r.statError}, r.gridDelta);
            o.require(c.notViolated(), verdictLine(c));
        }
    }
    return o;
}

Outcome constantsClosedForms() {
    Outcome o;
    const KappaOptimum ko = kappaOptimum();
    const double closed = (239.0 - std::sqrt(56977.0)) / 6.0;
    o.require(std::abs(ko.supValue - closed) < 1e-9,
              fmt("supValue %.15g vs (239 - sqrt 56977)/6 = %.15g, |diff| = %.2g", ko.supValue, closed,
                  std::abs(ko.supValue - closed)));
    const Assembled& a = constants();
    const ConstantsReport r = assembleConstants(a.k, a.S, a.STilde);
    const double lhs = r.k * r.lambda / 2.0, rhs = r.oneMinusLambda * r.STilde / 9.0;
    o.require(std::abs(lhs - rhs) / lhs < 1e-12,
              fmt("k lambda/2 = %.17g, (1 - lambda) S~/9 = %.17g, relative residual %.2g", lhs, rhs,
                  std::abs(lhs - rhs) / lhs));
    const double C = std::min(r.CTilde, std::pow(2.0, -2.0 / 3.0) * r.S / 9.0);
    o.require(C == r.C, fmt("C = min(C~, 2^{-2/3} S/9) = %.17g reproduced exactly (report %.17g)", C, r.C));
    const double S = 3.0 * std::pow(std::numbers::pi / 2.0, 4.0 / 3.0);
    o.require(std::abs(r.S - S) < 1e-12 * S, fmt("S = %.15g vs 3 (pi/2)^{4/3} = %.15g", r.S, S));
    return o;
}

Outcome boxBoundCheck() {
    Outcome o;
    Rng rng(31337);
    std::size_t matched = 0;
    for (int c = 0; c < 50; ++c) {
        const double N = static_cast<double>(2 + rng.below(2000));
        const double q = static_cast<double>(1 + rng.below(10));
        const BoxBoundResult b = boxBound(N, q, 1.0, 1.0);
        const double s = b.stationary;
        const auto lo = static_cast<long long>(std::max(1.0, std::floor(s)));
        const auto hi = static_cast<long long>(std::max(1.0, std::ceil(s)));
        if (b.Mopt == lo || b.Mopt == hi)
            ++matched;
        else
            o.note(fmt("N=%.0f q=%.0f: Mopt %lld not adjacent to %.4f", N, q, b.Mopt, s));
    }
    o.require(matched == 50, fmt("%zu of 50 random (N, q): integer optimum is a neighbour of (2N/5q)^{1/3}", matched));
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) {
        const double N = std::round(10.0 * std::pow(100.0, i / 39.0));
        xs.push_back(std::log(N));
        ys.push_back(std::log(boxBound(N, 1.0, 1.0, 1.0).bound));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 40, my = std::accumulate(ys.begin(), ys.end(), 0.0) / 40;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 40; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    o.require(std::abs(slope - 5.0 / 3.0) <= 0.05, fmt("log-log slope over N in [10, 1000], q=1: %.4f", slope));
    return o;
}

Outcome decomposition() {
    Outcome o;
    Rng rng(4242);
    for (std::size_t N : {3u, 4u}) {
        const TrialFunction f = symmetricTrial(N);
        std::vector<Vec3> probes;
        for (int i = 0; i < 10; ++i) probes.push_back(rng.unitVector() * (0.5 * std::cbrt(rng.uniform())));
        const DecompositionReport r = densityDecompositionCheck(f, probes, defaultStrategy(f, 100000, 3));
        std::size_t ok = 0;
        for (const auto& p : r.probes)
            if (p.zScore < 3.0) ++ok;
        o.require(ok == probes.size(), fmt("N=%zu: %zu of 10 probes with |residual| < 3 sigma (max z %.2f, max "
                                           "relative %.3g)",
                                           N, ok, r.maxZ, r.maxRelative));
        if (N == 3) {
            bool vanishing = r.multiplicities[3] == 0.0;
            for (const auto& p : r.probes) vanishing = vanishing && p.components[3].mean == 0.0;
            o.require(vanishing, "N=3: n4 = N(N-1)(N-2)(N-3) = 0 and the four-particle term is identically zero");
        }
    }
    return o;
}

Outcome mcInfrastructure() {
    Outcome o;
    const TrialFunction f = presetTrial("n3-q2-blocks");
    SamplingStrategy s = defaultStrategy(f, 40000, 99);
    s.threads = 4;
    const MCEstimate a = norm2(f, s), b = norm2(f, s);
    o.require(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0 &&
                  std::memcmp(&a.stdError, &b.stdError, sizeof(double)) == 0,
              fmt("same seed twice: mean %.17g / %.17g", a.mean, b.mean));
    SamplingStrategy seq = s;
    seq.threads = 1;
    const MCEstimate c = norm2(f, seq);
    o.require(std::memcmp(&a.mean, &c.mean, sizeof(double)) == 0 &&
                  std::memcmp(&a.stdError, &c.stdError, sizeof(double)) == 0,
              fmt("4 threads vs sequential: mean %.17g / %.17g", a.mean, c.mean));
    SamplingStrategy big = s;
    big.samples = 4 * s.samples;
    const MCEstimate d = norm2(f, big);
    const double r = a.stdError / d.stdError;
    o.require(std::abs(r - 2.0) <= 0.4, fmt("stderr %.4g -> %.4g with 4x samples, ratio %.3f", a.stdError,
                                            d.stdError, r));
    return o;
}

struct Criterion {
    const char* id;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"01", "harmonicity", harmonicity},
    {"02", "quotient identity", quotientIdentity},
    {"03", "ho bound", hoBound},
    {"04", "local exclusion", localExclusion},
    {"05", "main theorem", mainTheorem},
    {"06", "symmetrization", symmetrization},
    {"07", "subdivision", subdivision},
    {"08", "bound assembly", boundAssembly},
    {"09", "constants closed forms", constantsClosedForms},
    {"10", "box bound", boxBoundCheck},
    {"11", "density decomposition", decomposition},
    {"12", "mc infrastructure", mcInfrastructure},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted(argv + 1, argv + argc);
    int failures = 0, ran = 0;
    for (const auto& c : kCriteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s (%s) [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs);
        for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion matches the arguments\n");
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
