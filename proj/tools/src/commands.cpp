#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ltlab/constants.hpp"
#include "ltlab/cubes.hpp"
#include "ltlab/functionals.hpp"

namespace ltlab::cli {

using nlohmann::json;

namespace {

json vecJson(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json estimateJson(const MCEstimate& e) {
    return {{"mean", e.mean}, {"stderr", e.stdError}, {"samples", e.samples}, {"ess", e.ess}};
}
json estimateJson(const Estimate& e) { return {{"value", e.value}, {"sigma", e.error}}; }

struct Constants {
    ConstantsReport r;
    json j;
};

Constants computeConstants(const ExperimentConfig& c) {
    const MOmegaSweep sweep = sweepMOmega(c.spectatorParticles, c.placements, c.momega);
    const PoincareConstants pc = poincareConstants(sweep.best.value);
    const double S = sobolevS(c.sobolevNodes);
    const STildeEstimate st = poincareSobolevSTilde(c.stilde);
    Constants out{assembleConstants(pc.k, S, st.value), {}};
    ConstantsReport& r = out.r;
    r.MOmega = sweep.best.value;
    r.kPoincare = pc.kPoincare;
    r.provenance["MOmega"] = "estimated: largest sampled ball ratio times safety factor (not rigorous)";
    r.provenance["kPoincare"] = "formula in MOmega";
    r.provenance["k"] = "kPoincare / 2";
    r.provenance["S"] = "quadrature of the extremal quotient (closed form 3 (pi/2)^{4/3})";
    r.provenance["STilde"] = "estimated: safety factor times the smallest trial quotient (not rigorous)";

    json runs = json::array();
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
        json sp = json::array();
        for (const auto& p : sweep.spectatorSets[i]) sp.push_back(vecJson(p));
        runs.push_back({{"spectators", sp}, {"raw", sweep.runs[i].raw}});
    }
    const MOmegaEstimate& b = sweep.best;
    out.j = {{"values",
              {{"MOmega", r.MOmega},
               {"kPoincare", r.kPoincare},
               {"k", r.k},
               {"S", r.S},
               {"STilde", r.STilde},
               {"lambda", r.lambda},
               {"oneMinusLambda", r.oneMinusLambda},
               {"kappaStar", r.kappaStar},
               {"supValue", r.supValue},
               {"CTilde", r.CTilde},
               {"C", r.C},
               {"mixingResidual", r.mixingResidual}}},
             {"provenance", r.provenance},
             {"momega",
              {{"raw", b.raw},
               {"safety", b.safety},
               {"best_ball", {{"w1", vecJson(b.bestW1)}, {"w2", vecJson(b.bestW2)}, {"radius", b.bestRadius}}},
               {"best_mean", b.bestMean},
               {"best_inf", b.bestInf},
               {"runs", runs}}},
             {"stilde",
              {{"polynomial_minima", st.polynomialMinima},
               {"bubble_quotients", st.bubbleQuotients},
               {"corner_limit", st.cornerLimit},
               {"trial_minimum", st.trialMinimum},
               {"safety", st.safety},
               {"basis_size", st.basisSize}}}};
    return out;
}

/// Q / ||f||^2 and the normalised density on the configured grid, from one strategy.
struct Measured {
    TrialFunction f;
    SamplingStrategy s;
    MCEstimate q, norm;
    Estimate ratio;
    DensityGrid rho;
};

Measured measure(const ExperimentConfig& c, bool withDensity = true) {
    Measured m{c.buildTrial(), c.sampling, {}, {}, {}, {}};
    m.q = energyQ(m.f, m.s);
    m.norm = norm2(m.f, m.s);
    m.ratio = ratio(m.q, m.norm);
    if (withDensity) m.rho = density(m.f, GridSpec::cubic(m.f.supportBox(), c.gridResolution), m.s);
    return m;
}

json measuredJson(const Measured& m) {
    json j = {{"Q", estimateJson(m.q)}, {"norm2", estimateJson(m.norm)}, {"Q_over_norm2", estimateJson(m.ratio)}};
    if (m.rho.cellCount()) {
        j["density"] = {{"resolution", m.rho.nx()},
                        {"mass_in_box", m.rho.totalMass()},
                        {"mass_outside_fraction", m.rho.massOutside},
                        {"ess", m.rho.ess},
                        {"low_ess", m.rho.lowEss}};
    }
    return j;
}

void addDensityFiles(RunResult& out, const ExperimentConfig& c, const DensityGrid& d) {
    std::ostringstream csv;
    writeCsv(d, csv);
    out.files["density.csv"] = csv.str();
    if (c.binaryGrid) {
        std::ostringstream bin(std::ios::binary);
        writeBinary(d, bin);
        out.files["density.ltdg"] = bin.str();
    }
}

double qOf(const TrialFunction& f) { return static_cast<double>(f.partition().q()); }

std::string fixed(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------

RunResult harmonicity(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("harmonicity");
    const auto* smooth = std::get_if<SmoothPairWeight>(&c.weight);
    Rng rng(deriveSeed(c.sampling.seed, 101));
    json per = json::array();
    for (std::size_t N : c.harmonicity.particles) {
        double worst = 0.0, mean = 0.0;
        for (std::size_t k = 0; k < c.harmonicity.configurations; ++k) {
            std::vector<Vec3> pts;
            std::size_t tries = 0;
            do {
                if (++tries > 100000) throw ConfigError("harmonicity.min_distance: cannot place particles in the box");
                pts.clear();
                for (std::size_t i = 0; i < N; ++i) pts.push_back(rng.uniformInBox(c.harmonicity.box));
            } while (minPairDistance(Configuration(pts)) <= c.harmonicity.minDistance);
            const Configuration X(pts);
            double res = harmonicityResidual(X, c.weight, c.harmonicity.step);
            if (smooth) res -= smoothLaplacianSum(X, *smooth);  // compare with the analytic Laplacian instead
            const double r = std::abs(res) / harmonicityScale(X, c.weight);
            worst = std::max(worst, r);
            mean += r / static_cast<double>(c.harmonicity.configurations);
        }
        per.push_back({{"particles", N}, {"max_normalised_residual", worst}, {"mean_normalised_residual", mean}});
        out.report.add(checkClose("harmonicity N=" + std::to_string(N) + (smooth ? " (vs analytic Laplacian)" : ""),
                                  {worst, 0.0}, {0.0, 0.0}, c.harmonicity.tolerance, t),
                       "equality");
    }
    out.report.results = {{"sweeps", per}};
    return out;
}

RunResult identity(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("identity");
    const TrialFunction f = c.buildTrial();
    if (f.particles() == 2) {
        const QuadratureResult lhs = energyQuadrature(f, c.identityResolution);
        const double rhs = coreDirichletQuadrature(f, c.identityCoreNodes);
        const double gap = std::abs(lhs.value - rhs) / std::abs(rhs);
        out.report.results = {{"method", "quadrature"},
                              {"Q", lhs.value},
                              {"Q_coarse", lhs.coarseValue},
                              {"dirichlet", rhs},
                              {"relative_gap", gap}};
        out.report.add(checkClose("Q(Psi/g) = int |grad Psi|^2", {lhs.value, 0.0}, {rhs, 0.0},
                                  c.identityTolerance * std::abs(rhs), t),
                       "equality");
        return out;
    }
    const MCEstimate q = energyQ(f, c.sampling);
    const MCEstimate d = coreDirichlet(f, c.sampling);
    const MCEstimate diff = integrate(
        [&](const Configuration& X) { return f.weightedKinetic(X) - f.coreDirichletDensity(X); }, f.particles(),
        c.sampling);
    out.report.results = {{"method", "monte-carlo"},
                          {"Q", estimateJson(q)},
                          {"dirichlet", estimateJson(d)},
                          {"paired_difference", estimateJson(diff)},
                          {"relative_gap", std::abs(diff.mean) / std::abs(d.mean)}};
    out.report.add(checkClose("Q(Psi/g) = int |grad Psi|^2", {q.mean, diff.stdError}, {d.mean, 0.0},
                              c.identityTolerance * std::abs(d.mean), t),
                   "equality");
    return out;
}

RunResult hoBound(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("ho_bound");
    const Measured m = measure(c);
    const GradSqrtResult gs = gradSqrtDensityNorm(m.rho, c.relCutoff);
    out.report.add(checkGreaterEqual("9 Q >= int |grad sqrt rho|^2", {9.0 * m.ratio.value, 9.0 * m.ratio.error},
                                     {gs.value, 0.0}, gs.error(), t));
    out.report.results = measuredJson(m);
    out.report.results["grad_sqrt_rho"] = {
        {"value", gs.value}, {"coarse_delta", gs.delta}, {"noise", gs.noise}, {"cutoff", gs.cutoff}};
    if (c.hoQuadratureResolution > 0 && m.f.particles() == 2) {
        const double q = energyQuadrature(m.f, c.hoQuadratureResolution).value /
                         norm2Quadrature(m.f, c.hoQuadratureResolution).value;
        const DensityGrid d = quadratureDensityN2(m.f, GridSpec::cubic(m.f.supportBox(), c.gridResolution), 1, 14);
        const GradSqrtResult g = gradSqrtDensityNorm(d, c.relCutoff);
        out.report.add(checkGreaterEqual("9 Q >= int |grad sqrt rho|^2 (quadrature)", {9.0 * q, 0.0}, {g.value, 0.0},
                                         g.error(), t));
        out.report.results["quadrature"] = {{"Q_over_norm2", q}, {"grad_sqrt_rho", g.value}};
    }
    addDensityFiles(out, c, m.rho);
    return out;
}

RunResult exclusion(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("exclusion");
    const Constants k = computeConstants(c);
    const Measured m = measure(c);
    std::vector<CubeSpec> cubes = c.exclusionCubes;
    Rng rng(deriveSeed(c.sampling.seed, 202));
    const Box sb = m.f.supportBox();
    const Vec3 mid = sb.center(), quarter = (sb.hi - sb.lo) * 0.25;
    for (std::size_t i = 0; i < c.exclusionRandomCubes; ++i)
        cubes.push_back({rng.uniformInBox({mid - quarter, mid + quarter}), c.exclusionSides[i % c.exclusionSides.size()]});
    std::vector<Box> boxes;
    for (const auto& cs : cubes) {
        const Vec3 h{cs.side / 2, cs.side / 2, cs.side / 2};
        boxes.push_back({cs.center - h, cs.center + h});
    }
    const auto local = localizedEnergies(m.f, boxes, m.s);
    const double q = qOf(m.f);
    json rows = json::array();
    std::ostringstream csv;
    csv << "index,cx,cy,cz,side,local_energy,local_sigma,mass,mass_sigma,right,verdict\n";
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        const Estimate left = ratio(local[i], m.norm);
        const Estimate mass = m.rho.massIn(boxes[i]);
        const double s = k.r.k / (cubes[i].side * cubes[i].side);
        const auto chk = checkGreaterEqual("local exclusion cube " + std::to_string(i), left,
                                           {s * (mass.value - q), s * mass.error}, 0.0, t);
        out.report.add(chk);
        rows.push_back({{"center", vecJson(cubes[i].center)}, {"side", cubes[i].side}, {"local_energy", estimateJson(left)},
                        {"mass", estimateJson(mass)}});
        csv << i << ',' << fixed(cubes[i].center.x) << ',' << fixed(cubes[i].center.y) << ',' << fixed(cubes[i].center.z)
            << ',' << fixed(cubes[i].side) << ',' << fixed(left.value) << ',' << fixed(left.error) << ','
            << fixed(mass.value) << ',' << fixed(mass.error) << ',' << fixed(s * (mass.value - q)) << ','
            << toString(chk.verdict) << '\n';
    }
    out.report.results = measuredJson(m);
    out.report.results["cubes"] = rows;
    out.report.constants = k.j;
    out.files["cubes.csv"] = csv.str();
    out.files["constants.json"] = k.j.dump(2) + "\n";
    return out;
}

RunResult boxBoundCmd(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("box_bound");
    const TrialFunction f = c.buildTrial();
    const Box sb = f.supportBox();
    const double side = std::max({sb.extent(0), sb.extent(1), sb.extent(2)});
    const double N = c.boxN.value_or(static_cast<double>(f.particles()));
    const double q = c.boxQ.value_or(qOf(f));
    const double L = c.boxL.value_or(side);
    const Constants k = computeConstants(c);
    const BoxBoundResult b = boxBound(N, q, L, k.r.k);
    std::ostringstream csv;
    csv << "M,value\n";
    for (long long M = 1; M <= b.searchUpper; ++M) {
        const double md = static_cast<double>(M);
        csv << M << ',' << fixed(k.r.k * (N * md * md - q * std::pow(md, 5)) / (L * L)) << '\n';
    }
    out.files["box_bound.csv"] = csv.str();
    out.report.results = {{"N", N},
                          {"q", q},
                          {"L", L},
                          {"Mopt", b.Mopt},
                          {"bound", b.bound},
                          {"raw_bound", b.rawBound},
                          {"stationary", b.stationary},
                          {"alternative", b.alternative},
                          {"search_upper", b.searchUpper}};
    // The trial is only a test case when the bound's parameters describe it.
    const bool applies = N == static_cast<double>(f.particles()) && q == qOf(f) && L >= side;
    out.report.results["trial_check"] = applies;
    if (applies) {
        const Measured m = measure(c, false);
        out.report.results["trial"] = measuredJson(m);
        out.report.add(checkGreaterEqual("Q >= k (N M^2 - q M^5) / L^2", m.ratio, {b.bound, 0.0}, 0.0, t));
    }
    out.report.constants = k.j;
    out.files["constants.json"] = k.j.dump(2) + "\n";
    return out;
}

RunResult ltMain(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("lt_main");
    const Constants k = computeConstants(c);
    const Measured m = measure(c);
    const double q = qOf(m.f), N = static_cast<double>(m.f.particles());
    const Estimate p53 = densityPowerIntegral(m.rho, m.rho.box(), 5.0 / 3.0);
    const double cq = k.r.C / std::cbrt(q * q);
    out.report.add(checkGreaterEqual("Q >= C q^{-2/3} int rho^{5/3}", m.ratio, {cq * p53.value, cq * p53.error}, 0.0, t));
    out.report.results = measuredJson(m);
    out.report.results["rho_53"] = estimateJson(p53);
    out.report.results["sobolev_path"] = N <= 2.0 * q;
    if (N <= 2.0 * q) {
        const double s = k.r.S / (9.0 * std::cbrt(4.0 * q * q));
        out.report.add(checkGreaterEqual("Q >= S / (9 (2q)^{2/3}) int rho^{5/3}", m.ratio, {s * p53.value, s * p53.error},
                                         0.0, t));
    }
    out.report.constants = k.j;
    out.files["constants.json"] = k.j.dump(2) + "\n";
    addDensityFiles(out, c, m.rho);
    return out;
}

json treeJson(const CubeTree& t) {
    json nodes = json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const CubeNode& n = t.nodes[i];
        json j = {{"index", i},
                  {"path", t.path(i)},
                  {"level", n.level},
                  {"label", std::string(toString(n.label))},
                  {"mass", n.mass},
                  {"corner", vecJson(n.cube.corner)},
                  {"side", n.cube.side},
                  {"children", n.children}};
        if (n.parent) j["parent"] = *n.parent;
        if (i < t.association.size() && t.association[i]) j["associated_b"] = *t.association[i];
        nodes.push_back(j);
    }
    return {{"q", t.q}, {"additivity_tolerance", t.additivityTolerance}, {"nodes", nodes}};
}

RunResult subdivideCmd(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("subdivide");
    const Constants k = computeConstants(c);
    const Measured m = measure(c);
    const double q = qOf(m.f);
    const MassFn mass = gridMass(m.rho);
    const Box gb = m.rho.box();
    const Cube root{gb.lo, std::min({gb.extent(0), gb.extent(1), gb.extent(2)})};
    const bool split = mass(root) >= 2.0 * q;
    CubeTree tree = split ? subdivide(mass, root, q) : singleCubeTree(mass, root, q);
    if (tree.nodes.size() > 1) associate(tree);
    const TreeAudit audit = auditTree(tree);
    for (const auto& f : audit.failures) out.report.structuralErrors.push_back("tree audit: " + f);
    const LowerBoundReport r = assembleLowerBound(tree, m.rho, k.r.k, k.r.lambda, k.r.kappaStar, c.relCutoff,
                                                  k.r.oneMinusLambda);
    if (!r.bHalfMass) out.report.structuralErrors.push_back("a B cube has [mass - q]_+ < mass / 2");
    if (!r.groupsHold) out.report.structuralErrors.push_back("an A-group mass bound fails");
    out.report.add(checkGreaterEqual("Q >= sum over leaves (lambda k |Q|^{-2/3}[m - q]_+ + (1 - lambda)/9 grad term)",
                                     m.ratio, {r.total, r.statError}, r.gridDelta, t));

    std::ostringstream csv;
    csv << "node,path,label,level,side,mass,mass_sigma,exclusion_term,gradient_term,rho53,saf\n";
    for (const auto& l : r.leaves) {
        const CubeNode& n = tree.nodes[l.node];
        csv << l.node << ',' << tree.path(l.node) << ',' << toString(l.label) << ',' << n.level << ','
            << fixed(n.cube.side) << ',' << fixed(l.mass.value) << ',' << fixed(l.mass.error) << ','
            << fixed(l.exclusionTerm) << ',' << fixed(l.gradientTerm) << ',' << fixed(l.power53.value) << ','
            << (l.saf ? 1 : 0) << '\n';
    }
    out.files["cubes.csv"] = csv.str();
    out.files["tree.json"] = treeJson(tree).dump(2) + "\n";
    out.files["constants.json"] = k.j.dump(2) + "\n";
    addDensityFiles(out, c, m.rho);

    json groups = json::array();
    for (const auto& g : r.groups)
        groups.push_back({{"b_node", g.bNode}, {"saf_sum", g.safSum}, {"bound", g.bound}, {"holds", g.holds}});
    out.report.results = measuredJson(m);
    out.report.results["tree"] = {{"subdivided", split},
                                  {"nodes", tree.nodes.size()},
                                  {"a_leaves", tree.count(CubeLabel::A)},
                                  {"b_leaves", tree.count(CubeLabel::B)},
                                  {"audit_pass", audit.pass()},
                                  {"max_a_per_level_per_b", audit.maxPerLevel}};
    out.report.results["assembly"] = {{"lambda", r.lambda},
                                      {"total", r.total},
                                      {"stat_error", r.statError},
                                      {"grid_delta", r.gridDelta},
                                      {"b_half_mass", r.bHalfMass},
                                      {"groups_hold", r.groupsHold},
                                      {"groups", groups}};
    out.report.constants = k.j;
    return out;
}

RunResult constantsCmd(const ExperimentConfig& c) {
    RunResult out;
    const Constants k = computeConstants(c);
    const KappaOptimum ko = kappaOptimum();
    out.report.add(checkClose("supValue = (239 - sqrt 56977) / 6", {ko.supValue, 0.0}, {ko.closedForm, 0.0}, 1e-9, 3.0),
                   "equality");
    const double lhs = k.r.k * k.r.lambda / 2.0, rhs = k.r.oneMinusLambda * k.r.STilde / 9.0;
    out.report.add(checkClose("k lambda / 2 = (1 - lambda) S~ / 9", {lhs, 0.0}, {rhs, 0.0}, 1e-12 * lhs, 3.0), "equality");
    const double S = 3.0 * std::pow(std::numbers::pi / 2.0, 4.0 / 3.0);
    out.report.add(checkClose("S = 3 (pi/2)^{4/3}", {k.r.S, 0.0}, {S, 0.0}, 1e-10 * S, 3.0), "equality");
    out.report.results = {{"lambda_in_unit_interval", k.r.lambda > 0.0 && k.r.lambda < 1.0}};
    out.report.constants = k.j;
    out.files["constants.json"] = k.j.dump(2) + "\n";
    return out;
}

RunResult decompositionCmd(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("decomposition");
    const TrialFunction f = c.buildTrial();
    std::vector<Vec3> probes = c.probes;
    Rng rng(deriveSeed(c.sampling.seed, 303));
    for (std::size_t i = 0; i < c.probeCount; ++i)
        probes.push_back(f.supportBox().center() + rng.unitVector() * (c.probeRadius * std::cbrt(rng.uniform())));
    if (probes.empty()) throw ConfigError("decomposition: no probes");
    DecompositionReport r;
    try {
        r = densityDecompositionCheck(f, probes, c.sampling);
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(std::string("trial: ") + e.what());
    }
    json rows = json::array();
    for (std::size_t i = 0; i < r.probes.size(); ++i) {
        const ProbeDecomposition& p = r.probes[i];
        json comps = json::array();
        for (const auto& e : p.components) comps.push_back(estimateJson(e));
        rows.push_back({{"probe", vecJson(p.probe)},
                        {"rho", estimateJson(p.rho)},
                        {"components", comps},
                        {"residual", estimateJson(p.residual)},
                        {"z", p.zScore},
                        {"relative", p.relative}});
        out.report.add(checkClose("rho_f = sum n_j rho_j at probe " + std::to_string(i), {p.residual.mean, p.residual.stdError},
                                  {0.0, 0.0}, 0.0, t),
                       "equality");
    }
    out.report.results = {{"particles", r.particles},
                          {"multiplicities", r.multiplicities},
                          {"max_z", r.maxZ},
                          {"max_relative", r.maxRelative},
                          {"probes", rows}};
    return out;
}

RunResult symmetrizeCmd(const ExperimentConfig& c) {
    RunResult out;
    const double t = c.thresholdFor("symmetrize");
    const TrialFunction f = c.buildTrial();
    if (f.particles() > kMaxSymmetrizeParticles)
        throw ConfigError("trial.particles: symmetrize supports at most " + std::to_string(kMaxSymmetrizeParticles));
    const TrialFunction ft = symmetrize(f);
    const std::size_t N = f.particles();
    const MCEstimate dq =
        integrate([&](const Configuration& X) { return f.weightedKinetic(X) - ft.weightedKinetic(X); }, N, c.sampling);
    const MCEstimate q = energyQ(f, c.sampling), qt = energyQ(ft, c.sampling);
    const MCEstimate n = norm2(f, c.sampling), nt = norm2(ft, c.sampling);
    out.report.add(checkGreaterEqual("Q(f) - Q(f~) >= 0 (paired samples)", {dq.mean, dq.stdError}, {0.0, 0.0}, 0.0, t));
    out.report.add(checkClose("||f~||^2 = ||f||^2", {nt.mean, nt.stdError}, {n.mean, n.stdError}, 0.0, t), "equality");
    out.report.results = {{"Q", estimateJson(q)},
                          {"Q_symmetrized", estimateJson(qt)},
                          {"Q_difference", estimateJson(dq)},
                          {"norm2", estimateJson(n)},
                          {"norm2_symmetrized", estimateJson(nt)}};
    return out;
}

using Command = std::function<RunResult(const ExperimentConfig&)>;

const std::vector<std::pair<std::string, Command>>& table() {
    static const std::vector<std::pair<std::string, Command>> t{
        {"harmonicity", harmonicity}, {"identity", identity},       {"ho-bound", hoBound},
        {"exclusion", exclusion},     {"box-bound", boxBoundCmd},   {"lt-main", ltMain},
        {"subdivide", subdivideCmd},  {"constants", constantsCmd},  {"decomposition", decompositionCmd},
        {"symmetrize", symmetrizeCmd}};
    return t;
}

}  // namespace

const std::vector<std::string>& subcommandNames() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, cmd] : table()) n.push_back(name);
        return n;
    }();
    return names;
}

RunResult runSubcommand(const std::string& name, const ExperimentConfig& config) {
    for (const auto& [n, cmd] : table())
        if (n == name) {
            RunResult r = cmd(config);
            r.report.subcommand = name;
            return r;
        }
    throw ConfigError("subcommand: unknown '" + name + "'");
}

}  // namespace ltlab::cli
