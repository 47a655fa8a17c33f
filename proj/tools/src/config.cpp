#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ltlab/functionals.hpp"
#include "ltlab/presets.hpp"

namespace ltlab::cli {

using nlohmann::json;

namespace {

constexpr const char* kDefaultPreset = "n3-q2-blocks";

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

const char* typeName(const json& j) {
    if (j.is_null()) return "null";
    if (j.is_boolean()) return "boolean";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_array()) return "array";
    return "object";
}

/// Overlays `user` onto `defaults`: keys must already exist, objects merge recursively, other values
/// replace the default if the JSON types agree (a null default accepts a number).
void merge(json& defaults, const json& user, const std::string& path) {
    if (!user.is_object()) fail(path.empty() ? "config" : path, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = join(path, it.key());
        if (!defaults.contains(it.key())) fail(p, "unknown key");
        json& d = defaults[it.key()];
        const json& u = it.value();
        if (d.is_object()) {
            merge(d, u, p);
            continue;
        }
        const bool ok = (d.is_null() && (u.is_number() || u.is_null())) || (d.is_number() && u.is_number()) ||
                        (d.is_boolean() && u.is_boolean()) || (d.is_string() && u.is_string()) ||
                        (d.is_array() && u.is_array());
        if (!ok) fail(p, std::string("expected ") + typeName(d) + ", got " + typeName(u));
        d = u;
    }
}

json vecJson(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vecOf(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected an array of 3 numbers");
    Vec3 v;
    for (std::size_t d = 0; d < 3; ++d) {
        if (!j[d].is_number()) fail(path, "expected an array of 3 numbers");
        v[d] = j[d].get<double>();
    }
    return v;
}

double positive(const json& j, const std::string& path) {
    const double v = j.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be a positive finite number");
    return v;
}

std::size_t count(const json& j, const std::string& path, std::size_t min = 1) {
    if (!j.is_number_integer() && !(j.is_number() && j.get<double>() == std::floor(j.get<double>())))
        fail(path, "must be an integer");
    const double v = j.get<double>();
    if (v < static_cast<double>(min)) fail(path, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

double fraction(const json& j, const std::string& path, bool open) {
    const double v = j.get<double>();
    const bool ok = open ? (v > 0.0 && v < 1.0) : (v >= 0.0 && v <= 1.0);
    if (!ok) fail(path, open ? "must lie in (0, 1)" : "must lie in [0, 1]");
    return v;
}

Box boxOf(const json& j, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "lo" && it.key() != "hi") fail(join(path, it.key()), "unknown key");
    const Box b{vecOf(j.at("lo"), path + ".lo"), vecOf(j.at("hi"), path + ".hi")};
    for (std::size_t d = 0; d < 3; ++d)
        if (!(b.hi[d] > b.lo[d])) fail(path, "hi must exceed lo in every coordinate");
    return b;
}

json boxJson(const Box& b) { return {{"lo", vecJson(b.lo)}, {"hi", vecJson(b.hi)}}; }

json trialDefaults(const std::string& preset) {
    TrialFunction f = [&] {
        try {
            return presetTrial(preset);
        } catch (const InvalidArgumentError&) {
            std::string names;
            for (const auto& n : presetNames()) names += (names.empty() ? "" : ", ") + n;
            fail("trial.preset", "unknown preset '" + preset + "' (known: " + names + ")");
        }
    }();
    const SmoothCore* core = f.core();
    json orbitals = json::array();
    for (const auto& o : core->orbitals) {
        const auto& g = std::get<GaussianOrbital>(o);
        orbitals.push_back({{"center", vecJson(g.center)}, {"width", g.width}});
    }
    json partition = json::array();
    for (const auto& block : f.partition().blocks()) {
        json b = json::array();
        for (std::size_t i : block) b.push_back(i + 1);
        partition.push_back(b);
    }
    return {{"preset", preset},
            {"particles", f.particles()},
            {"form", core->form == CoreForm::SlaterProduct ? "slater" : "product"},
            {"orbitals", orbitals},
            {"cutoff",
             {{"center", vecJson(core->cutoff.center)},
              {"radius", core->cutoff.active() ? json(core->cutoff.radius) : json(nullptr)}}},
            {"support", boxJson(f.supportBox())},
            {"partition", partition}};
}

json baseDefaults() {
    const MOmegaOptions mo;
    const STildeOptions so;
    return {
        {"weight", {{"type", "coulomb"}, {"a", -1.0}, {"width", 0.5}}},
        {"sampling",
         {{"samples", 100000},
          {"seed", 1},
          {"kind", "pair-stratified"},
          {"shell_fraction", 0.2},
          {"shell_radius", 0.1},
          {"uniform_fraction", nullptr},
          {"lobe_width", nullptr},
          {"shards", 16},
          {"threads", 0}}},
        {"grid", {{"resolution", 24}, {"rel_cutoff", 1e-3}}},
        {"threshold", 3.0},
        {"constants",
         {{"momega",
           {{"centers", 4000},
            {"inner_samples", mo.innerSamples},
            {"refine_top", mo.refineTop},
            {"refine_samples", mo.refineSamples},
            {"min_radius", mo.minRadius},
            {"safety", mo.safety},
            {"seed", mo.seed},
            {"spectator_particles", 5},
            {"placements", 5}}},
          {"stilde",
           {{"degrees", so.degrees},
            {"iterations", so.iterations},
            {"random_starts", so.randomStarts},
            {"bubble_widths", so.bubbleWidths},
            {"safety", so.safety},
            {"seed", so.seed}}},
          {"sobolev_nodes", 64}}},
        {"harmonicity",
         {{"particles", {2, 3, 5}},
          {"configurations", 100},
          {"min_distance", 0.1},
          {"step", 1e-4},
          {"tolerance", 1e-3},
          {"box", boxJson({{0, 0, 0}, {1, 1, 1}})},
          {"threshold", nullptr}}},
        {"identity", {{"quadrature_resolution", 14}, {"core_nodes", 12}, {"tolerance", 1e-3}, {"threshold", nullptr}}},
        {"ho_bound", {{"quadrature_resolution", 0}, {"threshold", nullptr}}},
        {"exclusion",
         {{"cubes", json::array()}, {"random_cubes", 10}, {"sides", {0.5, 1.0, 2.0}}, {"threshold", nullptr}}},
        {"box_bound", {{"particles", nullptr}, {"q", nullptr}, {"side", nullptr}, {"threshold", nullptr}}},
        {"lt_main", {{"threshold", nullptr}}},
        {"subdivide", {{"threshold", nullptr}}},
        {"decomposition",
         {{"probes", json::array()}, {"probe_count", 10}, {"probe_radius", 0.5}, {"threshold", nullptr}}},
        {"symmetrize", {{"threshold", nullptr}}},
        {"output", {{"dir", "ltlab-out"}, {"binary_grid", false}}},
    };
}

TrialConfig readTrial(const json& t) {
    TrialConfig c;
    c.preset = t.at("preset").get<std::string>();
    c.particles = count(t.at("particles"), "trial.particles");
    const std::string form = t.at("form").get<std::string>();
    if (form == "slater")
        c.form = CoreForm::SlaterProduct;
    else if (form == "product")
        c.form = CoreForm::PlainProduct;
    else
        fail("trial.form", "must be \"slater\" or \"product\"");

    const json& orbs = t.at("orbitals");
    if (orbs.empty()) fail("trial.orbitals", "needs at least one orbital");
    for (std::size_t a = 0; a < orbs.size(); ++a) {
        const std::string p = "trial.orbitals[" + std::to_string(a) + "]";
        if (!orbs[a].is_object()) fail(p, "expected an object with center and width");
        for (auto it = orbs[a].begin(); it != orbs[a].end(); ++it)
            if (it.key() != "center" && it.key() != "width") fail(join(p, it.key()), "unknown key");
        if (!orbs[a].contains("center") || !orbs[a].contains("width")) fail(p, "needs center and width");
        c.orbitals.push_back({vecOf(orbs[a]["center"], p + ".center"), positive(orbs[a]["width"], p + ".width")});
    }

    const json& cut = t.at("cutoff");
    for (auto it = cut.begin(); it != cut.end(); ++it)
        if (it.key() != "center" && it.key() != "radius") fail(join("trial.cutoff", it.key()), "unknown key");
    c.cutoff.center = vecOf(cut.at("center"), "trial.cutoff.center");
    if (!cut.at("radius").is_null()) c.cutoff.radius = positive(cut.at("radius"), "trial.cutoff.radius");
    c.support = boxOf(t.at("support"), "trial.support");

    const json& part = t.at("partition");
    std::vector<int> seen(c.particles, 0);
    for (std::size_t b = 0; b < part.size(); ++b) {
        const std::string p = "trial.partition[" + std::to_string(b) + "]";
        if (!part[b].is_array() || part[b].empty()) fail(p, "each block must be a non-empty array of particle labels");
        std::vector<std::size_t> block;
        for (const auto& label : part[b]) {
            if (!label.is_number_integer()) fail(p, "labels must be integers 1.." + std::to_string(c.particles));
            const long long l = label.get<long long>();
            if (l < 1 || l > static_cast<long long>(c.particles))
                fail("trial.partition", "label " + std::to_string(l) + " outside 1.." + std::to_string(c.particles));
            if (seen[l - 1]++) fail("trial.partition", "particle " + std::to_string(l) + " appears in two blocks");
            block.push_back(static_cast<std::size_t>(l - 1));
        }
        c.partition.push_back(block);
    }
    for (std::size_t i = 0; i < c.particles; ++i)
        if (!seen[i])
            fail("trial.partition", "particle " + std::to_string(i + 1) + " is not covered (blocks must partition 1.." +
                                        std::to_string(c.particles) + ")");

    std::size_t largest = 0;
    for (const auto& b : c.partition) largest = std::max(largest, b.size());
    if (c.form == CoreForm::SlaterProduct && c.orbitals.size() < largest)
        fail("trial.orbitals", "a slater core needs at least as many orbitals as the largest block (" +
                                   std::to_string(largest) + ")");
    if (c.form == CoreForm::PlainProduct && c.orbitals.size() != 1 && c.orbitals.size() != c.particles)
        fail("trial.orbitals", "a product core needs one orbital or one per particle");
    return c;
}

WeightSpec readWeight(const json& w) {
    const std::string type = w.at("type").get<std::string>();
    if (type == "coulomb") return CoulombWeight{};
    if (type == "finite") {
        const double a = w.at("a").get<double>();
        if (!(a < 0.0)) fail("weight.a", "must be negative");
        return FiniteScatteringWeight{a};
    }
    if (type == "smooth-gaussian") return SmoothPairWeight::gaussian(positive(w.at("width"), "weight.width"));
    fail("weight.type", "must be \"coulomb\", \"finite\" or \"smooth-gaussian\"");
}

std::vector<double> positiveList(const json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(path, "expected numbers");
        out.push_back(positive(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<std::size_t> countList(const json& j, const std::string& path, std::size_t min) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]", min));
    return out;
}

std::optional<double> optionalPositive(const json& j, const std::string& path) {
    if (j.is_null()) return std::nullopt;
    return positive(j, path);
}

}  // namespace

double ExperimentConfig::thresholdFor(const std::string& subcommand) const {
    if (resolved.contains(subcommand) && resolved[subcommand].contains("threshold") &&
        !resolved[subcommand]["threshold"].is_null())
        return resolved[subcommand]["threshold"].get<double>();
    return threshold;
}

TrialFunction ExperimentConfig::buildTrial() const {
    SmoothCore core;
    core.form = trial.form;
    for (const auto& o : trial.orbitals) core.orbitals.push_back(o);
    core.cutoff = trial.cutoff;
    try {
        return TrialFunction::quotient(std::move(core), weight, SymmetryPartition(trial.partition, trial.particles),
                                       trial.support);
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(std::string("trial: ") + e.what());
    }
}

json defaultConfig() {
    json d = baseDefaults();
    d["trial"] = trialDefaults(kDefaultPreset);
    return d;
}

ExperimentConfig parseConfig(const json& user, const Overrides& overrides) {
    if (!user.is_object()) fail("config", "expected a JSON object at the top level");
    json doc = baseDefaults();
    std::string preset = kDefaultPreset;
    if (user.contains("trial")) {
        const json& t = user["trial"];
        if (!t.is_object()) fail("trial", "expected an object");
        if (t.contains("preset")) {
            if (!t["preset"].is_string()) fail("trial.preset", "expected string");
            preset = t["preset"].get<std::string>();
        }
    }
    doc["trial"] = trialDefaults(preset);
    merge(doc, user, "");
    if (overrides.seed) doc["sampling"]["seed"] = *overrides.seed;
    if (overrides.samples) doc["sampling"]["samples"] = *overrides.samples;
    if (overrides.outDir) doc["output"]["dir"] = *overrides.outDir;

    ExperimentConfig c;
    c.trial = readTrial(doc["trial"]);
    c.weight = readWeight(doc["weight"]);

    // Sampling: unset lobe fields come from the trial's orbitals.
    const json& s = doc["sampling"];
    SamplingStrategy base;
    {
        SmoothCore core{c.trial.form, {}, c.trial.cutoff};
        for (const auto& o : c.trial.orbitals) core.orbitals.push_back(o);
        const TrialFunction probe = TrialFunction::quotient(std::move(core), CoulombWeight{},
                                                            SymmetryPartition(c.trial.partition, c.trial.particles),
                                                            c.trial.support);
        base = defaultStrategy(probe);
    }
    c.sampling = base;
    const json& samples = s["samples"];
    if (!samples.is_number_unsigned() && !samples.is_number_integer()) fail("sampling.samples", "must be an integer");
    c.sampling.samples = count(samples, "sampling.samples");
    if (!s["seed"].is_number_integer()) fail("sampling.seed", "must be a non-negative integer");
    if (s["seed"].is_number_unsigned())
        c.sampling.seed = s["seed"].get<std::uint64_t>();
    else if (s["seed"].get<long long>() >= 0)
        c.sampling.seed = static_cast<std::uint64_t>(s["seed"].get<long long>());
    else
        fail("sampling.seed", "must be a non-negative integer");
    const std::string kind = s["kind"].get<std::string>();
    if (kind == "pair-stratified")
        c.sampling.kind = SamplingKind::PairStratified;
    else if (kind == "uniform")
        c.sampling.kind = SamplingKind::UniformBox;
    else
        fail("sampling.kind", "must be \"pair-stratified\" or \"uniform\"");
    c.sampling.shellFraction = fraction(s["shell_fraction"], "sampling.shell_fraction", true);
    c.sampling.shellRadius = positive(s["shell_radius"], "sampling.shell_radius");
    if (!s["uniform_fraction"].is_null())
        c.sampling.uniformFraction = fraction(s["uniform_fraction"], "sampling.uniform_fraction", false);
    if (!s["lobe_width"].is_null()) c.sampling.lobeWidth = positive(s["lobe_width"], "sampling.lobe_width");
    c.sampling.shards = count(s["shards"], "sampling.shards");
    c.sampling.threads = count(s["threads"], "sampling.threads", 0);
    doc["sampling"]["uniform_fraction"] = c.sampling.uniformFraction;
    doc["sampling"]["lobe_width"] = c.sampling.lobeWidth;
    try {
        validate(c.sampling);
    } catch (const InvalidArgumentError& e) {
        throw ConfigError(e.what());
    }

    c.gridResolution = count(doc["grid"]["resolution"], "grid.resolution", 8);
    if (c.gridResolution % 2) fail("grid.resolution", "must be even");
    c.relCutoff = doc["grid"]["rel_cutoff"].get<double>();
    if (!(c.relCutoff >= 0.0 && c.relCutoff < 1.0)) fail("grid.rel_cutoff", "must lie in [0, 1)");
    c.threshold = positive(doc["threshold"], "threshold");

    const json& mo = doc["constants"]["momega"];
    c.momega.centers = count(mo["centers"], "constants.momega.centers");
    c.momega.innerSamples = count(mo["inner_samples"], "constants.momega.inner_samples");
    c.momega.refineTop = count(mo["refine_top"], "constants.momega.refine_top");
    c.momega.refineSamples = count(mo["refine_samples"], "constants.momega.refine_samples");
    c.momega.minRadius = positive(mo["min_radius"], "constants.momega.min_radius");
    c.momega.safety = positive(mo["safety"], "constants.momega.safety");
    if (c.momega.safety < 1.0) fail("constants.momega.safety", "must be >= 1");
    c.momega.seed = count(mo["seed"], "constants.momega.seed", 0);
    c.momega.threads = c.sampling.threads;
    c.spectatorParticles = count(mo["spectator_particles"], "constants.momega.spectator_particles", 2);
    c.placements = count(mo["placements"], "constants.momega.placements", 0);
    const json& st = doc["constants"]["stilde"];
    c.stilde.degrees = countList(st["degrees"], "constants.stilde.degrees", 1);
    if (c.stilde.degrees.empty()) fail("constants.stilde.degrees", "needs at least one degree");
    c.stilde.iterations = count(st["iterations"], "constants.stilde.iterations");
    c.stilde.randomStarts = count(st["random_starts"], "constants.stilde.random_starts", 0);
    c.stilde.bubbleWidths = positiveList(st["bubble_widths"], "constants.stilde.bubble_widths");
    c.stilde.safety = positive(st["safety"], "constants.stilde.safety");
    if (c.stilde.safety > 1.0) fail("constants.stilde.safety", "must be <= 1");
    c.stilde.seed = count(st["seed"], "constants.stilde.seed", 0);
    c.sobolevNodes = count(doc["constants"]["sobolev_nodes"], "constants.sobolev_nodes", 8);

    const json& h = doc["harmonicity"];
    c.harmonicity.particles = countList(h["particles"], "harmonicity.particles", 2);
    if (c.harmonicity.particles.empty()) fail("harmonicity.particles", "needs at least one particle count");
    c.harmonicity.configurations = count(h["configurations"], "harmonicity.configurations");
    c.harmonicity.minDistance = positive(h["min_distance"], "harmonicity.min_distance");
    c.harmonicity.step = positive(h["step"], "harmonicity.step");
    c.harmonicity.tolerance = positive(h["tolerance"], "harmonicity.tolerance");
    c.harmonicity.box = boxOf(h["box"], "harmonicity.box");

    c.identityResolution = count(doc["identity"]["quadrature_resolution"], "identity.quadrature_resolution", 2);
    c.identityCoreNodes = count(doc["identity"]["core_nodes"], "identity.core_nodes", 2);
    c.identityTolerance = positive(doc["identity"]["tolerance"], "identity.tolerance");
    c.hoQuadratureResolution = count(doc["ho_bound"]["quadrature_resolution"], "ho_bound.quadrature_resolution", 0);

    const json& ex = doc["exclusion"];
    for (std::size_t i = 0; i < ex["cubes"].size(); ++i) {
        const std::string p = "exclusion.cubes[" + std::to_string(i) + "]";
        const json& e = ex["cubes"][i];
        if (!e.is_object()) fail(p, "expected an object with center and side");
        for (auto it = e.begin(); it != e.end(); ++it)
            if (it.key() != "center" && it.key() != "side") fail(join(p, it.key()), "unknown key");
        if (!e.contains("center") || !e.contains("side")) fail(p, "needs center and side");
        c.exclusionCubes.push_back({vecOf(e["center"], p + ".center"), positive(e["side"], p + ".side")});
    }
    c.exclusionRandomCubes = count(ex["random_cubes"], "exclusion.random_cubes", 0);
    c.exclusionSides = positiveList(ex["sides"], "exclusion.sides");
    if (c.exclusionRandomCubes > 0 && c.exclusionSides.empty()) fail("exclusion.sides", "needs at least one side");
    if (c.exclusionCubes.empty() && c.exclusionRandomCubes == 0) fail("exclusion", "no cubes to test");

    c.boxN = optionalPositive(doc["box_bound"]["particles"], "box_bound.particles");
    c.boxQ = optionalPositive(doc["box_bound"]["q"], "box_bound.q");
    c.boxL = optionalPositive(doc["box_bound"]["side"], "box_bound.side");

    const json& dc = doc["decomposition"];
    for (std::size_t i = 0; i < dc["probes"].size(); ++i)
        c.probes.push_back(vecOf(dc["probes"][i], "decomposition.probes[" + std::to_string(i) + "]"));
    c.probeCount = count(dc["probe_count"], "decomposition.probe_count", 0);
    c.probeRadius = positive(dc["probe_radius"], "decomposition.probe_radius");

    for (const char* sub : {"harmonicity", "identity", "ho_bound", "exclusion", "box_bound", "lt_main", "subdivide",
                            "decomposition", "symmetrize"})
        if (!doc[sub]["threshold"].is_null()) positive(doc[sub]["threshold"], std::string(sub) + ".threshold");

    c.outDir = doc["output"]["dir"].get<std::string>();
    if (c.outDir.empty()) fail("output.dir", "must not be empty");
    c.binaryGrid = doc["output"]["binary_grid"].get<bool>();
    c.resolved = std::move(doc);
    return c;
}

ExperimentConfig loadConfig(const std::string& path, const Overrides& overrides) {
    if (path.empty()) return parseConfig(json::object(), overrides);
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json user;
    try {
        user = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + " is not valid JSON (" + e.what() + ")");
    }
    return parseConfig(user, overrides);
}

}  // namespace ltlab::cli
