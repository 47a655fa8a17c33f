#include "ltlab/presets.hpp"

#include <cmath>
#include <numbers>

#include "ltlab/error.hpp"

namespace ltlab {

namespace {

std::vector<Orbital> ring(std::size_t n, double width, double spread, const Vec3& centre = {}) {
    std::vector<Orbital> out;
    for (std::size_t a = 0; a < n; ++a) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(n);
        const Vec3 c = centre + (n == 1 ? Vec3{} : Vec3{spread * std::cos(t), spread * std::sin(t), 0.0});
        out.push_back(GaussianOrbital{c, width});
    }
    return out;
}

Cutoff unitCutoff() { return {{0, 0, 0}, 1.0}; }

}  // namespace

TrialFunction gaussianSlaterN2(double width, double separation, WeightSpec weight) {
    SmoothCore core{CoreForm::SlaterProduct,
                    {GaussianOrbital{{-separation / 2, 0, 0}, width}, GaussianOrbital{{separation / 2, 0, 0}, width}},
                    unitCutoff()};
    return TrialFunction::quotient(std::move(core), std::move(weight), SymmetryPartition::single(2), kPresetSupport);
}

TrialFunction slaterTrial(std::size_t N, double width, double spread, WeightSpec weight) {
    return blockTrial(SymmetryPartition::single(N), width, spread, std::move(weight));
}

TrialFunction blockTrial(const SymmetryPartition& partition, double width, double spread, WeightSpec weight) {
    SmoothCore core{CoreForm::SlaterProduct, ring(partition.largestBlock(), width, spread), unitCutoff()};
    return TrialFunction::quotient(std::move(core), std::move(weight), partition, kPresetSupport);
}

TrialFunction symmetricTrial(std::size_t N, double width, WeightSpec weight) {
    SmoothCore core{CoreForm::PlainProduct, {GaussianOrbital{{0, 0, 0}, width}}, unitCutoff()};
    return TrialFunction::quotient(std::move(core), std::move(weight), SymmetryPartition::singletons(N),
                                   kPresetSupport);
}

TrialFunction asymmetricTrial(std::size_t N, double width, double spread, WeightSpec weight) {
    SmoothCore core{CoreForm::PlainProduct, ring(N, width, spread), unitCutoff()};
    return TrialFunction::quotient(std::move(core), std::move(weight), SymmetryPartition::singletons(N),
                                   kPresetSupport);
}

TrialFunction offsetSlaterTrial(std::size_t N, const Vec3& centre, double width, double spread, WeightSpec weight) {
    SmoothCore core{CoreForm::SlaterProduct, ring(N, width, spread, centre), unitCutoff()};
    return TrialFunction::quotient(std::move(core), std::move(weight), SymmetryPartition::single(N), kPresetSupport);
}

std::vector<PresetTrial> standardSuite() {
    std::vector<PresetTrial> out;
    for (const char* name : {"n2-q1-slater", "n2-q2-product", "n3-q1-slater", "n3-q2-blocks", "n3-q3-product"})
        out.push_back({name, presetTrial(name)});
    return out;
}

std::vector<std::string> presetNames() {
    return {"n2-q1-slater", "n2-q2-product", "n3-q1-slater", "n3-q2-blocks", "n3-q3-product", "n3-symmetric", "n4-symmetric", "n4-q1-offset"};
}

TrialFunction presetTrial(const std::string& name) {
    if (name == "n2-q1-slater") return gaussianSlaterN2();
    if (name == "n2-q2-product") return asymmetricTrial(2);
    if (name == "n3-q1-slater") return slaterTrial(3);
    if (name == "n3-q2-blocks") return blockTrial(SymmetryPartition({{0, 1}, {2}}, 3));
    if (name == "n3-q3-product") return asymmetricTrial(3);
    if (name == "n3-symmetric") return symmetricTrial(3);
    if (name == "n4-symmetric") return symmetricTrial(4);
    if (name == "n4-q1-offset") return offsetSlaterTrial(4, {0.4, 0.4, 0.4});
    throw InvalidArgumentError("unknown preset trial '" + name + "'");
}

}  // namespace ltlab
