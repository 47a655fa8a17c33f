#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltlab/constants.hpp"
#include "ltlab/error.hpp"
#include "ltlab/mc.hpp"
#include "ltlab/trial.hpp"

namespace ltlab::cli {

/// Invalid or inconsistent configuration; the message starts with the dotted field path.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct TrialConfig {
    std::string preset;
    std::size_t particles = 0;
    CoreForm form = CoreForm::SlaterProduct;
    std::vector<GaussianOrbital> orbitals;
    Cutoff cutoff;
    Box support;
    /// 0-based here; the config file uses labels 1..N.
    std::vector<std::vector<std::size_t>> partition;
};

struct HarmonicityConfig {
    std::vector<std::size_t> particles;
    std::size_t configurations = 100;
    double minDistance = 0.1;
    double step = 1e-4;
    double tolerance = 1e-3;
    Box box;
};

struct CubeSpec {
    Vec3 center;
    double side = 1.0;
};

struct ExperimentConfig {
    /// Every field with defaults filled in, as embedded in reports.
    nlohmann::json resolved;

    TrialConfig trial;
    WeightSpec weight = CoulombWeight{};
    SamplingStrategy sampling;
    std::size_t gridResolution = 24;
    double relCutoff = 1e-3;
    double threshold = 3.0;

    MOmegaOptions momega;
    std::size_t spectatorParticles = 5;
    std::size_t placements = 5;
    STildeOptions stilde;
    std::size_t sobolevNodes = 64;

    HarmonicityConfig harmonicity;
    std::size_t identityResolution = 14;
    std::size_t identityCoreNodes = 12;
    double identityTolerance = 1e-3;
    std::size_t hoQuadratureResolution = 0;
    std::vector<CubeSpec> exclusionCubes;
    std::size_t exclusionRandomCubes = 10;
    std::vector<double> exclusionSides;
    std::optional<double> boxN, boxQ, boxL;
    std::vector<Vec3> probes;
    std::size_t probeCount = 10;
    double probeRadius = 0.5;

    std::string outDir = "ltlab-out";
    bool binaryGrid = false;

    /// Per-subcommand threshold override, falling back to the global one.
    double thresholdFor(const std::string& subcommand) const;
    TrialFunction buildTrial() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<std::string> outDir;
};

/// Parses and validates a JSON config (unknown keys are errors) and applies command-line overrides.
ExperimentConfig parseConfig(const nlohmann::json& user, const Overrides& overrides = {});
/// Reads `path` and calls parseConfig; an empty path means all defaults.
ExperimentConfig loadConfig(const std::string& path, const Overrides& overrides = {});

/// The default document (trial expanded from the default preset).
nlohmann::json defaultConfig();

}  // namespace ltlab::cli
