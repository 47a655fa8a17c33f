#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ltlab/vec3.hpp"

namespace ltlab {

// ---------------------------------------------------------------------------
// M_omega for omega = g^2 on the unit cube pair C x C in R^6

struct MOmegaOptions {
    /// Sampled ball centres (w1, w2) in C x C.
    std::size_t centers = 10000;
    /// Inner samples per ball in the screening pass.
    std::size_t innerSamples = 256;
    /// The best `refineTop` screened balls are re-estimated with `refineSamples` inner samples.
    std::size_t refineTop = 32;
    std::size_t refineSamples = 16384;
    /// Radii are drawn log-uniformly in [minRadius, sqrt 6].
    double minRadius = 1e-3 * 2.449489742783178;
    double safety = 1.5;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
};

struct MOmegaEstimate {
    /// Largest refined ratio mean(omega) / inf(omega) over the sampled balls.
    double raw = 1.0;
    double safety = 1.5;
    /// raw * safety.
    double value = 1.5;
    Vec3 bestW1, bestW2;
    double bestRadius = 0.0;
    double bestMean = 0.0;
    double bestInf = 0.0;
    std::size_t centers = 0;
};

/// omega(x1, x2) on the unit cube pair.
using OmegaFn = std::function<double(const Vec3&, const Vec3&)>;

/// M_omega for omega(x1, x2) = g(x1, x2, spectators)^2. Inner means use self-normalised importance
/// sampling from a mixture of the uniform ball and 1/r^2 shells around x1 = x2 and around the
/// spectators; infima are the minimum over samples refined by projected descent (g is harmonic
/// in (x1, x2), so the infimum sits on the boundary of the region).
MOmegaEstimate estimateMOmega(const std::vector<Vec3>& spectators, const MOmegaOptions& options = {});

/// Same ratio for an arbitrary bounded positive omega, sampled uniformly (no singular shells).
MOmegaEstimate estimateMOmega(const OmegaFn& omega, const MOmegaOptions& options = {});

struct MOmegaSweep {
    MOmegaEstimate best;
    std::vector<MOmegaEstimate> runs;
    std::vector<std::vector<Vec3>> spectatorSets;
};

/// Runs the empty spectator set plus `placements` random placements of N - 2 spectators in
/// [-0.5, 1.5]^3 and keeps the largest estimate.
MOmegaSweep sweepMOmega(std::size_t N, std::size_t placements, const MOmegaOptions& options = {});

// ---------------------------------------------------------------------------
// Poincare, Sobolev and mixing constants

inline constexpr double kUnitBall6Volume = 5.16771278004997;  // pi^3 / 6

struct PoincareConstants {
    double kPoincare = 0.0;
    double k = 0.0;
};

/// kPoincare = 1 / (2^3 3^6 |B^6|^2 M^3) * |Omega|^2 / d^14 with |Omega| = 1, d = sqrt 6; k = kPoincare / 2.
PoincareConstants poincareConstants(double MOmega);

/// Sharp Sobolev constant of R^3, 3 (pi/2)^{4/3}, evaluated as the quotient of (1 + |x|^2)^{-1/2}.
double sobolevS(std::size_t nodes = 64);

/// ||grad u||_2^2 / ||u||_6^2 of a radial u on R^3 by Gauss-Legendre in theta with r = tan(theta).
double sobolevQuotientRadial(const std::function<double(double)>& u, const std::function<double(double)>& du,
                             std::size_t nodes = 64);

/// int_Q |grad u|^2 / ||u - avg u||_{L^6(Q)}^2 for u on the unit cube Q = [0,1]^3 (shifted by
/// `corner`), by tensor Gauss-Legendre on a mesh graded towards the lower corner.
double poincareSobolevQuotient(const std::function<double(const Vec3&)>& u,
                               const std::function<Vec3(const Vec3&)>& grad, const Vec3& corner = {},
                               std::size_t nodes = 12, std::size_t gradedLevels = 0);

struct STildeOptions {
    /// Polynomial degrees per axis tried in increasing order (each warm-started from the last).
    std::vector<std::size_t> degrees{1, 2, 3, 4, 5, 6};
    std::size_t iterations = 300;
    std::size_t randomStarts = 4;
    /// Corner bubbles (eps^2 + |x|^2)^{-1/2} added to the trial set.
    std::vector<double> bubbleWidths{0.2, 0.1, 0.05, 0.02};
    double safety = 0.5;
    std::uint64_t seed = 7;
};

struct STildeEstimate {
    /// Minimum quotient per polynomial degree (non-increasing).
    std::vector<double> polynomialMinima;
    std::vector<double> bubbleQuotients;
    /// S / 4, the limit of corner bubbles as their width goes to 0.
    double cornerLimit = 0.0;
    /// Smallest quotient found (including cornerLimit): an upper bound on the best constant.
    double trialMinimum = 0.0;
    double safety = 0.5;
    /// safety * trialMinimum.
    double value = 0.0;
    std::size_t basisSize = 0;
};

/// Non-rigorous estimate of the best constant in int_Q |grad u|^2 >= S~ ||u - avg u||_6^2 on the
/// unit cube, from tensor shifted-Legendre polynomials (constant removed), corner bubbles and their
/// zero-width limit.
STildeEstimate poincareSobolevSTilde(const STildeOptions& options = {});

/// min{1 / (1 + 28 kappa / 3), 4 (1 - 2 / kappa)}.
double kappaObjective(double kappa);

struct KappaOptimum {
    double kappaStar = 0.0;
    double supValue = 0.0;
    /// (239 - sqrt 56977) / 6.
    double closedForm = 0.0;
};

/// Crossing of the two branches by bisection on (2, 4); throws StructuralError if not bracketed or if
/// the result misses the closed form by more than 1e-9.
KappaOptimum kappaOptimum();

struct ConstantsReport {
    double MOmega = 0.0;
    double kPoincare = 0.0;
    double k = 0.0;
    double S = 0.0;
    double STilde = 0.0;
    double lambda = 0.0;
    /// 1 - lambda computed without cancellation (k is many orders below S~).
    double oneMinusLambda = 0.0;
    double kappaStar = 0.0;
    double supValue = 0.0;
    double CTilde = 0.0;
    double C = 0.0;
    /// k lambda / 2 - (1 - lambda) S~ / 9, relative to k lambda / 2.
    double mixingResidual = 0.0;
    /// How each value was obtained; callers overwrite the "input" entries and add MOmega / kPoincare.
    std::map<std::string, std::string> provenance;
};

/// lambda = (1 + 9k / (2 S~))^{-1}, C~ = 2^{-11/3} supValue / (2/k + 9/S~), C = min(C~, 2^{-2/3} S / 9).
ConstantsReport assembleConstants(double k, double S, double STilde);

}  // namespace ltlab
