#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ltlab/error.hpp"
#include "ltlab/geometry.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

/// Result of a Monte Carlo integral.
struct MCEstimate {
    double mean = 0.0;
    double stdError = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    /// (sum |w|)^2 / sum w^2 over the per-sample contributions; never exceeds `samples`.
    double ess = 0.0;
    std::string rng = kRngAlgorithm;
};

enum class SamplingKind {
    /// Every particle drawn from the base per-particle density.
    UniformBox,
    /// Base density mixed with shells around every coincidence diagonal x_i = x_j.
    PairStratified,
};

/// Proposal for configurations in box^N.
///
/// The per-particle base density is uniformFraction * U(box) + (1 - uniformFraction) * (equal
/// mixture of isotropic Gaussians of width lobeWidth at lobeCenters). PairStratified additionally
/// spends shellFraction of the samples on configurations where a random pair (i, j) has
/// x_j = x_i + r w with r ~ U(0, shellRadius); that density ~ 1/r^2 cancels the r^-2
/// singularity of g^2 so weights stay bounded.
struct SamplingStrategy {
    SamplingKind kind = SamplingKind::PairStratified;
    Box box{{-1, -1, -1}, {1, 1, 1}};
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    double shellFraction = 0.2;
    double shellRadius = 0.1;
    /// Fixed external points (e.g. a pinned particle); PairStratified also places shells around them.
    std::vector<Vec3> anchors;
    std::vector<Vec3> lobeCenters;
    double lobeWidth = 0.0;
    double uniformFraction = 1.0;
    /// Fixed work decomposition; estimates depend on the shard count but never on `threads`.
    std::size_t shards = 16;
    /// Worker threads, 0 = hardware concurrency.
    std::size_t threads = 0;
};

/// Throws InvalidArgumentError on inconsistent fields.
void validate(const SamplingStrategy& s);

class Proposal {
public:
    Proposal(const SamplingStrategy& s, std::size_t particles);

    /// Draws a configuration into `X` (never below the coincidence threshold) and returns its
    /// proposal density.
    double draw(Rng& rng, Configuration& X) const;
    double density(const Configuration& X) const;
    /// True when every particle lies in the box (outside it the integrand is taken as 0).
    bool inDomain(const Configuration& X) const;
    std::size_t particles() const { return n_; }

private:
    double baseDensity(const Vec3& x) const;
    const Vec3& pairPoint(const Configuration& X, std::size_t i) const;
    Vec3 drawBase(Rng& rng) const;

    SamplingStrategy s_;
    std::size_t n_;
    double boxVolume_;
    double shellFraction_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

namespace detail {
/// Runs task(k) for k in [0, count) on up to `threads` workers; rethrows the first exception.
void parallelFor(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);
std::uint64_t shardSamples(const SamplingStrategy& s, std::size_t shard);
}  // namespace detail

/// Draws the strategy's samples shard by shard. For every sample `body(acc, X, invPdf)` is called
/// with invPdf = 1/p(X), or 0 when X leaves the box. One accumulator per shard, in shard order.
template <class Acc, class Body>
std::vector<Acc> runSharded(const SamplingStrategy& s, std::size_t particles, const Acc& init, Body body) {
    validate(s);
    const Proposal proposal(s, particles);
    std::vector<Acc> accs(s.shards, init);
    detail::parallelFor(s.shards, s.threads, [&](std::size_t shard) {
        Rng rng(deriveSeed(s.seed, shard));
        Configuration X{std::vector<Vec3>(particles)};
        const std::uint64_t count = detail::shardSamples(s, shard);
        Acc& acc = accs[shard];
        for (std::uint64_t k = 0; k < count; ++k) {
            const double p = proposal.draw(rng, X);
            const double invPdf = proposal.inDomain(X) ? 1.0 / p : 0.0;
            body(acc, X, invPdf);
        }
    });
    return accs;
}

/// Streaming mean/variance (Welford) with fixed-order merge.
struct Moments {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double sumAbs = 0.0;
    double sumSq = 0.0;

    void add(double v);
    void merge(const Moments& o);
    MCEstimate estimate(std::uint64_t seed) const;
};

using Integrand = std::function<double(const Configuration&)>;

/// Unbiased estimate of the integral of `integrand` over box^N. Throws NonFiniteValueError
/// (naming the offending configuration) if the integrand is not finite.
MCEstimate integrate(const Integrand& integrand, std::size_t particles, const SamplingStrategy& strategy);

/// Several integrals from one sample stream; `integrands(X, out)` fills out.size() values.
std::vector<MCEstimate> integrateMany(const std::function<void(const Configuration&, std::span<double>)>& integrands,
                                      std::size_t count, std::size_t particles, const SamplingStrategy& strategy);

struct WeightedSamples {
    std::size_t particles = 0;
    /// Sample k occupies points[k*N .. k*N + N).
    std::vector<Vec3> points;
    /// g^2 |f|^2 / p for each sample.
    std::vector<double> weights;
    double ess = 0.0;
    bool lowEss = false;

    std::size_t size() const { return weights.size(); }
    /// Mean weight: an estimate of ||f||^2.
    double meanWeight() const;
};

class TrialFunction;

/// Weighted configurations whose self-normalised empirical measure targets g^2 |f|^2 dX / ||f||^2.
/// lowEss is set when ess < 1% of the samples.
WeightedSamples sampleDensityWeighted(const TrialFunction& f, const SamplingStrategy& strategy);

// ---------------------------------------------------------------------------
// Deterministic quadrature

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t m);
};

struct QuadratureResult {
    double value = 0.0;
    /// Value at resolution ceil(m/2).
    double coarseValue = 0.0;
    double delta = 0.0;
    std::size_t resolution = 0;
};

class QuadratureResolutionError : public Error {
public:
    using Error::Error;
};

/// Integral over box1 x box2 of an N = 2 integrand, by tensor Gauss-Legendre in the centre of mass
/// R = (x1 + x2)/2 and the relative coordinate r = x1 - x2. The relative box is split into six
/// pyramids with apex at r = 0 and parameterised r = t p, p on a face; the Jacobian t^2 cancels
/// |r|^-2 exactly. If |delta| > relTolerance * |value| a QuadratureResolutionError is thrown.
QuadratureResult quadratureN2(const Integrand& integrand, const Box& box1, const Box& box2, std::size_t resolution,
                              double relTolerance = std::numeric_limits<double>::infinity());

}  // namespace ltlab
