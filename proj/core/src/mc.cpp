#include "ltlab/mc.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "ltlab/error.hpp"
#include "ltlab/trial.hpp"

namespace ltlab {

void validate(const SamplingStrategy& s) {
    if (s.samples == 0) throw InvalidArgumentError("sampling: samples must be positive");
    if (s.shards == 0) throw InvalidArgumentError("sampling: shards must be positive");
    for (std::size_t d = 0; d < 3; ++d)
        if (!(s.box.extent(d) > 0.0)) throw InvalidArgumentError("sampling: box must have positive extent");
    if (s.kind == SamplingKind::PairStratified) {
        if (!(s.shellFraction > 0.0 && s.shellFraction < 1.0))
            throw InvalidArgumentError("sampling: shell fraction must lie in (0,1)");
        if (!(s.shellRadius > 0.0)) throw InvalidArgumentError("sampling: shell radius must be positive");
    }
    if (!(s.uniformFraction >= 0.0 && s.uniformFraction <= 1.0))
        throw InvalidArgumentError("sampling: uniform fraction must lie in [0,1]");
    if (s.uniformFraction < 1.0 && (s.lobeCenters.empty() || !(s.lobeWidth > 0.0)))
        throw InvalidArgumentError("sampling: uniform fraction < 1 needs lobe centres and a positive lobe width");
}

// ---------------------------------------------------------------------------
// Proposal

Proposal::Proposal(const SamplingStrategy& s, std::size_t particles)
    : s_(s), n_(particles), boxVolume_(s.box.volume()),
      shellFraction_(s.kind == SamplingKind::PairStratified ? s.shellFraction : 0.0) {
    if (particles < 1) throw InvalidArgumentError("proposal needs at least one particle");
    // Pair (i, j) moves particle j next to i; indices i >= N refer to anchors.
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) pairs_.emplace_back(i, j);
    for (std::size_t a = 0; a < s_.anchors.size(); ++a)
        for (std::size_t j = 0; j < n_; ++j) pairs_.emplace_back(n_ + a, j);
    if (pairs_.empty()) shellFraction_ = 0.0;
}

const Vec3& Proposal::pairPoint(const Configuration& X, std::size_t i) const {
    return i < n_ ? X[i] : s_.anchors[i - n_];
}

double Proposal::baseDensity(const Vec3& x) const {
    double p = 0.0;
    if (s_.uniformFraction > 0.0 && s_.box.contains(x)) p += s_.uniformFraction / boxVolume_;
    if (s_.uniformFraction < 1.0) {
        const double inv = 1.0 / (s_.lobeWidth * s_.lobeWidth);
        const double norm = std::pow(2.0 * std::numbers::pi * s_.lobeWidth * s_.lobeWidth, -1.5);
        double sum = 0.0;
        for (const auto& c : s_.lobeCenters) sum += std::exp(-0.5 * ltlab::norm2(x - c) * inv);
        p += (1.0 - s_.uniformFraction) * norm * sum / static_cast<double>(s_.lobeCenters.size());
    }
    return p;
}

Vec3 Proposal::drawBase(Rng& rng) const {
    if (s_.uniformFraction >= 1.0 || rng.uniform() < s_.uniformFraction) return rng.uniformInBox(s_.box);
    const auto& c = s_.lobeCenters[rng.below(s_.lobeCenters.size())];
    return c + Vec3{rng.normal(), rng.normal(), rng.normal()} * s_.lobeWidth;
}

double Proposal::draw(Rng& rng, Configuration& X) const {
    for (;;) {
        if (shellFraction_ > 0.0 && rng.uniform() < shellFraction_) {
            const auto [i, j] = pairs_[rng.below(pairs_.size())];
            for (std::size_t k = 0; k < n_; ++k)
                if (k != j) X[k] = drawBase(rng);
            const double r = s_.shellRadius * rng.uniform();
            X[j] = pairPoint(X, i) + rng.unitVector() * r;
        } else {
            for (std::size_t k = 0; k < n_; ++k) X[k] = drawBase(rng);
        }
        bool clear = n_ < 2 || minPairDistance(X) >= kCoincidenceThreshold;
        for (const auto& a : s_.anchors)
            for (std::size_t k = 0; clear && k < n_; ++k) clear = norm(X[k] - a) >= kCoincidenceThreshold;
        if (clear) break;
    }
    return density(X);
}

double Proposal::density(const Configuration& X) const {
    std::vector<double> base(n_);
    double product = 1.0;
    for (std::size_t k = 0; k < n_; ++k) {
        base[k] = baseDensity(X[k]);
        product *= base[k];
    }
    double p = (1.0 - shellFraction_) * product;
    if (shellFraction_ > 0.0) {
        const double shellNorm = 1.0 / (4.0 * std::numbers::pi * s_.shellRadius);
        double shell = 0.0;
        for (const auto& [i, j] : pairs_) {
            const double r = norm(X[j] - pairPoint(X, i));
            if (r >= s_.shellRadius) continue;
            double others = 1.0;
            for (std::size_t k = 0; k < n_; ++k)
                if (k != j) others *= base[k];
            shell += others * shellNorm / (r * r);
        }
        p += shellFraction_ / static_cast<double>(pairs_.size()) * shell;
    }
    return p;
}

bool Proposal::inDomain(const Configuration& X) const {
    for (std::size_t k = 0; k < n_; ++k)
        if (!s_.box.contains(X[k])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Sharded execution

namespace detail {

void parallelFor(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
    std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < count; k += workers) {
                try {
                    task(k);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first) first = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

std::uint64_t shardSamples(const SamplingStrategy& s, std::size_t shard) {
    const std::uint64_t base = s.samples / s.shards;
    return base + (shard < s.samples % s.shards ? 1 : 0);
}

}  // namespace detail

void Moments::add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
    sumAbs += std::abs(v);
    sumSq += v * v;
}

void Moments::merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double total = na + nb;
    mean += d * nb / total;
    m2 += o.m2 + d * d * na * nb / total;
    n += o.n;
    sumAbs += o.sumAbs;
    sumSq += o.sumSq;
}

MCEstimate Moments::estimate(std::uint64_t seed) const {
    MCEstimate e;
    e.mean = mean;
    e.samples = n;
    e.seed = seed;
    e.stdError = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n)) : 0.0;
    e.ess = sumSq > 0.0 ? std::min(static_cast<double>(n), sumAbs * sumAbs / sumSq) : 0.0;
    return e;
}

namespace {

[[noreturn]] void throwNonFinite(const Configuration& X, double v) {
    std::ostringstream os;
    os.precision(17);
    os << "integrand returned " << v << " at X = [";
    for (std::size_t k = 0; k < X.size(); ++k)
        os << (k ? ", " : "") << "(" << X[k].x << ", " << X[k].y << ", " << X[k].z << ")";
    os << "]";
    throw NonFiniteValueError(os.str());
}

}  // namespace

MCEstimate integrate(const Integrand& integrand, std::size_t particles, const SamplingStrategy& strategy) {
    const auto accs = runSharded(strategy, particles, Moments{}, [&](Moments& m, const Configuration& X, double invPdf) {
        if (invPdf == 0.0) {
            m.add(0.0);
            return;
        }
        const double v = integrand(X);
        if (!std::isfinite(v)) throwNonFinite(X, v);
        m.add(v * invPdf);
    });
    Moments total;
    for (const auto& a : accs) total.merge(a);
    return total.estimate(strategy.seed);
}

std::vector<MCEstimate> integrateMany(const std::function<void(const Configuration&, std::span<double>)>& integrands,
                                      std::size_t count, std::size_t particles, const SamplingStrategy& strategy) {
    const auto accs = runSharded(strategy, particles, std::vector<Moments>(count),
                                 [&](std::vector<Moments>& m, const Configuration& X, double invPdf) {
                                     std::vector<double> out(count, 0.0);
                                     if (invPdf != 0.0) {
                                         integrands(X, out);
                                         for (double v : out)
                                             if (!std::isfinite(v)) throwNonFinite(X, v);
                                     }
                                     for (std::size_t c = 0; c < count; ++c) m[c].add(out[c] * invPdf);
                                 });
    std::vector<Moments> total(count);
    for (const auto& a : accs)
        for (std::size_t c = 0; c < count; ++c) total[c].merge(a[c]);
    std::vector<MCEstimate> out;
    out.reserve(count);
    for (const auto& t : total) out.push_back(t.estimate(strategy.seed));
    return out;
}

double WeightedSamples::meanWeight() const {
    if (weights.empty()) return 0.0;
    double s = 0.0;
    for (double w : weights) s += w;
    return s / static_cast<double>(weights.size());
}

WeightedSamples sampleDensityWeighted(const TrialFunction& f, const SamplingStrategy& strategy) {
    struct Chunk {
        std::vector<Vec3> pts;
        std::vector<double> w;
    };
    const std::size_t n = f.particles();
    const auto chunks = runSharded(strategy, n, Chunk{}, [&](Chunk& c, const Configuration& X, double invPdf) {
        double w = 0.0;
        if (invPdf != 0.0) {
            const double v = f.weightedDensity(X);
            if (!std::isfinite(v)) throwNonFinite(X, v);
            w = v * invPdf;
        }
        c.pts.insert(c.pts.end(), X.points().begin(), X.points().end());
        c.w.push_back(w);
    });
    WeightedSamples out;
    out.particles = n;
    for (const auto& c : chunks) {
        out.points.insert(out.points.end(), c.pts.begin(), c.pts.end());
        out.weights.insert(out.weights.end(), c.w.begin(), c.w.end());
    }
    double s1 = 0.0, s2 = 0.0;
    for (double w : out.weights) {
        s1 += w;
        s2 += w * w;
    }
    out.ess = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
    out.lowEss = out.ess < 0.01 * static_cast<double>(out.weights.size());
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature

GaussLegendre::GaussLegendre(std::size_t m) {
    if (m == 0) throw InvalidArgumentError("Gauss-Legendre rule needs at least one node");
    const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(m));
    for (double x : zeros) {
        const double dp = boost::math::legendre_p_prime(static_cast<int>(m), x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push_back(x);
        weights.push_back(w);
        if (x != 0.0) {
            nodes.push_back(-x);
            weights.push_back(w);
        }
    }
    std::vector<std::size_t> idx(nodes.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<double> n2, w2;
    for (std::size_t k : idx) {
        n2.push_back(nodes[k]);
        w2.push_back(weights[k]);
    }
    nodes = std::move(n2);
    weights = std::move(w2);
}

namespace {

/// Nodes and weights of the rule mapped to [a, b].
struct MappedRule {
    std::vector<double> x;
    std::vector<double> w;
};

MappedRule mapRule(const GaussLegendre& gl, double a, double b) {
    MappedRule r;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    r.x.resize(gl.nodes.size());
    r.w.resize(gl.nodes.size());
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        r.x[k] = mid + half * gl.nodes[k];
        r.w[k] = half * gl.weights[k];
    }
    return r;
}

double quadN2(const Integrand& integrand, const Box& b1, const Box& b2, std::size_t m) {
    const GaussLegendre gl(m);
    Configuration X(std::vector<Vec3>(2));
    Vec3 rlo, rhi;
    for (std::size_t d = 0; d < 3; ++d) {
        rlo[d] = b1.lo[d] - b2.hi[d];
        rhi[d] = b1.hi[d] - b2.lo[d];
    }
    const bool originInside = rlo.x <= 0 && rhi.x >= 0 && rlo.y <= 0 && rhi.y >= 0 && rlo.z <= 0 && rhi.z >= 0;

    // Integral over R of integrand(R + r/2, R - r/2) for fixed r.
    auto comInner = [&](const Vec3& r) {
        std::array<MappedRule, 3> rules;
        for (std::size_t d = 0; d < 3; ++d) {
            const double lo = std::max(b1.lo[d] - 0.5 * r[d], b2.lo[d] + 0.5 * r[d]);
            const double hi = std::min(b1.hi[d] - 0.5 * r[d], b2.hi[d] + 0.5 * r[d]);
            if (!(hi > lo)) return 0.0;
            rules[d] = mapRule(gl, lo, hi);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double wij = rules[0].w[i] * rules[1].w[j];
                for (std::size_t k = 0; k < m; ++k) {
                    const Vec3 R{rules[0].x[i], rules[1].x[j], rules[2].x[k]};
                    X[0] = R + r * 0.5;
                    X[1] = R - r * 0.5;
                    sum += wij * rules[2].w[k] * integrand(X);
                }
            }
        }
        return sum;
    };

    if (!originInside) {
        // Boxes far enough apart that x1 = x2 never occurs: plain product rule in (x1, x2).
        std::array<MappedRule, 3> r1, r2;
        for (std::size_t d = 0; d < 3; ++d) {
            r1[d] = mapRule(gl, b1.lo[d], b1.hi[d]);
            r2[d] = mapRule(gl, b2.lo[d], b2.hi[d]);
        }
        double sum = 0.0;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                for (std::size_t c = 0; c < m; ++c) {
                    X[0] = {r1[0].x[a], r1[1].x[b], r1[2].x[c]};
                    const double w1 = r1[0].w[a] * r1[1].w[b] * r1[2].w[c];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < m; ++j)
                            for (std::size_t k = 0; k < m; ++k) {
                                X[1] = {r2[0].x[i], r2[1].x[j], r2[2].x[k]};
                                sum += w1 * r2[0].w[i] * r2[1].w[j] * r2[2].w[k] * integrand(X);
                            }
                }
        return sum;
    }

    const MappedRule tRule = mapRule(gl, 0.0, 1.0);
    double total = 0.0;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const std::size_t b = (axis + 1) % 3;
        const std::size_t c = (axis + 2) % 3;
        const MappedRule uRule = mapRule(gl, rlo[b], rhi[b]);
        const MappedRule vRule = mapRule(gl, rlo[c], rhi[c]);
        for (const double face : {rlo[axis], rhi[axis]}) {
            if (face == 0.0) continue;
            for (std::size_t it = 0; it < m; ++it) {
                const double t = tRule.x[it];
                const double jac = t * t * std::abs(face);
                for (std::size_t iu = 0; iu < m; ++iu) {
                    for (std::size_t iv = 0; iv < m; ++iv) {
                        Vec3 p;
                        p[axis] = face;
                        p[b] = uRule.x[iu];
                        p[c] = vRule.x[iv];
                        total += tRule.w[it] * uRule.w[iu] * vRule.w[iv] * jac * comInner(p * t);
                    }
                }
            }
        }
    }
    return total;
}

}  // namespace

QuadratureResult quadratureN2(const Integrand& integrand, const Box& box1, const Box& box2, std::size_t resolution,
                              double relTolerance) {
    if (resolution < 2) throw InvalidArgumentError("quadratureN2: resolution must be at least 2");
    QuadratureResult r;
    r.resolution = resolution;
    r.value = quadN2(integrand, box1, box2, resolution);
    r.coarseValue = quadN2(integrand, box1, box2, (resolution + 1) / 2);
    r.delta = std::abs(r.value - r.coarseValue);
    if (r.delta > relTolerance * std::abs(r.value)) {
        std::ostringstream os;
        os << "quadratureN2: resolution " << resolution << " too low (|value(m) - value(m/2)| = " << r.delta
           << ", value = " << r.value << ")";
        throw QuadratureResolutionError(os.str());
    }
    return r;
}

}  // namespace ltlab
