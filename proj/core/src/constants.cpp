#include "ltlab/constants.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ltlab/error.hpp"
#include "ltlab/mc.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

namespace {

constexpr double kSqrt6 = 2.449489742783178;

// ---------------------------------------------------------------------------
// M_omega

struct Point6 {
    Vec3 a, b;
};

double dist6(const Point6& p, const Point6& q) { return std::sqrt(norm2(p.a - q.a) + norm2(p.b - q.b)); }

bool inUnitCube(const Vec3& x) { return x.x >= 0 && x.x <= 1 && x.y >= 0 && x.y <= 1 && x.z >= 0 && x.z <= 1; }

double ball3Volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }
double ball6Volume(double r) { return std::pow(std::numbers::pi, 3) / 6.0 * std::pow(r, 6); }

Vec3 inBall3(Rng& rng, const Vec3& c, double r) { return c + rng.unitVector() * (r * std::cbrt(rng.uniform())); }

Point6 inBall6(Rng& rng, const Point6& c, double r) {
    std::array<double, 6> v{};
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            n2 += x * x;
        }
    } while (n2 == 0.0);
    const double s = r * std::pow(rng.uniform(), 1.0 / 6.0) / std::sqrt(n2);
    return {c.a + Vec3{v[0], v[1], v[2]} * s, c.b + Vec3{v[3], v[4], v[5]} * s};
}

/// Density of x = c + rho w with rho ~ U(0, delta), w uniform on the sphere.
double shellDensity(const Vec3& v, double delta) {
    const double r2 = norm2(v);
    if (r2 >= delta * delta || r2 == 0.0) return 0.0;
    return 1.0 / (4.0 * std::numbers::pi * r2 * delta);
}

/// omega = g^2 with x1, x2 free and fixed spectators, or a user-supplied bounded omega.
struct OmegaModel {
    const OmegaFn* custom = nullptr;
    std::vector<Vec3> spectators;
    double spectatorPairs = 0.0;

    explicit OmegaModel(std::vector<Vec3> s) : spectators(std::move(s)) {
        for (std::size_t i = 0; i < spectators.size(); ++i)
            for (std::size_t j = i + 1; j < spectators.size(); ++j)
                spectatorPairs += 1.0 / norm(spectators[i] - spectators[j]);
    }
    explicit OmegaModel(const OmegaFn* f) : custom(f) {}

    bool singular() const { return custom == nullptr; }

    /// g(x1, x2), or nan at a coincidence.
    double g(const Point6& p) const {
        const double r12 = norm(p.a - p.b);
        if (r12 < kCoincidenceThreshold) return NAN;
        double s = 1.0 / r12 + spectatorPairs;
        for (const auto& x : spectators) {
            const double r1 = norm(p.a - x), r2 = norm(p.b - x);
            if (r1 < kCoincidenceThreshold || r2 < kCoincidenceThreshold) return NAN;
            s += 1.0 / r1 + 1.0 / r2;
        }
        return s;
    }

    double omega(const Point6& p) const {
        if (custom) return (*custom)(p.a, p.b);
        const double v = g(p);
        return v * v;
    }

    /// Gradient of g with respect to (x1, x2).
    Point6 gradG(const Point6& p) const {
        auto term = [](const Vec3& d) { return d * (-1.0 / std::pow(norm2(d), 1.5)); };
        Point6 out{term(p.a - p.b), term(p.b - p.a)};
        for (const auto& x : spectators) {
            out.a = out.a + term(p.a - x);
            out.b = out.b + term(p.b - x);
        }
        return out;
    }
};

struct BallResult {
    double mean = 0.0;
    double inf = INFINITY;
    double ratio = 0.0;
    Point6 argInf;
};

bool inRegion(const Point6& z, const Point6& w, double r) {
    return inUnitCube(z.a) && inUnitCube(z.b) && dist6(z, w) <= r;
}

/// Approximate Euclidean projection onto cube^2 cap ball by alternating projections.
Point6 projectRegion(Point6 z, const Point6& w, double r) {
    for (int it = 0; it < 60; ++it) {
        auto clamp = [](Vec3 v) {
            for (std::size_t d = 0; d < 3; ++d) v[d] = std::clamp(v[d], 0.0, 1.0);
            return v;
        };
        z.a = clamp(z.a);
        z.b = clamp(z.b);
        const double d = dist6(z, w);
        if (d <= r) break;
        const double s = r / d;
        z.a = w.a + (z.a - w.a) * s;
        z.b = w.b + (z.b - w.b) * s;
    }
    return z;
}

/// Projected descent on g from `start`; returns the smallest omega found in the region.
double refineInf(const OmegaModel& m, const Point6& w, double r, Point6 start, double current) {
    if (!m.singular()) return current;
    double best = current;
    Point6 z = start;
    for (int it = 0; it < 60; ++it) {
        const Point6 gr = m.gradG(z);
        const double gn = std::sqrt(norm2(gr.a) + norm2(gr.b));
        if (!(gn > 0.0) || !std::isfinite(gn)) break;
        double step = 0.25 * r / gn;
        bool improved = false;
        for (int h = 0; h < 30 && !improved; ++h, step *= 0.5) {
            Point6 y{z.a - gr.a * step, z.b - gr.b * step};
            y = projectRegion(y, w, r);
            if (!inRegion(y, w, r * (1.0 + 1e-12))) continue;
            const double v = m.omega(y);
            if (std::isfinite(v) && v < best) {
                best = v;
                z = y;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return best;
}

BallResult ballRatio(const OmegaModel& m, const Point6& w, double r, std::size_t n, Rng& rng, bool descend) {
    // Mixture: uniform 6-ball, x2 in a 1/r^2 shell around x1, x1 or x2 in a shell around a spectator.
    struct Comp {
        int kind;  // 0 uniform, 1 pair, 2 x1 near s, 3 x2 near s
        const Vec3* s;
        double alpha;
    };
    std::vector<Comp> comps;
    const double delta = r;
    if (m.singular()) {
        std::vector<Comp> spec;
        for (const auto& s : m.spectators) {
            if (norm(s - w.a) < 2.0 * r) spec.push_back({2, &s, 0.0});
            if (norm(s - w.b) < 2.0 * r) spec.push_back({3, &s, 0.0});
        }
        comps.push_back({0, nullptr, 0.4});
        comps.push_back({1, nullptr, spec.empty() ? 0.6 : 0.3});
        for (auto& c : spec) {
            c.alpha = 0.3 / static_cast<double>(spec.size());
            comps.push_back(c);
        }
    } else {
        comps.push_back({0, nullptr, 1.0});
    }
    const double v6 = ball6Volume(r), v3 = ball3Volume(r);
    auto density = [&](const Point6& z) {
        double p = 0.0;
        for (const auto& c : comps) {
            switch (c.kind) {
                case 0: p += c.alpha * (dist6(z, w) <= r ? 1.0 / v6 : 0.0); break;
                case 1: p += c.alpha * (norm(z.a - w.a) < r ? 1.0 / v3 : 0.0) * shellDensity(z.b - z.a, delta); break;
                case 2: p += c.alpha * shellDensity(z.a - *c.s, delta) * (norm(z.b - w.b) < r ? 1.0 / v3 : 0.0); break;
                case 3: p += c.alpha * (norm(z.a - w.a) < r ? 1.0 / v3 : 0.0) * shellDensity(z.b - *c.s, delta); break;
            }
        }
        return p;
    };

    BallResult out;
    double sw = 0.0, swo = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double u = rng.uniform();
        std::size_t ci = 0;
        while (ci + 1 < comps.size() && u >= comps[ci].alpha) u -= comps[ci++].alpha;
        const Comp& c = comps[ci];
        Point6 z;
        switch (c.kind) {
            case 0: z = inBall6(rng, w, r); break;
            case 1:
                z.a = inBall3(rng, w.a, r);
                z.b = z.a + rng.unitVector() * (delta * rng.uniform());
                break;
            case 2:
                z.a = *c.s + rng.unitVector() * (delta * rng.uniform());
                z.b = inBall3(rng, w.b, r);
                break;
            default:
                z.a = inBall3(rng, w.a, r);
                z.b = *c.s + rng.unitVector() * (delta * rng.uniform());
                break;
        }
        if (!inRegion(z, w, r)) continue;
        const double om = m.omega(z);
        if (!std::isfinite(om)) continue;
        const double wt = 1.0 / density(z);
        sw += wt;
        swo += wt * om;
        if (om < out.inf) {
            out.inf = om;
            out.argInf = z;
        }
    }
    if (!(sw > 0.0)) return out;
    out.mean = swo / sw;
    if (descend) out.inf = refineInf(m, w, r, out.argInf, out.inf);
    out.ratio = out.mean / out.inf;
    return out;
}

struct Candidate {
    double ratio = 0.0;
    Point6 w;
    double r = 0.0;
    std::size_t index = 0;
};

MOmegaEstimate runMOmega(const OmegaModel& model, const MOmegaOptions& o) {
    if (o.centers == 0 || o.innerSamples == 0) throw InvalidArgumentError("M_omega: sample counts must be positive");
    if (!(o.minRadius > 0.0 && o.minRadius <= kSqrt6)) throw InvalidArgumentError("M_omega: minRadius in (0, sqrt 6]");
    if (!(o.safety >= 1.0)) throw InvalidArgumentError("M_omega: safety factor must be >= 1");
    std::vector<Candidate> cand(o.centers);
    const std::size_t shards = 16;
    detail::parallelFor(shards, o.threads, [&](std::size_t shard) {
        for (std::size_t c = shard; c < o.centers; c += shards) {
            Rng rng(deriveSeed(o.seed, c));
            Point6 w;
            w.a = rng.uniformInBox({{0, 0, 0}, {1, 1, 1}});
            if (c % 2 == 0) {
                w.b = rng.uniformInBox({{0, 0, 0}, {1, 1, 1}});
            } else {
                const double s = std::exp(rng.uniform(std::log(1e-3), std::log(0.3)));
                w.b = w.a + Vec3{rng.normal(), rng.normal(), rng.normal()} * s;
                for (std::size_t d = 0; d < 3; ++d) w.b[d] = std::clamp(w.b[d], 0.0, 1.0);
            }
            const double r = std::exp(rng.uniform(std::log(o.minRadius), std::log(kSqrt6)));
            const BallResult b = ballRatio(model, w, r, o.innerSamples, rng, false);
            cand[c] = {b.ratio, w, r, c};
        }
    });
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min(std::max<std::size_t>(o.refineTop, 1), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::size_t x, std::size_t y) {
                          return cand[x].ratio != cand[y].ratio ? cand[x].ratio > cand[y].ratio : x < y;
                      });
    std::vector<BallResult> refined(top);
    detail::parallelFor(top, o.threads, [&](std::size_t t) {
        const Candidate& c = cand[order[t]];
        Rng rng(deriveSeed(o.seed ^ 0x5bd1e995u, c.index));
        refined[t] = ballRatio(model, c.w, c.r, std::max(o.refineSamples, o.innerSamples), rng, true);
    });
    MOmegaEstimate e;
    e.raw = 0.0;
    for (std::size_t t = 0; t < top; ++t) {
        if (refined[t].ratio > e.raw) {
            const Candidate& c = cand[order[t]];
            e.raw = refined[t].ratio;
            e.bestW1 = c.w.a;
            e.bestW2 = c.w.b;
            e.bestRadius = c.r;
            e.bestMean = refined[t].mean;
            e.bestInf = refined[t].inf;
        }
    }
    // The ratio is at least 1 by definition; sampling noise can only make the mean fall below the
    // sampled infimum for nearly constant omega.
    e.raw = std::max(e.raw, 1.0);
    e.safety = o.safety;
    e.value = e.raw * o.safety;
    e.centers = o.centers;
    return e;
}

}  // namespace

MOmegaEstimate estimateMOmega(const std::vector<Vec3>& spectators, const MOmegaOptions& options) {
    return runMOmega(OmegaModel(spectators), options);
}

MOmegaEstimate estimateMOmega(const OmegaFn& omega, const MOmegaOptions& options) {
    return runMOmega(OmegaModel(&omega), options);
}

MOmegaSweep sweepMOmega(std::size_t N, std::size_t placements, const MOmegaOptions& options) {
    if (N < 2) throw InvalidArgumentError("M_omega sweep: N must be at least 2");
    MOmegaSweep sweep;
    sweep.spectatorSets.push_back({});
    Rng rng(deriveSeed(options.seed, 0xA11CE));
    if (N > 2)
        for (std::size_t p = 0; p < placements; ++p) {
            std::vector<Vec3> s;
            for (std::size_t j = 2; j < N; ++j) s.push_back(rng.uniformInBox({{-0.5, -0.5, -0.5}, {1.5, 1.5, 1.5}}));
            sweep.spectatorSets.push_back(std::move(s));
        }
    for (std::size_t k = 0; k < sweep.spectatorSets.size(); ++k) {
        MOmegaOptions o = options;
        o.seed = deriveSeed(options.seed, k);
        sweep.runs.push_back(estimateMOmega(sweep.spectatorSets[k], o));
        if (sweep.runs.back().raw > sweep.best.raw || k == 0) sweep.best = sweep.runs.back();
    }
    return sweep;
}

// ---------------------------------------------------------------------------

PoincareConstants poincareConstants(double MOmega) {
    if (!(MOmega >= 1.0)) throw InvalidArgumentError("poincareConstants: M_omega must be >= 1");
    const double ball = std::pow(std::numbers::pi, 3) / 6.0;
    PoincareConstants c;
    c.kPoincare = 1.0 / (8.0 * 729.0 * ball * ball * MOmega * MOmega * MOmega * std::pow(6.0, 7));
    c.k = c.kPoincare / 2.0;
    return c;
}

double sobolevQuotientRadial(const std::function<double(double)>& u, const std::function<double(double)>& du,
                             std::size_t nodes) {
    const GaussLegendre gl(nodes);
    const double half = std::numbers::pi / 4.0;
    double grad = 0.0, six = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double th = half * (1.0 + gl.nodes[k]);
        const double r = std::tan(th);
        const double c = std::cos(th);
        const double jac = half * gl.weights[k] / (c * c);
        const double d = du(r), v = u(r);
        grad += jac * r * r * d * d;
        six += jac * r * r * std::pow(v, 6);
    }
    grad *= 4.0 * std::numbers::pi;
    six *= 4.0 * std::numbers::pi;
    return grad / std::cbrt(six);
}

double sobolevS(std::size_t nodes) {
    return sobolevQuotientRadial([](double r) { return 1.0 / std::sqrt(1.0 + r * r); },
                                 [](double r) { return -r / std::pow(1.0 + r * r, 1.5); }, nodes);
}

double poincareSobolevQuotient(const std::function<double(const Vec3&)>& u,
                               const std::function<Vec3(const Vec3&)>& grad, const Vec3& corner, std::size_t nodes,
                               std::size_t gradedLevels) {
    const GaussLegendre gl(nodes);
    std::vector<double> edges{0.0};
    for (std::size_t l = gradedLevels; l >= 1; --l) edges.push_back(std::ldexp(1.0, -static_cast<int>(l)));
    edges.push_back(1.0);
    std::vector<double> x, w;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double a = edges[e], b = edges[e + 1];
        for (std::size_t k = 0; k < nodes; ++k) {
            x.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[k]);
            w.push_back(0.5 * (b - a) * gl.weights[k]);
        }
    }
    const std::size_t m = x.size();
    std::vector<double> vals(m * m * m);
    double mean = 0.0, dir = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                const Vec3 p = corner + Vec3{x[i], x[j], x[k]};
                const double wt = w[i] * w[j] * w[k];
                const double v = u(p);
                vals[(i * m + j) * m + k] = v;
                mean += wt * v;
                dir += wt * norm2(grad(p));
            }
    double six = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k)
                six += w[i] * w[j] * w[k] * std::pow(vals[(i * m + j) * m + k] - mean, 6);
    return dir / std::cbrt(six);
}

// ---------------------------------------------------------------------------
// S~ from tensor Legendre polynomials

namespace {

/// Rayleigh-type quotient E(c) / B(c)^{1/3} on span{L_a(x) L_b(y) L_e(z)} minus constants, with
/// L_n the orthonormal shifted Legendre polynomials on [0, 1].
class LegendreQuotient {
public:
    explicit LegendreQuotient(std::size_t p) : p1_(p + 1), m_(3 * p + 1) {
        const GaussLegendre gl(m_);
        x_.resize(m_);
        w_.resize(m_);
        for (std::size_t q = 0; q < m_; ++q) {
            x_[q] = 0.5 * (1.0 + gl.nodes[q]);
            w_[q] = 0.5 * gl.weights[q];
        }
        V_.assign(m_ * p1_, 0.0);
        std::vector<double> D(m_ * p1_, 0.0);
        for (std::size_t q = 0; q < m_; ++q)
            for (std::size_t n = 0; n < p1_; ++n) {
                const double s = std::sqrt(2.0 * static_cast<double>(n) + 1.0);
                const double t = 2.0 * x_[q] - 1.0;
                V_[q * p1_ + n] = s * boost::math::legendre_p(static_cast<int>(n), t);
                D[q * p1_ + n] = n == 0 ? 0.0 : 2.0 * s * boost::math::legendre_p_prime(static_cast<int>(n), t);
            }
        S_.assign(p1_ * p1_, 0.0);
        for (std::size_t a = 0; a < p1_; ++a)
            for (std::size_t b = 0; b < p1_; ++b)
                for (std::size_t q = 0; q < m_; ++q) S_[a * p1_ + b] += w_[q] * D[q * p1_ + a] * D[q * p1_ + b];
    }

    std::size_t size() const { return p1_ * p1_ * p1_; }
    std::size_t degree() const { return p1_ - 1; }

    /// Quotient and gradient; coefficient 0 (the constant) is ignored and gets zero gradient.
    double evaluate(const std::vector<double>& c, std::vector<double>* grad) const {
        const std::size_t P = p1_, M = m_;
        auto C = [&](std::size_t a, std::size_t b, std::size_t e) { return (a | b | e) == 0 ? 0.0 : c[(a * P + b) * P + e]; };
        // Dirichlet energy and its gradient: stiffness along one axis, identity along the others.
        std::vector<double> gE(size(), 0.0);
        double E = 0.0;
        for (std::size_t a = 0; a < P; ++a)
            for (std::size_t b = 0; b < P; ++b)
                for (std::size_t e = 0; e < P; ++e) {
                    double s = 0.0;
                    for (std::size_t t = 0; t < P; ++t)
                        s += S_[a * P + t] * C(t, b, e) + S_[b * P + t] * C(a, t, e) + S_[e * P + t] * C(a, b, t);
                    gE[(a * P + b) * P + e] = 2.0 * s;
                    E += C(a, b, e) * s;
                }
        // u at the quadrature points by three successive contractions.
        std::vector<double> t1(M * P * P, 0.0), t2(M * M * P, 0.0), U(M * M * M, 0.0);
        for (std::size_t qx = 0; qx < M; ++qx)
            for (std::size_t a = 0; a < P; ++a) {
                const double v = V_[qx * P + a];
                for (std::size_t b = 0; b < P; ++b)
                    for (std::size_t e = 0; e < P; ++e) t1[(qx * P + b) * P + e] += v * C(a, b, e);
            }
        for (std::size_t qx = 0; qx < M; ++qx)
            for (std::size_t qy = 0; qy < M; ++qy)
                for (std::size_t b = 0; b < P; ++b) {
                    const double v = V_[qy * P + b];
                    for (std::size_t e = 0; e < P; ++e) t2[(qx * M + qy) * P + e] += v * t1[(qx * P + b) * P + e];
                }
        for (std::size_t qx = 0; qx < M; ++qx)
            for (std::size_t qy = 0; qy < M; ++qy)
                for (std::size_t qz = 0; qz < M; ++qz) {
                    double s = 0.0;
                    for (std::size_t e = 0; e < P; ++e) s += V_[qz * P + e] * t2[(qx * M + qy) * P + e];
                    U[(qx * M + qy) * M + qz] = s;
                }
        double B = 0.0;
        std::vector<double> G(M * M * M);
        for (std::size_t qx = 0; qx < M; ++qx)
            for (std::size_t qy = 0; qy < M; ++qy)
                for (std::size_t qz = 0; qz < M; ++qz) {
                    const double u = U[(qx * M + qy) * M + qz];
                    const double u2 = u * u;
                    const double wt = w_[qx] * w_[qy] * w_[qz];
                    B += wt * u2 * u2 * u2;
                    G[(qx * M + qy) * M + qz] = 6.0 * wt * u2 * u2 * u;
                }
        if (!(B > 0.0)) return INFINITY;
        const double cb = std::cbrt(B);
        const double R = E / cb;
        if (grad) {
            // dB/dc by contracting G back onto the basis.
            std::vector<double> s1(M * M * P, 0.0), s2(M * P * P, 0.0), gB(size(), 0.0);
            for (std::size_t qx = 0; qx < M; ++qx)
                for (std::size_t qy = 0; qy < M; ++qy)
                    for (std::size_t qz = 0; qz < M; ++qz) {
                        const double g = G[(qx * M + qy) * M + qz];
                        for (std::size_t e = 0; e < P; ++e) s1[(qx * M + qy) * P + e] += g * V_[qz * P + e];
                    }
            for (std::size_t qx = 0; qx < M; ++qx)
                for (std::size_t qy = 0; qy < M; ++qy)
                    for (std::size_t b = 0; b < P; ++b) {
                        const double v = V_[qy * P + b];
                        for (std::size_t e = 0; e < P; ++e) s2[(qx * P + b) * P + e] += v * s1[(qx * M + qy) * P + e];
                    }
            for (std::size_t qx = 0; qx < M; ++qx)
                for (std::size_t a = 0; a < P; ++a) {
                    const double v = V_[qx * P + a];
                    for (std::size_t b = 0; b < P; ++b)
                        for (std::size_t e = 0; e < P; ++e) gB[(a * P + b) * P + e] += v * s2[(qx * P + b) * P + e];
                }
            grad->assign(size(), 0.0);
            for (std::size_t i = 1; i < size(); ++i) (*grad)[i] = gE[i] / cb - R / (3.0 * B) * gB[i];
        }
        return R;
    }

    /// Coefficients of a lower-degree quotient padded into this basis.
    std::vector<double> embed(const LegendreQuotient& lower, const std::vector<double>& c) const {
        std::vector<double> out(size(), 0.0);
        const std::size_t Q = lower.p1_;
        for (std::size_t a = 0; a < Q; ++a)
            for (std::size_t b = 0; b < Q; ++b)
                for (std::size_t e = 0; e < Q; ++e) out[(a * p1_ + b) * p1_ + e] = c[(a * Q + b) * Q + e];
        return out;
    }

    std::size_t index(std::size_t a, std::size_t b, std::size_t e) const { return (a * p1_ + b) * p1_ + e; }

private:
    std::size_t p1_, m_;
    std::vector<double> x_, w_, V_, S_;
};

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// L-BFGS with Armijo backtracking; only decreasing steps are accepted.
double minimize(const LegendreQuotient& Q, std::vector<double>& c, std::size_t iterations) {
    const std::size_t hist = 8;
    std::vector<double> g, gNew, cNew;
    double f = Q.evaluate(c, &g);
    std::vector<std::vector<double>> S, Y;
    std::vector<double> rho;
    for (std::size_t it = 0; it < iterations; ++it) {
        // Two-loop recursion.
        std::vector<double> d = g;
        std::vector<double> alpha(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            alpha[k] = rho[k] * dotv(S[k], d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * Y[k][i];
        }
        if (!S.empty()) {
            const double gamma = dotv(S.back(), Y.back()) / dotv(Y.back(), Y.back());
            for (auto& v : d) v *= gamma;
        } else {
            const double scale = std::sqrt(dotv(c, c)) / std::max(1e-300, std::sqrt(dotv(g, g)));
            for (auto& v : d) v *= 0.1 * scale;
        }
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double beta = rho[k] * dotv(Y[k], d);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += S[k][i] * (alpha[k] - beta);
        }
        for (auto& v : d) v = -v;
        double slope = dotv(g, d);
        if (!(slope < 0.0)) {
            S.clear(), Y.clear(), rho.clear();
            d = g;
            const double scale = std::sqrt(dotv(c, c)) / std::max(1e-300, std::sqrt(dotv(g, g)));
            for (auto& v : d) v *= -0.1 * scale;
            slope = dotv(g, d);
            if (!(slope < 0.0)) break;
        }
        double step = 1.0;
        bool accepted = false;
        double fNew = f;
        for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
            cNew = c;
            for (std::size_t i = 0; i < c.size(); ++i) cNew[i] += step * d[i];
            fNew = Q.evaluate(cNew, &gNew);
            if (std::isfinite(fNew) && fNew <= f + 1e-4 * step * slope && fNew < f) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        std::vector<double> s(c.size()), y(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            s[i] = cNew[i] - c[i];
            y[i] = gNew[i] - g[i];
        }
        const double sy = dotv(s, y);
        if (sy > 1e-300) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
            if (S.size() > hist) {
                S.erase(S.begin());
                Y.erase(Y.begin());
                rho.erase(rho.begin());
            }
        }
        const bool converged = f - fNew < 1e-14 * std::abs(f);
        c = cNew;
        g = gNew;
        f = fNew;
        if (converged) break;
        // Keep |c| near 1; the quotient is scale invariant, the history is rescaled with it.
        const double nc = std::sqrt(dotv(c, c));
        if (nc > 1e3 || nc < 1e-3) {
            for (auto& v : c) v /= nc;
            f = Q.evaluate(c, &g);
            S.clear(), Y.clear(), rho.clear();
        }
    }
    return f;
}

}  // namespace

STildeEstimate poincareSobolevSTilde(const STildeOptions& o) {
    if (o.degrees.empty()) throw InvalidArgumentError("S~: no polynomial degrees");
    if (!(o.safety > 0.0 && o.safety <= 1.0)) throw InvalidArgumentError("S~: safety factor must lie in (0, 1]");
    STildeEstimate est;
    est.safety = o.safety;
    Rng rng(o.seed);
    std::unique_ptr<LegendreQuotient> prev;
    std::vector<double> best;
    double bestValue = INFINITY;
    for (std::size_t p : o.degrees) {
        if (p == 0) throw InvalidArgumentError("S~: degree must be at least 1");
        if (prev && p <= prev->degree()) throw InvalidArgumentError("S~: degrees must increase");
        auto Q = std::make_unique<LegendreQuotient>(p);
        std::vector<std::vector<double>> starts;
        if (prev) {
            starts.push_back(Q->embed(*prev, best));
        } else {
            std::vector<double> lin(Q->size(), 0.0);
            lin[Q->index(1, 0, 0)] = 1.0;
            starts.push_back(lin);
        }
        for (std::size_t s = 0; s < o.randomStarts; ++s) {
            std::vector<double> c(Q->size(), 0.0);
            for (std::size_t a = 0; a <= p; ++a)
                for (std::size_t b = 0; b <= p; ++b)
                    for (std::size_t e = 0; e <= p; ++e)
                        c[Q->index(a, b, e)] = rng.normal() / (1.0 + static_cast<double>(a + b + e));
            c[0] = 0.0;
            starts.push_back(std::move(c));
        }
        double levelBest = bestValue;
        std::vector<double> levelArg = prev ? starts.front() : std::vector<double>{};
        for (auto& c : starts) {
            const double v = minimize(*Q, c, o.iterations);
            if (v < levelBest || levelArg.empty()) {
                levelBest = v;
                levelArg = c;
            }
        }
        bestValue = levelBest;
        best = levelArg;
        est.polynomialMinima.push_back(bestValue);
        est.basisSize = Q->size() - 1;
        prev = std::move(Q);
    }
    est.trialMinimum = bestValue;
    for (double eps : o.bubbleWidths) {
        if (!(eps > 0.0)) throw InvalidArgumentError("S~: bubble widths must be positive");
        const auto levels = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log2(1.0 / eps)) + 4.0));
        const double q = poincareSobolevQuotient(
            [eps](const Vec3& x) { return 1.0 / std::sqrt(eps * eps + norm2(x)); },
            [eps](const Vec3& x) { return x * (-1.0 / std::pow(eps * eps + norm2(x), 1.5)); }, {}, 8, levels);
        est.bubbleQuotients.push_back(q);
        est.trialMinimum = std::min(est.trialMinimum, q);
    }
    // Bubbles shrinking into a corner fill one octant of the whole-space extremal: quotient -> S / 4.
    est.cornerLimit = sobolevS() / 4.0;
    est.trialMinimum = std::min(est.trialMinimum, est.cornerLimit);
    est.value = o.safety * est.trialMinimum;
    return est;
}

// ---------------------------------------------------------------------------

double kappaObjective(double kappa) {
    return std::min(1.0 / (1.0 + 28.0 * kappa / 3.0), 4.0 * (1.0 - 2.0 / kappa));
}

KappaOptimum kappaOptimum() {
    auto h = [](double k) { return 1.0 / (1.0 + 28.0 * k / 3.0) - 4.0 * (1.0 - 2.0 / k); };
    double lo = 2.0, hi = 4.0;
    if (!(h(lo) > 0.0 && h(hi) < 0.0)) throw StructuralError("kappaOptimum: crossing not bracketed by (2, 4)");
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    KappaOptimum k;
    k.kappaStar = 0.5 * (lo + hi);
    k.supValue = 1.0 / (1.0 + 28.0 * k.kappaStar / 3.0);
    k.closedForm = (239.0 - std::sqrt(56977.0)) / 6.0;
    if (std::abs(k.supValue - k.closedForm) > 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "kappaOptimum: bisection value " << k.supValue << " differs from closed form " << k.closedForm;
        throw StructuralError(os.str());
    }
    return k;
}

ConstantsReport assembleConstants(double k, double S, double STilde) {
    if (!(k > 0.0 && S > 0.0 && STilde > 0.0)) throw InvalidArgumentError("assembleConstants: inputs must be positive");
    ConstantsReport r;
    r.k = k;
    r.S = S;
    r.STilde = STilde;
    const double t = 9.0 * k / (2.0 * STilde);
    r.lambda = 1.0 / (1.0 + t);
    r.oneMinusLambda = t / (1.0 + t);
    const KappaOptimum ko = kappaOptimum();
    r.kappaStar = ko.kappaStar;
    r.supValue = ko.supValue;
    r.CTilde = std::pow(2.0, -11.0 / 3.0) * r.supValue / (2.0 / k + 9.0 / STilde);
    r.C = std::min(r.CTilde, std::pow(2.0, -2.0 / 3.0) * S / 9.0);
    const double lhs = k * r.lambda / 2.0;
    r.mixingResidual = std::abs(lhs - r.oneMinusLambda * STilde / 9.0) / lhs;
    r.provenance = {{"k", "input"},
                    {"S", "input"},
                    {"STilde", "input"},
                    {"lambda", "derived from k and STilde"},
                    {"oneMinusLambda", "derived from k and STilde"},
                    {"kappaStar", "bisection, checked against the closed form"},
                    {"supValue", "bisection, checked against the closed form"},
                    {"CTilde", "derived"},
                    {"C", "derived"}};
    return r;
}

}  // namespace ltlab
