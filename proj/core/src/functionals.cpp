#include "ltlab/functionals.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "ltlab/error.hpp"

namespace ltlab {

// ---------------------------------------------------------------------------
// DensityGrid

DensityGrid::DensityGrid(const GridSpec& spec)
    : box_(spec.box), nx_(spec.nx), ny_(spec.ny), nz_(spec.nz), values_(spec.nx * spec.ny * spec.nz, 0.0),
      errors_(values_.size(), 0.0) {
    if (nx_ == 0 || ny_ == 0 || nz_ == 0) throw InvalidArgumentError("grid: resolution must be positive");
    for (std::size_t d = 0; d < 3; ++d)
        if (!(box_.extent(d) > 0.0)) throw InvalidArgumentError("grid: box must have positive extent");
    norm2.mean = 1.0;
}

Vec3 DensityGrid::cellSize() const {
    return {box_.extent(0) / static_cast<double>(nx_), box_.extent(1) / static_cast<double>(ny_),
            box_.extent(2) / static_cast<double>(nz_)};
}

double DensityGrid::cellVolume() const {
    const Vec3 h = cellSize();
    return h.x * h.y * h.z;
}

Box DensityGrid::cellBox(std::size_t i, std::size_t j, std::size_t k) const {
    const Vec3 h = cellSize();
    const Vec3 lo{box_.lo.x + h.x * static_cast<double>(i), box_.lo.y + h.y * static_cast<double>(j),
                  box_.lo.z + h.z * static_cast<double>(k)};
    return {lo, lo + h};
}

Vec3 DensityGrid::cellCenter(std::size_t i, std::size_t j, std::size_t k) const {
    const Box c = cellBox(i, j, k);
    return c.center();
}

bool DensityGrid::locate(const Vec3& x, std::size_t& idx) const {
    if (!box_.contains(x)) return false;
    const std::array<std::size_t, 3> n{nx_, ny_, nz_};
    std::array<std::size_t, 3> c{};
    for (std::size_t d = 0; d < 3; ++d) {
        const double u = (x[d] - box_.lo[d]) / box_.extent(d) * static_cast<double>(n[d]);
        c[d] = std::min(n[d] - 1, static_cast<std::size_t>(std::max(0.0, u)));
    }
    idx = index(c[0], c[1], c[2]);
    return true;
}

double DensityGrid::maxValue() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
}

double DensityGrid::totalMass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * cellVolume();
}

namespace {

/// Calls fn(linear index, overlap fraction) for every cell meeting `region`.
template <class Fn>
void forOverlappingCells(const DensityGrid& d, const Box& region, Fn fn) {
    const Vec3 h = d.cellSize();
    const std::array<std::size_t, 3> n{d.nx(), d.ny(), d.nz()};
    std::array<std::size_t, 3> lo{}, hi{};
    for (std::size_t a = 0; a < 3; ++a) {
        const double u0 = (region.lo[a] - d.box().lo[a]) / h[a];
        const double u1 = (region.hi[a] - d.box().lo[a]) / h[a];
        if (u1 <= 0.0 || u0 >= static_cast<double>(n[a])) return;
        lo[a] = static_cast<std::size_t>(std::max(0.0, std::floor(u0)));
        hi[a] = std::min(n[a], static_cast<std::size_t>(std::ceil(u1)));
    }
    const double vol = d.cellVolume();
    for (std::size_t k = lo[2]; k < hi[2]; ++k)
        for (std::size_t j = lo[1]; j < hi[1]; ++j)
            for (std::size_t i = lo[0]; i < hi[0]; ++i) {
                const double frac = overlapVolume(d.cellBox(i, j, k), region) / vol;
                if (frac > 0.0) fn(d.index(i, j, k), std::min(1.0, frac));
            }
}

}  // namespace

Estimate DensityGrid::massIn(const Box& region) const {
    return densityPowerIntegral(*this, region, 1.0);
}

DensityGrid DensityGrid::coarsened() const {
    if (nx_ % 2 || ny_ % 2 || nz_ % 2) throw InvalidArgumentError("grid: coarsening needs even resolution");
    DensityGrid c(GridSpec{box_, nx_ / 2, ny_ / 2, nz_ / 2});
    c.norm2 = norm2;
    c.ess = ess;
    c.lowEss = lowEss;
    c.massOutside = massOutside;
    for (std::size_t k = 0; k < c.nz_; ++k)
        for (std::size_t j = 0; j < c.ny_; ++j)
            for (std::size_t i = 0; i < c.nx_; ++i) {
                double v = 0.0, e2 = 0.0;
                for (std::size_t o = 0; o < 8; ++o) {
                    const std::size_t f = index(2 * i + (o & 1), 2 * j + ((o >> 1) & 1), 2 * k + ((o >> 2) & 1));
                    v += values_[f];
                    e2 += errors_[f] * errors_[f];
                }
                c.values_[c.index(i, j, k)] = v / 8.0;
                c.errors_[c.index(i, j, k)] = std::sqrt(e2) / 8.0;
            }
    return c;
}

DensityGrid DensityGrid::scaled(double c) const {
    DensityGrid out = *this;
    for (auto& v : out.values_) v *= c;
    for (auto& e : out.errors_) e *= std::abs(c);
    return out;
}

DensityGrid DensityGrid::fromFunction(const GridSpec& spec, const std::function<double(const Vec3&)>& rho,
                                      std::size_t nodes) {
    DensityGrid d(spec);
    const GaussLegendre gl(nodes);
    for (std::size_t k = 0; k < d.nz_; ++k)
        for (std::size_t j = 0; j < d.ny_; ++j)
            for (std::size_t i = 0; i < d.nx_; ++i) {
                const Box c = d.cellBox(i, j, k);
                const Vec3 mid = c.center();
                const Vec3 half = (c.hi - c.lo) * 0.5;
                double s = 0.0;
                for (std::size_t a = 0; a < nodes; ++a)
                    for (std::size_t b = 0; b < nodes; ++b)
                        for (std::size_t e = 0; e < nodes; ++e) {
                            const Vec3 x{mid.x + half.x * gl.nodes[a], mid.y + half.y * gl.nodes[b],
                                         mid.z + half.z * gl.nodes[e]};
                            s += gl.weights[a] * gl.weights[b] * gl.weights[e] * rho(x);
                        }
                d.values_[d.index(i, j, k)] = s / 8.0;
            }
    return d;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void putBytes(std::ostream& os, std::uint64_t v, std::size_t bytes) {
    for (std::size_t b = 0; b < bytes; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t getBytes(std::istream& is, std::size_t bytes) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < bytes; ++b) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw Error("grid file truncated");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
    }
    return v;
}

void putDouble(std::ostream& os, double x) { putBytes(os, std::bit_cast<std::uint64_t>(x), 8); }
double getDouble(std::istream& is) { return std::bit_cast<double>(getBytes(is, 8)); }

}  // namespace

void writeCsv(const DensityGrid& d, std::ostream& os) {
    const auto prec = os.precision(17);
    os << "x,y,z,value,error\n";
    for (std::size_t k = 0; k < d.nz(); ++k)
        for (std::size_t j = 0; j < d.ny(); ++j)
            for (std::size_t i = 0; i < d.nx(); ++i) {
                const Vec3 c = d.cellCenter(i, j, k);
                const std::size_t idx = d.index(i, j, k);
                os << c.x << ',' << c.y << ',' << c.z << ',' << d.values()[idx] << ',' << d.errors()[idx] << '\n';
            }
    os.precision(prec);
}

void writeBinary(const DensityGrid& d, std::ostream& os) {
    if (d.nx() > 0xffff || d.ny() > 0xffff || d.nz() > 0xffff) throw InvalidArgumentError("grid too large for LTDG");
    os.write("LTDG", 4);
    putBytes(os, kGridFormatVersion, 4);
    putBytes(os, d.nx(), 2);
    putBytes(os, d.ny(), 2);
    putBytes(os, d.nz(), 2);
    putBytes(os, 0, 2);
    for (std::size_t a = 0; a < 3; ++a) putDouble(os, d.box().lo[a]);
    for (std::size_t a = 0; a < 3; ++a) putDouble(os, d.box().hi[a]);
    for (double v : d.values()) putDouble(os, v);
    for (double e : d.errors()) putDouble(os, e);
}

DensityGrid readBinary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "LTDG", 4) != 0) throw Error("not an LTDG grid file");
    const auto version = static_cast<std::uint32_t>(getBytes(is, 4));
    if (version != kGridFormatVersion) throw Error("unsupported LTDG version " + std::to_string(version));
    GridSpec spec;
    spec.nx = getBytes(is, 2);
    spec.ny = getBytes(is, 2);
    spec.nz = getBytes(is, 2);
    getBytes(is, 2);
    for (std::size_t a = 0; a < 3; ++a) spec.box.lo[a] = getDouble(is);
    for (std::size_t a = 0; a < 3; ++a) spec.box.hi[a] = getDouble(is);
    DensityGrid d(spec);
    for (auto& v : d.values()) v = getDouble(is);
    for (auto& e : d.errors()) e = getDouble(is);
    return d;
}

// ---------------------------------------------------------------------------
// Integral functionals

SamplingStrategy defaultStrategy(const TrialFunction& f, std::uint64_t samples, std::uint64_t seed) {
    SamplingStrategy s;
    s.box = f.supportBox();
    s.samples = samples;
    s.seed = seed;
    if (const SmoothCore* core = f.core()) {
        double width = 0.0;
        for (const auto& o : core->orbitals) {
            if (const auto* g = std::get_if<GaussianOrbital>(&o)) {
                s.lobeCenters.push_back(g->center);
                width = std::max(width, g->width);
            }
        }
        if (!s.lobeCenters.empty()) {
            s.lobeWidth = width;
            s.uniformFraction = 0.2;
        }
    }
    return s;
}

MCEstimate norm2(const TrialFunction& f, const SamplingStrategy& strategy) {
    return integrate([&](const Configuration& X) { return f.weightedDensity(X); }, f.particles(), strategy);
}

MCEstimate energyQ(const TrialFunction& f, const SamplingStrategy& strategy) {
    return integrate([&](const Configuration& X) { return f.weightedKinetic(X); }, f.particles(), strategy);
}

std::vector<MCEstimate> localizedEnergies(const TrialFunction& f, const std::vector<Box>& cubes,
                                          const SamplingStrategy& strategy) {
    const std::size_t n = f.particles();
    return integrateMany(
        [&](const Configuration& X, std::span<double> out) {
            std::vector<double> per(n);
            f.weightedKinetic(X, per);
            for (std::size_t c = 0; c < cubes.size(); ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec3& x = X[i];
                    const Box& b = cubes[c];
                    if (x.x >= b.lo.x && x.x < b.hi.x && x.y >= b.lo.y && x.y < b.hi.y && x.z >= b.lo.z &&
                        x.z < b.hi.z)
                        s += per[i];
                }
                out[c] = s;
            }
        },
        cubes.size(), n, strategy);
}

MCEstimate localizedEnergy(const TrialFunction& f, const Box& cube, const SamplingStrategy& strategy) {
    return localizedEnergies(f, {cube}, strategy).front();
}

MCEstimate coreNorm2(const TrialFunction& f, const SamplingStrategy& strategy) {
    if (!f.isQuotient()) throw InvalidArgumentError("coreNorm2 needs a quotient trial");
    return integrate(
        [&](const Configuration& X) {
            const double psi = f.coreValue(X);
            return psi * psi;
        },
        f.particles(), strategy);
}

MCEstimate coreDirichlet(const TrialFunction& f, const SamplingStrategy& strategy) {
    if (!f.isQuotient()) throw InvalidArgumentError("coreDirichlet needs a quotient trial");
    return integrate([&](const Configuration& X) { return f.coreDirichletDensity(X); }, f.particles(), strategy);
}

Estimate ratio(const MCEstimate& a, const MCEstimate& b) {
    if (b.mean == 0.0) throw InvalidArgumentError("ratio: zero denominator");
    const double r = a.mean / b.mean;
    const double ra = a.mean != 0.0 ? a.stdError / a.mean : 0.0;
    const double rb = b.stdError / b.mean;
    return {r, std::abs(r) * std::hypot(ra, rb) + (a.mean == 0.0 ? a.stdError / std::abs(b.mean) : 0.0)};
}

DensityGrid density(const TrialFunction& f, const GridSpec& spec, const SamplingStrategy& strategy) {
    DensityGrid grid(spec);
    const std::size_t n = f.particles();
    const std::size_t cells = grid.cellCount();
    struct Hist {
        std::vector<double> s1, s2, s3;
        Moments w;
        double outside = 0.0;
    };
    Hist init;
    init.s1.assign(cells, 0.0);
    init.s2.assign(cells, 0.0);
    init.s3.assign(cells, 0.0);
    const auto hists = runSharded(strategy, n, init, [&](Hist& h, const Configuration& X, double invPdf) {
        double w = 0.0;
        if (invPdf != 0.0) {
            w = f.weightedDensity(X) * invPdf;
            if (!std::isfinite(w)) throw NonFiniteValueError("density: non-finite weight");
        }
        h.w.add(w);
        if (w == 0.0) return;
        std::vector<std::size_t> many;
        many.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = 0;
            if (grid.locate(X[i], c))
                many.push_back(c);
            else
                h.outside += w;
        }
        std::sort(many.begin(), many.end());
        for (std::size_t a = 0; a < many.size();) {
            std::size_t b = a;
            while (b < many.size() && many[b] == many[a]) ++b;
            const double count = static_cast<double>(b - a);
            h.s1[many[a]] += w * count;
            h.s2[many[a]] += w * w * count * count;
            h.s3[many[a]] += w * w * count;
            a = b;
        }
    });
    Hist total = init;
    for (const auto& h : hists) {
        for (std::size_t c = 0; c < cells; ++c) {
            total.s1[c] += h.s1[c];
            total.s2[c] += h.s2[c];
            total.s3[c] += h.s3[c];
        }
        total.w.merge(h.w);
        total.outside += h.outside;
    }
    const double W = total.w.mean * static_cast<double>(total.w.n);
    const double W2 = total.w.sumSq;
    if (!(W > 0.0)) throw Error("density: all sample weights vanish (is f zero on the box?)");
    const double vol = grid.cellVolume();
    for (std::size_t c = 0; c < cells; ++c) {
        const double r = total.s1[c] / W;
        const double var = std::max(0.0, total.s2[c] - 2.0 * r * total.s3[c] + r * r * W2) / (W * W);
        grid.values()[c] = r / vol;
        grid.errors()[c] = std::sqrt(var) / vol;
    }
    grid.norm2 = total.w.estimate(strategy.seed);
    grid.ess = W2 > 0.0 ? W * W / W2 : 0.0;
    grid.lowEss = grid.ess < 0.01 * static_cast<double>(total.w.n);
    grid.massOutside = total.outside / W;
    return grid;
}

Estimate densityPowerIntegral(const DensityGrid& d, const Box& region, double p) {
    if (!(p >= 1.0)) throw InvalidArgumentError("densityPowerIntegral: p must be >= 1");
    const double vol = d.cellVolume();
    double value = 0.0, var = 0.0;
    forOverlappingCells(d, region, [&](std::size_t idx, double frac) {
        const double v = std::max(0.0, d.values()[idx]);
        value += frac * vol * std::pow(v, p);
        const double dv = frac * vol * p * std::pow(v, p - 1.0) * d.errors()[idx];
        var += dv * dv;
    });
    return {value, std::sqrt(var)};
}

GradSqrtCells gradSqrtDensityCells(const DensityGrid& d, double relCutoff) {
    const std::array<std::size_t, 3> n{d.nx(), d.ny(), d.nz()};
    const Vec3 h = d.cellSize();
    GradSqrtCells out;
    out.cutoff = relCutoff * d.maxValue();
    out.value.assign(d.cellCount(), 0.0);
    out.noise.assign(d.cellCount(), 0.0);
    std::vector<double> s(d.cellCount()), sv(d.cellCount());
    for (std::size_t c = 0; c < s.size(); ++c) {
        const double v = d.values()[c];
        if (v >= out.cutoff && v > 0.0) {
            s[c] = std::sqrt(v);
            const double sig = d.errors()[c] / (2.0 * s[c]);
            sv[c] = sig * sig;
        }
    }
    const double vol = d.cellVolume();
    for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t j = 0; j < n[1]; ++j)
            for (std::size_t i = 0; i < n[0]; ++i) {
                const std::array<std::size_t, 3> at{i, j, k};
                double g2 = 0.0, noise = 0.0;
                for (std::size_t a = 0; a < 3; ++a) {
                    if (n[a] < 2) continue;
                    auto shifted = [&](std::size_t to) {
                        auto q = at;
                        q[a] = to;
                        return d.index(q[0], q[1], q[2]);
                    };
                    std::size_t lo, hi;
                    double span;
                    if (at[a] == 0) {
                        lo = shifted(0), hi = shifted(1), span = h[a];
                    } else if (at[a] == n[a] - 1) {
                        lo = shifted(n[a] - 2), hi = shifted(n[a] - 1), span = h[a];
                    } else {
                        lo = shifted(at[a] - 1), hi = shifted(at[a] + 1), span = 2.0 * h[a];
                    }
                    const double g = (s[hi] - s[lo]) / span;
                    g2 += g * g;
                    noise += (sv[hi] + sv[lo]) / (span * span);
                }
                out.value[d.index(i, j, k)] = g2 * vol;
                out.noise[d.index(i, j, k)] = noise * vol;
            }
    return out;
}

namespace {

struct GradSqrtRaw {
    double value = 0.0;
    double noise = 0.0;
    double cutoff = 0.0;
};

GradSqrtRaw gradSqrtRaw(const DensityGrid& d, const Box& region, double relCutoff) {
    const GradSqrtCells cells = gradSqrtDensityCells(d, relCutoff);
    GradSqrtRaw out;
    out.cutoff = cells.cutoff;
    for (std::size_t k = 0; k < d.nz(); ++k)
        for (std::size_t j = 0; j < d.ny(); ++j)
            for (std::size_t i = 0; i < d.nx(); ++i) {
                if (!region.contains(d.cellCenter(i, j, k))) continue;
                out.value += cells.value[d.index(i, j, k)];
                out.noise += cells.noise[d.index(i, j, k)];
            }
    return out;
}

}  // namespace

GradSqrtResult gradSqrtDensityNorm(const DensityGrid& d, const Box& region, double relCutoff) {
    if (d.nx() < 8 || d.ny() < 8 || d.nz() < 8)
        throw InvalidArgumentError("gradSqrtDensityNorm: resolution must be at least 8 per axis");
    const GradSqrtRaw fine = gradSqrtRaw(d, region, relCutoff);
    GradSqrtResult r;
    r.value = fine.value;
    r.noise = fine.noise;
    r.cutoff = fine.cutoff;
    if (d.nx() % 2 == 0 && d.ny() % 2 == 0 && d.nz() % 2 == 0) {
        const GradSqrtRaw coarse = gradSqrtRaw(d.coarsened(), region, relCutoff);
        r.delta = std::abs(fine.value - coarse.value);
    }
    return r;
}

GradSqrtResult gradSqrtDensityNorm(const DensityGrid& d, double relCutoff) {
    return gradSqrtDensityNorm(d, d.box(), relCutoff);
}

// ---------------------------------------------------------------------------
// Density decomposition

DecompositionReport densityDecompositionCheck(const TrialFunction& f, const std::vector<Vec3>& probes,
                                              const SamplingStrategy& strategy) {
    const std::size_t n = f.particles();
    if (n < 2) throw InvalidArgumentError("decomposition: needs N >= 2");
    if (!std::holds_alternative<CoulombWeight>(f.weight()))
        throw InvalidArgumentError("decomposition: the expansion is stated for the Coulomb weight");
    if (!checkFullySymmetric(f, 64, strategy.seed).pass)
        throw InvalidArgumentError("decomposition: f must be symmetric under all particle exchanges");

    const double N = static_cast<double>(n);
    DecompositionReport report;
    report.particles = n;
    report.multiplicities = {DecompositionTerms::n1(N), DecompositionTerms::n2(N), DecompositionTerms::n3(N),
                             DecompositionTerms::n4(N), DecompositionTerms::n5(N)};
    const auto& mult = report.multiplicities;

    for (const Vec3& probe : probes) {
        SamplingStrategy s = strategy;
        s.anchors = {probe};
        // Outputs: rho, rho_1..rho_5, residual.
        auto body = [&](const Configuration& Y, std::span<double> out) {
            std::vector<Vec3> pts(n);
            pts[0] = probe;
            for (std::size_t k = 1; k < n; ++k) pts[k] = Y[k - 1];
            const Configuration X(std::move(pts));
            const double v = f.value(X);
            const double f2 = v * v;
            auto inv = [&](std::size_t a, std::size_t b) { return 1.0 / norm(X[a] - X[b]); };
            const double rho = N * f.weightedDensity(X);
            const double t1 = f2 * inv(0, 1) * inv(0, 1);
            const double t2 = n >= 3 ? f2 * inv(0, 1) * inv(0, 2) : 0.0;
            const double t3 = n >= 3 ? f2 * inv(0, 1) * inv(1, 2) : 0.0;
            const double t4 = n >= 4 ? f2 * inv(0, 1) * inv(2, 3) : 0.0;
            double r = 0.0;
            for (std::size_t a = 1; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) r += inv(a, b);
            const double t5 = f2 * r * r;
            out[0] = rho;
            out[1] = t1;
            out[2] = t2;
            out[3] = t3;
            out[4] = t4;
            out[5] = t5;
            out[6] = rho - (mult[0] * t1 + mult[1] * t2 + mult[2] * t3 + mult[3] * t4 + mult[4] * t5);
        };
        const auto est = integrateMany(body, 7, n - 1, s);
        ProbeDecomposition p;
        p.probe = probe;
        p.rho = est[0];
        p.components.assign(est.begin() + 1, est.begin() + 6);
        p.residual = est[6];
        const double a = std::abs(p.residual.mean);
        p.zScore = p.residual.stdError > 0.0 ? a / p.residual.stdError : (a > 0.0 ? INFINITY : 0.0);
        p.relative = p.rho.mean != 0.0 ? a / std::abs(p.rho.mean) : a;
        report.maxRelative = std::max(report.maxRelative, p.relative);
        report.maxZ = std::max(report.maxZ, p.zScore);
        report.probes.push_back(std::move(p));
    }
    return report;
}

// ---------------------------------------------------------------------------
// N = 2 quadrature

namespace {

void requireN2(const TrialFunction& f, const char* what) {
    if (f.particles() != 2) throw InvalidArgumentError(std::string(what) + ": N = 2 only");
}

/// Tensor Gauss-Legendre over supportBox^2 of a smooth integrand.
double tensorN2(const TrialFunction& f, std::size_t m, const std::function<double(const Configuration&)>& fn) {
    const GaussLegendre gl(m);
    const Box& b = f.supportBox();
    std::array<std::vector<double>, 3> x, w;
    for (std::size_t a = 0; a < 3; ++a) {
        const double half = 0.5 * b.extent(a);
        const double mid = 0.5 * (b.lo[a] + b.hi[a]);
        for (std::size_t k = 0; k < m; ++k) {
            x[a].push_back(mid + half * gl.nodes[k]);
            w[a].push_back(half * gl.weights[k]);
        }
    }
    Configuration X(std::vector<Vec3>(2));
    double sum = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t bb = 0; bb < m; ++bb)
            for (std::size_t c = 0; c < m; ++c) {
                X[0] = {x[0][a], x[1][bb], x[2][c]};
                const double w1 = w[0][a] * w[1][bb] * w[2][c];
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < m; ++j)
                        for (std::size_t k = 0; k < m; ++k) {
                            X[1] = {x[0][i], x[1][j], x[2][k]};
                            sum += w1 * w[0][i] * w[1][j] * w[2][k] * fn(X);
                        }
            }
    return sum;
}

}  // namespace

QuadratureResult norm2Quadrature(const TrialFunction& f, std::size_t resolution) {
    requireN2(f, "norm2Quadrature");
    return quadratureN2([&](const Configuration& X) { return f.weightedDensity(X); }, f.supportBox(), f.supportBox(),
                        resolution);
}

QuadratureResult energyQuadrature(const TrialFunction& f, std::size_t resolution) {
    requireN2(f, "energyQuadrature");
    return quadratureN2([&](const Configuration& X) { return f.weightedKinetic(X); }, f.supportBox(), f.supportBox(),
                        resolution);
}

double coreNorm2Quadrature(const TrialFunction& f, std::size_t nodesPerAxis) {
    requireN2(f, "coreNorm2Quadrature");
    if (!f.isQuotient()) throw InvalidArgumentError("coreNorm2Quadrature needs a quotient trial");
    return tensorN2(f, nodesPerAxis, [&](const Configuration& X) {
        const double psi = f.coreValue(X);
        return psi * psi;
    });
}

double coreDirichletQuadrature(const TrialFunction& f, std::size_t nodesPerAxis) {
    requireN2(f, "coreDirichletQuadrature");
    if (!f.isQuotient()) throw InvalidArgumentError("coreDirichletQuadrature needs a quotient trial");
    return tensorN2(f, nodesPerAxis, [&](const Configuration& X) { return f.coreDirichletDensity(X); });
}

DensityGrid quadratureDensityN2(const TrialFunction& f, const GridSpec& spec, std::size_t cellNodes,
                                std::size_t otherNodes) {
    requireN2(f, "quadratureDensityN2");
    if (!f.isQuotient()) throw InvalidArgumentError("quadratureDensityN2 needs a quotient trial");
    DensityGrid grid(spec);
    const GaussLegendre glc(cellNodes), glo(otherNodes);
    const Box& sb = f.supportBox();
    std::vector<Vec3> ox;
    std::vector<double> ow;
    for (std::size_t i = 0; i < otherNodes; ++i)
        for (std::size_t j = 0; j < otherNodes; ++j)
            for (std::size_t k = 0; k < otherNodes; ++k) {
                const Vec3 half = (sb.hi - sb.lo) * 0.5;
                const Vec3 mid = sb.center();
                ox.push_back({mid.x + half.x * glo.nodes[i], mid.y + half.y * glo.nodes[j],
                              mid.z + half.z * glo.nodes[k]});
                ow.push_back(half.x * half.y * half.z * glo.weights[i] * glo.weights[j] * glo.weights[k]);
            }
    auto psi2 = [&](const Vec3& a, const Vec3& b) {
        const double v = f.coreValue(Configuration({a, b}));
        return v * v;
    };
    double norm = 0.0;
    for (std::size_t a = 0; a < ox.size(); ++a)
        for (std::size_t b = 0; b < ox.size(); ++b) norm += ow[a] * ow[b] * psi2(ox[a], ox[b]);
    if (!(norm > 0.0)) throw Error("quadratureDensityN2: vanishing norm");

    detail::parallelFor(grid.nz(), 0, [&](std::size_t k) {
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                const Box c = grid.cellBox(i, j, k);
                const Vec3 mid = c.center();
                const Vec3 half = (c.hi - c.lo) * 0.5;
                double s = 0.0;
                for (std::size_t a = 0; a < cellNodes; ++a)
                    for (std::size_t b = 0; b < cellNodes; ++b)
                        for (std::size_t e = 0; e < cellNodes; ++e) {
                            const Vec3 x{mid.x + half.x * glc.nodes[a], mid.y + half.y * glc.nodes[b],
                                         mid.z + half.z * glc.nodes[e]};
                            double inner = 0.0;
                            for (std::size_t o = 0; o < ox.size(); ++o)
                                inner += ow[o] * (psi2(x, ox[o]) + psi2(ox[o], x));
                            s += glc.weights[a] * glc.weights[b] * glc.weights[e] * inner;
                        }
                grid.values()[grid.index(i, j, k)] = s / 8.0 / norm;
            }
    });
    return grid;
}

}  // namespace ltlab
