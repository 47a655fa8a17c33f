#include "ltlab/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ltlab/error.hpp"

namespace ltlab {

Configuration::Configuration(std::vector<Vec3> points) : points_(std::move(points)) {
    for (const auto& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
            throw InvalidArgumentError("configuration contains a non-finite coordinate");
        }
    }
}

SmoothPairWeight SmoothPairWeight::gaussian(double width) {
    if (!(width > 0.0)) throw InvalidArgumentError("gaussian pair weight needs width > 0");
    const double inv = 1.0 / (width * width);
    SmoothPairWeight w;
    w.phi = [inv](const Vec3& x) { return std::exp(-0.5 * norm2(x) * inv); };
    w.gradPhi = [inv](const Vec3& x) { return x * (-inv * std::exp(-0.5 * norm2(x) * inv)); };
    w.laplacianPhi = [inv](const Vec3& x) {
        const double r2 = norm2(x);
        return (r2 * inv * inv - 3.0 * inv) * std::exp(-0.5 * r2 * inv);
    };
    return w;
}

void validate(const WeightSpec& w) {
    if (const auto* fs = std::get_if<FiniteScatteringWeight>(&w)) {
        if (!(fs->a < 0.0)) throw InvalidArgumentError("finite scattering length requires a < 0");
    }
    if (const auto* sm = std::get_if<SmoothPairWeight>(&w)) {
        if (!sm->phi || !sm->gradPhi || !sm->laplacianPhi) {
            throw InvalidArgumentError("smooth pair weight requires phi, gradPhi and laplacianPhi");
        }
    }
}

bool isSingular(const WeightSpec& w) { return !std::holds_alternative<SmoothPairWeight>(w); }

double minPairDistance(const Configuration& X) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = i + 1; j < X.size(); ++j) best = std::min(best, norm(X[i] - X[j]));
    }
    return best;
}

namespace {

[[noreturn]] void throwSingular(std::size_t i, std::size_t j, double r) {
    std::ostringstream os;
    os << "particles " << i << " and " << j << " coincide (|x_i - x_j| = " << r << ")";
    throw SingularInputError(os.str());
}

void requireParticles(const Configuration& X) {
    if (X.size() < 2) throw DimensionMismatchError("weight evaluation needs N >= 2 particles");
}

}  // namespace

double weightAndGradients(const Configuration& X, const WeightSpec& w, std::span<Vec3> grads) {
    requireParticles(X);
    if (grads.size() != X.size()) throw DimensionMismatchError("gradient buffer size != N");
    for (auto& gr : grads) gr = Vec3{};
    double g = 0.0;
    const std::size_t n = X.size();

    if (const auto* sm = std::get_if<SmoothPairWeight>(&w)) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Vec3 d = X[i] - X[j];
                g += sm->phi(d);
                const Vec3 gp = sm->gradPhi(d);
                grads[i] += gp;
                grads[j] -= gp;
            }
        }
        return g;
    }

    double shift = 0.0;
    if (const auto* fs = std::get_if<FiniteScatteringWeight>(&w)) shift = 1.0 / fs->a;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec3 d = X[i] - X[j];
            const double r = norm(d);
            if (r < kCoincidenceThreshold) throwSingular(i, j, r);
            const double inv = 1.0 / r;
            g += inv - shift;
            const Vec3 gp = d * (-inv * inv * inv);
            grads[i] += gp;
            grads[j] -= gp;
        }
    }
    return g;
}

double evalWeight(const Configuration& X, const WeightSpec& w) {
    requireParticles(X);
    const std::size_t n = X.size();
    double g = 0.0;
    if (const auto* sm = std::get_if<SmoothPairWeight>(&w)) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) g += sm->phi(X[i] - X[j]);
        return g;
    }
    double shift = 0.0;
    if (const auto* fs = std::get_if<FiniteScatteringWeight>(&w)) shift = 1.0 / fs->a;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = norm(X[i] - X[j]);
            if (r < kCoincidenceThreshold) throwSingular(i, j, r);
            g += 1.0 / r - shift;
        }
    }
    return g;
}

Vec3 gradWeight(const Configuration& X, std::size_t i, const WeightSpec& w) {
    requireParticles(X);
    if (i >= X.size()) throw DimensionMismatchError("particle index out of range");
    Vec3 out{};
    if (const auto* sm = std::get_if<SmoothPairWeight>(&w)) {
        for (std::size_t j = 0; j < X.size(); ++j)
            if (j != i) out += sm->gradPhi(X[i] - X[j]);
        return out;
    }
    for (std::size_t j = 0; j < X.size(); ++j) {
        if (j == i) continue;
        const Vec3 d = X[i] - X[j];
        const double r = norm(d);
        if (r < kCoincidenceThreshold) throwSingular(std::min(i, j), std::max(i, j), r);
        out -= d / (r * r * r);
    }
    return out;
}

double harmonicityResidual(const Configuration& X, const WeightSpec& w, double h) {
    if (!(h > 0.0)) throw InvalidArgumentError("finite-difference step must be positive");
    if (isSingular(w) && minPairDistance(X) <= 2.0 * h) {
        throw SingularInputError("harmonicity stencil would cross a coincidence (min pair distance <= 2h)");
    }
    const double g0 = evalWeight(X, w);
    Configuration Y = X;
    double sum = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k) {
        for (std::size_t d = 0; d < 3; ++d) {
            const double c = X[k][d];
            Y[k][d] = c + h;
            const double gp = evalWeight(Y, w);
            Y[k][d] = c - h;
            const double gm = evalWeight(Y, w);
            Y[k][d] = c;
            sum += (gp - 2.0 * g0) + gm;
        }
    }
    return sum / (h * h);
}

double harmonicityScale(const Configuration& X, const WeightSpec& w) {
    std::vector<Vec3> grads(X.size());
    const double g = weightAndGradients(X, w, grads);
    double s = 0.0;
    for (const auto& gr : grads) s += norm2(gr);
    return s / g;
}

double smoothLaplacianSum(const Configuration& X, const SmoothPairWeight& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j) s += w.laplacianPhi(X[i] - X[j]);
    return 2.0 * s;
}

}  // namespace ltlab
