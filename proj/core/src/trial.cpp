#include "ltlab/trial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <boost/container/small_vector.hpp>
#include <sstream>

#include "ltlab/error.hpp"
#include "ltlab/rng.hpp"

namespace ltlab {

namespace {
template <class T>
using Buf = boost::container::small_vector<T, 8>;

std::span<Vec3> spanOf(Buf<Vec3>& v) { return {v.data(), v.size()}; }
}  // namespace

// ---------------------------------------------------------------------------
// SymmetryPartition

SymmetryPartition::SymmetryPartition(std::vector<std::vector<std::size_t>> blocks, std::size_t particles)
    : blocks_(std::move(blocks)), particles_(particles) {
    if (blocks_.empty()) throw InvalidArgumentError("partition needs at least one block (q >= 1)");
    std::vector<int> seen(particles_, 0);
    for (const auto& b : blocks_) {
        for (std::size_t i : b) {
            if (i >= particles_) {
                std::ostringstream os;
                os << "partition: particle index " << i << " outside {0.." << particles_ - 1 << "}";
                throw InvalidArgumentError(os.str());
            }
            if (seen[i]++) {
                std::ostringstream os;
                os << "partition: particle " << i << " appears in more than one block";
                throw InvalidArgumentError(os.str());
            }
        }
    }
    for (std::size_t i = 0; i < particles_; ++i) {
        if (!seen[i]) {
            std::ostringstream os;
            os << "partition: particle " << i << " is not covered by any block";
            throw InvalidArgumentError(os.str());
        }
    }
}

SymmetryPartition SymmetryPartition::singletons(std::size_t particles) {
    std::vector<std::vector<std::size_t>> blocks(particles);
    for (std::size_t i = 0; i < particles; ++i) blocks[i] = {i};
    return SymmetryPartition(std::move(blocks), particles);
}

SymmetryPartition SymmetryPartition::single(std::size_t particles) {
    std::vector<std::size_t> all(particles);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return SymmetryPartition({all}, particles);
}

std::size_t SymmetryPartition::largestBlock() const {
    std::size_t m = 0;
    for (const auto& b : blocks_) m = std::max(m, b.size());
    return m;
}

// ---------------------------------------------------------------------------
// Orbitals and cutoff

double orbitalValue(const Orbital& o, const Vec3& x, Vec3* grad) {
    if (const auto* g = std::get_if<GaussianOrbital>(&o)) {
        const Vec3 d = x - g->center;
        const double inv = 1.0 / (g->width * g->width);
        const double v = std::exp(-0.5 * norm2(d) * inv);
        if (grad) *grad = d * (-inv * v);
        return v;
    }
    const auto& c = std::get<ConstantOrbital>(o);
    if (grad) *grad = Vec3{};
    return c.value;
}

double Cutoff::value(const Vec3& x, Vec3* grad) const {
    if (!active()) {
        if (grad) *grad = Vec3{};
        return 1.0;
    }
    const Vec3 d = x - center;
    const double t = 1.0 - norm2(d) / (radius * radius);
    if (t <= 0.0) {
        if (grad) *grad = Vec3{};
        return 0.0;
    }
    if (grad) *grad = d * (-6.0 * t * t / (radius * radius));
    return t * t * t;
}

Box Cutoff::box() const {
    if (!active()) throw InvalidArgumentError("an inactive cutoff has no bounding box");
    const Vec3 r{radius, radius, radius};
    return {center - r, center + r};
}

// ---------------------------------------------------------------------------
// SmoothCore

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

/// Determinant of a block and, optionally, its gradient with respect to each particle in the block.
double blockDeterminant(const std::vector<Orbital>& orbitals, const Configuration& X,
                        const std::vector<std::size_t>& block, Buf<Vec3>* blockGrads) {
    const auto m = static_cast<Eigen::Index>(block.size());
    if (m == 0) {
        if (blockGrads) blockGrads->clear();
        return 1.0;
    }
    SmallMatrix A(m, m);
    // dA[b][d](a) = d/dx_d phi_a(x_{block[b]})
    Buf<std::array<Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>, 3>> dA(block.size());
    for (Eigen::Index b = 0; b < m; ++b) {
        for (int d = 0; d < 3; ++d) dA[b][d].resize(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            Vec3 g;
            A(a, b) = orbitalValue(orbitals[a], X[block[b]], blockGrads ? &g : nullptr);
            if (blockGrads)
                for (int d = 0; d < 3; ++d) dA[b][d](a) = g[d];
        }
    }
    if (m <= 3) {
        // Closed-form cofactors: d det / d A(a, b) = C(a, b).
        SmallMatrix C(m, m);
        double det = 0.0;
        if (m == 1) {
            C(0, 0) = 1.0;
            det = A(0, 0);
        } else if (m == 2) {
            C << A(1, 1), -A(1, 0), -A(0, 1), A(0, 0);
            det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        } else {
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const int a1 = (a + 1) % 3, a2 = (a + 2) % 3, b1 = (b + 1) % 3, b2 = (b + 2) % 3;
                    C(a, b) = A(a1, b1) * A(a2, b2) - A(a1, b2) * A(a2, b1);
                }
            det = A(0, 0) * C(0, 0) + A(0, 1) * C(0, 1) + A(0, 2) * C(0, 2);
        }
        if (blockGrads) {
            blockGrads->assign(block.size(), Vec3{});
            for (Eigen::Index b = 0; b < m; ++b)
                for (int d = 0; d < 3; ++d) (*blockGrads)[b][d] = dA[b][d].dot(C.col(b));
        }
        return det;
    }
    const double det = A.determinant();
    if (blockGrads) {
        blockGrads->assign(block.size(), Vec3{});
        for (Eigen::Index b = 0; b < m; ++b) {
            for (int d = 0; d < 3; ++d) {
                SmallMatrix Ab = A;
                Ab.col(b) = dA[b][d];
                (*blockGrads)[b][d] = Ab.determinant();
            }
        }
    }
    return det;
}

}  // namespace

double SmoothCore::evaluate(const Configuration& X, const SymmetryPartition& partition, std::span<Vec3> grads) const {
    const std::size_t n = X.size();
    if (partition.particles() != n) throw DimensionMismatchError("core: configuration size != partition size");
    const bool wantGrad = !grads.empty();
    if (wantGrad && grads.size() != n) throw DimensionMismatchError("core: gradient buffer size != N");

    // Per-particle cutoff factors.
    Buf<double> cut(n);
    Buf<Vec3> cutGrad(n);
    double cutProduct = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        cut[i] = cutoff.value(X[i], &cutGrad[i]);
        cutProduct *= cut[i];
    }

    double core = 1.0;
    Buf<Vec3> coreGrad(wantGrad ? n : 0);
    if (form == CoreForm::SlaterProduct) {
        if (orbitals.size() < partition.largestBlock()) {
            throw InvalidArgumentError("slater core needs at least as many orbitals as the largest block");
        }
        const auto& blocks = partition.blocks();
        Buf<double> dets(blocks.size());
        Buf<Buf<Vec3>> detGrads(blocks.size());
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            dets[k] = blockDeterminant(orbitals, X, blocks[k], wantGrad ? &detGrads[k] : nullptr);
            core *= dets[k];
        }
        if (wantGrad) {
            for (std::size_t k = 0; k < blocks.size(); ++k) {
                double others = 1.0;
                for (std::size_t l = 0; l < blocks.size(); ++l)
                    if (l != k) others *= dets[l];
                for (std::size_t b = 0; b < blocks[k].size(); ++b) coreGrad[blocks[k][b]] = detGrads[k][b] * others;
            }
        }
    } else {
        if (orbitals.size() != 1 && orbitals.size() != n) {
            throw InvalidArgumentError("plain-product core needs one orbital or one per particle");
        }
        Buf<double> vals(n);
        Buf<Vec3> vgrads(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Orbital& o = orbitals.size() == 1 ? orbitals[0] : orbitals[i];
            vals[i] = orbitalValue(o, X[i], &vgrads[i]);
            core *= vals[i];
        }
        if (wantGrad) {
            for (std::size_t i = 0; i < n; ++i) {
                double others = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) others *= vals[j];
                coreGrad[i] = vgrads[i] * others;
            }
        }
    }

    if (wantGrad) {
        for (std::size_t i = 0; i < n; ++i) {
            double otherCut = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) otherCut *= cut[j];
            grads[i] = coreGrad[i] * cutProduct + cutGrad[i] * (core * otherCut);
        }
    }
    return core * cutProduct;
}

// ---------------------------------------------------------------------------
// TrialFunction

struct TrialFunction::Impl {
    struct Quotient {
        SmoothCore core;
    };
    struct Direct {
        DirectFn fn;
    };
    std::variant<Quotient, Direct> kind;
    WeightSpec weight;
    SymmetryPartition partition;
    Box support;
};

TrialFunction TrialFunction::quotient(SmoothCore core, WeightSpec weight, SymmetryPartition partition, Box support) {
    validate(weight);
    if (partition.particles() < 2) throw InvalidArgumentError("trial functions need N >= 2");
    if (core.form == CoreForm::SlaterProduct && core.orbitals.size() < partition.largestBlock()) {
        throw InvalidArgumentError("slater core needs at least as many orbitals as the largest block");
    }
    if (core.form == CoreForm::PlainProduct && core.orbitals.size() != 1 &&
        core.orbitals.size() != partition.particles()) {
        throw InvalidArgumentError("plain-product core needs one orbital or one per particle");
    }
    auto impl = std::make_shared<Impl>(Impl{Impl::Quotient{std::move(core)}, std::move(weight), std::move(partition), support});
    return TrialFunction(std::move(impl));
}

TrialFunction TrialFunction::direct(DirectFn fn, WeightSpec weight, SymmetryPartition partition, Box support) {
    validate(weight);
    if (!fn) throw InvalidArgumentError("direct trial needs a callable");
    if (partition.particles() < 2) throw InvalidArgumentError("trial functions need N >= 2");
    auto impl = std::make_shared<Impl>(Impl{Impl::Direct{std::move(fn)}, std::move(weight), std::move(partition), support});
    return TrialFunction(std::move(impl));
}

std::size_t TrialFunction::particles() const { return impl_->partition.particles(); }
const SymmetryPartition& TrialFunction::partition() const { return impl_->partition; }
const Box& TrialFunction::supportBox() const { return impl_->support; }
const WeightSpec& TrialFunction::weight() const { return impl_->weight; }
bool TrialFunction::isQuotient() const { return std::holds_alternative<Impl::Quotient>(impl_->kind); }

const SmoothCore* TrialFunction::core() const {
    if (const auto* q = std::get_if<Impl::Quotient>(&impl_->kind)) return &q->core;
    return nullptr;
}

TrialFunction TrialFunction::scaled(double c) const {
    TrialFunction out = *this;
    out.amplitude_ *= c;
    return out;
}

namespace {

void checkSize(const TrialFunction& f, const Configuration& X) {
    if (X.size() != f.particles()) {
        std::ostringstream os;
        os << "trial function expects N = " << f.particles() << " particles, got " << X.size();
        throw DimensionMismatchError(os.str());
    }
}

bool coincident(const Configuration& X) {
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j)
            if (norm(X[i] - X[j]) < kCoincidenceThreshold) return true;
    return false;
}

}  // namespace

double TrialFunction::value(const Configuration& X) const {
    checkSize(*this, X);
    if (const auto* q = std::get_if<Impl::Quotient>(&impl_->kind)) {
        if (isSingular(impl_->weight) && coincident(X)) return 0.0;
        const double psi = q->core.evaluate(X, impl_->partition, {});
        if (psi == 0.0) return 0.0;
        return amplitude_ * psi / evalWeight(X, impl_->weight);
    }
    return amplitude_ * std::get<Impl::Direct>(impl_->kind).fn(X, {});
}

double TrialFunction::valueAndGradients(const Configuration& X, std::span<Vec3> grads) const {
    checkSize(*this, X);
    if (grads.size() != X.size()) throw DimensionMismatchError("gradient buffer size != N");
    if (const auto* q = std::get_if<Impl::Quotient>(&impl_->kind)) {
        Buf<Vec3> gg(X.size());
        const double g = weightAndGradients(X, impl_->weight, spanOf(gg));
        const double psi = q->core.evaluate(X, impl_->partition, grads);
        const double invG = 1.0 / g;
        for (std::size_t i = 0; i < X.size(); ++i) grads[i] = (grads[i] - gg[i] * (psi * invG)) * (invG * amplitude_);
        return amplitude_ * psi * invG;
    }
    const double v = std::get<Impl::Direct>(impl_->kind).fn(X, grads);
    for (auto& gr : grads) gr *= amplitude_;
    return amplitude_ * v;
}

double TrialFunction::weightedDensity(const Configuration& X) const {
    checkSize(*this, X);
    if (const auto* q = std::get_if<Impl::Quotient>(&impl_->kind)) {
        const double psi = amplitude_ * q->core.evaluate(X, impl_->partition, {});
        return psi * psi;
    }
    const double v = amplitude_ * std::get<Impl::Direct>(impl_->kind).fn(X, {});
    if (v == 0.0) return 0.0;
    const double g = evalWeight(X, impl_->weight);
    return g * g * v * v;
}

double TrialFunction::weightedKinetic(const Configuration& X, std::span<double> perParticle) const {
    checkSize(*this, X);
    const std::size_t n = X.size();
    if (!perParticle.empty() && perParticle.size() != n) throw DimensionMismatchError("per-particle buffer size != N");
    Buf<Vec3> gg(n);
    Buf<Vec3> grads(n);
    double total = 0.0;
    if (const auto* q = std::get_if<Impl::Quotient>(&impl_->kind)) {
        // g^2 |grad_i (Psi/g)|^2 = |grad_i Psi - Psi grad_i g / g|^2, evaluated without forming g^2.
        const double g = weightAndGradients(X, impl_->weight, spanOf(gg));
        const double psi = q->core.evaluate(X, impl_->partition, spanOf(grads));
        const double ratio = psi / g;
        const double a2 = amplitude_ * amplitude_;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = a2 * ltlab::norm2(grads[i] - gg[i] * ratio);
            if (!perParticle.empty()) perParticle[i] = t;
            total += t;
        }
        return total;
    }
    std::get<Impl::Direct>(impl_->kind).fn(X, spanOf(grads));
    const double g = evalWeight(X, impl_->weight);
    const double s = g * g * amplitude_ * amplitude_;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s * ltlab::norm2(grads[i]);
        if (!perParticle.empty()) perParticle[i] = t;
        total += t;
    }
    return total;
}

double TrialFunction::coreDirichletDensity(const Configuration& X) const {
    checkSize(*this, X);
    const auto* q = std::get_if<Impl::Quotient>(&impl_->kind);
    if (!q) throw InvalidArgumentError("Dirichlet energy of the core is defined for quotient trials only");
    Buf<Vec3> grads(X.size());
    q->core.evaluate(X, impl_->partition, spanOf(grads));
    double s = 0.0;
    for (const auto& gr : grads) s += ltlab::norm2(gr);
    return amplitude_ * amplitude_ * s;
}

double TrialFunction::coreValue(const Configuration& X) const {
    checkSize(*this, X);
    const auto* q = std::get_if<Impl::Quotient>(&impl_->kind);
    if (!q) throw InvalidArgumentError("core value is defined for quotient trials only");
    return amplitude_ * q->core.evaluate(X, impl_->partition, {});
}

double evalTrial(const TrialFunction& f, const Configuration& X) { return f.value(X); }

Vec3 gradTrial(const TrialFunction& f, const Configuration& X, std::size_t i) {
    if (i >= f.particles()) throw DimensionMismatchError("particle index out of range");
    Buf<Vec3> grads(X.size());
    f.valueAndGradients(X, spanOf(grads));
    return grads[i];
}

// ---------------------------------------------------------------------------
// Symmetrization

TrialFunction symmetrize(const TrialFunction& f, double zeroScale) {
    const std::size_t n = f.particles();
    if (n > kMaxSymmetrizeParticles) {
        std::ostringstream os;
        os << "symmetrize: N = " << n << " exceeds the factorial limit " << kMaxSymmetrizeParticles;
        throw InvalidArgumentError(os.str());
    }
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    const double threshold = 1e-14 * zeroScale;
    DirectFn fn = [f, perms, threshold](const Configuration& X, std::span<Vec3> grads) -> double {
        const std::size_t n = X.size();
        const double invCount = 1.0 / static_cast<double>(perms.size());
        const bool wantGrad = !grads.empty();
        if (wantGrad)
            for (auto& gr : grads) gr = Vec3{};
        Configuration Y = X;
        std::vector<Vec3> gy(n);
        double acc = 0.0;
        for (const auto& pi : perms) {
            // (pi X)_k = x_{pi(k)}
            for (std::size_t k = 0; k < n; ++k) Y[k] = X[pi[k]];
            if (wantGrad) {
                double v = 0.0;
                try {
                    v = f.valueAndGradients(Y, gy);
                } catch (const SingularInputError&) {
                    v = 0.0;
                    for (auto& gr : gy) gr = Vec3{};
                }
                acc += v * v;
                for (std::size_t k = 0; k < n; ++k) grads[pi[k]] += gy[k] * v;
            } else {
                const double v = f.value(Y);
                acc += v * v;
            }
        }
        const double value = std::sqrt(acc * invCount);
        if (wantGrad) {
            if (value < threshold) {
                for (auto& gr : grads) gr = Vec3{};
            } else {
                for (auto& gr : grads) gr *= invCount / value;
            }
        }
        return value;
    };
    return TrialFunction::direct(std::move(fn), f.weight(), SymmetryPartition::singletons(n), f.supportBox());
}

namespace {

template <class PickPair>
SymmetryReport transpositionCheck(const TrialFunction& f, std::size_t samples, std::uint64_t seed, double tolerance,
                                  double floor, double sign, PickPair pick) {
    SymmetryReport rep;
    Rng rng(seed);
    const std::size_t n = f.particles();
    std::vector<Vec3> pts(n);
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& x : pts) x = rng.uniformInBox(f.supportBox());
        Configuration X(pts);
        std::size_t a = 0, b = 0;
        if (!pick(rng, a, b)) return rep;
        Configuration T = X;
        std::swap(T[a], T[b]);
        const double fx = f.value(X);
        const double ft = f.value(T);
        const double v = std::abs(ft - sign * fx) / std::max({std::abs(fx), floor});
        rep.maxViolation = std::max(rep.maxViolation, v);
        ++rep.tested;
    }
    rep.pass = rep.maxViolation < tolerance;
    return rep;
}

}  // namespace

SymmetryReport checkSymmetryClass(const TrialFunction& f, std::size_t samples, std::uint64_t seed, double tolerance,
                                  double floor) {
    std::vector<const std::vector<std::size_t>*> multi;
    for (const auto& b : f.partition().blocks())
        if (b.size() >= 2) multi.push_back(&b);
    return transpositionCheck(f, samples, seed, tolerance, floor, -1.0,
                              [&](Rng& rng, std::size_t& a, std::size_t& b) {
                                  if (multi.empty()) return false;
                                  const auto& blk = *multi[rng.below(multi.size())];
                                  const std::size_t i = rng.below(blk.size());
                                  std::size_t j = rng.below(blk.size() - 1);
                                  if (j >= i) ++j;
                                  a = blk[i];
                                  b = blk[j];
                                  return true;
                              });
}

SymmetryReport checkFullySymmetric(const TrialFunction& f, std::size_t samples, std::uint64_t seed, double tolerance,
                                   double floor) {
    const std::size_t n = f.particles();
    return transpositionCheck(f, samples, seed, tolerance, floor, 1.0, [n](Rng& rng, std::size_t& a, std::size_t& b) {
        a = rng.below(n);
        b = rng.below(n - 1);
        if (b >= a) ++b;
        return true;
    });
}

}  // namespace ltlab
