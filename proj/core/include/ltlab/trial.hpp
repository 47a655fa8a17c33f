#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "ltlab/geometry.hpp"

namespace ltlab {

/// A partition of {0, ..., N-1} into q blocks (empty blocks allowed); the class of functions
/// antisymmetric within each block.
class SymmetryPartition {
public:
    SymmetryPartition() = default;
    /// Throws InvalidArgumentError unless the blocks are disjoint and cover {0..N-1}.
    SymmetryPartition(std::vector<std::vector<std::size_t>> blocks, std::size_t particles);

    static SymmetryPartition singletons(std::size_t particles);
    static SymmetryPartition single(std::size_t particles);

    std::size_t q() const { return blocks_.size(); }
    std::size_t particles() const { return particles_; }
    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    std::size_t largestBlock() const;

private:
    std::vector<std::vector<std::size_t>> blocks_;
    std::size_t particles_ = 0;
};

struct GaussianOrbital {
    Vec3 center;
    double width = 1.0;
};

struct ConstantOrbital {
    double value = 1.0;
};

using Orbital = std::variant<GaussianOrbital, ConstantOrbital>;

double orbitalValue(const Orbital& o, const Vec3& x, Vec3* grad = nullptr);

/// Per-particle C^2 bump (1 - |x - c|^2 / R^2)^3, clamped at 0. An infinite radius means no cutoff.
struct Cutoff {
    Vec3 center;
    double radius = std::numeric_limits<double>::infinity();

    static Cutoff none() { return {}; }
    bool active() const { return radius < std::numeric_limits<double>::infinity(); }
    double value(const Vec3& x, Vec3* grad = nullptr) const;
    Box box() const;
};

enum class CoreForm { SlaterProduct, PlainProduct };

/// The smooth factor Psi of a quotient trial f = Psi / g.
///
/// SlaterProduct: a determinant det[phi_a(x_b)] per partition block, using orbitals 0..|B|-1.
/// PlainProduct: prod_i phi_i(x_i) (a single orbital is shared by all particles).
/// Either form is multiplied by prod_i cutoff(x_i).
struct SmoothCore {
    CoreForm form = CoreForm::SlaterProduct;
    std::vector<Orbital> orbitals;
    Cutoff cutoff;

    /// Psi(X) and, when `grads` is non-empty, grad_i Psi(X) for all i.
    double evaluate(const Configuration& X, const SymmetryPartition& partition, std::span<Vec3> grads) const;
};

/// Value and all particle gradients of a direct-kind function.
using DirectFn = std::function<double(const Configuration&, std::span<Vec3>)>;

class TrialFunction {
public:
    static TrialFunction quotient(SmoothCore core, WeightSpec weight, SymmetryPartition partition, Box support);
    static TrialFunction direct(DirectFn fn, WeightSpec weight, SymmetryPartition partition, Box support);

    std::size_t particles() const;
    const SymmetryPartition& partition() const;
    const Box& supportBox() const;
    const WeightSpec& weight() const;
    bool isQuotient() const;
    /// Nullptr for direct-kind functions.
    const SmoothCore* core() const;
    double amplitude() const { return amplitude_; }

    /// Same function multiplied by c.
    TrialFunction scaled(double c) const;

    /// f(X); 0 at coincident X for the quotient kind.
    double value(const Configuration& X) const;
    /// f(X) and grad_i f(X) for every i; throws SingularInputError at coincidences.
    double valueAndGradients(const Configuration& X, std::span<Vec3> grads) const;
    /// g(X)^2 |f(X)|^2 (= Psi^2 for the quotient kind, finite everywhere).
    double weightedDensity(const Configuration& X) const;
    /// sum_i g^2 |grad_i f|^2; per-particle terms written to `perParticle` when it is non-empty.
    double weightedKinetic(const Configuration& X, std::span<double> perParticle = {}) const;
    /// sum_i |grad_i Psi|^2 for quotient trials (the Dirichlet energy density of Psi).
    double coreDirichletDensity(const Configuration& X) const;
    /// Psi(X) for quotient trials, times the amplitude.
    double coreValue(const Configuration& X) const;

private:
    struct Impl;
    explicit TrialFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
    double amplitude_ = 1.0;
};

double evalTrial(const TrialFunction& f, const Configuration& X);
Vec3 gradTrial(const TrialFunction& f, const Configuration& X, std::size_t i);

/// f~(X) = (mean over permutations pi of |f(pi X)|^2)^{1/2}, returned as a direct-kind, fully
/// symmetric function (partition = singletons). Gradients vanish where f~ < 1e-14 * zeroScale.
TrialFunction symmetrize(const TrialFunction& f, double zeroScale = 1.0);

inline constexpr std::size_t kMaxSymmetrizeParticles = 8;

struct SymmetryReport {
    bool pass = true;
    double maxViolation = 0.0;
    std::size_t tested = 0;
};

/// Checks f(tau X) = -f(X) for random within-block transpositions tau at `samples` random points
/// of the support box. Violation is |f(tau X) + f(X)| / max(|f(X)|, floor).
SymmetryReport checkSymmetryClass(const TrialFunction& f, std::size_t samples, std::uint64_t seed,
                                  double tolerance = 1e-10, double floor = 1e-12);

/// Checks full symmetry f(tau X) = f(X) under random transpositions of any two particles.
SymmetryReport checkFullySymmetric(const TrialFunction& f, std::size_t samples, std::uint64_t seed,
                                   double tolerance = 1e-10, double floor = 1e-12);

}  // namespace ltlab
