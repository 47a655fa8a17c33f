#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ltlab/functionals.hpp"
#include "ltlab/vec3.hpp"

namespace ltlab {

enum class CubeLabel { A, B, Internal };

std::string_view toString(CubeLabel l);

struct CubeNode {
    Cube cube;
    std::size_t level = 0;
    double mass = 0.0;
    CubeLabel label = CubeLabel::Internal;
    /// Octant index within the parent (bit 0 x, bit 1 y, bit 2 z); 0 for the root.
    std::size_t octant = 0;
    std::optional<std::size_t> parent;
    /// Indices of the 8 children in octant order, or empty.
    std::vector<std::size_t> children;
};

/// Octree produced by subdivide(); node 0 is the root and every parent precedes its children.
struct CubeTree {
    std::vector<CubeNode> nodes;
    double q = 1.0;
    double additivityTolerance = 0.0;
    /// association[a] = index of the B leaf associated with A leaf a (unset for other nodes).
    std::vector<std::optional<std::size_t>> association;

    const CubeNode& root() const { return nodes.front(); }
    std::vector<std::size_t> leaves() const;
    std::size_t count(CubeLabel l) const;
    /// Octant path from the root, e.g. "0/5/3" ("0" for the root itself).
    std::string path(std::size_t node) const;
    /// True if `ancestor` is a strict ancestor of `node`.
    bool isAncestor(std::size_t ancestor, std::size_t node) const;
    /// Leaf whose half-open cube contains x (nullopt outside the root).
    std::optional<std::size_t> leafAt(const Vec3& x) const;
};

using MassFn = std::function<double(const Cube&)>;

struct SubdivideOptions {
    std::size_t maxDepth = 12;
    /// Allowed |sum of octant masses - parent mass|; negative means 1e-9 * root mass.
    double additivityTolerance = -1.0;
};

/// Adaptive A/B subdivision: a cube is split into its 8 octants; octants with mass < 2q become A
/// leaves and the others are processed again, except that if all 8 octants are below 2q the split
/// is undone and the cube becomes a B leaf. Throws InvalidArgumentError if massOf(root) < 2q and
/// StructuralError on non-additive masses or if a cube at maxDepth still needs splitting.
CubeTree subdivide(const MassFn& massOf, const Cube& root, double q, const SubdivideOptions& options = {});

/// The root alone as an A leaf; a valid cube family for roots lighter than 2q, where subdivide()
/// does not apply.
CubeTree singleCubeTree(const MassFn& massOf, const Cube& root, double q);

/// Associates every A leaf with the first B leaf (DFS octant order) below the A leaf's parent,
/// i.e. a B cube from which the A cube is reached by walking up and then one step down.
void associate(CubeTree& tree);

/// Mass function backed by a density grid (volume-fraction overlaps).
MassFn gridMass(const DensityGrid& d);

struct TreeAudit {
    bool cover = true;
    bool labels = true;
    bool massBalance = true;
    bool association = true;
    bool perLevel = true;
    /// Largest number of A cubes associated with one B cube at one level.
    std::size_t maxPerLevel = 0;
    std::vector<std::string> failures;

    bool pass() const { return cover && labels && massBalance && association && perLevel; }
};

/// Checks the structural invariants: children partition parents, leaves disjointly cover the root,
/// A/B/internal masses and shapes, leaf masses add up, and associations obey the walk rule with at
/// most 7 A cubes per level per B cube.
TreeAudit auditTree(const CubeTree& tree);

struct LeafContribution {
    std::size_t node = 0;
    CubeLabel label = CubeLabel::A;
    Estimate mass;
    /// lambda k |Q|^{-2/3} [mass - q]_+
    double exclusionTerm = 0.0;
    /// (1 - lambda)/9 int_Q |grad sqrt(rho)|^2
    double gradientTerm = 0.0;
    double gradientError = 0.0;
    Estimate power53;
    /// For A leaves: int rho^{5/3} <= kappa |Q|^{-2/3} (int rho)^{5/3}.
    bool saf = false;
};

struct GroupBound {
    std::size_t bNode = 0;
    double safSum = 0.0;
    double bound = 0.0;
    bool holds = true;
};

struct LowerBoundReport {
    double lambda = 0.0;
    double k = 0.0;
    double kappa = 0.0;
    std::vector<LeafContribution> leaves;
    double total = 0.0;
    /// Statistical error of the exclusion terms (leaf masses).
    double statError = 0.0;
    /// Gradient-term allowance: cell noise bias plus |fine - coarse| grid difference.
    double gridDelta = 0.0;
    /// statError + gridDelta.
    double error = 0.0;
    /// Every B leaf satisfies [mass - q]_+ >= mass / 2.
    bool bHalfMass = true;
    std::vector<GroupBound> groups;
    bool groupsHold = true;
};

/// Right side of the assembled bound sum_i (lambda k |Q_i|^{-2/3} [int_{Q_i} rho - q]_+ +
/// (1 - lambda)/9 int_{Q_i} |grad sqrt rho|^2) over the tree leaves, with the B-cube half-mass
/// check and the A-group mass bound sum_{saf A} int rho^{5/3} <= (28/3) kappa int_{Q_B} rho^{5/3}.
/// `oneMinusLambda` may be given when lambda is within rounding of 1 (NaN means 1 - lambda).
LowerBoundReport assembleLowerBound(const CubeTree& tree, const DensityGrid& d, double k, double lambda,
                                    double kappa, double relCutoff = 1e-3,
                                    double oneMinusLambda = std::numeric_limits<double>::quiet_NaN());

struct BoxBoundResult {
    long long Mopt = 1;
    /// max(k (N M^2 - q M^5) / L^2, 0) at Mopt.
    double bound = 0.0;
    double rawBound = 0.0;
    /// Stationary point (2N / 5q)^{1/3} of N M^2 - q M^5.
    double stationary = 0.0;
    /// (5N / 2q)^{1/3}, the alternative reading of the optimum.
    double alternative = 0.0;
    long long searchUpper = 1;
};

/// Brute-force maximisation of k (N M^2 - q M^5) / L^2 over integers M in [1, ceil((N/q)^{1/3}) + 2].
BoxBoundResult boxBound(double N, double q, double L, double k);

}  // namespace ltlab
