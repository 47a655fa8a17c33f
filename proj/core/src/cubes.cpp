#include "ltlab/cubes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "ltlab/error.hpp"

namespace ltlab {

std::string_view toString(CubeLabel l) {
    switch (l) {
        case CubeLabel::A: return "A";
        case CubeLabel::B: return "B";
        case CubeLabel::Internal: return "internal";
    }
    return "internal";
}

std::vector<std::size_t> CubeTree::leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].children.empty()) out.push_back(i);
    return out;
}

std::size_t CubeTree::count(CubeLabel l) const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [l](const CubeNode& n) { return n.label == l; }));
}

std::string CubeTree::path(std::size_t node) const {
    std::vector<std::size_t> octs;
    for (std::optional<std::size_t> at = node; at && nodes[*at].parent; at = nodes[*at].parent)
        octs.push_back(nodes[*at].octant);
    std::string s = "0";
    for (auto it = octs.rbegin(); it != octs.rend(); ++it) s += "/" + std::to_string(*it);
    return s;
}

bool CubeTree::isAncestor(std::size_t ancestor, std::size_t node) const {
    for (auto at = nodes[node].parent; at; at = nodes[*at].parent)
        if (*at == ancestor) return true;
    return false;
}

std::optional<std::size_t> CubeTree::leafAt(const Vec3& x) const {
    if (nodes.empty() || !root().cube.containsHalfOpen(x)) return std::nullopt;
    std::size_t at = 0;
    while (!nodes[at].children.empty()) {
        const Cube& c = nodes[at].cube;
        const double h = 0.5 * c.side;
        const std::size_t oct = (x.x >= c.corner.x + h ? 1 : 0) | (x.y >= c.corner.y + h ? 2 : 0) |
                                (x.z >= c.corner.z + h ? 4 : 0);
        at = nodes[at].children[oct];
    }
    return at;
}

namespace {

void process(CubeTree& t, std::size_t idx, const MassFn& massOf, const SubdivideOptions& opt) {
    if (t.nodes[idx].level >= opt.maxDepth) {
        std::ostringstream os;
        os << "subdivide: cube " << t.path(idx) << " at depth " << t.nodes[idx].level << " still has mass "
           << t.nodes[idx].mass << " >= 2q";
        throw StructuralError(os.str());
    }
    const Cube parent = t.nodes[idx].cube;
    std::array<double, 8> m{};
    double sum = 0.0;
    bool allLight = true;
    for (int k = 0; k < 8; ++k) {
        m[k] = massOf(parent.octant(k));
        sum += m[k];
        allLight = allLight && m[k] < 2.0 * t.q;
    }
    if (std::abs(sum - t.nodes[idx].mass) > t.additivityTolerance) {
        std::ostringstream os;
        os << "subdivide: octant masses of " << t.path(idx) << " sum to " << sum << " but the cube has "
           << t.nodes[idx].mass;
        throw StructuralError(os.str());
    }
    if (allLight) {
        t.nodes[idx].label = CubeLabel::B;
        return;
    }
    t.nodes[idx].label = CubeLabel::Internal;
    std::vector<std::size_t> kids;
    for (int k = 0; k < 8; ++k) {
        CubeNode c;
        c.cube = parent.octant(k);
        c.level = t.nodes[idx].level + 1;
        c.mass = m[k];
        c.label = m[k] < 2.0 * t.q ? CubeLabel::A : CubeLabel::Internal;
        c.octant = static_cast<std::size_t>(k);
        c.parent = idx;
        kids.push_back(t.nodes.size());
        t.nodes.push_back(std::move(c));
    }
    t.nodes[idx].children = kids;
    for (std::size_t c : kids)
        if (t.nodes[c].label != CubeLabel::A) process(t, c, massOf, opt);
}

std::optional<std::size_t> firstB(const CubeTree& t, std::size_t at) {
    const CubeNode& n = t.nodes[at];
    if (n.label == CubeLabel::B) return at;
    for (std::size_t c : n.children)
        if (auto b = firstB(t, c)) return b;
    return std::nullopt;
}

}  // namespace

CubeTree subdivide(const MassFn& massOf, const Cube& root, double q, const SubdivideOptions& options) {
    if (!(q >= 1.0)) throw InvalidArgumentError("subdivide: q must be >= 1");
    if (!(root.side > 0.0)) throw InvalidArgumentError("subdivide: root side must be positive");
    CubeTree t;
    t.q = q;
    CubeNode r;
    r.cube = root;
    r.mass = massOf(root);
    if (r.mass < 2.0 * q) {
        std::ostringstream os;
        os << "subdivide: root mass " << r.mass << " < 2q = " << 2.0 * q << " (use the N <= 2q Sobolev bound)";
        throw InvalidArgumentError(os.str());
    }
    t.additivityTolerance = options.additivityTolerance < 0.0 ? 1e-9 * r.mass : options.additivityTolerance;
    t.nodes.push_back(r);
    process(t, 0, massOf, options);
    t.association.assign(t.nodes.size(), std::nullopt);
    return t;
}

CubeTree singleCubeTree(const MassFn& massOf, const Cube& root, double q) {
    if (!(q >= 1.0)) throw InvalidArgumentError("singleCubeTree: q must be >= 1");
    if (!(root.side > 0.0)) throw InvalidArgumentError("singleCubeTree: root side must be positive");
    CubeTree t;
    t.q = q;
    CubeNode r;
    r.cube = root;
    r.mass = massOf(root);
    r.label = CubeLabel::A;
    t.nodes.push_back(r);
    t.association.assign(1, std::nullopt);
    return t;
}

void associate(CubeTree& tree) {
    tree.association.assign(tree.nodes.size(), std::nullopt);
    std::map<std::size_t, std::size_t> memo;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const CubeNode& n = tree.nodes[i];
        if (n.label != CubeLabel::A) continue;
        if (!n.parent) throw StructuralError("associate: A cube without parent");
        auto it = memo.find(*n.parent);
        if (it == memo.end()) {
            const auto b = firstB(tree, *n.parent);
            if (!b) throw StructuralError("associate: no B cube below the parent of A cube " + tree.path(i));
            it = memo.emplace(*n.parent, *b).first;
        }
        tree.association[i] = it->second;
    }
}

MassFn gridMass(const DensityGrid& d) {
    return [&d](const Cube& c) { return d.massIn(c.box()).value; };
}

TreeAudit auditTree(const CubeTree& t) {
    TreeAudit a;
    auto fail = [&](bool& flag, std::string msg) {
        flag = false;
        a.failures.push_back(std::move(msg));
    };
    const double q2 = 2.0 * t.q;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const CubeNode& n = t.nodes[i];
        const std::string p = t.path(i);
        if (!n.children.empty()) {
            if (n.children.size() != 8) fail(a.cover, p + ": internal node without 8 children");
            for (std::size_t k = 0; k < n.children.size(); ++k) {
                const CubeNode& c = t.nodes[n.children[k]];
                if (!(c.cube == n.cube.octant(static_cast<int>(k))) || c.level != n.level + 1 || c.parent != i)
                    fail(a.cover, p + ": child " + std::to_string(k) + " is not the matching octant");
            }
        }
        switch (n.label) {
            case CubeLabel::A:
                if (!(n.mass < q2) || !n.children.empty()) fail(a.labels, p + ": A cube with mass >= 2q or children");
                break;
            case CubeLabel::B:
                if (!(n.mass >= q2 && n.mass < 8.0 * q2) || !n.children.empty())
                    fail(a.labels, p + ": B cube mass outside [2q, 16q) or with children");
                break;
            case CubeLabel::Internal:
                if (!(n.mass >= q2) || n.children.size() != 8)
                    fail(a.labels, p + ": internal cube with mass < 2q or without children");
                break;
        }
    }

    const auto leaves = t.leaves();
    double vol = 0.0, mass = 0.0;
    for (std::size_t l : leaves) {
        vol += t.nodes[l].cube.volume();
        mass += t.nodes[l].mass;
    }
    if (std::abs(vol - t.root().cube.volume()) > 1e-12 * t.root().cube.volume())
        fail(a.cover, "leaf volumes do not add up to the root volume");
    for (std::size_t x = 0; x < leaves.size(); ++x)
        for (std::size_t y = x + 1; y < leaves.size(); ++y)
            if (overlapVolume(t.nodes[leaves[x]].cube.box(), t.nodes[leaves[y]].cube.box()) > 0.0)
                fail(a.cover, "leaves " + t.path(leaves[x]) + " and " + t.path(leaves[y]) + " overlap");
    if (std::abs(mass - t.root().mass) > t.additivityTolerance * static_cast<double>(leaves.size()))
        fail(a.massBalance, "leaf masses do not add up to the root mass");

    if (t.association.size() != t.nodes.size()) {
        fail(a.association, "association table missing");
        return a;
    }
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> perLevel;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const CubeNode& n = t.nodes[i];
        const auto& target = t.association[i];
        if (n.label != CubeLabel::A) {
            if (target) fail(a.association, t.path(i) + ": non-A cube has an association");
            continue;
        }
        if (!target) {
            // A root A leaf (singleCubeTree) has no parent and hence nothing to associate with.
            if (!n.parent && t.nodes.size() == 1) continue;
            fail(a.association, t.path(i) + ": A cube without association");
            continue;
        }
        const CubeNode& b = t.nodes[*target];
        if (b.label != CubeLabel::B) fail(a.association, t.path(i) + ": associated cube is not B");
        if (!n.parent || !t.isAncestor(*n.parent, *target))
            fail(a.association, t.path(i) + ": associated B cube " + t.path(*target) + " is not below the A parent");
        const std::size_t c = ++perLevel[{*target, n.level}];
        a.maxPerLevel = std::max(a.maxPerLevel, c);
    }
    if (a.maxPerLevel > 7) fail(a.perLevel, "more than 7 A cubes associated with one B cube at one level");
    return a;
}

LowerBoundReport assembleLowerBound(const CubeTree& tree, const DensityGrid& d, double k, double lambda,
                                    double kappa, double relCutoff, double oneMinusLambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgumentError("assembleLowerBound: lambda must lie in [0,1]");
    const double mu = std::isnan(oneMinusLambda) ? 1.0 - lambda : oneMinusLambda;
    if (!(mu >= 0.0 && std::abs(mu - (1.0 - lambda)) <= 1e-12))
        throw InvalidArgumentError("assembleLowerBound: oneMinusLambda inconsistent with lambda");
    const Box rootBox = tree.root().cube.box();
    const double slack = 1e-12 * tree.root().cube.side;
    if (rootBox.lo.x < d.box().lo.x - slack || rootBox.lo.y < d.box().lo.y - slack ||
        rootBox.lo.z < d.box().lo.z - slack || rootBox.hi.x > d.box().hi.x + slack ||
        rootBox.hi.y > d.box().hi.y + slack || rootBox.hi.z > d.box().hi.z + slack)
        throw InvalidArgumentError("assembleLowerBound: tree leaves exceed the grid box");

    LowerBoundReport r;
    r.lambda = lambda;
    r.k = k;
    r.kappa = kappa;

    // Gradient terms per leaf: each grid cell is credited to the leaf containing its centre.
    const GradSqrtCells fine = gradSqrtDensityCells(d, relCutoff);
    std::map<std::size_t, std::pair<double, double>> grad;  // leaf -> (value, noise)
    double fineTotal = 0.0, coarseTotal = 0.0;
    for (std::size_t kz = 0; kz < d.nz(); ++kz)
        for (std::size_t j = 0; j < d.ny(); ++j)
            for (std::size_t i = 0; i < d.nx(); ++i) {
                const auto leaf = tree.leafAt(d.cellCenter(i, j, kz));
                if (!leaf) continue;
                auto& g = grad[*leaf];
                g.first += fine.value[d.index(i, j, kz)];
                g.second += fine.noise[d.index(i, j, kz)];
                fineTotal += fine.value[d.index(i, j, kz)];
            }
    double resolutionDelta = 0.0;
    if (d.nx() % 2 == 0 && d.ny() % 2 == 0 && d.nz() % 2 == 0 && d.nx() >= 4 && d.ny() >= 4 && d.nz() >= 4) {
        const DensityGrid c = d.coarsened();
        const GradSqrtCells coarse = gradSqrtDensityCells(c, relCutoff);
        for (std::size_t kz = 0; kz < c.nz(); ++kz)
            for (std::size_t j = 0; j < c.ny(); ++j)
                for (std::size_t i = 0; i < c.nx(); ++i)
                    if (tree.leafAt(c.cellCenter(i, j, kz))) coarseTotal += coarse.value[c.index(i, j, kz)];
        resolutionDelta = std::abs(fineTotal - coarseTotal);
    }

    double massVar = 0.0, noise = 0.0;
    for (std::size_t leaf : tree.leaves()) {
        const CubeNode& n = tree.nodes[leaf];
        LeafContribution c;
        c.node = leaf;
        c.label = n.label;
        c.mass = d.massIn(n.cube.box());
        const double side2 = n.cube.side * n.cube.side;
        c.exclusionTerm = lambda * k / side2 * std::max(c.mass.value - tree.q, 0.0);
        if (c.mass.value > tree.q) {
            const double e = lambda * k / side2 * c.mass.error;
            massVar += e * e;
        }
        const auto g = grad.count(leaf) ? grad[leaf] : std::pair<double, double>{0.0, 0.0};
        c.gradientTerm = mu / 9.0 * g.first;
        c.gradientError = mu / 9.0 * g.second;
        noise += g.second;
        c.power53 = densityPowerIntegral(d, n.cube.box(), 5.0 / 3.0);
        if (n.label == CubeLabel::A)
            c.saf = c.power53.value <= kappa / side2 * std::pow(std::max(c.mass.value, 0.0), 5.0 / 3.0);
        if (n.label == CubeLabel::B && !(std::max(c.mass.value - tree.q, 0.0) >= 0.5 * c.mass.value))
            r.bHalfMass = false;
        r.total += c.exclusionTerm + c.gradientTerm;
        r.leaves.push_back(c);
    }
    r.statError = std::sqrt(massVar);
    r.gridDelta = mu / 9.0 * (noise + resolutionDelta);
    r.error = r.statError + r.gridDelta;

    if (tree.association.size() == tree.nodes.size()) {
        std::map<std::size_t, GroupBound> groups;
        for (const auto& c : r.leaves) {
            if (c.label == CubeLabel::B) {
                auto& g = groups[c.node];
                g.bNode = c.node;
                g.bound = 28.0 / 3.0 * kappa * c.power53.value;
            }
        }
        for (const auto& c : r.leaves)
            if (c.label == CubeLabel::A && c.saf && tree.association[c.node])
                groups[*tree.association[c.node]].safSum += c.power53.value;
        for (auto& [b, g] : groups) {
            g.holds = g.safSum <= g.bound * (1.0 + 1e-12);
            r.groupsHold = r.groupsHold && g.holds;
            r.groups.push_back(g);
        }
    }
    return r;
}

BoxBoundResult boxBound(double N, double q, double L, double k) {
    if (!(N >= 1.0 && q >= 1.0 && L > 0.0 && k > 0.0))
        throw InvalidArgumentError("boxBound: needs N, q >= 1 and L, k > 0");
    BoxBoundResult r;
    r.searchUpper = static_cast<long long>(std::ceil(std::cbrt(N / q))) + 2;
    r.rawBound = -INFINITY;
    for (long long M = 1; M <= r.searchUpper; ++M) {
        const double m = static_cast<double>(M);
        const double v = k * (N * m * m - q * std::pow(m, 5)) / (L * L);
        if (v > r.rawBound) {
            r.rawBound = v;
            r.Mopt = M;
        }
    }
    r.bound = std::max(r.rawBound, 0.0);
    r.stationary = std::cbrt(2.0 * N / (5.0 * q));
    r.alternative = std::cbrt(5.0 * N / (2.0 * q));
    return r;
}

}  // namespace ltlab
