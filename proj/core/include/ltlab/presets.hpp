#pragma once

#include <string>
#include <vector>

#include "ltlab/functionals.hpp"
#include "ltlab/trial.hpp"

namespace ltlab {

/// Gaussian orbitals of width `width` with a C^2 cutoff of radius 1 at the origin; the support box
/// is [-1, 1]^3 throughout.
inline const Box kPresetSupport{{-1, -1, -1}, {1, 1, 1}};

/// N = 2, one block: det[phi_a(x_b)] with Gaussians at (+-separation/2, 0, 0), divided by g.
TrialFunction gaussianSlaterN2(double width = 0.5, double separation = 0.5, WeightSpec weight = CoulombWeight{});

/// N particles, one block, Slater determinant of N Gaussians on a circle of radius `spread` in
/// the xy plane.
TrialFunction slaterTrial(std::size_t N, double width = 0.25, double spread = 0.2,
                          WeightSpec weight = CoulombWeight{});

/// Slater determinants per block of `partition` (orbitals as in slaterTrial with N = largest block).
TrialFunction blockTrial(const SymmetryPartition& partition, double width = 0.25, double spread = 0.2,
                         WeightSpec weight = CoulombWeight{});

/// prod_i phi(x_i) / g with one Gaussian at the origin: fully symmetric.
TrialFunction symmetricTrial(std::size_t N, double width = 0.3, WeightSpec weight = CoulombWeight{});

/// prod_i phi_i(x_i) / g with distinct Gaussian centres: no symmetry (singleton partition).
TrialFunction asymmetricTrial(std::size_t N, double width = 0.25, double spread = 0.25,
                              WeightSpec weight = CoulombWeight{});

/// One-block Slater trial with the orbital ring centred at `centre` (mass off the origin).
TrialFunction offsetSlaterTrial(std::size_t N, const Vec3& centre, double width = 0.2, double spread = 0.15,
                                WeightSpec weight = CoulombWeight{});

struct PresetTrial {
    std::string name;
    TrialFunction f;
};

/// The standard suite: N in {2, 3}, q in {1, 2, 3}, including q = N cases.
std::vector<PresetTrial> standardSuite();

/// Names accepted by presetTrial().
std::vector<std::string> presetNames();
/// Throws InvalidArgumentError for an unknown name.
TrialFunction presetTrial(const std::string& name);

}  // namespace ltlab
