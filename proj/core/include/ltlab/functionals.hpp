#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ltlab/mc.hpp"
#include "ltlab/trial.hpp"
#include "ltlab/verdict.hpp"

namespace ltlab {

struct GridSpec {
    Box box{{-1, -1, -1}, {1, 1, 1}};
    std::size_t nx = 16;
    std::size_t ny = 16;
    std::size_t nz = 16;

    static GridSpec cubic(const Box& box, std::size_t n) { return {box, n, n, n}; }
};

/// Cell-averaged one-particle density on a rectilinear grid.
///
/// Values estimated by density() are for the normalised function f/||f||, so totalMass() is N
/// up to the mass outside the box; norm2 keeps the raw ||f||^2 estimate to undo that.
class DensityGrid {
public:
    DensityGrid() = default;
    explicit DensityGrid(const GridSpec& spec);

    const Box& box() const { return box_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    std::size_t cellCount() const { return values_.size(); }
    Vec3 cellSize() const;
    double cellVolume() const;
    Box cellBox(std::size_t i, std::size_t j, std::size_t k) const;
    Vec3 cellCenter(std::size_t i, std::size_t j, std::size_t k) const;
    /// x-fastest linear index.
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + nx_ * (j + ny_ * k); }
    /// Cell containing x (upper faces belong to the last cell); false if x is outside the box.
    bool locate(const Vec3& x, std::size_t& idx) const;

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& errors() { return errors_; }
    const std::vector<double>& errors() const { return errors_; }
    double value(std::size_t i, std::size_t j, std::size_t k) const { return values_[index(i, j, k)]; }
    double maxValue() const;

    /// sum value * cellVolume.
    double totalMass() const;
    /// Mass inside `region`; cells cut by the region count with their overlap volume fraction.
    Estimate massIn(const Box& region) const;
    /// Every cell averaged over 2x2x2 blocks (requires even resolution).
    DensityGrid coarsened() const;
    /// Values and errors multiplied by c.
    DensityGrid scaled(double c) const;

    /// Raw ||f||^2 estimate of the generating function (1 for grids built from a formula).
    MCEstimate norm2;
    double ess = 0.0;
    bool lowEss = false;
    /// Total weight fraction of particle positions that fell outside the box.
    double massOutside = 0.0;

    /// Grid whose cell values are the average of rho over each cell (tensor Gauss-Legendre,
    /// `nodes` points per axis per cell).
    static DensityGrid fromFunction(const GridSpec& spec, const std::function<double(const Vec3&)>& rho,
                                    std::size_t nodes = 4);

private:
    Box box_;
    std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<double> values_;
    std::vector<double> errors_;
};

/// CSV with header x,y,z,value,error; one row per cell centre, x fastest.
void writeCsv(const DensityGrid& d, std::ostream& os);

/// Binary grid file, little-endian:
///   bytes 0-3 "LTDG", 4-7 uint32 version (1), 8-13 uint16 nx, ny, nz, 14-15 uint16 reserved (0);
///   then 6 float64 (lo.x, lo.y, lo.z, hi.x, hi.y, hi.z), nx*ny*nz float64 values, and the same
///   number of float64 errors, x fastest.
void writeBinary(const DensityGrid& d, std::ostream& os);
/// Throws Error on a bad header or truncated data.
DensityGrid readBinary(std::istream& is);

inline constexpr std::uint32_t kGridFormatVersion = 1;

// ---------------------------------------------------------------------------
// Integral functionals

/// Default sampling strategy for f: PairStratified over its support box with Gaussian lobes at
/// the orbital centres of quotient trials.
SamplingStrategy defaultStrategy(const TrialFunction& f, std::uint64_t samples = 100000, std::uint64_t seed = 1);

/// int g^2 |f|^2 dX.
MCEstimate norm2(const TrialFunction& f, const SamplingStrategy& strategy);
/// Q(f) = sum_i int g^2 |grad_i f|^2 dX.
MCEstimate energyQ(const TrialFunction& f, const SamplingStrategy& strategy);
/// sum_i int g^2 |grad_i f|^2 chi_cube(x_i) dX; the cube is half-open [lo, hi).
MCEstimate localizedEnergy(const TrialFunction& f, const Box& cube, const SamplingStrategy& strategy);
/// Localised energies of several regions from one sample stream.
std::vector<MCEstimate> localizedEnergies(const TrialFunction& f, const std::vector<Box>& cubes,
                                          const SamplingStrategy& strategy);
/// int |Psi|^2 and sum_i int |grad_i Psi|^2 by Monte Carlo (quotient trials only).
MCEstimate coreNorm2(const TrialFunction& f, const SamplingStrategy& strategy);
MCEstimate coreDirichlet(const TrialFunction& f, const SamplingStrategy& strategy);

/// Ratio a/b with relative errors combined in quadrature (estimates treated as independent).
Estimate ratio(const MCEstimate& a, const MCEstimate& b);

/// rho_f / ||f||^2 binned on the grid, by self-normalised importance sampling. Per-cell errors
/// follow from the delta method for the ratio of the cell and total weight sums.
DensityGrid density(const TrialFunction& f, const GridSpec& grid, const SamplingStrategy& strategy);

/// sum over cells of |cell cap region| * value^p with first-order error propagation.
Estimate densityPowerIntegral(const DensityGrid& d, const Box& region, double p);

struct GradSqrtResult {
    double value = 0.0;
    /// |value - value on the 2x coarsened grid| (0 if the grid cannot be coarsened).
    double delta = 0.0;
    /// Estimated upward bias from cell noise under the difference quotients.
    double noise = 0.0;
    /// Cells below cutoff were set to zero before taking square roots.
    double cutoff = 0.0;

    double error() const { return delta + noise; }
};

/// Per-cell terms cellVolume * |grad sqrt(rho)|^2 and their noise estimates.
struct GradSqrtCells {
    std::vector<double> value;
    std::vector<double> noise;
    double cutoff = 0.0;
};
GradSqrtCells gradSqrtDensityCells(const DensityGrid& d, double relCutoff = 1e-3);

/// int |grad sqrt(rho)|^2 from a grid: central differences inside, one-sided at the faces; cells
/// with value < relCutoff * max are treated as exact zeros. Needs at least 8 cells per axis.
GradSqrtResult gradSqrtDensityNorm(const DensityGrid& d, double relCutoff = 1e-3);
/// Same, restricted to the cells whose centres lie in `region` (differences still use neighbours).
GradSqrtResult gradSqrtDensityNorm(const DensityGrid& d, const Box& region, double relCutoff = 1e-3);

/// Multiplicities of the five-term expansion of rho_f(x1) for a symmetric f.
struct DecompositionTerms {
    static double n1(double N) { return N * (N - 1); }
    static double n2(double N) { return N * (N - 1) * (N - 2); }
    static double n3(double N) { return 2 * N * (N - 1) * (N - 2); }
    static double n4(double N) { return N * (N - 1) * (N - 2) * (N - 3); }
    static double n5(double N) { return N; }
};

struct ProbeDecomposition {
    Vec3 probe;
    /// rho_f(probe) and the five single-label components rho_1..rho_5.
    MCEstimate rho;
    std::vector<MCEstimate> components;
    /// rho_f - sum n_j rho_j, estimated on paired samples.
    MCEstimate residual;
    /// |residual| / stderr(residual) (0 if both vanish).
    double zScore = 0.0;
    double relative = 0.0;
};

struct DecompositionReport {
    std::size_t particles = 0;
    std::vector<double> multiplicities;
    std::vector<ProbeDecomposition> probes;
    double maxRelative = 0.0;
    double maxZ = 0.0;
};

/// rho_f(x) = sum_j n_j rho_j(x) at each probe, with
///   rho_1 = int |f|^2 / r12^2,  rho_2 = int |f|^2 / (r12 r13),  rho_3 = int |f|^2 / (r12 r23),
///   rho_4 = int |f|^2 / (r12 r34),  rho_5 = int |f|^2 R,  R = (sum_{2<=j<k} 1/r_jk)^2,
/// integrating x2..xN with x1 pinned to the probe. Requires a fully symmetric f with the Coulomb
/// weight (throws InvalidArgumentError otherwise).
DecompositionReport densityDecompositionCheck(const TrialFunction& f, const std::vector<Vec3>& probes,
                                              const SamplingStrategy& strategy);

// ---------------------------------------------------------------------------
// N = 2 quadrature oracles

/// int g^2 |f|^2 over supportBox^2 by quadratureN2.
QuadratureResult norm2Quadrature(const TrialFunction& f, std::size_t resolution);
/// Q(f) over supportBox^2 by quadratureN2 (weightedKinetic is bounded for quotient trials).
QuadratureResult energyQuadrature(const TrialFunction& f, std::size_t resolution);
/// int |Psi|^2 and int |grad Psi|^2 by plain tensor Gauss-Legendre (smooth integrands).
double coreNorm2Quadrature(const TrialFunction& f, std::size_t nodesPerAxis);
double coreDirichletQuadrature(const TrialFunction& f, std::size_t nodesPerAxis);
/// Cell-averaged rho_f / ||f||^2 of an N = 2 quotient trial; uses g^2|f|^2 = Psi^2 and tensor
/// Gauss-Legendre with `cellNodes` per axis in each cell and `otherNodes` per axis for the
/// other particle over the support box.
DensityGrid quadratureDensityN2(const TrialFunction& f, const GridSpec& grid, std::size_t cellNodes = 3,
                                std::size_t otherNodes = 16);

}  // namespace ltlab
