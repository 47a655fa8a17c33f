#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "ltlab/vec3.hpp"

namespace ltlab {

/// Pair distances below this are treated as coincident by the singular weights.
inline constexpr double kCoincidenceThreshold = 1e-12;

/// N labelled points in R^3.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<Vec3> points);

    std::size_t size() const { return points_.size(); }
    const Vec3& operator[](std::size_t i) const { return points_[i]; }
    Vec3& operator[](std::size_t i) { return points_[i]; }
    std::span<const Vec3> points() const { return points_; }
    std::span<Vec3> points() { return points_; }

private:
    std::vector<Vec3> points_;
};

/// g(X) = sum_{i<j} 1/|x_i - x_j|.
struct CoulombWeight {};

/// g(X) = sum_{i<j} (1/|x_i - x_j| - 1/a) with a < 0.
struct FiniteScatteringWeight {
    double a = -1.0;
};

/// g(X) = sum_{i<j} phi(x_i - x_j) for a smooth strictly positive phi with analytic derivatives.
struct SmoothPairWeight {
    std::function<double(const Vec3&)> phi;
    std::function<Vec3(const Vec3&)> gradPhi;
    std::function<double(const Vec3&)> laplacianPhi;

    /// phi(x) = exp(-|x|^2 / (2 width^2)).
    static SmoothPairWeight gaussian(double width);
};

using WeightSpec = std::variant<CoulombWeight, FiniteScatteringWeight, SmoothPairWeight>;

/// Throws InvalidArgumentError on a < 0 violations or a smooth weight with missing callables.
void validate(const WeightSpec& w);

bool isSingular(const WeightSpec& w);

double minPairDistance(const Configuration& X);

double evalWeight(const Configuration& X, const WeightSpec& w);

Vec3 gradWeight(const Configuration& X, std::size_t i, const WeightSpec& w);

/// All particle gradients at once; returns g(X). `grads` must have X.size() entries.
double weightAndGradients(const Configuration& X, const WeightSpec& w, std::span<Vec3> grads);

/// Seven-point finite-difference approximation of sum_k Laplacian_k g(X) with step h.
double harmonicityResidual(const Configuration& X, const WeightSpec& w, double h = 1e-4);

/// sum_k |grad_k g|^2 / g, the natural scale against which the residual above is judged.
double harmonicityScale(const Configuration& X, const WeightSpec& w);

/// 2 sum_{i<j} Laplacian phi(x_i - x_j); only meaningful for the smooth variant.
double smoothLaplacianSum(const Configuration& X, const SmoothPairWeight& w);

}  // namespace ltlab
