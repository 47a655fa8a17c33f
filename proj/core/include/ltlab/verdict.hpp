#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace ltlab {

/// A value with a one-sigma uncertainty (statistical and/or discretisation).
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

enum class Verdict { Holds, Indeterminate, Violated };

inline std::string_view toString(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds-3sigma";
        case Verdict::Indeterminate: return "indeterminate";
        case Verdict::Violated: return "violated-3sigma";
    }
    return "indeterminate";
}

/// Outcome of testing left >= right.
///
/// margin = left - right, sigma = sqrt(sl^2 + sr^2). With band = threshold * sigma + delta the
/// verdict is Holds if margin >= band, Violated if margin <= -band, Indeterminate otherwise.
struct InequalityCheck {
    std::string id;
    Estimate left;
    Estimate right;
    double margin = 0.0;
    double sigma = 0.0;
    /// Deterministic (discretisation) allowance added to the statistical band.
    double delta = 0.0;
    double threshold = 3.0;
    Verdict verdict = Verdict::Indeterminate;

    bool notViolated() const { return verdict != Verdict::Violated; }
};

inline InequalityCheck checkGreaterEqual(std::string id, Estimate left, Estimate right, double delta = 0.0,
                                         double threshold = 3.0) {
    InequalityCheck c;
    c.id = std::move(id);
    c.left = left;
    c.right = right;
    c.margin = left.value - right.value;
    c.sigma = std::hypot(left.error, right.error);
    c.delta = delta;
    c.threshold = threshold;
    const double band = threshold * c.sigma + delta;
    if (c.margin >= band)
        c.verdict = Verdict::Holds;
    else if (c.margin <= -band)
        c.verdict = Verdict::Violated;
    else
        c.verdict = Verdict::Indeterminate;
    return c;
}

}  // namespace ltlab
