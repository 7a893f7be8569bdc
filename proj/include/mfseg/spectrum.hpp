#pragma once

#include <string>
#include <vector>

namespace mfseg {

/// One sampled point of a multifractal spectrum: the exponent, the
/// dimension estimate and the number of pixels supporting it (0 for
/// statistically derived curves).
struct SpectrumPoint {
    double alpha = 0.0;
    double f = 0.0;
    long long count = 0;
};

struct SpectrumCurve {
    enum class Kind { Coarse, Legendre };

    Kind kind = Kind::Coarse;
    std::vector<SpectrumPoint> points;  // sorted by alpha, strictly increasing
    std::string warning;                // empty when the curve is well behaved

    bool empty() const { return points.empty(); }
};

/// Sorts points by alpha and merges near-duplicates (|da| < 1e-9),
/// averaging f. Keeps alpha strictly increasing.
void sort_and_merge(SpectrumCurve& curve);

/// Piecewise-linear evaluation of the curve at `alpha`, clamped to the
/// first/last point outside the sampled range.
double interpolate(const SpectrumCurve& curve, double alpha);

}  // namespace mfseg
