#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfseg/holder.hpp"
#include "mfseg/spectrum.hpp"

namespace mfseg {

/// Partition of the observed alpha range into R equal classes
/// [alpha_min + (s-1)*delta, alpha_min + s*delta], s = 1..R. Values on a
/// shared boundary go to the lower class; alpha_max goes to class R.
/// A degenerate range (max - min < 1e-9) collapses to one class.
struct ClassPartition {
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    double delta = 0.0;
    int num_classes = 0;
    bool degenerate = false;
    std::vector<int32_t> class_of;  // 1..num_classes, -1 for invalid pixels

    double midpoint(int s) const { return alpha_min + (s - 0.5) * delta; }
};

/// Per-pixel f values aligned with an AlphaMap, float32 like alpha.
struct FMap {
    int width = 0;
    int height = 0;
    std::vector<float> f;
    std::vector<uint8_t> valid;

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

ClassPartition bin_alpha(const AlphaMap& am, int num_classes = 30);

struct BoxDimension {
    std::optional<double> dim;
    int scales_used = 0;
};

/// Box-counting dimension of a pixel set inside a region_size^2 region:
/// OLS slope of ln N_delta against -ln delta over the mesh widths with
/// N_delta >= 1. Undefined with fewer than 3 usable scales.
BoxDimension box_counting_dimension(const std::vector<uint8_t>& members, int region_width,
                                    int region_height, const std::vector<int>& widths);

/// Per-mesh occupancy counts for the set (N_delta per width). Partial
/// boxes at the region edge count like full ones.
std::vector<long long> box_counts(const std::vector<uint8_t>& members, int region_width,
                                  int region_height, const std::vector<int>& widths);

/// One point per non-empty class at (class midpoint, dimension), plus
/// the dimensions of the outer halves of the first and last classes
/// attached at alpha_min and alpha_max. Classes with fewer than 3 usable
/// scales are omitted.
SpectrumCurve coarse_spectrum(const AlphaMap& am, const ClassPartition& part,
                              const std::vector<int>& widths, int threads = 1);

enum class FMapMode { PiecewiseLinear, Polynomial };

/// Assigns each valid pixel the spectrum value at its alpha. Default is
/// piecewise-linear interpolation clamped to the curve ends; the
/// polynomial mode fits a least-squares polynomial of `degree` to the
/// curve and evaluates it instead.
FMap f_map(const AlphaMap& am, const SpectrumCurve& curve,
           FMapMode mode = FMapMode::PiecewiseLinear, int degree = 3);

/// Least-squares polynomial fit helper, exposed for the polynomial FMap
/// mode. Returns coefficients c0..cd for sum c_i * x^i.
std::vector<double> fit_polynomial(const std::vector<double>& xs, const std::vector<double>& ys,
                                   int degree);
double eval_polynomial(const std::vector<double>& coeffs, double x);

}  // namespace mfseg
