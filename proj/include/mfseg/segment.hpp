#pragma once

#include <optional>

#include "mfseg/coarse.hpp"
#include "mfseg/raster.hpp"

namespace mfseg {

/// Rectangle in the (alpha, f) plane selecting the water class. All four
/// comparisons are strict.
struct ThresholdSpec {
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;
};

/// water <=> pixel valid and alpha_lo < alpha < alpha_hi and
/// f_lo < f < f_hi. Invalid pixels are never water.
SegmentationMask threshold_classify(const AlphaMap& am, const FMap& fm, const ThresholdSpec& t);

/// (red - swir) / (red + swir) per pixel; zero denominators become NaN.
RasterBand ndwi(const RasterBand& red, const RasterBand& swir);

/// water <=> NDWI >= 0; NaN pixels are non-water.
SegmentationMask ndwi_classify(const RasterBand& ndwi_band);

/// Majority vote over an odd square kernel. Border windows are truncated
/// to the part inside the image; an exact tie (only possible there)
/// keeps the pixel's original class.
SegmentationMask majority_filter(const SegmentationMask& mask, int kernel = 7);

/// Scans a coarse spectrum for a mid-range depression (interior local
/// minimum of f between the curve's two dominant humps) and proposes the
/// threshold rectangle right of it: alpha from the depression to the end
/// of the curve, f from 0 up to the right-hand local maximum. Returns
/// nothing when the curve has no interior depression; candidates are a
/// starting point for inspection, not a decision.
std::optional<ThresholdSpec> suggest_thresholds(const SpectrumCurve& curve);

}  // namespace mfseg
