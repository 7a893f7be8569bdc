#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfseg/measure.hpp"

namespace mfseg {

/// Ladder of window sizes for the per-pixel regularity fit. Entry k maps
/// to a square window of (2k-1) x (2k-1) pixels.
struct WindowLadder {
    std::vector<int> ks;

    int max_halfwidth() const;
    /// k = 2..9, windows 3..17 px.
    static WindowLadder optical();
    /// k = 3..9; the two smallest windows are dropped for speckled data.
    static WindowLadder sar();
};

/// Per-pixel local regularity estimates over an analysis core.
/// alpha and r2 are stored as float32, matching the export format, so
/// downstream consumers and emitted artifacts see identical values.
/// Invalid pixels (some window had zero mass) carry NaN alpha.
struct AlphaMap {
    int width = 0;
    int height = 0;
    std::vector<float> alpha;
    std::vector<float> r2;
    std::vector<uint8_t> valid;

    bool is_valid(size_t i) const { return valid[i] != 0; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

struct OlsFit {
    double slope = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares of ys against xs. Needs >= 3 points and
/// non-degenerate xs. R2 is clamped to [0,1]; a perfectly flat exact fit
/// reports 1.
OlsFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys);

/// Estimates alpha for every pixel of the window's core: the OLS slope
/// of ln(window measure) against ln(window width) over the ladder. The
/// fit consumes ratios of window sums, so rescaling the band by any
/// exactly-representable factor reproduces alphas bit for bit.
AlphaMap alpha_map(const MeasureField& field, const AnalysisWindow& win,
                   const WindowLadder& ladder, int threads = 1);

/// Alpha/r2 rasters round-trip through the sidecar format with NaN as
/// the invalid sentinel (bands "alpha" and "r2").
void save_alpha_raster(const AlphaMap& am, const std::string& sidecar_path);
AlphaMap load_alpha_raster(const std::string& sidecar_path);

}  // namespace mfseg
