#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfseg/spectrum.hpp"

namespace mfseg {

/// Thrown for missing files, malformed headers and payload size
/// mismatches. Everything else precondition-ish throws
/// std::invalid_argument.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One band of intensity values on a rectangular grid, row-major.
/// Values are widened to doubles on load regardless of storage type.
struct RasterBand {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::string name;

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// Ordered list of equally sized bands with unique names.
struct RasterStack {
    std::vector<RasterBand> bands;

    const RasterBand& band(const std::string& name) const;
    int width() const { return bands.empty() ? 0 : bands.front().width; }
    int height() const { return bands.empty() ? 0 : bands.front().height; }
};

/// Rectangular analysis core plus the margin of surrounding pixels that
/// window queries may reach into. Offsets are in parent-raster
/// coordinates before extraction, in sub-raster coordinates after.
struct AnalysisWindow {
    int core_x = 0;
    int core_y = 0;
    int core_size = 0;
    int pad = 0;
};

struct SegmentationMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> water;  // 0 or 1

    bool at(int x, int y) const { return water[static_cast<size_t>(y) * width + x] != 0; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// ---- file formats -------------------------------------------------------
//
// Native raster: JSON sidecar
//   {"width":W,"height":H,"dtype":"f32","byte_order":"LE","bands":[...]}
// next to a raw planar float32 little-endian payload (band-major,
// row-major within band). The payload path is the sidecar path with its
// ".json" suffix replaced by ".raw".
//
// PGM: binary P5, maxval 255 or 65535 (16-bit samples big-endian).

/// Loads a sidecar raster or a P5 PGM (decided by content/extension).
/// Rejects non-finite payload values.
RasterStack load_raster(const std::string& path);

/// Writes the sidecar + raw payload pair, f32 LE. Non-finite values are
/// only permitted when `allow_non_finite` is set (alpha/f exports use
/// NaN as the invalid-pixel sentinel).
void save_raster(const RasterStack& stack, const std::string& sidecar_path,
                 bool allow_non_finite = false);

/// Sidecar loader that tolerates NaN sentinels; used for alpha/f rasters.
RasterStack load_raster_allow_nan(const std::string& path);

/// gain * v + offset per pixel, clamped at 0 from below. gain must be
/// nonzero.
RasterBand calibrate(const RasterBand& band, double gain, double offset);

/// Cuts the core plus `pad` pixels on every side. Throws if the padded
/// window does not fit inside the stack.
RasterStack extract_window(const RasterStack& stack, const AnalysisWindow& w);

/// Binary P5 mask, water = 255, everything else 0.
void save_mask(const SegmentationMask& mask, const std::string& path);
SegmentationMask load_mask(const std::string& path);

/// CSV with header "alpha,f,count", one row per point, fixed 8 decimals.
void save_spectrum_csv(const SpectrumCurve& curve, const std::string& path);
SpectrumCurve load_spectrum_csv(const std::string& path,
                                SpectrumCurve::Kind kind = SpectrumCurve::Kind::Coarse);

}  // namespace mfseg
