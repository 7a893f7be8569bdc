#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mfseg/raster.hpp"
#include "mfseg/spectrum.hpp"

namespace mfseg {

/// 2x2 multiplicative cascade: four nonnegative weights summing to 1,
/// applied recursively `depth` times, giving a 2^depth square measure.
/// With shuffle_seed set the weights are permuted independently at every
/// subdivision (stationary texture); without it each weight keeps a
/// fixed quadrant (ordered fractal).
struct CascadeSpec {
    std::array<double, 4> weights{};
    int depth = 1;
    std::optional<uint64_t> shuffle_seed;
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

/// Band of box masses at the deepest level; total mass 1.
RasterBand cascade(const CascadeSpec& spec);

/// tau(q) = log2(sum_i w_i^q), zero weights excluded.
double analytic_tau(const CascadeSpec& spec, double q);

/// alpha(q) = -sum w^q ln w / (sum w^q * ln 2).
double analytic_alpha(const CascadeSpec& spec, double q);

/// (alpha(q), q*alpha + tau(q)) over the grid, sorted by alpha with
/// duplicates merged.
SpectrumCurve analytic_spectrum(const CascadeSpec& spec, const std::vector<double>& q_grid);

/// Mask covering the union of the rectangles.
SegmentationMask mask_from_rects(int width, int height, const std::vector<Rect>& rects);

/// Overwrites the rectangles with `level` plus uniform noise of
/// amplitude noise_amp, quantized to a dyadic lattice so that scaled
/// copies of a scene stay exactly proportional. Values clamp at 0.
void apply_water(RasterBand& band, const std::vector<Rect>& rects, double level,
                 double noise_amp, uint64_t seed);

/// Test scene: cascade texture rescaled to unit mean everywhere except
/// the listed rectangles, which hold water_level plus noise (see
/// apply_water). Returns the band and the construction ground truth.
std::pair<RasterBand, SegmentationMask> composite_scene(int side,
                                                        const std::vector<Rect>& water_regions,
                                                        double water_level, double noise_amp,
                                                        const CascadeSpec& land_spec,
                                                        uint64_t seed);

}  // namespace mfseg
