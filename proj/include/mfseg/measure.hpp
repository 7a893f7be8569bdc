#pragma once

#include <vector>

#include "mfseg/raster.hpp"

namespace mfseg {

/// Square sub-region of a measure field, in field coordinates.
struct Region {
    int x = 0;
    int y = 0;
    int size = 0;
};

/// Box masses over a regular lattice laid on a region. Masses are
/// normalized by the field's total mass.
struct BoxGrid {
    int box_width = 0;
    int cols = 0;
    int rows = 0;
    std::vector<double> masses;  // row-major

    double at(int cx, int cy) const { return masses[static_cast<size_t>(cy) * cols + cx]; }
};

/// Sum measure over a band: the mass of a window is the sum of the
/// intensities inside it, divided by the total mass of the band.
///
/// Window queries go through a summed-area table kept in compensated
/// (two-double) form, so a window sum carries an error of about one ulp
/// of its own magnitude instead of one ulp of the grand total.
class MeasureField {
public:
    /// Requires nonnegative finite values and positive total mass.
    explicit MeasureField(const RasterBand& band);

    int width() const { return width_; }
    int height() const { return height_; }

    /// Row-major sequential sum of all values (bit-reproducible).
    double total_mass() const { return total_mass_; }

    /// Raw (unnormalized) sum over the (2*halfwidth+1)^2 window centered
    /// at (cx, cy). Throws if the window leaves the raster.
    double window_sum(int cx, int cy, int halfwidth) const;

    /// window_sum divided by total_mass.
    double window_measure(int cx, int cy, int halfwidth) const;

    /// Raw sum over an axis-aligned rectangle [x, x+w) x [y, y+h).
    double rect_sum(int x, int y, int w, int h) const;

    /// Lattice of normalized box masses over `region`. box_width must
    /// divide the region side. Boxes are summed directly (finest grid)
    /// and aggregated pairwise for coarser power-of-two widths by
    /// box_grid_ladder, which keeps refinement consistency tight.
    BoxGrid box_grid(const Region& region, int box_width) const;

    /// All grids for the given widths at once, coarser grids aggregated
    /// from the finest when widths are successive doublings.
    std::vector<BoxGrid> box_grid_ladder(const Region& region,
                                         const std::vector<int>& widths) const;

private:
    int width_ = 0;
    int height_ = 0;
    double total_mass_ = 0.0;
    std::vector<double> sat_hi_;  // (width+1) x (height+1)
    std::vector<double> sat_lo_;

    void check_rect(int x, int y, int w, int h) const;
};

/// Mesh ladder used for box grids and box counting: powers of two from 4
/// up to min(limit, region side).
std::vector<int> mesh_ladder(int region_size, int limit = 1024);

}  // namespace mfseg
