#include "mfseg/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace mfseg {

namespace {

// Error-free transforms (Knuth/Dekker). A summed-area table held as
// (hi, lo) pairs keeps window sums accurate to ~1 ulp of the window
// value itself; a plain double table is only accurate to 1 ulp of the
// grand total, which is far too coarse for small windows on large
// rasters.
struct Dd {
    double hi = 0.0;
    double lo = 0.0;
};

inline Dd two_sum(double a, double b) {
    const double s = a + b;
    const double bv = s - a;
    const double err = (a - (s - bv)) + (b - bv);
    return {s, err};
}

inline Dd dd_add(const Dd& a, const Dd& b) {
    Dd s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    const Dd r = two_sum(s.hi, s.lo);
    return r;
}

inline Dd dd_neg(const Dd& a) { return {-a.hi, -a.lo}; }

}  // namespace

MeasureField::MeasureField(const RasterBand& band) : width_(band.width), height_(band.height) {
    if (band.width < 1 || band.height < 1 || band.values.size() != band.pixel_count())
        throw std::invalid_argument("malformed band");
    double total = 0.0;
    for (double v : band.values) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("measure requires nonnegative finite values");
        total += v;
    }
    if (!(total > 0.0)) throw std::invalid_argument("measure requires positive total mass");
    total_mass_ = total;

    const size_t w1 = static_cast<size_t>(width_) + 1;
    const size_t h1 = static_cast<size_t>(height_) + 1;
    sat_hi_.assign(w1 * h1, 0.0);
    sat_lo_.assign(w1 * h1, 0.0);
    std::vector<Dd> column(w1);  // running column sums in compensated form
    for (int y = 0; y < height_; ++y) {
        Dd row{0.0, 0.0};
        for (int x = 0; x < width_; ++x) {
            row = dd_add(row, {band.at(x, y), 0.0});
            column[x + 1] = dd_add(column[x + 1], row);
            const size_t idx = (static_cast<size_t>(y) + 1) * w1 + (x + 1);
            sat_hi_[idx] = column[x + 1].hi;
            sat_lo_[idx] = column[x + 1].lo;
        }
    }
}

void MeasureField::check_rect(int x, int y, int w, int h) const {
    if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > width_ || y + h > height_)
        throw std::invalid_argument("window out of raster bounds");
}

double MeasureField::rect_sum(int x, int y, int w, int h) const {
    check_rect(x, y, w, h);
    const size_t w1 = static_cast<size_t>(width_) + 1;
    auto at = [&](int cx, int cy) -> Dd {
        const size_t idx = static_cast<size_t>(cy) * w1 + cx;
        return {sat_hi_[idx], sat_lo_[idx]};
    };
    Dd s = dd_add(at(x + w, y + h), dd_neg(at(x, y + h)));
    s = dd_add(s, dd_neg(at(x + w, y)));
    s = dd_add(s, at(x, y));
    const double v = s.hi + s.lo;
    return v < 0.0 ? 0.0 : v;  // cancellation can leave a tiny negative
}

double MeasureField::window_sum(int cx, int cy, int halfwidth) const {
    if (halfwidth < 0) throw std::invalid_argument("negative halfwidth");
    const int w = 2 * halfwidth + 1;
    return rect_sum(cx - halfwidth, cy - halfwidth, w, w);
}

double MeasureField::window_measure(int cx, int cy, int halfwidth) const {
    return window_sum(cx, cy, halfwidth) / total_mass_;
}

BoxGrid MeasureField::box_grid(const Region& region, int box_width) const {
    check_rect(region.x, region.y, region.size, region.size);
    if (box_width < 1 || region.size % box_width != 0)
        throw std::invalid_argument("box width must divide the region side");
    BoxGrid grid;
    grid.box_width = box_width;
    grid.cols = region.size / box_width;
    grid.rows = region.size / box_width;
    grid.masses.resize(static_cast<size_t>(grid.cols) * grid.rows);
    for (int by = 0; by < grid.rows; ++by)
        for (int bx = 0; bx < grid.cols; ++bx)
            grid.masses[static_cast<size_t>(by) * grid.cols + bx] =
                rect_sum(region.x + bx * box_width, region.y + by * box_width, box_width,
                         box_width) /
                total_mass_;
    return grid;
}

std::vector<BoxGrid> MeasureField::box_grid_ladder(const Region& region,
                                                   const std::vector<int>& widths) const {
    std::vector<BoxGrid> grids;
    grids.reserve(widths.size());
    for (size_t i = 0; i < widths.size(); ++i) {
        const int w = widths[i];
        if (!grids.empty() && w == 2 * grids.back().box_width && grids.back().cols % 2 == 0 &&
            region.size % w == 0) {
            // aggregate 2x2 children; keeps parent == sum of children to
            // within one rounding of the parent value
            const BoxGrid& fine = grids.back();
            BoxGrid grid;
            grid.box_width = w;
            grid.cols = fine.cols / 2;
            grid.rows = fine.rows / 2;
            grid.masses.resize(static_cast<size_t>(grid.cols) * grid.rows);
            for (int by = 0; by < grid.rows; ++by)
                for (int bx = 0; bx < grid.cols; ++bx)
                    grid.masses[static_cast<size_t>(by) * grid.cols + bx] =
                        (fine.at(2 * bx, 2 * by) + fine.at(2 * bx + 1, 2 * by)) +
                        (fine.at(2 * bx, 2 * by + 1) + fine.at(2 * bx + 1, 2 * by + 1));
            grids.push_back(std::move(grid));
        } else {
            grids.push_back(box_grid(region, w));
        }
    }
    return grids;
}

std::vector<int> mesh_ladder(int region_size, int limit) {
    if (region_size < 1) throw std::invalid_argument("empty region");
    std::vector<int> widths;
    for (int w = 4; w <= region_size && w <= limit; w *= 2) widths.push_back(w);
    return widths;
}

}  // namespace mfseg
