#include "mfseg/segment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfseg {

SegmentationMask threshold_classify(const AlphaMap& am, const FMap& fm, const ThresholdSpec& t) {
    if (am.width != fm.width || am.height != fm.height)
        throw std::invalid_argument("alpha map and f map differ in size");
    if (!(t.alpha_lo < t.alpha_hi) || !(t.f_lo < t.f_hi))
        throw std::invalid_argument("threshold rectangle is empty");
    SegmentationMask mask;
    mask.width = am.width;
    mask.height = am.height;
    mask.water.assign(am.pixel_count(), 0);
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        if (!am.is_valid(i) || fm.valid[i] == 0) continue;
        const double a = am.alpha[i];
        const double f = fm.f[i];
        if (t.alpha_lo < a && a < t.alpha_hi && t.f_lo < f && f < t.f_hi) mask.water[i] = 1;
    }
    return mask;
}

RasterBand ndwi(const RasterBand& red, const RasterBand& swir) {
    if (red.width != swir.width || red.height != swir.height)
        throw std::invalid_argument("NDWI bands differ in size");
    RasterBand out;
    out.width = red.width;
    out.height = red.height;
    out.name = "ndwi";
    out.values.resize(red.pixel_count());
    for (size_t i = 0; i < red.pixel_count(); ++i) {
        const double r = red.values[i];
        const double s = swir.values[i];
        const double denom = r + s;
        out.values[i] = denom == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                     : (r - s) / denom;
    }
    return out;
}

SegmentationMask ndwi_classify(const RasterBand& ndwi_band) {
    SegmentationMask mask;
    mask.width = ndwi_band.width;
    mask.height = ndwi_band.height;
    mask.water.assign(ndwi_band.pixel_count(), 0);
    for (size_t i = 0; i < ndwi_band.pixel_count(); ++i) {
        const double v = ndwi_band.values[i];
        if (std::isfinite(v) && v >= 0.0) mask.water[i] = 1;  // threshold inclusive at 0
    }
    return mask;
}

SegmentationMask majority_filter(const SegmentationMask& mask, int kernel) {
    if (kernel < 3 || kernel % 2 == 0) throw std::invalid_argument("kernel must be odd and >= 3");
    const int W = mask.width;
    const int H = mask.height;
    const int r = kernel / 2;

    // integral image of the water counts, (W+1) x (H+1)
    std::vector<int64_t> sat(static_cast<size_t>(W + 1) * (H + 1), 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const size_t i = static_cast<size_t>(y + 1) * (W + 1) + (x + 1);
            sat[i] = static_cast<int64_t>(mask.water[static_cast<size_t>(y) * W + x]) +
                     sat[i - 1] + sat[i - (W + 1)] - sat[i - (W + 1) - 1];
        }

    SegmentationMask out;
    out.width = W;
    out.height = H;
    out.water.assign(mask.pixel_count(), 0);
    for (int y = 0; y < H; ++y) {
        const int y0 = std::max(0, y - r);
        const int y1 = std::min(H, y + r + 1);
        for (int x = 0; x < W; ++x) {
            const int x0 = std::max(0, x - r);
            const int x1 = std::min(W, x + r + 1);
            const int64_t water = sat[static_cast<size_t>(y1) * (W + 1) + x1] -
                                  sat[static_cast<size_t>(y0) * (W + 1) + x1] -
                                  sat[static_cast<size_t>(y1) * (W + 1) + x0] +
                                  sat[static_cast<size_t>(y0) * (W + 1) + x0];
            const int64_t cells = static_cast<int64_t>(y1 - y0) * (x1 - x0);
            const size_t i = static_cast<size_t>(y) * W + x;
            if (2 * water > cells)
                out.water[i] = 1;
            else if (2 * water == cells)  // tie only on truncated border windows
                out.water[i] = mask.water[i];
        }
    }
    return out;
}

std::optional<ThresholdSpec> suggest_thresholds(const SpectrumCurve& curve) {
    const auto& pts = curve.points;
    if (pts.size() < 3) return std::nullopt;
    // deepest interior local minimum with a hump on each side
    int best = -1;
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
        if (pts[i].f >= pts[i - 1].f || pts[i].f >= pts[i + 1].f) continue;
        double left_max = 0.0, right_max = 0.0;
        for (size_t k = 0; k < i; ++k) left_max = std::max(left_max, pts[k].f);
        for (size_t k = i + 1; k < pts.size(); ++k) right_max = std::max(right_max, pts[k].f);
        if (left_max <= pts[i].f || right_max <= pts[i].f) continue;
        if (best < 0 || pts[i].f < pts[best].f) best = static_cast<int>(i);
    }
    if (best < 0) return std::nullopt;
    double right_max = 0.0;
    for (size_t k = best + 1; k < pts.size(); ++k) right_max = std::max(right_max, pts[k].f);
    ThresholdSpec t;
    t.alpha_lo = pts[best].alpha;
    t.alpha_hi = pts.back().alpha;
    t.f_lo = 0.0;
    t.f_hi = right_max;
    return t;
}

}  // namespace mfseg
