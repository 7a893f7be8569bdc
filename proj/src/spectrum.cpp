#include "mfseg/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace mfseg {

void sort_and_merge(SpectrumCurve& curve) {
    auto& pts = curve.points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.alpha < b.alpha; });
    std::vector<SpectrumPoint> merged;
    for (const auto& p : pts) {
        if (!merged.empty() && std::abs(p.alpha - merged.back().alpha) < 1e-9) {
            SpectrumPoint& m = merged.back();
            m.f = 0.5 * (m.f + p.f);
            m.count += p.count;
        } else {
            merged.push_back(p);
        }
    }
    pts = std::move(merged);
}

double interpolate(const SpectrumCurve& curve, double alpha) {
    const auto& pts = curve.points;
    if (pts.empty()) throw std::invalid_argument("empty spectrum curve");
    if (alpha <= pts.front().alpha) return pts.front().f;
    if (alpha >= pts.back().alpha) return pts.back().f;
    // first point with alpha >= query
    size_t hi = 1;
    while (hi < pts.size() && pts[hi].alpha < alpha) ++hi;
    const SpectrumPoint& a = pts[hi - 1];
    const SpectrumPoint& b = pts[hi];
    const double t = (alpha - a.alpha) / (b.alpha - a.alpha);
    return a.f + t * (b.f - a.f);
}

}  // namespace mfseg
