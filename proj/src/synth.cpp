#include "mfseg/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "mfseg/rng.hpp"

namespace mfseg {

namespace {

void validate(const CascadeSpec& spec) {
    double sum = 0.0;
    for (double w : spec.weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("cascade weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("cascade weights must sum to 1");
    if (spec.depth < 1) throw std::invalid_argument("cascade depth must be >= 1");
    if (spec.depth > 14) throw std::invalid_argument("cascade depth too large");
}

}  // namespace

RasterBand cascade(const CascadeSpec& spec) {
    validate(spec);
    const int side = 1 << spec.depth;
    RasterBand band;
    band.width = side;
    band.height = side;
    band.name = "cascade";
    band.values.assign(static_cast<size_t>(side) * side, 0.0);

    SplitMix64 rng(spec.shuffle_seed.value_or(0));
    const bool shuffle = spec.shuffle_seed.has_value();

    // depth-first subdivision; each node multiplies its mass into four
    // children ordered (NW, NE, SW, SE), with the weight-to-quadrant
    // assignment optionally permuted per node
    struct Node {
        int x, y, size;
        double mass;
    };
    std::vector<Node> stack;
    stack.push_back({0, 0, side, 1.0});
    while (!stack.empty()) {
        const Node node = stack.back();
        stack.pop_back();
        if (node.size == 1) {
            band.at(node.x, node.y) = node.mass;
            continue;
        }
        int order[4] = {0, 1, 2, 3};
        if (shuffle) {
            for (int i = 3; i > 0; --i) {
                const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
                std::swap(order[i], order[j]);
            }
        }
        const int h = node.size / 2;
        const int qx[4] = {node.x, node.x + h, node.x, node.x + h};
        const int qy[4] = {node.y, node.y, node.y + h, node.y + h};
        for (int qc = 3; qc >= 0; --qc)
            stack.push_back({qx[qc], qy[qc], h, node.mass * spec.weights[order[qc]]});
    }
    return band;
}

double analytic_tau(const CascadeSpec& spec, double q) {
    validate(spec);
    if (!std::isfinite(q)) throw std::invalid_argument("q must be finite");
    double sum = 0.0;
    bool any = false;
    for (double w : spec.weights) {
        if (w <= 0.0) continue;  // zero weights lie outside the support
        any = true;
        sum += std::pow(w, q);
    }
    if (!any) throw std::invalid_argument("all cascade weights are zero");
    return std::log2(sum);
}

double analytic_alpha(const CascadeSpec& spec, double q) {
    validate(spec);
    if (!std::isfinite(q)) throw std::invalid_argument("q must be finite");
    double num = 0.0, den = 0.0;
    bool any = false;
    for (double w : spec.weights) {
        if (w <= 0.0) continue;
        any = true;
        const double wq = std::pow(w, q);
        num += wq * std::log(w);
        den += wq;
    }
    if (!any) throw std::invalid_argument("all cascade weights are zero");
    return -num / (den * std::log(2.0));
}

SpectrumCurve analytic_spectrum(const CascadeSpec& spec, const std::vector<double>& q_grid) {
    SpectrumCurve curve;
    curve.kind = SpectrumCurve::Kind::Legendre;
    for (double q : q_grid) {
        const double a = analytic_alpha(spec, q);
        const double f = q * a + analytic_tau(spec, q);
        curve.points.push_back({a, f, 0});
    }
    sort_and_merge(curve);
    return curve;
}

SegmentationMask mask_from_rects(int width, int height, const std::vector<Rect>& rects) {
    if (width < 1 || height < 1) throw std::invalid_argument("empty mask geometry");
    for (const Rect& r : rects)
        if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > width || r.y + r.h > height)
            throw std::invalid_argument("rectangle outside the scene");
    SegmentationMask mask;
    mask.width = width;
    mask.height = height;
    mask.water.assign(static_cast<size_t>(width) * height, 0);
    for (const Rect& r : rects)
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                mask.water[static_cast<size_t>(y) * width + x] = 1;
    return mask;
}

void apply_water(RasterBand& band, const std::vector<Rect>& rects, double level,
                 double noise_amp, uint64_t seed) {
    if (!(level >= 0.0) || !(noise_amp >= 0.0))
        throw std::invalid_argument("water level and noise amplitude must be nonnegative");
    const SegmentationMask mask = mask_from_rects(band.width, band.height, rects);
    // noise on a dyadic lattice: amp * (k/2^14 - 1), k uniform in [0, 2^15]
    SplitMix64 rng(seed);
    for (size_t i = 0; i < band.pixel_count(); ++i) {
        if (!mask.water[i]) continue;
        double v = level;
        if (noise_amp > 0.0) {
            const double k = static_cast<double>(rng.below((1ULL << 15) + 1));
            v += noise_amp * (k * 0x1.0p-14 - 1.0);
        }
        band.values[i] = v < 0.0 ? 0.0 : v;
    }
}

std::pair<RasterBand, SegmentationMask> composite_scene(int side,
                                                        const std::vector<Rect>& water_regions,
                                                        double water_level, double noise_amp,
                                                        const CascadeSpec& land_spec,
                                                        uint64_t seed) {
    if ((1 << land_spec.depth) != side)
        throw std::invalid_argument("land cascade depth does not match the scene side");

    RasterBand band = cascade(land_spec);
    // rescale the cascade (total mass 1) to unit mean so water_level is
    // directly comparable to the surrounding texture; side is a power of
    // two, so the factor is exact
    const double to_unit_mean = static_cast<double>(side) * static_cast<double>(side);
    for (double& v : band.values) v *= to_unit_mean;
    band.name = "scene";

    SegmentationMask truth = mask_from_rects(side, side, water_regions);
    apply_water(band, water_regions, water_level, noise_amp, seed);
    return {std::move(band), std::move(truth)};
}

}  // namespace mfseg
