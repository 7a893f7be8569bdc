#include "mfseg/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mfseg/parallel.hpp"
#include "mfseg/raster.hpp"

namespace mfseg {

int WindowLadder::max_halfwidth() const {
    int m = 0;
    for (int k : ks) m = std::max(m, k - 1);
    return m;
}

WindowLadder WindowLadder::optical() { return WindowLadder{{2, 3, 4, 5, 6, 7, 8, 9}}; }

WindowLadder WindowLadder::sar() { return WindowLadder{{3, 4, 5, 6, 7, 8, 9}}; }

OlsFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("xs/ys length mismatch");
    const size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("need at least 3 points for a fit");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("degenerate xs");
    OlsFit fit;
    fit.slope = sxy / sxx;
    if (syy <= 1e-24) {
        // flat to rounding noise (ys are logs, so the scale is absolute);
        // the flat line reproduces the data exactly
        fit.r2 = 1.0;
    } else {
        fit.r2 = (sxy * sxy) / (sxx * syy);
        fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
    }
    return fit;
}

namespace {

void validate_ladder(const WindowLadder& ladder, const AnalysisWindow& win) {
    if (ladder.ks.size() < 3) throw std::invalid_argument("ladder needs at least 3 windows");
    for (size_t i = 0; i < ladder.ks.size(); ++i) {
        if (ladder.ks[i] < 1) throw std::invalid_argument("window index must be positive");
        if (i > 0 && ladder.ks[i] <= ladder.ks[i - 1])
            throw std::invalid_argument("ladder must be strictly increasing");
    }
    if (ladder.max_halfwidth() > win.pad)
        throw std::invalid_argument("window ladder exceeds the available padding");
}

}  // namespace

AlphaMap alpha_map(const MeasureField& field, const AnalysisWindow& win,
                   const WindowLadder& ladder, int threads) {
    validate_ladder(ladder, win);
    if (win.core_x < win.pad || win.core_y < win.pad ||
        win.core_x + win.core_size + win.pad > field.width() ||
        win.core_y + win.core_size + win.pad > field.height())
        throw std::invalid_argument("analysis window does not fit inside the field");

    const size_t scales = ladder.ks.size();
    if (scales > 32) throw std::invalid_argument("ladder too long");
    std::vector<double> log_width(scales);
    for (size_t i = 0; i < scales; ++i) log_width[i] = std::log(2.0 * ladder.ks[i] - 1.0);

    AlphaMap am;
    am.width = win.core_size;
    am.height = win.core_size;
    am.alpha.assign(am.pixel_count(), std::numeric_limits<float>::quiet_NaN());
    am.r2.assign(am.pixel_count(), std::numeric_limits<float>::quiet_NaN());
    am.valid.assign(am.pixel_count(), 0);

    parallel_for(am.pixel_count(), threads, [&](size_t i) {
        const int px = win.core_x + static_cast<int>(i) % win.core_size;
        const int py = win.core_y + static_cast<int>(i) / win.core_size;
        double sums[32];
        for (size_t s = 0; s < scales; ++s) {
            sums[s] = field.window_sum(px, py, ladder.ks[s] - 1);
            if (sums[s] <= 0.0) return;  // zero mass in some window: no exponent
        }
        // The fit consumes log ratios against the smallest window, so a
        // band scaled by an exactly representable factor yields the same
        // quotients and therefore bit-identical slopes.
        std::vector<double> ys(scales);
        ys[0] = 0.0;
        for (size_t s = 1; s < scales; ++s) ys[s] = std::log(sums[s] / sums[0]);
        const OlsFit fit = ols_fit(log_width, ys);
        am.alpha[i] = static_cast<float>(fit.slope);
        am.r2[i] = static_cast<float>(fit.r2);
        am.valid[i] = 1;
    });
    return am;
}

void save_alpha_raster(const AlphaMap& am, const std::string& sidecar_path) {
    RasterStack stack;
    RasterBand alpha;
    alpha.width = am.width;
    alpha.height = am.height;
    alpha.name = "alpha";
    alpha.values.assign(am.alpha.begin(), am.alpha.end());
    RasterBand r2 = alpha;
    r2.name = "r2";
    r2.values.assign(am.r2.begin(), am.r2.end());
    stack.bands.push_back(std::move(alpha));
    stack.bands.push_back(std::move(r2));
    save_raster(stack, sidecar_path, /*allow_non_finite=*/true);
}

AlphaMap load_alpha_raster(const std::string& sidecar_path) {
    RasterStack stack = load_raster_allow_nan(sidecar_path);
    const RasterBand& alpha = stack.band("alpha");
    AlphaMap am;
    am.width = alpha.width;
    am.height = alpha.height;
    am.alpha.resize(am.pixel_count());
    am.r2.assign(am.pixel_count(), std::numeric_limits<float>::quiet_NaN());
    am.valid.resize(am.pixel_count());
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        am.alpha[i] = static_cast<float>(alpha.values[i]);
        am.valid[i] = std::isfinite(alpha.values[i]) ? 1 : 0;
    }
    for (const auto& b : stack.bands)
        if (b.name == "r2")
            for (size_t i = 0; i < am.pixel_count(); ++i) am.r2[i] = static_cast<float>(b.values[i]);
    return am;
}

}  // namespace mfseg
