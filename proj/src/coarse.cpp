#include "mfseg/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfseg/parallel.hpp"

namespace mfseg {

ClassPartition bin_alpha(const AlphaMap& am, int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("need at least one class");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    size_t valid_count = 0;
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        if (!am.is_valid(i)) continue;
        ++valid_count;
        lo = std::min(lo, static_cast<double>(am.alpha[i]));
        hi = std::max(hi, static_cast<double>(am.alpha[i]));
    }
    if (valid_count == 0) throw std::invalid_argument("no valid pixels to bin");

    ClassPartition part;
    part.alpha_min = lo;
    part.alpha_max = hi;
    part.class_of.assign(am.pixel_count(), -1);
    if (hi - lo < 1e-9) {
        // constant alpha: a single class holding everything
        part.degenerate = true;
        part.num_classes = 1;
        part.delta = 0.0;
        for (size_t i = 0; i < am.pixel_count(); ++i)
            if (am.is_valid(i)) part.class_of[i] = 1;
        return part;
    }

    part.num_classes = num_classes;
    part.delta = (hi - lo) / num_classes;
    const double delta = part.delta;
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        if (!am.is_valid(i)) continue;
        const double a = am.alpha[i];
        int s = static_cast<int>(std::ceil((a - lo) / delta));
        s = std::clamp(s, 1, num_classes);
        // classes are closed intervals sharing edges; a value sitting
        // exactly on an edge belongs to the lower class
        while (s > 1 && a <= lo + (s - 1) * delta) --s;
        while (s < num_classes && a > lo + s * delta) ++s;
        part.class_of[i] = s;
    }
    return part;
}

std::vector<long long> box_counts(const std::vector<uint8_t>& members, int region_width,
                                  int region_height, const std::vector<int>& widths) {
    if (region_width < 1 || region_height < 1 ||
        members.size() != static_cast<size_t>(region_width) * region_height)
        throw std::invalid_argument("member bitmap does not match region");
    std::vector<long long> counts;
    counts.reserve(widths.size());
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("box width must be positive");
        const int cols = (region_width + w - 1) / w;
        const int rows = (region_height + w - 1) / w;
        std::vector<uint8_t> occupied(static_cast<size_t>(cols) * rows, 0);
        for (int y = 0; y < region_height; ++y) {
            const size_t row_base = static_cast<size_t>(y) * region_width;
            const size_t cell_base = static_cast<size_t>(y / w) * cols;
            for (int x = 0; x < region_width; ++x)
                if (members[row_base + x]) occupied[cell_base + x / w] = 1;
        }
        long long n = 0;
        for (uint8_t o : occupied) n += o;
        counts.push_back(n);
    }
    return counts;
}

BoxDimension box_counting_dimension(const std::vector<uint8_t>& members, int region_width,
                                    int region_height, const std::vector<int>& widths) {
    bool any = false;
    for (uint8_t m : members)
        if (m) {
            any = true;
            break;
        }
    if (!any) throw std::invalid_argument("empty member set");

    const std::vector<long long> counts = box_counts(members, region_width, region_height, widths);
    std::vector<double> xs, ys;
    for (size_t i = 0; i < widths.size(); ++i) {
        if (counts[i] < 1) continue;
        xs.push_back(-std::log(static_cast<double>(widths[i])));
        ys.push_back(std::log(static_cast<double>(counts[i])));
    }
    BoxDimension bd;
    bd.scales_used = static_cast<int>(xs.size());
    if (xs.size() >= 3) bd.dim = ols_fit(xs, ys).slope;
    return bd;
}

SpectrumCurve coarse_spectrum(const AlphaMap& am, const ClassPartition& part,
                              const std::vector<int>& widths, int threads) {
    if (part.class_of.size() != am.pixel_count())
        throw std::invalid_argument("partition does not match alpha map");

    // member sets: one per class, plus the outer halves of the edge
    // classes when the partition is not degenerate
    const int R = part.num_classes;
    const bool halves = !part.degenerate;
    const int sets = halves ? R + 2 : R;
    const int half_lo = R;      // first half of class 1
    const int half_hi = R + 1;  // last half of class R

    std::vector<std::vector<uint8_t>> members(sets);
    for (auto& m : members) m.assign(am.pixel_count(), 0);
    std::vector<long long> counts(sets, 0);
    const double lo_half_edge = part.alpha_min + 0.5 * part.delta;
    const double hi_half_edge = part.alpha_max - 0.5 * part.delta;
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        const int s = part.class_of[i];
        if (s < 1) continue;
        members[s - 1][i] = 1;
        ++counts[s - 1];
        if (!halves) continue;
        if (s == 1 && am.alpha[i] <= lo_half_edge) {
            members[half_lo][i] = 1;
            ++counts[half_lo];
        }
        if (s == R && am.alpha[i] >= hi_half_edge) {
            members[half_hi][i] = 1;
            ++counts[half_hi];
        }
    }

    std::vector<std::optional<double>> dims(sets);
    parallel_for(static_cast<size_t>(sets), threads, [&](size_t s) {
        if (counts[s] == 0) return;
        dims[s] = box_counting_dimension(members[s], am.width, am.height, widths).dim;
    });

    SpectrumCurve curve;
    curve.kind = SpectrumCurve::Kind::Coarse;
    if (halves && dims[half_lo])
        curve.points.push_back({part.alpha_min, *dims[half_lo], counts[half_lo]});
    for (int s = 1; s <= R; ++s) {
        if (!dims[s - 1]) continue;
        const double mid = part.degenerate ? part.alpha_min : part.midpoint(s);
        curve.points.push_back({mid, *dims[s - 1], counts[s - 1]});
    }
    if (halves && dims[half_hi])
        curve.points.push_back({part.alpha_max, *dims[half_hi], counts[half_hi]});
    sort_and_merge(curve);
    return curve;
}

std::vector<double> fit_polynomial(const std::vector<double>& xs, const std::vector<double>& ys,
                                   int degree) {
    if (degree < 0) throw std::invalid_argument("negative polynomial degree");
    if (xs.size() != ys.size() || xs.size() <= static_cast<size_t>(degree))
        throw std::invalid_argument("not enough points for the requested degree");
    const int m = degree + 1;
    // normal equations on centered/scaled x for conditioning, then the
    // coefficients are expanded back to the raw variable
    double cx = 0.0;
    for (double x : xs) cx += x;
    cx /= static_cast<double>(xs.size());
    double scale = 0.0;
    for (double x : xs) scale = std::max(scale, std::abs(x - cx));
    if (scale == 0.0) scale = 1.0;

    std::vector<double> ata(static_cast<size_t>(m) * m, 0.0), aty(m, 0.0);
    std::vector<double> pow_buf(m);
    for (size_t i = 0; i < xs.size(); ++i) {
        const double t = (xs[i] - cx) / scale;
        pow_buf[0] = 1.0;
        for (int d = 1; d < m; ++d) pow_buf[d] = pow_buf[d - 1] * t;
        for (int r = 0; r < m; ++r) {
            aty[r] += pow_buf[r] * ys[i];
            for (int c = 0; c < m; ++c) ata[static_cast<size_t>(r) * m + c] += pow_buf[r] * pow_buf[c];
        }
    }
    // Gaussian elimination with partial pivoting
    std::vector<double> coeff(m, 0.0);
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(ata[static_cast<size_t>(r) * m + col]) >
                std::abs(ata[static_cast<size_t>(pivot) * m + col]))
                pivot = r;
        if (std::abs(ata[static_cast<size_t>(pivot) * m + col]) < 1e-300)
            throw std::invalid_argument("singular polynomial fit");
        if (pivot != col) {
            for (int c = 0; c < m; ++c)
                std::swap(ata[static_cast<size_t>(pivot) * m + c],
                          ata[static_cast<size_t>(col) * m + c]);
            std::swap(aty[pivot], aty[col]);
        }
        for (int r = col + 1; r < m; ++r) {
            const double f = ata[static_cast<size_t>(r) * m + col] /
                             ata[static_cast<size_t>(col) * m + col];
            for (int c = col; c < m; ++c)
                ata[static_cast<size_t>(r) * m + c] -= f * ata[static_cast<size_t>(col) * m + c];
            aty[r] -= f * aty[col];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double s = aty[r];
        for (int c = r + 1; c < m; ++c) s -= ata[static_cast<size_t>(r) * m + c] * coeff[c];
        coeff[r] = s / ata[static_cast<size_t>(r) * m + r];
    }
    // expand (x - cx)/scale powers into raw-x coefficients via Horner on
    // the shifted variable is simpler at evaluation time; store shifted
    // form: c0..cd apply to t = (x - cx)/scale. Encode cx and scale at
    // the tail so eval_polynomial can undo the transform.
    coeff.push_back(cx);
    coeff.push_back(scale);
    return coeff;
}

double eval_polynomial(const std::vector<double>& coeffs, double x) {
    if (coeffs.size() < 3) throw std::invalid_argument("bad polynomial coefficients");
    const double scale = coeffs.back();
    const double cx = coeffs[coeffs.size() - 2];
    const double t = (x - cx) / scale;
    double v = 0.0;
    for (size_t i = coeffs.size() - 2; i-- > 0;) v = v * t + coeffs[i];
    return v;
}

FMap f_map(const AlphaMap& am, const SpectrumCurve& curve, FMapMode mode, int degree) {
    if (curve.points.empty()) throw std::invalid_argument("empty spectrum curve");
    FMap fm;
    fm.width = am.width;
    fm.height = am.height;
    fm.f.assign(am.pixel_count(), std::numeric_limits<float>::quiet_NaN());
    fm.valid = am.valid;

    std::vector<double> poly;
    if (mode == FMapMode::Polynomial) {
        std::vector<double> xs, ys;
        for (const auto& p : curve.points) {
            xs.push_back(p.alpha);
            ys.push_back(p.f);
        }
        const int d = std::min<int>(degree, static_cast<int>(xs.size()) - 1);
        poly = fit_polynomial(xs, ys, std::max(0, d));
    }
    for (size_t i = 0; i < am.pixel_count(); ++i) {
        if (!am.is_valid(i)) continue;
        const double a = am.alpha[i];
        const double f = mode == FMapMode::Polynomial ? eval_polynomial(poly, a)
                                                      : interpolate(curve, a);
        fm.f[i] = static_cast<float>(f);
    }
    return fm;
}

}  // namespace mfseg
