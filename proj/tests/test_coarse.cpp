#include <doctest.h>

#include <cmath>

#include "mfseg/coarse.hpp"
#include "mfseg/rng.hpp"

using namespace mfseg;

namespace {

AlphaMap map_of(int width, int height, const std::vector<float>& alphas) {
    AlphaMap am;
    am.width = width;
    am.height = height;
    am.alpha = alphas;
    am.r2.assign(alphas.size(), 1.0f);
    am.valid.assign(alphas.size(), 1);
    for (size_t i = 0; i < alphas.size(); ++i)
        if (std::isnan(alphas[i])) am.valid[i] = 0;
    return am;
}

std::vector<uint8_t> bitmap(int width, int height) {
    return std::vector<uint8_t>(static_cast<size_t>(width) * height, 0);
}

}  // namespace

TEST_CASE("bin_alpha splits the observed range into R classes") {
    // alphas spread uniformly across [1.75, 2.55]
    const int n = 1200;
    std::vector<float> alphas(n);
    for (int i = 0; i < n; ++i)
        alphas[i] = static_cast<float>(1.75 + 0.8 * i / (n - 1.0));
    const AlphaMap am = map_of(n, 1, alphas);
    const ClassPartition part = bin_alpha(am, 30);
    CHECK(part.num_classes == 30);
    CHECK(part.alpha_min == doctest::Approx(1.75).epsilon(1e-6));
    CHECK(part.alpha_max == doctest::Approx(2.55).epsilon(1e-6));
    CHECK(part.delta == doctest::Approx(0.8 / 30.0).epsilon(1e-6));
    for (int i = 0; i < n; ++i) {
        const int s = part.class_of[i];
        REQUIRE(s >= 1);
        REQUIRE(s <= 30);
        const double a = am.alpha[i];
        CHECK(a >= part.alpha_min + (s - 1) * part.delta - 1e-12);
        CHECK(a <= part.alpha_min + s * part.delta + 1e-12);
    }
    // extreme values land in the extreme classes
    CHECK(part.class_of[0] == 1);
    CHECK(part.class_of[n - 1] == 30);
}

TEST_CASE("bin_alpha boundary values take the lower class") {
    // alpha_min 0, alpha_max 4, R=4: boundaries at 1,2,3 are exact
    const AlphaMap am = map_of(6, 1, {0.0f, 1.0f, 2.0f, 3.0f, 4.0f, 2.5f});
    const ClassPartition part = bin_alpha(am, 4);
    CHECK(part.class_of[0] == 1);
    CHECK(part.class_of[1] == 1);
    CHECK(part.class_of[2] == 2);
    CHECK(part.class_of[3] == 3);
    CHECK(part.class_of[4] == 4);  // the maximum goes to class R, not R+1
    CHECK(part.class_of[5] == 3);
}

TEST_CASE("bin_alpha degenerates to one class on constant alpha") {
    const AlphaMap am = map_of(4, 1, {2.0f, 2.0f, 2.0f, 2.0f});
    const ClassPartition part = bin_alpha(am, 30);
    CHECK(part.degenerate);
    CHECK(part.num_classes == 1);
    for (int32_t s : part.class_of) CHECK(s == 1);
}

TEST_CASE("bin_alpha needs at least one valid pixel") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    const AlphaMap am = map_of(2, 1, {nan, nan});
    CHECK_THROWS_AS(bin_alpha(am, 30), std::invalid_argument);
}

TEST_CASE("box dimension of plane, line and point") {
    const int side = 1024;
    const std::vector<int> widths = {4, 8, 16, 32, 64, 128, 256, 512, 1024};

    auto plane = bitmap(side, side);
    std::fill(plane.begin(), plane.end(), uint8_t{1});
    const BoxDimension dp = box_counting_dimension(plane, side, side, widths);
    REQUIRE(dp.dim.has_value());
    CHECK(std::abs(*dp.dim - 2.0) <= 1e-9);
    CHECK(dp.scales_used == 9);

    auto line = bitmap(side, side);
    for (int x = 0; x < side; ++x) line[static_cast<size_t>(500) * side + x] = 1;
    const BoxDimension dl = box_counting_dimension(line, side, side, widths);
    REQUIRE(dl.dim.has_value());
    CHECK(std::abs(*dl.dim - 1.0) <= 1e-9);

    auto point = bitmap(side, side);
    point[static_cast<size_t>(123) * side + 456] = 1;
    const BoxDimension dpt = box_counting_dimension(point, side, side, widths);
    REQUIRE(dpt.dim.has_value());
    CHECK(std::abs(*dpt.dim) <= 1e-9);

    CHECK_THROWS_AS(box_counting_dimension(bitmap(side, side), side, side, widths),
                    std::invalid_argument);
}

TEST_CASE("a dense random set fills the plane") {
    const int side = 1024;
    auto members = bitmap(side, side);
    SplitMix64 rng(17);
    for (auto& m : members) m = rng.next() & 1u;
    const std::vector<int> widths = {4, 8, 16, 32, 64, 128, 256, 512, 1024};
    // oracle: direct per-box occupancy scan at every scale
    const std::vector<long long> counts = box_counts(members, side, side, widths);
    for (size_t i = 0; i < widths.size(); ++i) {
        const int w = widths[i];
        long long direct = 0;
        for (int by = 0; by < side / w; ++by)
            for (int bx = 0; bx < side / w; ++bx) {
                bool hit = false;
                for (int y = by * w; y < (by + 1) * w && !hit; ++y)
                    for (int x = bx * w; x < (bx + 1) * w && !hit; ++x)
                        hit = members[static_cast<size_t>(y) * side + x] != 0;
                direct += hit ? 1 : 0;
            }
        CHECK(counts[i] == direct);
    }
    const BoxDimension bd = box_counting_dimension(members, side, side, widths);
    REQUIRE(bd.dim.has_value());
    CHECK(std::abs(*bd.dim - 2.0) <= 0.05);
}

TEST_CASE("box counts of a union dominate both parts at every scale") {
    const int side = 256;
    SplitMix64 rng(5);
    auto a = bitmap(side, side);
    auto b = bitmap(side, side);
    for (int i = 0; i < 3000; ++i) {
        a[rng.below(a.size())] = 1;
        b[rng.below(b.size())] = 1;
    }
    auto both = a;
    for (size_t i = 0; i < b.size(); ++i) both[i] |= b[i];
    const std::vector<int> widths = mesh_ladder(side);
    const auto ca = box_counts(a, side, side, widths);
    const auto cb = box_counts(b, side, side, widths);
    const auto cu = box_counts(both, side, side, widths);
    for (size_t i = 0; i < widths.size(); ++i) CHECK(cu[i] >= std::max(ca[i], cb[i]));
}

TEST_CASE("coarse spectrum of constant alpha is the single point (2,2)") {
    const int side = 64;
    std::vector<float> alphas(static_cast<size_t>(side) * side, 2.0f);
    const AlphaMap am = map_of(side, side, alphas);
    const ClassPartition part = bin_alpha(am, 30);
    const SpectrumCurve curve = coarse_spectrum(am, part, mesh_ladder(side));
    REQUIRE(curve.points.size() == 1);
    CHECK(curve.points[0].alpha == doctest::Approx(2.0));
    CHECK(curve.points[0].f == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(curve.points[0].count == side * side);
}

TEST_CASE("coarse spectrum emits edge half-class points at the range ends") {
    // two well-separated populations: a filled half and a sparse diagonal
    const int side = 256;
    std::vector<float> alphas(static_cast<size_t>(side) * side, 1.0f);
    for (int i = 0; i < side; ++i)
        alphas[static_cast<size_t>(i) * side + i] = 3.0f;
    const AlphaMap am = map_of(side, side, alphas);
    const ClassPartition part = bin_alpha(am, 30);
    const SpectrumCurve curve = coarse_spectrum(am, part, mesh_ladder(side));
    REQUIRE(curve.points.size() >= 2);
    CHECK(curve.points.front().alpha == doctest::Approx(part.alpha_min));
    CHECK(curve.points.back().alpha == doctest::Approx(part.alpha_max));
    // the dense class has dimension ~2, the diagonal ~1
    CHECK(curve.points.front().f == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(curve.points.back().f == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& p : curve.points) {
        CHECK(p.f >= 0.0);
        CHECK(p.f <= 2.0 + 1e-9);
    }
    // classes partition the valid pixels
    long long covered = 0;
    for (size_t i = 1; i + 1 < curve.points.size(); ++i) covered += curve.points[i].count;
    CHECK(covered == static_cast<long long>(am.pixel_count()));
}

TEST_CASE("f_map interpolates the curve at pixel alphas") {
    SpectrumCurve curve;
    curve.points = {{1.0, 0.5, 10}, {2.0, 2.0, 10}, {3.0, 1.0, 10}};
    const float nan = std::numeric_limits<float>::quiet_NaN();
    const AlphaMap am = map_of(5, 1, {1.0f, 2.0f, 2.5f, 0.5f, nan});
    const FMap fm = f_map(am, curve);
    CHECK(fm.f[0] == doctest::Approx(0.5));   // exactly at a knot
    CHECK(fm.f[1] == doctest::Approx(2.0));
    CHECK(fm.f[2] == doctest::Approx(1.5));   // halfway down the right flank
    CHECK(fm.f[3] == doctest::Approx(0.5));   // clamped below the range
    CHECK(fm.valid[4] == 0);
    CHECK(std::isnan(fm.f[4]));
}

TEST_CASE("f_map needs a non-empty curve") {
    const AlphaMap am = map_of(1, 1, {2.0f});
    CHECK_THROWS_AS(f_map(am, SpectrumCurve{}), std::invalid_argument);
}

TEST_CASE("f_map with a single-point curve is constant") {
    SpectrumCurve curve;
    curve.points = {{2.0, 2.0, 1}};
    const AlphaMap am = map_of(3, 1, {1.5f, 2.0f, 2.5f});
    const FMap fm = f_map(am, curve);
    for (int i = 0; i < 3; ++i) CHECK(fm.f[i] == doctest::Approx(2.0));
}

TEST_CASE("polynomial f_map reproduces a sampled cubic") {
    auto cubic = [](double x) { return 0.3 * x * x * x - 1.2 * x * x + 0.7 * x + 1.9; };
    SpectrumCurve curve;
    for (int i = 0; i <= 12; ++i) {
        const double x = 1.0 + 0.2 * i;
        curve.points.push_back({x, cubic(x), 1});
    }
    std::vector<float> alphas = {1.1f, 1.7f, 2.3f, 3.1f};
    const AlphaMap am = map_of(4, 1, alphas);
    const FMap fm = f_map(am, curve, FMapMode::Polynomial, 3);
    for (size_t i = 0; i < alphas.size(); ++i)
        CHECK(fm.f[i] == doctest::Approx(cubic(alphas[i])).epsilon(1e-6));
}
