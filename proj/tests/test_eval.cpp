#include <doctest.h>

#include <json.hpp>

#include "mfseg/eval.hpp"
#include "mfseg/rng.hpp"

using namespace mfseg;

namespace {

SegmentationMask mask_of(int width, int height, const std::vector<uint8_t>& water) {
    SegmentationMask m;
    m.width = width;
    m.height = height;
    m.water = water;
    return m;
}

struct Fixture {
    uint64_t tp, fp, fn, tn;
    double ppv, npv, sens, spec, acc;
};

// Reference count quadruples with the ratios they imply, to 2 decimals.
const Fixture kFixtures[] = {
    {138998, 1901, 14972, 892705, 98.65, 98.35, 90.28, 99.79, 98.39},
    {139584, 368, 17111, 891513, 99.74, 98.12, 89.08, 99.96, 98.33},
    {125208, 93, 4601, 918674, 99.93, 99.50, 96.46, 99.99, 99.55},
    {125202, 99, 5257, 918018, 99.92, 99.43, 95.97, 99.99, 99.49},
    {78500, 4004, 3436, 962636, 95.15, 99.64, 95.81, 99.59, 99.29},
    {93154, 2735, 8740, 943947, 97.15, 99.08, 91.42, 99.71, 98.91},
};

}  // namespace

TEST_CASE("identical masks disagree nowhere") {
    const SegmentationMask m = mask_of(3, 2, {1, 0, 1, 1, 0, 0});
    const ConfusionMatrix cm = confusion(m, m);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);
    CHECK(cm.tp == 3);
    CHECK(cm.tn == 3);
    const MetricsReport r = metrics(cm);
    CHECK(*r.ppv == 100.0);
    CHECK(*r.npv == 100.0);
    CHECK(*r.sensitivity == 100.0);
    CHECK(*r.specificity == 100.0);
    CHECK(*r.accuracy == 100.0);
}

TEST_CASE("all-water against all-dry is pure false positives") {
    const SegmentationMask wet = mask_of(2, 2, {1, 1, 1, 1});
    const SegmentationMask dry = mask_of(2, 2, {0, 0, 0, 0});
    const ConfusionMatrix cm = confusion(wet, dry);
    CHECK(cm.fp == 4);
    CHECK(cm.tp + cm.fn + cm.tn == 0);
}

TEST_CASE("confusion requires equal dimensions") {
    CHECK_THROWS_AS(confusion(mask_of(2, 1, {0, 0}), mask_of(1, 2, {0, 0})),
                    std::invalid_argument);
}

TEST_CASE("reference count fixtures reproduce their recorded ratios") {
    for (const Fixture& fx : kFixtures) {
        const ConfusionMatrix cm{fx.tp, fx.fp, fx.fn, fx.tn};
        CHECK(cm.population() == 1048576);
        const MetricsReport r = metrics(cm);
        CHECK(std::abs(*r.ppv - fx.ppv) <= 0.01);
        CHECK(std::abs(*r.npv - fx.npv) <= 0.01);
        CHECK(std::abs(*r.sensitivity - fx.sens) <= 0.01);
        CHECK(std::abs(*r.specificity - fx.spec) <= 0.01);
        CHECK(std::abs(*r.accuracy - fx.acc) <= 0.01);
    }
}

TEST_CASE("zero denominators surface as undefined, not as numbers") {
    const MetricsReport none = metrics({0, 0, 0, 0});
    CHECK_FALSE(none.ppv.has_value());
    CHECK_FALSE(none.npv.has_value());
    CHECK_FALSE(none.sensitivity.has_value());
    CHECK_FALSE(none.specificity.has_value());
    CHECK_FALSE(none.accuracy.has_value());

    const MetricsReport dry = metrics({0, 0, 0, 10});
    CHECK_FALSE(dry.ppv.has_value());
    CHECK(*dry.npv == 100.0);
    CHECK_FALSE(dry.sensitivity.has_value());
    CHECK(*dry.specificity == 100.0);
    CHECK(*dry.accuracy == 100.0);
}

TEST_CASE("swapping test and reference transposes the error cells") {
    SplitMix64 rng(15);
    SegmentationMask a = mask_of(30, 30, std::vector<uint8_t>(900, 0));
    SegmentationMask b = a;
    for (auto& w : a.water) w = static_cast<uint8_t>(rng.next() & 1u);
    for (auto& w : b.water) w = static_cast<uint8_t>(rng.next() & 1u);
    const ConfusionMatrix ab = confusion(a, b);
    const ConfusionMatrix ba = confusion(b, a);
    CHECK(ab.tp == ba.tp);
    CHECK(ab.tn == ba.tn);
    CHECK(ab.fp == ba.fn);
    CHECK(ab.fn == ba.fp);
    const MetricsReport rab = metrics(ab);
    const MetricsReport rba = metrics(ba);
    CHECK(*rab.ppv == doctest::Approx(*rba.sensitivity));
    CHECK(*rab.sensitivity == doctest::Approx(*rba.ppv));
    CHECK(*rab.npv == doctest::Approx(*rba.specificity));
    CHECK(*rab.specificity == doctest::Approx(*rba.npv));
    CHECK(*rab.accuracy == doctest::Approx(*rba.accuracy));
}

TEST_CASE("json report carries counts, ratios and nulls") {
    const ConfusionMatrix cm{3, 0, 0, 0};
    const std::string text = metrics_json(cm, metrics(cm));
    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["tp"] == 3);
    CHECK(j["fp"] == 0);
    CHECK(j["ppv"] == 100.0);
    CHECK(j["npv"].is_null());
    CHECK(j["specificity"].is_null());
    CHECK(j["accuracy"] == 100.0);
}
