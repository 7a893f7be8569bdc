#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mfseg/raster.hpp"

namespace mfseg {

struct ConfusionMatrix {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t tn = 0;

    uint64_t population() const { return tp + fp + fn + tn; }
};

/// The five ratios as percentages; a metric whose denominator is zero is
/// left unset rather than defaulted.
struct MetricsReport {
    std::optional<double> ppv;
    std::optional<double> npv;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
};

/// tp: water in both, fp: water in test only, fn: water in reference
/// only, tn: water in neither.
ConfusionMatrix confusion(const SegmentationMask& test, const SegmentationMask& reference);

MetricsReport metrics(const ConfusionMatrix& cm);

/// Machine form: counts plus metrics, null where undefined.
std::string metrics_json(const ConfusionMatrix& cm, const MetricsReport& mr);

/// Human form: small aligned table.
std::string metrics_table(const ConfusionMatrix& cm, const MetricsReport& mr);

}  // namespace mfseg
