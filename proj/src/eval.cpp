#include "mfseg/eval.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mfseg {

ConfusionMatrix confusion(const SegmentationMask& test, const SegmentationMask& reference) {
    if (test.width != reference.width || test.height != reference.height)
        throw std::invalid_argument("masks differ in size");
    ConfusionMatrix cm;
    for (size_t i = 0; i < test.pixel_count(); ++i) {
        const bool t = test.water[i] != 0;
        const bool r = reference.water[i] != 0;
        if (t && r)
            ++cm.tp;
        else if (t && !r)
            ++cm.fp;
        else if (!t && r)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    MetricsReport r;
    auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return 100.0 * static_cast<double>(num) / static_cast<double>(den);
    };
    r.ppv = ratio(cm.tp, cm.tp + cm.fp);
    r.npv = ratio(cm.tn, cm.tn + cm.fn);
    r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    r.specificity = ratio(cm.tn, cm.tn + cm.fp);
    r.accuracy = ratio(cm.tp + cm.tn, cm.population());
    return r;
}

std::string metrics_json(const ConfusionMatrix& cm, const MetricsReport& mr) {
    nlohmann::ordered_json j;
    j["tp"] = cm.tp;
    j["fp"] = cm.fp;
    j["fn"] = cm.fn;
    j["tn"] = cm.tn;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = nullptr;
    };
    put("ppv", mr.ppv);
    put("npv", mr.npv);
    put("sensitivity", mr.sensitivity);
    put("specificity", mr.specificity);
    put("accuracy", mr.accuracy);
    return j.dump() + "\n";
}

std::string metrics_table(const ConfusionMatrix& cm, const MetricsReport& mr) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "population %llu\n",
                  static_cast<unsigned long long>(cm.population()));
    out << buf;
    std::snprintf(buf, sizeof buf, "  tp %-12llu fp %-12llu\n  fn %-12llu tn %-12llu\n",
                  static_cast<unsigned long long>(cm.tp), static_cast<unsigned long long>(cm.fp),
                  static_cast<unsigned long long>(cm.fn), static_cast<unsigned long long>(cm.tn));
    out << buf;
    auto row = [&](const char* name, const std::optional<double>& v) {
        if (v)
            std::snprintf(buf, sizeof buf, "  %-12s %7.2f %%\n", name, *v);
        else
            std::snprintf(buf, sizeof buf, "  %-12s undefined\n", name);
        out << buf;
    };
    row("ppv", mr.ppv);
    row("npv", mr.npv);
    row("sensitivity", mr.sensitivity);
    row("specificity", mr.specificity);
    row("accuracy", mr.accuracy);
    return out.str();
}

}  // namespace mfseg
