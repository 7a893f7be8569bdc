// mfseg: batch front end for the multifractal water-segmentation
// pipeline. Subcommands write their results to files; progress and
// diagnostics go to stderr. Exit codes: 0 ok, 2 bad flags or config,
// 3 I/O failure, 4 numeric precondition.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfseg/coarse.hpp"
#include "mfseg/eval.hpp"
#include "mfseg/holder.hpp"
#include "mfseg/legendre.hpp"
#include "mfseg/measure.hpp"
#include "mfseg/mlp.hpp"
#include "mfseg/raster.hpp"
#include "mfseg/rng.hpp"
#include "mfseg/segment.hpp"
#include "mfseg/synth.hpp"

namespace {

std::vector<double> parse_doubles(const std::string& text, size_t expect = 0) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw CLI::ValidationError("bad number: " + item);
    }
    if (expect && out.size() != expect) {
        std::ostringstream msg;
        msg << "expected " << expect << " comma-separated values, got " << out.size();
        throw CLI::ValidationError(msg.str());
    }
    return out;
}

std::vector<int> parse_ints(const std::string& text, size_t expect = 0) {
    std::vector<int> out;
    for (double v : parse_doubles(text, expect)) out.push_back(static_cast<int>(v));
    return out;
}

mfseg::CascadeSpec parse_cascade(const std::string& weights, int depth,
                                 std::optional<uint64_t> shuffle_seed) {
    mfseg::CascadeSpec spec;
    const std::vector<double> w = parse_doubles(weights, 4);
    std::copy(w.begin(), w.end(), spec.weights.begin());
    spec.depth = depth;
    spec.shuffle_seed = shuffle_seed;
    return spec;
}

std::vector<mfseg::Rect> parse_rects(const std::vector<std::string>& specs) {
    std::vector<mfseg::Rect> rects;
    for (const auto& s : specs) {
        const std::vector<int> v = parse_ints(s, 4);
        rects.push_back({v[0], v[1], v[2], v[3]});
    }
    return rects;
}

// Core region of a raster given an explicit "x,y,size" or, by default,
// the largest square that leaves `pad` pixels on every side.
mfseg::AnalysisWindow resolve_window(int width, int height, const std::string& core_spec,
                                     int pad) {
    mfseg::AnalysisWindow win;
    win.pad = pad;
    if (core_spec.empty()) {
        win.core_x = pad;
        win.core_y = pad;
        win.core_size = std::min(width, height) - 2 * pad;
    } else {
        const std::vector<int> v = parse_ints(core_spec, 3);
        win.core_x = v[0];
        win.core_y = v[1];
        win.core_size = v[2];
    }
    return win;
}

mfseg::WindowLadder resolve_ladder(const std::string& sensor, const std::string& ladder_spec) {
    if (!ladder_spec.empty()) return mfseg::WindowLadder{parse_ints(ladder_spec)};
    if (sensor == "sar") return mfseg::WindowLadder::sar();
    return mfseg::WindowLadder::optical();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw mfseg::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out.good()) throw mfseg::IoError("write failure on " + path);
}

// Merges a JSON config file into argv: keys are long option names and
// apply to whichever (sub)command was named; explicit flags win.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config_path;
    std::vector<std::string> out;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ValidationError("--config needs a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config_path.empty()) return out;

    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw mfseg::IoError("cannot open " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw CLI::ValidationError(config_path + ": " + e.what());
    }
    if (!j.is_object()) throw CLI::ValidationError(config_path + ": config must be an object");

    auto given = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const auto& a : out)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (given(it.key())) continue;
        auto push_scalar = [&](const nlohmann::json& v) {
            if (v.is_boolean()) {
                if (v.get<bool>()) out.push_back("--" + it.key());
            } else if (v.is_string()) {
                out.push_back("--" + it.key() + "=" + v.get<std::string>());
            } else if (v.is_number()) {
                out.push_back("--" + it.key() + "=" + v.dump());
            } else {
                throw CLI::ValidationError("config key '" + it.key() + "' has an unusable value");
            }
        };
        if (it.value().is_array())
            for (const auto& v : it.value()) push_scalar(v);
        else
            push_scalar(it.value());
    }
    return out;
}

}  // namespace

int run(std::vector<std::string> args) {
    CLI::App app{"multifractal water-body segmentation toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (never changes results)");

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate test measures and scenes");
    synth->require_subcommand(1);

    auto* synth_cascade = synth->add_subcommand("cascade", "2x2 multiplicative cascade raster");
    std::string sc_weights = "0.4,0.3,0.2,0.1", sc_out;
    int sc_depth = 10;
    std::optional<uint64_t> sc_shuffle;
    synth_cascade->add_option("--weights", sc_weights, "four weights summing to 1");
    synth_cascade->add_option("--depth", sc_depth, "subdivision levels; side = 2^depth");
    synth_cascade->add_option("--shuffle-seed", sc_shuffle,
                              "permute weights per subdivision with this seed");
    synth_cascade->add_option("--out", sc_out, "output raster sidecar (.json)")->required();
    synth_cascade->callback([&] {
        const mfseg::CascadeSpec spec = parse_cascade(sc_weights, sc_depth, sc_shuffle);
        mfseg::RasterStack stack;
        stack.bands.push_back(mfseg::cascade(spec));
        mfseg::save_raster(stack, sc_out);
        std::cerr << "cascade " << stack.width() << "x" << stack.height() << " -> " << sc_out
                  << "\n";
    });

    auto* synth_scene = synth->add_subcommand("scene", "composite water/texture scene");
    std::string ss_weights = "0.7,0.15,0.1,0.05", ss_out, ss_truth;
    std::vector<std::string> ss_rects;
    int ss_side = 1024;
    double ss_level = 1.0, ss_noise = 0.0625, ss_swir_level = 0.25, ss_swir_gain = 2.0;
    uint64_t ss_seed = 1, ss_shuffle = 1;
    bool ss_pair = false;
    synth_scene->add_option("--side", ss_side, "scene side, a power of two");
    synth_scene->add_option("--water-rect", ss_rects, "water rectangle x,y,w,h (repeatable)");
    synth_scene->add_option("--water-level", ss_level, "water intensity, land mean is 1");
    synth_scene->add_option("--noise-amp", ss_noise, "uniform water noise amplitude");
    synth_scene->add_option("--weights", ss_weights, "land cascade weights");
    synth_scene->add_option("--shuffle-seed", ss_shuffle, "land cascade shuffle seed");
    synth_scene->add_option("--seed", ss_seed, "water noise seed");
    synth_scene->add_flag("--ndwi-pair", ss_pair, "emit red+swir bands instead of one band");
    synth_scene->add_option("--swir-water-level", ss_swir_level, "water level in the swir band");
    synth_scene->add_option("--swir-land-gain", ss_swir_gain, "land gain in the swir band");
    synth_scene->add_option("--out", ss_out, "output raster sidecar (.json)")->required();
    synth_scene->add_option("--truth", ss_truth, "ground-truth mask PGM")->required();
    synth_scene->callback([&] {
        int depth = 0;
        while ((1 << depth) < ss_side) ++depth;
        mfseg::CascadeSpec spec = parse_cascade(ss_weights, depth, ss_shuffle);
        const std::vector<mfseg::Rect> rects = parse_rects(ss_rects);
        auto [band, truth] = mfseg::composite_scene(ss_side, rects, ss_level, ss_noise, spec,
                                                    ss_seed);
        mfseg::RasterStack stack;
        if (ss_pair) {
            band.name = "red";
            mfseg::RasterBand swir = mfseg::cascade(spec);
            for (double& v : swir.values)
                v *= ss_swir_gain * static_cast<double>(ss_side) * ss_side;
            swir.name = "swir";
            mfseg::apply_water(swir, rects, ss_swir_level, ss_noise * ss_swir_level,
                               ss_seed + 1);
            stack.bands.push_back(std::move(band));
            stack.bands.push_back(std::move(swir));
        } else {
            stack.bands.push_back(std::move(band));
        }
        mfseg::save_raster(stack, ss_out);
        mfseg::save_mask(truth, ss_truth);
        std::cerr << "scene " << ss_side << "x" << ss_side << " -> " << ss_out << ", truth -> "
                  << ss_truth << "\n";
    });

    // ---- alpha-map ------------------------------------------------------
    auto* alpha_cmd = app.add_subcommand("alpha-map", "per-pixel regularity exponents");
    std::string am_in, am_band, am_core, am_ladder, am_sensor = "optical", am_out;
    int am_pad = 8;
    alpha_cmd->add_option("--in", am_in, "input raster (sidecar or PGM)")->required();
    alpha_cmd->add_option("--band", am_band, "band name (default: first band)");
    alpha_cmd->add_option("--core", am_core, "analysis core x,y,size (default: pad inset)");
    alpha_cmd->add_option("--pad", am_pad, "padding pixels around the core");
    alpha_cmd->add_option("--sensor", am_sensor, "optical|sar window ladder")
        ->check(CLI::IsMember({"optical", "sar"}));
    alpha_cmd->add_option("--ladder", am_ladder, "explicit ladder of k values, e.g. 2,3,...,9");
    alpha_cmd->add_option("--out", am_out, "alpha raster sidecar (.json)")->required();
    alpha_cmd->callback([&] {
        const mfseg::RasterStack stack = mfseg::load_raster(am_in);
        const mfseg::RasterBand& band =
            am_band.empty() ? stack.bands.front() : stack.band(am_band);
        const mfseg::AnalysisWindow win =
            resolve_window(band.width, band.height, am_core, am_pad);
        const mfseg::WindowLadder ladder = resolve_ladder(am_sensor, am_ladder);
        const mfseg::MeasureField field(band);
        const mfseg::AlphaMap am = mfseg::alpha_map(field, win, ladder, threads);
        mfseg::save_alpha_raster(am, am_out);
        size_t invalid = 0;
        for (size_t i = 0; i < am.pixel_count(); ++i)
            if (!am.is_valid(i)) ++invalid;
        std::cerr << "alpha map " << am.width << "x" << am.height << " (" << invalid
                  << " invalid) -> " << am_out << "\n";
    });

    // ---- spectrum -------------------------------------------------------
    auto* spectrum = app.add_subcommand("spectrum", "multifractal spectra");
    spectrum->require_subcommand(1);

    auto* spec_coarse = spectrum->add_subcommand("coarse", "box-counting spectrum per class");
    std::string co_alpha, co_out;
    int co_classes = 30;
    bool co_suggest = false;
    spec_coarse->add_option("--alpha", co_alpha, "alpha raster from alpha-map")->required();
    spec_coarse->add_option("--classes", co_classes, "number of alpha classes");
    spec_coarse->add_flag("--suggest", co_suggest, "print threshold candidates to stderr");
    spec_coarse->add_option("--out", co_out, "spectrum CSV")->required();
    spec_coarse->callback([&] {
        const mfseg::AlphaMap am = mfseg::load_alpha_raster(co_alpha);
        const mfseg::ClassPartition part = mfseg::bin_alpha(am, co_classes);
        const std::vector<int> widths = mfseg::mesh_ladder(std::min(am.width, am.height));
        const mfseg::SpectrumCurve curve = mfseg::coarse_spectrum(am, part, widths, threads);
        mfseg::save_spectrum_csv(curve, co_out);
        std::cerr << "coarse spectrum, " << curve.points.size() << " points, alpha ["
                  << part.alpha_min << ", " << part.alpha_max << "] -> " << co_out << "\n";
        if (co_suggest) {
            if (const auto t = mfseg::suggest_thresholds(curve))
                std::cerr << "threshold candidates: alpha in (" << t->alpha_lo << ", "
                          << t->alpha_hi << "), f in (" << t->f_lo << ", " << t->f_hi << ")\n";
            else
                std::cerr << "no mid-spectrum depression found; no candidates\n";
        }
    });

    auto* spec_leg = spectrum->add_subcommand("legendre", "spectrum from the partition function");
    std::string lg_in, lg_band, lg_core, lg_tau_out, lg_out;
    double lg_qmin = -10.0, lg_qmax = 10.0, lg_qstep = 0.25;
    int lg_pad = 0;
    spec_leg->add_option("--in", lg_in, "input raster (sidecar or PGM)")->required();
    spec_leg->add_option("--band", lg_band, "band name (default: first band)");
    spec_leg->add_option("--core", lg_core, "analysis core x,y,size (default: pad inset)");
    spec_leg->add_option("--pad", lg_pad, "padding pixels around the core");
    spec_leg->add_option("--q-min", lg_qmin, "lowest moment order");
    spec_leg->add_option("--q-max", lg_qmax, "highest moment order");
    spec_leg->add_option("--q-step", lg_qstep, "moment order step");
    spec_leg->add_option("--tau-out", lg_tau_out, "tau CSV (q,tau,r2)");
    spec_leg->add_option("--out", lg_out, "spectrum CSV")->required();
    spec_leg->callback([&] {
        const mfseg::RasterStack stack = mfseg::load_raster(lg_in);
        const mfseg::RasterBand& band =
            lg_band.empty() ? stack.bands.front() : stack.band(lg_band);
        const mfseg::AnalysisWindow win =
            resolve_window(band.width, band.height, lg_core, lg_pad);
        const mfseg::MeasureField field(band);
        const mfseg::Region region{win.core_x, win.core_y, win.core_size};
        if (lg_qstep <= 0.0) throw std::invalid_argument("q step must be positive");
        std::vector<double> q_grid;
        for (double q = lg_qmin; q <= lg_qmax + 1e-12; q += lg_qstep) q_grid.push_back(q);
        const std::vector<int> widths = mfseg::mesh_ladder(region.size);
        const mfseg::PartitionTable table =
            mfseg::partition_function(field, region, q_grid, widths, threads);
        const mfseg::TauCurve tc = mfseg::tau(table);
        size_t omitted = 0;
        for (uint8_t d : tc.defined)
            if (!d) ++omitted;
        if (omitted)
            std::cerr << omitted << " q value(s) lacked enough usable scales and were omitted\n";
        if (!lg_tau_out.empty()) mfseg::save_tau_csv(tc, lg_tau_out);
        const mfseg::SpectrumCurve curve = mfseg::legendre_spectrum(tc);
        if (!curve.warning.empty()) std::cerr << "warning: " << curve.warning << "\n";
        mfseg::save_spectrum_csv(curve, lg_out);
        std::cerr << "legendre spectrum, " << curve.points.size() << " points -> " << lg_out
                  << "\n";
    });

    // ---- fmap -----------------------------------------------------------
    auto* fmap_cmd = app.add_subcommand("fmap", "per-pixel f values from a spectrum");
    std::string fm_alpha, fm_curve, fm_mode = "linear", fm_out;
    int fm_degree = 3;
    fmap_cmd->add_option("--alpha", fm_alpha, "alpha raster")->required();
    fmap_cmd->add_option("--curve", fm_curve, "spectrum CSV")->required();
    fmap_cmd->add_option("--mode", fm_mode, "linear|poly")
        ->check(CLI::IsMember({"linear", "poly"}));
    fmap_cmd->add_option("--degree", fm_degree, "polynomial degree for --mode poly");
    fmap_cmd->add_option("--out", fm_out, "f raster sidecar (.json)")->required();
    fmap_cmd->callback([&] {
        const mfseg::AlphaMap am = mfseg::load_alpha_raster(fm_alpha);
        const mfseg::SpectrumCurve curve = mfseg::load_spectrum_csv(fm_curve);
        const mfseg::FMap fm =
            mfseg::f_map(am, curve,
                         fm_mode == "poly" ? mfseg::FMapMode::Polynomial
                                           : mfseg::FMapMode::PiecewiseLinear,
                         fm_degree);
        mfseg::RasterStack stack;
        mfseg::RasterBand band;
        band.width = fm.width;
        band.height = fm.height;
        band.name = "f_alpha";
        band.values.assign(fm.f.begin(), fm.f.end());
        stack.bands.push_back(std::move(band));
        mfseg::save_raster(stack, fm_out, /*allow_non_finite=*/true);
        std::cerr << "f map -> " << fm_out << "\n";
    });

    // ---- segment --------------------------------------------------------
    auto* segment = app.add_subcommand("segment", "binary water masks");
    segment->require_subcommand(1);

    auto* seg_mf = segment->add_subcommand("mf", "threshold the (alpha, f) plane");
    std::string mf_alpha, mf_fmap, mf_out;
    double mf_alo = 0.0, mf_ahi = 0.0, mf_flo = 0.0, mf_fhi = 0.0, mf_min_r2 = 0.0;
    seg_mf->add_option("--alpha", mf_alpha, "alpha raster")->required();
    seg_mf->add_option("--fmap", mf_fmap, "f raster")->required();
    seg_mf->add_option("--alpha-lo", mf_alo, "water: alpha-lo < alpha")->required();
    seg_mf->add_option("--alpha-hi", mf_ahi, "water: alpha < alpha-hi")->required();
    seg_mf->add_option("--f-lo", mf_flo, "water: f-lo < f")->required();
    seg_mf->add_option("--f-hi", mf_fhi, "water: f < f-hi")->required();
    seg_mf->add_option("--min-r2", mf_min_r2,
                       "treat pixels whose fit r2 falls below this as invalid (off by default)");
    seg_mf->add_option("--out", mf_out, "mask PGM")->required();
    seg_mf->callback([&] {
        mfseg::AlphaMap am = mfseg::load_alpha_raster(mf_alpha);
        if (mf_min_r2 > 0.0)
            for (size_t i = 0; i < am.pixel_count(); ++i)
                if (am.valid[i] && !(am.r2[i] >= mf_min_r2)) am.valid[i] = 0;
        const mfseg::RasterStack fstack = mfseg::load_raster_allow_nan(mf_fmap);
        const mfseg::RasterBand& fband = fstack.band("f_alpha");
        mfseg::FMap fm;
        fm.width = fband.width;
        fm.height = fband.height;
        fm.f.assign(fband.values.begin(), fband.values.end());
        fm.valid.resize(fm.pixel_count());
        for (size_t i = 0; i < fm.pixel_count(); ++i)
            fm.valid[i] = std::isfinite(fband.values[i]) ? 1 : 0;
        const mfseg::ThresholdSpec t{mf_alo, mf_ahi, mf_flo, mf_fhi};
        const mfseg::SegmentationMask mask = mfseg::threshold_classify(am, fm, t);
        mfseg::save_mask(mask, mf_out);
        std::cerr << "multifractal mask -> " << mf_out << "\n";
    });

    auto* seg_ndwi = segment->add_subcommand("ndwi", "normalized differential water index");
    std::string nd_in, nd_red = "red", nd_swir = "swir", nd_out;
    seg_ndwi->add_option("--in", nd_in, "input raster stack")->required();
    seg_ndwi->add_option("--red", nd_red, "red band name");
    seg_ndwi->add_option("--swir", nd_swir, "shortwave-infrared band name");
    seg_ndwi->add_option("--out", nd_out, "mask PGM")->required();
    seg_ndwi->callback([&] {
        const mfseg::RasterStack stack = mfseg::load_raster(nd_in);
        const mfseg::RasterBand index = mfseg::ndwi(stack.band(nd_red), stack.band(nd_swir));
        const mfseg::SegmentationMask mask = mfseg::ndwi_classify(index);
        mfseg::save_mask(mask, nd_out);
        std::cerr << "ndwi mask -> " << nd_out << "\n";
    });

    // ---- filter-majority --------------------------------------------------
    auto* filt = app.add_subcommand("filter-majority", "majority vote over a square kernel");
    std::string fl_in, fl_out;
    int fl_kernel = 7;
    filt->add_option("--in", fl_in, "mask PGM")->required();
    filt->add_option("--kernel", fl_kernel, "odd kernel side");
    filt->add_option("--out", fl_out, "filtered mask PGM")->required();
    filt->callback([&] {
        const mfseg::SegmentationMask mask = mfseg::load_mask(fl_in);
        mfseg::save_mask(mfseg::majority_filter(mask, fl_kernel), fl_out);
        std::cerr << "filtered mask -> " << fl_out << "\n";
    });

    // ---- compare ----------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "confusion matrix of two masks");
    std::string cp_test, cp_ref, cp_out, cp_ref_offset;
    cmp->add_option("test", cp_test, "test mask PGM")->required();
    cmp->add_option("reference", cp_ref, "reference mask PGM")->required();
    cmp->add_option("--ref-offset", cp_ref_offset,
                    "crop the reference at x,y to the test size before comparing");
    cmp->add_option("--out", cp_out, "JSON report (default: report to stderr only)");
    cmp->callback([&] {
        const mfseg::SegmentationMask test = mfseg::load_mask(cp_test);
        mfseg::SegmentationMask ref = mfseg::load_mask(cp_ref);
        if (!cp_ref_offset.empty()) {
            const std::vector<int> off = parse_ints(cp_ref_offset, 2);
            if (off[0] < 0 || off[1] < 0 || off[0] + test.width > ref.width ||
                off[1] + test.height > ref.height)
                throw std::invalid_argument("reference crop out of bounds");
            mfseg::SegmentationMask cropped;
            cropped.width = test.width;
            cropped.height = test.height;
            cropped.water.resize(test.pixel_count());
            for (int y = 0; y < test.height; ++y)
                for (int x = 0; x < test.width; ++x)
                    cropped.water[static_cast<size_t>(y) * test.width + x] =
                        ref.water[static_cast<size_t>(y + off[1]) * ref.width + (x + off[0])];
            ref = std::move(cropped);
        }
        const mfseg::ConfusionMatrix cm = mfseg::confusion(test, ref);
        const mfseg::MetricsReport mr = mfseg::metrics(cm);
        std::cerr << mfseg::metrics_table(cm, mr);
        if (!cp_out.empty()) write_text(cp_out, mfseg::metrics_json(cm, mr));
    });

    // ---- mlp --------------------------------------------------------------
    auto* mlp = app.add_subcommand("mlp", "feedforward baseline classifier");
    mlp->require_subcommand(1);

    auto* mlp_train = mlp->add_subcommand("train", "train on a stack plus truth mask");
    std::string tr_in, tr_truth, tr_arch, tr_split = "0.7,0.15,0.15", tr_out;
    uint64_t tr_seed = 0;
    int tr_epochs = 500, tr_patience = 30;
    size_t tr_max_samples = 0;
    mlp_train->add_option("--in", tr_in, "input raster stack")->required();
    mlp_train->add_option("--truth", tr_truth, "ground-truth mask PGM")->required();
    mlp_train->add_option("--arch", tr_arch, "layer sizes, e.g. 4,20,2 (default from bands)");
    mlp_train->add_option("--split", tr_split, "train,val,test fractions");
    mlp_train->add_option("--seed", tr_seed, "split/init seed");
    mlp_train->add_option("--max-epochs", tr_epochs, "iteration budget");
    mlp_train->add_option("--patience", tr_patience, "epochs without validation improvement");
    mlp_train->add_option("--max-samples", tr_max_samples, "seeded subsample of the pixels");
    mlp_train->add_option("--out", tr_out, "model JSON")->required();
    mlp_train->callback([&] {
        const mfseg::RasterStack stack = mfseg::load_raster(tr_in);
        const mfseg::SegmentationMask truth = mfseg::load_mask(tr_truth);
        mfseg::LabeledSamples samples = mfseg::samples_from_stack(stack, truth);
        if (tr_max_samples && tr_max_samples < samples.size()) {
            mfseg::SplitMix64 rng(tr_seed ^ 0x5eedULL);
            mfseg::LabeledSamples sub;
            sub.feature_count = samples.feature_count;
            for (size_t i = 0; i < tr_max_samples; ++i) {
                const size_t k = rng.below(samples.size());
                const double* f = samples.features.data() + k * samples.feature_count;
                sub.features.insert(sub.features.end(), f, f + samples.feature_count);
                sub.labels.push_back(samples.labels[k]);
            }
            samples = std::move(sub);
        }
        std::vector<int> arch;
        if (tr_arch.empty())
            arch = {static_cast<int>(stack.bands.size()),
                    stack.bands.size() <= 2 ? 30 : 20, 2};
        else
            arch = parse_ints(tr_arch);
        const std::vector<double> fr = parse_doubles(tr_split, 3);
        mfseg::TrainConfig cfg;
        cfg.train_frac = fr[0];
        cfg.val_frac = fr[1];
        cfg.test_frac = fr[2];
        cfg.seed = tr_seed;
        cfg.max_epochs = tr_epochs;
        cfg.patience = tr_patience;
        cfg.threads = threads;
        mfseg::TrainReport rep;
        const mfseg::MlpModel model = mfseg::train(samples, arch, cfg, &rep);
        mfseg::save_model_json(model, tr_out);
        std::cerr << "trained " << rep.epochs_run << " epochs, initial loss " << rep.initial_loss
                  << ", val loss " << rep.final_val_loss << ", test accuracy "
                  << 100.0 * rep.test_accuracy << "% -> " << tr_out << "\n";
    });

    auto* mlp_pred = mlp->add_subcommand("predict", "classify every pixel of a stack");
    std::string pr_model, pr_in, pr_out;
    mlp_pred->add_option("--model", pr_model, "model JSON")->required();
    mlp_pred->add_option("--in", pr_in, "input raster stack")->required();
    mlp_pred->add_option("--out", pr_out, "mask PGM")->required();
    mlp_pred->callback([&] {
        const mfseg::MlpModel model = mfseg::load_model_json(pr_model);
        const mfseg::RasterStack stack = mfseg::load_raster(pr_in);
        mfseg::save_mask(mfseg::predict_mask(model, stack, threads), pr_out);
        std::cerr << "predicted mask -> " << pr_out << "\n";
    });

    try {
        args = merge_config(args);
        std::vector<const char*> argv;
        argv.push_back("mfseg");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "mfseg: " << e.what() << "\n";
        return 2;
    } catch (const mfseg::IoError& e) {
        std::cerr << "mfseg: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "mfseg: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "mfseg: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "mfseg: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}
