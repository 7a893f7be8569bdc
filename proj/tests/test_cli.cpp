#include <doctest.h>

#include <cstdlib>
#include <string>

#include <json.hpp>

#include "mfseg/raster.hpp"
#include "mfseg/synth.hpp"
#include "test_util.hpp"

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MFSEG_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("compare of a mask with itself reports accuracy 100") {
    mfseg::SegmentationMask mask;
    mask.width = 4;
    mask.height = 4;
    mask.water = {1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1};
    const std::string mask_path = testutil::temp_path("self.pgm");
    mfseg::save_mask(mask, mask_path);
    const std::string report = testutil::temp_path("report.json");

    REQUIRE(run_cli("compare " + mask_path + " " + mask_path + " --out " + report) == 0);
    const auto bytes = testutil::slurp(report);
    const nlohmann::json j = nlohmann::json::parse(std::string(bytes.begin(), bytes.end()));
    CHECK(j["accuracy"] == 100.0);
    CHECK(j["fp"] == 0);
    CHECK(j["fn"] == 0);
}

TEST_CASE("synth, alpha-map, spectrum, fmap and segment chain") {
    const std::string scene = testutil::temp_path("scene.json");
    const std::string truth = testutil::temp_path("truth.pgm");
    REQUIRE(run_cli("synth scene --side 128 --water-rect 32,32,48,48 --weights "
                    "0.7,0.15,0.1,0.05 --seed 3 --shuffle-seed 8 --out " +
                    scene + " --truth " + truth) == 0);

    const std::string alpha = testutil::temp_path("alpha.json");
    REQUIRE(run_cli("alpha-map --in " + scene + " --pad 8 --out " + alpha) == 0);
    const mfseg::RasterStack astack = mfseg::load_raster_allow_nan(alpha);
    CHECK(astack.width() == 112);  // 128 minus the 8-pixel inset on each side

    const std::string curve = testutil::temp_path("curve.csv");
    REQUIRE(run_cli("spectrum coarse --alpha " + alpha + " --out " + curve) == 0);
    CHECK_FALSE(testutil::slurp(curve).empty());

    const std::string fmap = testutil::temp_path("fmap.json");
    REQUIRE(run_cli("fmap --alpha " + alpha + " --curve " + curve + " --out " + fmap) == 0);

    const std::string mask = testutil::temp_path("mf_mask.pgm");
    REQUIRE(run_cli("segment mf --alpha " + alpha + " --fmap " + fmap +
                    " --alpha-lo 1.9 --alpha-hi 2.1 --f-lo 0 --f-hi 2.5 --out " + mask) == 0);
    const mfseg::SegmentationMask m = mfseg::load_mask(mask);
    CHECK(m.width == 112);

    const std::string filtered = testutil::temp_path("filtered.pgm");
    REQUIRE(run_cli("filter-majority --in " + mask + " --kernel 7 --out " + filtered) == 0);

    const std::string report = testutil::temp_path("cmp.json");
    REQUIRE(run_cli("compare " + filtered + " " + truth + " --ref-offset 8,8 --out " + report) ==
            0);
}

TEST_CASE("coarse spectrum of a cascade peaks where the closed form says") {
    const std::string raster = testutil::temp_path("casc.json");
    REQUIRE(run_cli("synth cascade --weights 0.4,0.3,0.2,0.1 --depth 10 --shuffle-seed 42 "
                    "--out " +
                    raster) == 0);
    const std::string alpha = testutil::temp_path("casc_alpha.json");
    REQUIRE(run_cli("--threads 4 alpha-map --in " + raster + " --pad 8 --out " + alpha) == 0);
    const std::string csv = testutil::temp_path("casc_curve.csv");
    REQUIRE(run_cli("--threads 4 spectrum coarse --alpha " + alpha + " --out " + csv) == 0);

    const mfseg::SpectrumCurve curve = mfseg::load_spectrum_csv(csv);
    REQUIRE(curve.points.size() > 10);
    double peak_f = -1.0, peak_alpha = 0.0;
    for (const auto& p : curve.points)
        if (p.f > peak_f) {
            peak_f = p.f;
            peak_alpha = p.alpha;
        }
    mfseg::CascadeSpec spec;
    spec.weights = {0.4, 0.3, 0.2, 0.1};
    spec.depth = 1;
    CHECK(std::abs(peak_f - 2.0) <= 0.1);
    CHECK(std::abs(peak_alpha - mfseg::analytic_alpha(spec, 0.0)) <= 0.35);
}

TEST_CASE("identical invocations write identical bytes") {
    const std::string out1 = testutil::temp_path("c1.json");
    const std::string out2 = testutil::temp_path("c2.json");
    const std::string flags =
        " --weights 0.4,0.3,0.2,0.1 --depth 6 --shuffle-seed 5 --out ";
    REQUIRE(run_cli("synth cascade" + flags + out1) == 0);
    REQUIRE(run_cli("synth cascade" + flags + out2) == 0);
    CHECK(testutil::slurp(out1) == testutil::slurp(out2));
    const std::string raw1 = out1.substr(0, out1.size() - 5) + ".raw";
    const std::string raw2 = out2.substr(0, out2.size() - 5) + ".raw";
    CHECK(testutil::slurp(raw1) == testutil::slurp(raw2));
}

TEST_CASE("exit codes: flags 2, io 3, numerics 4") {
    CHECK(run_cli("segment mf --no-such-flag") == 2);
    CHECK(run_cli("nonsense") == 2);
    CHECK(run_cli("filter-majority --in /nonexistent.pgm --out /tmp/x.pgm") == 3);

    mfseg::SegmentationMask mask;
    mask.width = 8;
    mask.height = 8;
    mask.water.assign(64, 0);
    const std::string mask_path = testutil::temp_path("even.pgm");
    mfseg::save_mask(mask, mask_path);
    CHECK(run_cli("filter-majority --in " + mask_path + " --kernel 4 --out /tmp/x.pgm") == 4);
}

TEST_CASE("config files fill in flags and reject unknown keys") {
    const std::string config = testutil::temp_path("job.json");
    const std::string out = testutil::temp_path("cfg_cascade.json");
    testutil::spit(config, R"({"weights":"0.4,0.3,0.2,0.1","depth":5,"shuffle-seed":7})");
    REQUIRE(run_cli("synth cascade --config " + config + " --out " + out) == 0);
    CHECK(mfseg::load_raster(out).width() == 32);

    // explicit flags win over the config
    const std::string out2 = testutil::temp_path("cfg_cascade2.json");
    REQUIRE(run_cli("synth cascade --config " + config + " --depth 4 --out " + out2) == 0);
    CHECK(mfseg::load_raster(out2).width() == 16);

    const std::string bad = testutil::temp_path("bad.json");
    testutil::spit(bad, R"({"depth":5,"no-such-key":1})");
    CHECK(run_cli("synth cascade --config " + bad + " --out " + out) == 2);
}
