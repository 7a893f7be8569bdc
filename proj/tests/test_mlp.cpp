#include <doctest.h>

#include <cmath>

#include "mfseg/mlp.hpp"
#include "mfseg/rng.hpp"
#include "test_util.hpp"

using namespace mfseg;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

MlpModel zero_model(const std::vector<int>& arch) {
    MlpModel m = init_model(arch, 0);
    for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
    return m;
}

LabeledSamples xor_samples(int copies) {
    LabeledSamples s;
    s.feature_count = 2;
    SplitMix64 rng(100);
    for (int c = 0; c < copies; ++c)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                // jittered corners so the splits see distinct samples
                s.features.push_back(a + 0.02 * (rng.uniform() - 0.5));
                s.features.push_back(b + 0.02 * (rng.uniform() - 0.5));
                s.labels.push_back(static_cast<uint8_t>(a ^ b));
            }
    return s;
}

LabeledSamples blob_samples(int per_class) {
    // two 4-band blobs separated by a wide margin
    LabeledSamples s;
    s.feature_count = 4;
    SplitMix64 rng(200);
    for (int i = 0; i < per_class; ++i) {
        for (int b = 0; b < 4; ++b) s.features.push_back(0.2 + 0.1 * rng.uniform());
        s.labels.push_back(0);
        for (int b = 0; b < 4; ++b) s.features.push_back(0.7 + 0.1 * rng.uniform());
        s.labels.push_back(1);
    }
    return s;
}

}  // namespace

TEST_CASE("forward of the zero network is (0.5, 0.5)") {
    const MlpModel m = zero_model({4, 20, 2});
    const std::vector<double> out = forward(m, {0.3, 0.1, 0.9, 0.5});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == 0.5);
    CHECK(out[1] == 0.5);
}

TEST_CASE("forward matches hand arithmetic on a 2-2-2 net") {
    MlpModel m = zero_model({2, 2, 2});
    m.weights[0] = {0.5, -0.25, 0.75, 0.1};  // rows: hidden neuron <- inputs
    m.biases[0] = {0.1, -0.2};
    m.weights[1] = {1.0, -1.0, 0.3, 0.7};
    m.biases[1] = {0.0, 0.05};
    const double x0 = 0.4, x1 = -0.6;
    const double h0 = sigmoid(0.5 * x0 - 0.25 * x1 + 0.1);
    const double h1 = sigmoid(0.75 * x0 + 0.1 * x1 - 0.2);
    const double y0 = sigmoid(1.0 * h0 - 1.0 * h1);
    const double y1 = sigmoid(0.3 * h0 + 0.7 * h1 + 0.05);
    const std::vector<double> out = forward(m, {x0, x1});
    CHECK(out[0] == doctest::Approx(y0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(y1).epsilon(1e-12));
}

TEST_CASE("forward checks the input size") {
    const MlpModel m = zero_model({3, 4, 2});
    CHECK_THROWS_AS(forward(m, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("a single weight through one sigmoid") {
    MlpModel m = zero_model({1, 1, 2});
    m.weights[0] = {1.0};
    const std::vector<double> out = forward(m, {0.0});
    CHECK(out[0] == 0.5);  // sigmoid(w*0 + 0)
}

TEST_CASE("analytic gradients agree with central differences") {
    const std::vector<int> arch = {3, 5, 2};
    MlpModel m = init_model(arch, 7);
    LabeledSamples batch;
    batch.feature_count = 3;
    SplitMix64 rng(8);
    for (int i = 0; i < 12; ++i) {
        for (int f = 0; f < 3; ++f) batch.features.push_back(2.0 * rng.uniform() - 1.0);
        batch.labels.push_back(static_cast<uint8_t>(rng.next() & 1u));
    }

    std::vector<double> grad;
    loss_and_gradient(m, batch, &grad);

    const double h = 1e-6;
    size_t flat = 0;
    auto check_param = [&](double& ref) {
        const double saved = ref;
        ref = saved + h;
        const double up = loss_only(m, batch);
        ref = saved - h;
        const double down = loss_only(m, batch);
        ref = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(grad[flat]), 1e-8});
        CHECK(std::abs(numeric - grad[flat]) / denom <= 1e-5);
        ++flat;
    };
    for (size_t l = 0; l < m.weights.size(); ++l) {
        for (double& w : m.weights[l]) check_param(w);
        for (double& b : m.biases[l]) check_param(b);
    }
}

TEST_CASE("xor trains to high accuracy") {
    const LabeledSamples s = xor_samples(60);  // 240 samples
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.max_epochs = 800;
    cfg.patience = 200;
    TrainReport rep;
    const MlpModel m = train(s, {2, 30, 2}, cfg, &rep);
    CHECK(rep.test_accuracy >= 0.95);
}

TEST_CASE("separable blobs reach 99 percent") {
    const LabeledSamples s = blob_samples(300);
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.max_epochs = 300;
    cfg.patience = 50;
    TrainReport rep;
    const MlpModel m = train(s, {4, 20, 2}, cfg, &rep);
    CHECK(rep.test_accuracy >= 0.99);
}

TEST_CASE("a zero epoch budget returns the initialized model") {
    const LabeledSamples s = blob_samples(50);
    TrainConfig cfg;
    cfg.seed = 11;
    cfg.max_epochs = 0;
    TrainReport rep;
    const MlpModel trained = train(s, {4, 20, 2}, cfg, &rep);
    const MlpModel fresh = init_model({4, 20, 2}, 11);
    CHECK(trained.weights == fresh.weights);
    CHECK(trained.biases == fresh.biases);
    CHECK(rep.initial_loss > 0.0);
    CHECK(rep.epochs_run == 0);
}

TEST_CASE("training refuses single-class data") {
    LabeledSamples s;
    s.feature_count = 2;
    for (int i = 0; i < 20; ++i) {
        s.features.push_back(i);
        s.features.push_back(-i);
        s.labels.push_back(1);
    }
    TrainConfig cfg;
    CHECK_THROWS_AS(train(s, {2, 4, 2}, cfg, nullptr), std::invalid_argument);
}

TEST_CASE("training is reproducible for a fixed seed") {
    const LabeledSamples s = xor_samples(20);
    TrainConfig cfg;
    cfg.seed = 21;
    cfg.max_epochs = 40;
    const MlpModel a = train(s, {2, 6, 2}, cfg, nullptr);
    const MlpModel b = train(s, {2, 6, 2}, cfg, nullptr);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);

    // gradient partials merge in a fixed chunk order, so the thread
    // count cannot move a single bit
    TrainConfig threaded = cfg;
    threaded.threads = 4;
    const MlpModel c = train(s, {2, 6, 2}, threaded, nullptr);
    CHECK(c.weights == a.weights);
    CHECK(c.biases == a.biases);
}

TEST_CASE("predict_mask saturated bias and tie rules") {
    RasterStack stack;
    RasterBand band;
    band.width = 3;
    band.height = 1;
    band.name = "b0";
    band.values = {0.1, 0.5, 0.9};
    stack.bands.push_back(band);

    MlpModel wet = zero_model({1, 2, 2});
    wet.biases[1] = {0.0, 10.0};  // water output saturated high
    const SegmentationMask all = predict_mask(wet, stack);
    CHECK(all.water == std::vector<uint8_t>{1, 1, 1});

    const MlpModel tie = zero_model({1, 2, 2});  // both outputs exactly 0.5
    const SegmentationMask none = predict_mask(tie, stack);
    CHECK(none.water == std::vector<uint8_t>{0, 0, 0});

    const MlpModel wrong = zero_model({2, 2, 2});
    CHECK_THROWS_AS(predict_mask(wrong, stack), std::invalid_argument);
}

TEST_CASE("models round-trip through json") {
    const MlpModel m = init_model({4, 20, 2}, 33);
    const std::string path = testutil::temp_path("model.json");
    save_model_json(m, path);
    const MlpModel back = load_model_json(path);
    CHECK(back.layer_sizes == m.layer_sizes);
    CHECK(back.weights == m.weights);  // 17 significant digits round-trip
    CHECK(back.biases == m.biases);
}
