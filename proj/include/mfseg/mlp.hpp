#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfseg/raster.hpp"

namespace mfseg {

/// Small feedforward classifier, logistic sigmoid on every neuron.
/// layer_sizes runs input..output, e.g. {4, 20, 2} or {2, 30, 2}.
/// Output neuron 1 is the water score.
struct MlpModel {
    std::vector<int> layer_sizes;
    // weights[l] is (out x in) row-major for the transition l -> l+1.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

struct TrainConfig {
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;
    uint64_t seed = 0;
    int max_epochs = 500;
    int patience = 30;
    int threads = 1;
};

struct LabeledSamples {
    int feature_count = 0;
    std::vector<double> features;  // sample-major
    std::vector<uint8_t> labels;   // 1 = water
    size_t size() const { return labels.size(); }
};

struct TrainReport {
    double initial_loss = 0.0;
    double final_val_loss = 0.0;
    double test_accuracy = 0.0;  // fraction in [0,1]
    int epochs_run = 0;
};

MlpModel init_model(const std::vector<int>& layer_sizes, uint64_t seed);

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input);

/// Mean cross-entropy over the batch plus its gradient with respect to
/// every weight and bias, flattened in layer order. Exposed so the
/// analytic gradient can be checked against finite differences.
double loss_and_gradient(const MlpModel& model, const LabeledSamples& batch,
                         std::vector<double>* gradient, int threads = 1);

double loss_only(const MlpModel& model, const LabeledSamples& batch, int threads = 1);

/// Full-batch scaled conjugate gradient with the conventional sigma =
/// 1e-5, lambda0 = 1e-6. Samples are split train/val/test with the
/// config seed; validation loss drives early stopping (best weights are
/// restored). A zero epoch budget returns the freshly initialized model.
MlpModel train(const LabeledSamples& samples, const std::vector<int>& layer_sizes,
               const TrainConfig& cfg, TrainReport* report = nullptr);

/// Argmax of the two output scores per pixel; exact ties are non-water.
SegmentationMask predict_mask(const MlpModel& model, const RasterStack& stack, int threads = 1);

/// Pixels of a stack paired with a ground-truth mask.
LabeledSamples samples_from_stack(const RasterStack& stack, const SegmentationMask& truth);

void save_model_json(const MlpModel& model, const std::string& path);
MlpModel load_model_json(const std::string& path);

}  // namespace mfseg
