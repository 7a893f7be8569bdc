#include "mfseg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "mfseg/parallel.hpp"
#include "mfseg/rng.hpp"

namespace mfseg {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void validate_arch(const std::vector<int>& layer_sizes) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need input and output layers");
    for (int n : layer_sizes)
        if (n < 1) throw std::invalid_argument("layer sizes must be positive");
    if (layer_sizes.back() != 2) throw std::invalid_argument("classifier needs 2 output neurons");
}

size_t parameter_count(const std::vector<int>& layer_sizes) {
    size_t n = 0;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += static_cast<size_t>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
    return n;
}

std::vector<double> flatten(const MlpModel& m) {
    std::vector<double> v;
    v.reserve(parameter_count(m.layer_sizes));
    for (size_t l = 0; l < m.weights.size(); ++l) {
        v.insert(v.end(), m.weights[l].begin(), m.weights[l].end());
        v.insert(v.end(), m.biases[l].begin(), m.biases[l].end());
    }
    return v;
}

void unflatten(const std::vector<double>& v, MlpModel& m) {
    size_t pos = 0;
    for (size_t l = 0; l < m.weights.size(); ++l) {
        std::copy(v.begin() + pos, v.begin() + pos + m.weights[l].size(), m.weights[l].begin());
        pos += m.weights[l].size();
        std::copy(v.begin() + pos, v.begin() + pos + m.biases[l].size(), m.biases[l].begin());
        pos += m.biases[l].size();
    }
}

// forward pass storing all activations; `act` is resized per layer
void forward_all(const MlpModel& m, const double* input, std::vector<std::vector<double>>& act) {
    const size_t layers = m.layer_sizes.size();
    act.resize(layers);
    act[0].assign(input, input + m.layer_sizes[0]);
    for (size_t l = 0; l + 1 < layers; ++l) {
        const int in = m.layer_sizes[l];
        const int out = m.layer_sizes[l + 1];
        act[l + 1].resize(out);
        for (int o = 0; o < out; ++o) {
            double z = m.biases[l][o];
            const double* wrow = m.weights[l].data() + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) z += wrow[i] * act[l][i];
            act[l + 1][o] = sigmoid(z);
        }
    }
}

struct Split {
    std::vector<size_t> train, val, test;
};

Split split_samples(size_t n, const TrainConfig& cfg) {
    if (std::abs(cfg.train_frac + cfg.val_frac + cfg.test_frac - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    SplitMix64 rng(cfg.seed);
    for (size_t i = n; i > 1; --i) {
        const size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    Split s;
    const size_t n_train = static_cast<size_t>(cfg.train_frac * static_cast<double>(n));
    const size_t n_val = static_cast<size_t>(cfg.val_frac * static_cast<double>(n));
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    s.test.assign(idx.begin() + n_train + n_val, idx.end());
    return s;
}

LabeledSamples subset(const LabeledSamples& all, const std::vector<size_t>& idx) {
    LabeledSamples out;
    out.feature_count = all.feature_count;
    out.features.reserve(idx.size() * all.feature_count);
    out.labels.reserve(idx.size());
    for (size_t i : idx) {
        const double* f = all.features.data() + i * all.feature_count;
        out.features.insert(out.features.end(), f, f + all.feature_count);
        out.labels.push_back(all.labels[i]);
    }
    return out;
}

}  // namespace

MlpModel init_model(const std::vector<int>& layer_sizes, uint64_t seed) {
    validate_arch(layer_sizes);
    MlpModel m;
    m.layer_sizes = layer_sizes;
    SplitMix64 rng(seed);
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(static_cast<size_t>(out) * in);
        for (double& v : w) v = bound * (2.0 * rng.uniform() - 1.0);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::vector<double>(out, 0.0));
    }
    return m;
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != model.layer_sizes.front())
        throw std::invalid_argument("input length does not match the input layer");
    std::vector<std::vector<double>> act;
    forward_all(model, input.data(), act);
    return act.back();
}

double loss_and_gradient(const MlpModel& model, const LabeledSamples& batch,
                         std::vector<double>* gradient, int threads) {
    if (batch.size() == 0) throw std::invalid_argument("empty batch");
    if (batch.feature_count != model.layer_sizes.front())
        throw std::invalid_argument("feature count does not match the input layer");
    const size_t pcount = parameter_count(model.layer_sizes);
    const size_t layers = model.layer_sizes.size();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    constexpr double kEps = 1e-12;  // keeps the logs finite at saturation

    struct Partial {
        double loss = 0.0;
        std::vector<double> grad;
    };

    auto map_chunk = [&](size_t begin, size_t end) {
        Partial part;
        if (gradient) part.grad.assign(pcount, 0.0);
        std::vector<std::vector<double>> act;
        std::vector<std::vector<double>> delta(layers);
        for (size_t s = begin; s < end; ++s) {
            forward_all(model, batch.features.data() + s * batch.feature_count, act);
            const bool water = batch.labels[s] != 0;
            const double targets[2] = {water ? 0.0 : 1.0, water ? 1.0 : 0.0};
            for (int o = 0; o < 2; ++o) {
                const double y = act.back()[o];
                const double t = targets[o];
                part.loss -= t * std::log(std::max(y, kEps)) +
                             (1.0 - t) * std::log(std::max(1.0 - y, kEps));
            }
            if (!gradient) continue;
            delta[layers - 1].resize(2);
            for (int o = 0; o < 2; ++o) delta[layers - 1][o] = act.back()[o] - targets[o];
            for (size_t l = layers - 1; l-- > 1;) {
                const int n = model.layer_sizes[l];
                const int n_next = model.layer_sizes[l + 1];
                delta[l].assign(n, 0.0);
                for (int o = 0; o < n_next; ++o) {
                    const double d = delta[l + 1][o];
                    const double* wrow = model.weights[l].data() + static_cast<size_t>(o) * n;
                    for (int i = 0; i < n; ++i) delta[l][i] += wrow[i] * d;
                }
                for (int i = 0; i < n; ++i) delta[l][i] *= act[l][i] * (1.0 - act[l][i]);
            }
            size_t pos = 0;
            for (size_t l = 0; l + 1 < layers; ++l) {
                const int in = model.layer_sizes[l];
                const int out = model.layer_sizes[l + 1];
                for (int o = 0; o < out; ++o) {
                    const double d = delta[l + 1][o];
                    double* grow = part.grad.data() + pos + static_cast<size_t>(o) * in;
                    for (int i = 0; i < in; ++i) grow[i] += d * act[l][i];
                }
                pos += static_cast<size_t>(out) * in;
                for (int o = 0; o < out; ++o) part.grad[pos + o] += delta[l + 1][o];
                pos += out;
            }
        }
        return part;
    };
    auto merge = [&](Partial acc, const Partial& p) {
        acc.loss += p.loss;
        if (gradient) {
            if (acc.grad.empty()) acc.grad.assign(pcount, 0.0);
            for (size_t i = 0; i < pcount; ++i) acc.grad[i] += p.grad[i];
        }
        return acc;
    };
    Partial total = chunked_reduce(batch.size(), threads, Partial{}, map_chunk, merge);
    if (gradient) {
        gradient->assign(pcount, 0.0);
        for (size_t i = 0; i < pcount; ++i) (*gradient)[i] = total.grad[i] * inv_n;
    }
    return total.loss * inv_n;
}

double loss_only(const MlpModel& model, const LabeledSamples& batch, int threads) {
    return loss_and_gradient(model, batch, nullptr, threads);
}

MlpModel train(const LabeledSamples& samples, const std::vector<int>& layer_sizes,
               const TrainConfig& cfg, TrainReport* report) {
    validate_arch(layer_sizes);
    if (samples.size() < 4) throw std::invalid_argument("too few samples");
    bool has_water = false, has_land = false;
    for (uint8_t l : samples.labels) (l ? has_water : has_land) = true;
    if (!has_water || !has_land)
        throw std::invalid_argument("training data holds a single class");

    const Split split = split_samples(samples.size(), cfg);
    const LabeledSamples train_set = subset(samples, split.train);
    const LabeledSamples val_set = subset(samples, split.val);
    const LabeledSamples test_set = subset(samples, split.test);

    MlpModel model = init_model(layer_sizes, cfg.seed);
    TrainReport rep;
    rep.initial_loss = loss_only(model, train_set, cfg.threads);

    const size_t n = parameter_count(layer_sizes);
    std::vector<double> w = flatten(model);
    auto eval_loss = [&](const std::vector<double>& params) {
        unflatten(params, model);
        return loss_only(model, train_set, cfg.threads);
    };
    auto eval_grad = [&](const std::vector<double>& params, std::vector<double>& grad) {
        unflatten(params, model);
        return loss_and_gradient(model, train_set, &grad, cfg.threads);
    };
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    // scaled conjugate gradient (Moller), full batch
    const double sigma0 = 1e-5;
    double lambda = 1e-6;
    double lambda_bar = 0.0;
    std::vector<double> r(n), grad(n), s_vec(n), p(n), w_try(n), r_new(n);
    double fw = eval_grad(w, grad);
    for (size_t i = 0; i < n; ++i) r[i] = -grad[i];
    p = r;
    bool success = true;
    double delta = 0.0;

    std::vector<double> best_w = w;
    double best_val = val_set.size() ? [&] {
        unflatten(w, model);
        return loss_only(model, val_set, cfg.threads);
    }() : fw;
    int since_best = 0;
    int epoch = 0;

    for (; epoch < cfg.max_epochs; ++epoch) {
        const double p2 = norm2(p);
        const double pnorm = std::sqrt(p2);
        if (pnorm < 1e-14) break;  // gradient vanished

        if (success) {
            const double sigma = sigma0 / pnorm;
            for (size_t i = 0; i < n; ++i) w_try[i] = w[i] + sigma * p[i];
            eval_grad(w_try, s_vec);
            for (size_t i = 0; i < n; ++i) s_vec[i] = (s_vec[i] + r[i]) / sigma;  // r = -grad(w)
            delta = dot(p, s_vec);
        }
        delta += (lambda - lambda_bar) * p2;
        if (delta <= 0.0) {  // make the Hessian surrogate positive definite
            lambda_bar = 2.0 * (lambda - delta / p2);
            delta = -delta + lambda * p2;
            lambda = lambda_bar;
        }
        const double mu = dot(p, r);
        if (!(std::abs(mu) > 1e-300)) {  // p lost conjugacy; restart
            p = r;
            success = true;
            continue;
        }
        const double alpha = mu / delta;
        for (size_t i = 0; i < n; ++i) w_try[i] = w[i] + alpha * p[i];
        const double f_try = eval_loss(w_try);
        double comparison = 2.0 * delta * (fw - f_try) / (mu * mu);
        if (!std::isfinite(comparison)) comparison = -1.0;

        if (comparison >= 0.0) {
            w.swap(w_try);
            fw = f_try;
            eval_grad(w, grad);
            for (size_t i = 0; i < n; ++i) r_new[i] = -grad[i];
            lambda_bar = 0.0;
            success = true;
            if ((epoch + 1) % static_cast<int>(n) == 0) {
                p = r_new;  // restart along steepest descent
            } else {
                const double beta = (norm2(r_new) - dot(r_new, r)) / mu;
                for (size_t i = 0; i < n; ++i) p[i] = r_new[i] + beta * p[i];
            }
            r = r_new;
            if (comparison >= 0.75) lambda *= 0.25;
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p2;
        if (lambda > 1e100) break;  // hopeless curvature; give up cleanly

        // validation-driven early stopping
        double val_loss = fw;
        if (val_set.size()) {
            unflatten(w, model);
            val_loss = loss_only(model, val_set, cfg.threads);
        }
        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best_w = w;
            since_best = 0;
        } else if (++since_best > cfg.patience) {
            ++epoch;
            break;
        }
        if (std::sqrt(norm2(r)) < 1e-10) {
            ++epoch;
            break;
        }
    }

    unflatten(best_w, model);
    rep.final_val_loss = best_val;
    rep.epochs_run = epoch;
    if (test_set.size()) {
        size_t correct = 0;
        std::vector<double> input(static_cast<size_t>(test_set.feature_count));
        for (size_t i = 0; i < test_set.size(); ++i) {
            const double* f = test_set.features.data() + i * test_set.feature_count;
            input.assign(f, f + test_set.feature_count);
            const std::vector<double> out = forward(model, input);
            const bool water = out[1] > out[0];
            if (water == (test_set.labels[i] != 0)) ++correct;
        }
        rep.test_accuracy = static_cast<double>(correct) / static_cast<double>(test_set.size());
    }
    if (report) *report = rep;
    return model;
}

SegmentationMask predict_mask(const MlpModel& model, const RasterStack& stack, int threads) {
    if (stack.bands.empty()) throw std::invalid_argument("empty stack");
    if (static_cast<int>(stack.bands.size()) != model.layer_sizes.front())
        throw std::invalid_argument("stack band count does not match the input layer");
    SegmentationMask mask;
    mask.width = stack.width();
    mask.height = stack.height();
    mask.water.assign(mask.pixel_count(), 0);
    const size_t bands = stack.bands.size();
    parallel_for(mask.pixel_count(), threads, [&](size_t i) {
        std::vector<double> input(bands);
        for (size_t b = 0; b < bands; ++b) input[b] = stack.bands[b].values[i];
        std::vector<std::vector<double>> act;
        forward_all(model, input.data(), act);
        // ties fall to non-water
        mask.water[i] = act.back()[1] > act.back()[0] ? 1 : 0;
    });
    return mask;
}

LabeledSamples samples_from_stack(const RasterStack& stack, const SegmentationMask& truth) {
    if (stack.bands.empty()) throw std::invalid_argument("empty stack");
    if (stack.width() != truth.width || stack.height() != truth.height)
        throw std::invalid_argument("stack and truth mask differ in size");
    LabeledSamples out;
    out.feature_count = static_cast<int>(stack.bands.size());
    const size_t pixels = truth.pixel_count();
    out.features.resize(pixels * stack.bands.size());
    out.labels.resize(pixels);
    for (size_t i = 0; i < pixels; ++i) {
        for (size_t b = 0; b < stack.bands.size(); ++b)
            out.features[i * stack.bands.size() + b] = stack.bands[b].values[i];
        out.labels[i] = truth.water[i];
    }
    return out;
}

void save_model_json(const MlpModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["layer_sizes"] = model.layer_sizes;
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out.good()) throw IoError("write failure on " + path);
}

MlpModel load_model_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    validate_arch(m.layer_sizes);
    for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        if (l >= m.weights.size() || l >= m.biases.size() ||
            m.weights[l].size() !=
                static_cast<size_t>(m.layer_sizes[l + 1]) * m.layer_sizes[l] ||
            m.biases[l].size() != static_cast<size_t>(m.layer_sizes[l + 1]))
            throw IoError(path + ": model shape mismatch");
        for (double v : m.weights[l])
            if (!std::isfinite(v)) throw IoError(path + ": non-finite weight");
        for (double v : m.biases[l])
            if (!std::isfinite(v)) throw IoError(path + ": non-finite bias");
    }
    return m;
}

}  // namespace mfseg
