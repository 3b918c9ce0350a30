#include "mhp/network.hpp"

#include <algorithm>
#include <cmath>

#include "mhp/error.hpp"

namespace mhp {

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "identity") return Activation::Identity;
    throw ValidationError("unknown activation '" + name + "'");
}

MlpModel::MlpModel(std::vector<DenseLayer> layers, std::size_t output_dim, std::size_t num_hypotheses)
    : layers_(std::move(layers)), output_dim_(output_dim), num_hypotheses_(num_hypotheses) {
    validate();
}

void MlpModel::validate() const {
    if (layers_.empty()) throw ValidationError("MlpModel: no layers");
    if (output_dim_ == 0 || num_hypotheses_ == 0) throw ValidationError("MlpModel: output_dim and M must be positive");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& layer = layers_[k];
        if (layer.in == 0 || layer.out == 0) throw ShapeError("MlpModel: layer " + std::to_string(k) + " has a zero dimension");
        if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
            throw ShapeError("MlpModel: layer " + std::to_string(k) + " parameter sizes do not match its dimensions");
        }
        if (k > 0 && layers_[k - 1].out != layer.in) {
            throw ShapeError("MlpModel: layer " + std::to_string(k) + " input does not chain with previous output");
        }
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(layer.weight.begin(), layer.weight.end(), finite) ||
            !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
            throw ValidationError("MlpModel: non-finite parameter in layer " + std::to_string(k));
        }
    }
    if (layers_.back().out != output_dim_ * num_hypotheses_) {
        throw ShapeError("MlpModel: output layer width must equal M * output_dim");
    }
}

MlpModel MlpModel::create(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                          std::size_t num_hypotheses, Rng& rng, double head_noise) {
    if (input_dim == 0 || output_dim == 0 || num_hypotheses == 0) {
        throw ValidationError("MlpModel::create: dimensions must be positive");
    }
    std::vector<DenseLayer> layers;
    std::size_t fan_in = input_dim;
    for (std::size_t width : hidden) {
        if (width == 0) throw ValidationError("MlpModel::create: zero-width hidden layer");
        DenseLayer layer{fan_in, width, std::vector<double>(fan_in * width), std::vector<double>(width, 0.0),
                         Activation::ReLU};
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& w : layer.weight) w = rng.normal(0.0, stddev);
        layers.push_back(std::move(layer));
        fan_in = width;
    }

    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    std::vector<double> block(output_dim * fan_in);
    for (auto& w : block) w = rng.normal(0.0, stddev);

    DenseLayer head{fan_in, output_dim * num_hypotheses, {}, {}, Activation::Identity};
    head.weight.reserve(head.in * head.out);
    head.bias.reserve(head.out);
    for (std::size_t j = 0; j < num_hypotheses; ++j) {
        for (double w : block) head.weight.push_back(w + rng.normal(0.0, head_noise));
    }
    for (std::size_t r = 0; r < head.out; ++r) head.bias.push_back(rng.normal(0.0, head_noise));
    layers.push_back(std::move(head));
    return MlpModel(std::move(layers), output_dim, num_hypotheses);
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
}

std::vector<std::size_t> MlpModel::layer_dims() const {
    std::vector<std::size_t> dims{layers_.front().in};
    for (const auto& layer : layers_) dims.push_back(layer.out);
    return dims;
}

MlpModel MlpModel::with_heads(std::size_t k) const {
    if (k == 0 || k > num_hypotheses_) throw ValidationError("MlpModel::with_heads: k out of range");
    auto layers = layers_;
    auto& head = layers.back();
    head.out = k * output_dim_;
    head.weight.resize(head.out * head.in);
    head.bias.resize(head.out);
    return MlpModel(std::move(layers), output_dim_, k);
}

Gradients::Gradients(const MlpModel& model) {
    layers_.reserve(model.layers().size());
    for (const auto& layer : model.layers()) {
        layers_.push_back({std::vector<double>(layer.weight.size(), 0.0), std::vector<double>(layer.bias.size(), 0.0)});
    }
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    if (other.layers_.size() != layers_.size()) throw ShapeError("Gradients::add_scaled: layer count mismatch");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        auto& dst = layers_[k];
        const auto& src = other.layers_[k];
        if (dst.weight.size() != src.weight.size() || dst.bias.size() != src.bias.size()) {
            throw ShapeError("Gradients::add_scaled: layer shape mismatch");
        }
        for (std::size_t i = 0; i < dst.weight.size(); ++i) dst.weight[i] += scale * src.weight[i];
        for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += scale * src.bias[i];
    }
}

void Gradients::scale(double factor) {
    for (auto& layer : layers_) {
        for (auto& v : layer.weight) v *= factor;
        for (auto& v : layer.bias) v *= factor;
    }
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& layer : layers_) {
        for (double v : layer.weight) m = std::max(m, std::abs(v));
        for (double v : layer.bias) m = std::max(m, std::abs(v));
    }
    return m;
}

bool Gradients::same_shape(const MlpModel& model) const {
    if (layers_.size() != model.layers().size()) return false;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        if (layers_[k].weight.size() != model.layers()[k].weight.size() ||
            layers_[k].bias.size() != model.layers()[k].bias.size()) {
            return false;
        }
    }
    return true;
}

namespace {

void check_input(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim()) {
        throw ShapeError("forward: input has " + std::to_string(x.size()) + " entries, model expects " +
                         std::to_string(model.input_dim()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("forward: non-finite input");
    }
}

void dense(const DenseLayer& layer, std::span<const double> in, std::vector<double>& pre, std::vector<double>& post) {
    pre.assign(layer.out, 0.0);
    post.resize(layer.out);
    for (std::size_t r = 0; r < layer.out; ++r) {
        const double* row = layer.weight.data() + r * layer.in;
        double acc = layer.bias[r];
        for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * in[c];
        pre[r] = acc;
        post[r] = (layer.activation == Activation::ReLU && acc <= 0.0) ? 0.0 : acc;
    }
}

}  // namespace

ForwardTrace forward_trace(const MlpModel& model, std::span<const double> x) {
    check_input(model, x);
    const auto& layers = model.layers();
    ForwardTrace trace;
    trace.pre.resize(layers.size());
    trace.post.resize(layers.size());
    std::span<const double> in = x;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        dense(layers[k], in, trace.pre[k], trace.post[k]);
        in = trace.post[k];
    }
    return trace;
}

HypothesisSet hypotheses_from_output(const MlpModel& model, std::span<const double> output) {
    if (output.size() != model.num_hypotheses() * model.output_dim()) {
        throw ShapeError("hypotheses_from_output: output width mismatch");
    }
    return HypothesisSet(model.num_hypotheses(), model.output_dim(), std::vector<double>(output.begin(), output.end()));
}

HypothesisSet forward(const MlpModel& model, std::span<const double> x) {
    auto trace = forward_trace(model, x);
    return hypotheses_from_output(model, trace.post.back());
}

void backward_accumulate(const MlpModel& model, const ForwardTrace& trace, std::span<const double> x,
                         std::span<const double> upstream_flat, double scale, Gradients& out) {
    const auto& layers = model.layers();
    if (upstream_flat.size() != layers.back().out) throw ShapeError("backward: upstream gradient width mismatch");
    if (!out.same_shape(model)) throw ShapeError("backward: gradient buffer does not match model");

    std::vector<double> delta(upstream_flat.begin(), upstream_flat.end());
    std::vector<double> below;
    for (std::size_t k = layers.size(); k-- > 0;) {
        const auto& layer = layers[k];
        if (layer.activation == Activation::ReLU) {
            for (std::size_t r = 0; r < layer.out; ++r) {
                if (trace.pre[k][r] <= 0.0) delta[r] = 0.0;
            }
        }
        std::span<const double> input = k == 0 ? x : std::span<const double>(trace.post[k - 1]);
        auto& grad = out.layers()[k];
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double d = scale * delta[r];
            if (d == 0.0) continue;
            double* row = grad.weight.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) row[c] += d * input[c];
            grad.bias[r] += d;
        }
        if (k == 0) break;
        below.assign(layer.in, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            const double* row = layer.weight.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) below[c] += row[c] * d;
        }
        delta.swap(below);
    }
}

Gradients backward(const MlpModel& model, std::span<const double> x, const HypothesisSet& upstream) {
    if (upstream.size() != model.num_hypotheses() || upstream.dim() != model.output_dim()) {
        throw ShapeError("backward: upstream gradients must be M vectors of output_dim");
    }
    auto trace = forward_trace(model, x);
    Gradients grads(model);
    backward_accumulate(model, trace, x, upstream.flat(), 1.0, grads);
    return grads;
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::SGDMomentum ? "sgd_momentum" : "rmsprop"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::SGDMomentum;
    if (name == "rmsprop") return OptimizerKind::RMSProp;
    throw ValidationError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerConfig config, const MlpModel& model) : config_(config), state_(model) {
    if (!(config_.learning_rate > 0.0) || !std::isfinite(config_.learning_rate)) {
        throw ValidationError("optimizer: learning rate must be positive");
    }
    if (!(config_.momentum >= 0.0 && config_.momentum < 1.0)) {
        throw ValidationError("optimizer: momentum/decay must lie in [0, 1)");
    }
}

void Optimizer::step(MlpModel& model, const Gradients& grads) {
    if (!grads.same_shape(model) || !state_.same_shape(model)) throw ShapeError("optimizer: gradient shape mismatch");
    for (std::size_t k = 0; k < grads.layers().size(); ++k) {
        const auto& g = grads.layers()[k];
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(g.weight.begin(), g.weight.end(), finite) || !std::all_of(g.bias.begin(), g.bias.end(), finite)) {
            throw DivergenceError("non-finite gradient in layer " + std::to_string(k), k);
        }
    }

    const double lr = config_.learning_rate;
    const double mu = config_.momentum;
    auto update = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& acc) {
        if (config_.kind == OptimizerKind::SGDMomentum) {
            for (std::size_t i = 0; i < theta.size(); ++i) {
                acc[i] = mu * acc[i] - lr * g[i];
                theta[i] += acc[i];
            }
        } else {
            for (std::size_t i = 0; i < theta.size(); ++i) {
                acc[i] = mu * acc[i] + (1.0 - mu) * g[i] * g[i];
                theta[i] -= lr * g[i] / std::sqrt(acc[i] + kRmsEpsilon);
            }
        }
    };
    for (std::size_t k = 0; k < grads.layers().size(); ++k) {
        auto& layer = model.layers()[k];
        update(layer.weight, grads.layers()[k].weight, state_.layers()[k].weight);
        update(layer.bias, grads.layers()[k].bias, state_.layers()[k].bias);
    }
}

}  // namespace mhp
