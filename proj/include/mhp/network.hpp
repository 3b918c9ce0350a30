#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mhp/hypotheses.hpp"
#include "mhp/rng.hpp"

namespace mhp {

enum class Activation { ReLU, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected layer. `weight` is row-major out x in.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;
    std::vector<double> bias;
    Activation activation = Activation::Identity;

    double w(std::size_t row, std::size_t col) const { return weight[row * in + col]; }
};

/// Shared-trunk feed-forward predictor whose last layer is M contiguous heads
/// of `output_dim` outputs each.
class MlpModel {
public:
    MlpModel() = default;
    MlpModel(std::vector<DenseLayer> layers, std::size_t output_dim, std::size_t num_hypotheses);

    /// He-initialised trunk (std sqrt(2/fan_in), zero bias). The output layer is
    /// one He-initialised head block replicated M times, each copy perturbed
    /// with independent N(0, head_noise^2) noise on weights and biases.
    static MlpModel create(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                           std::size_t num_hypotheses, Rng& rng, double head_noise = 0.01);

    std::size_t input_dim() const { return layers_.front().in; }
    std::size_t output_dim() const noexcept { return output_dim_; }
    std::size_t num_hypotheses() const noexcept { return num_hypotheses_; }
    std::size_t parameter_count() const;
    /// {in, hidden..., out}
    std::vector<std::size_t> layer_dims() const;

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    /// Throws ShapeError/ValidationError if dimensions do not chain, the
    /// output width is not M * output_dim, or a parameter is non-finite.
    void validate() const;

    /// Copy keeping only the first `k` heads of the output layer.
    MlpModel with_heads(std::size_t k) const;

private:
    std::vector<DenseLayer> layers_;
    std::size_t output_dim_ = 0;
    std::size_t num_hypotheses_ = 0;
};

struct LayerGradient {
    std::vector<double> weight;
    std::vector<double> bias;
};

/// Gradient with the same shape as an MlpModel's parameters.
class Gradients {
public:
    Gradients() = default;
    explicit Gradients(const MlpModel& model);

    std::vector<LayerGradient>& layers() noexcept { return layers_; }
    const std::vector<LayerGradient>& layers() const noexcept { return layers_; }

    void add_scaled(const Gradients& other, double scale);
    void scale(double factor);
    double max_abs() const;
    bool same_shape(const MlpModel& model) const;

private:
    std::vector<LayerGradient> layers_;
};

/// Pre-activation and post-activation values of every layer for one input.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

HypothesisSet forward(const MlpModel& model, std::span<const double> x);
ForwardTrace forward_trace(const MlpModel& model, std::span<const double> x);

/// Gradient of sum_j <upstream_j, f^j(x)> with respect to every parameter.
Gradients backward(const MlpModel& model, std::span<const double> x, const HypothesisSet& upstream);

/// Accumulates `scale` times the gradient into `out`, reusing a trace of the
/// same input.
void backward_accumulate(const MlpModel& model, const ForwardTrace& trace, std::span<const double> x,
                         std::span<const double> upstream_flat, double scale, Gradients& out);

HypothesisSet hypotheses_from_output(const MlpModel& model, std::span<const double> output);

enum class OptimizerKind { SGDMomentum, RMSProp };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::SGDMomentum;
    double learning_rate = 0.01;
    /// Momentum for SGDMomentum, squared-gradient decay for RMSProp; in [0, 1).
    double momentum = 0.9;
};

/// First-order optimizer owning one accumulator per parameter.
///   SGDMomentum: v <- mu v - lr g;  theta <- theta + v
///   RMSProp:     s <- rho s + (1 - rho) g^2;  theta <- theta - lr g / sqrt(s + 1e-8)
class Optimizer {
public:
    static constexpr double kRmsEpsilon = 1e-8;

    Optimizer() = default;
    Optimizer(OptimizerConfig config, const MlpModel& model);

    /// Throws DivergenceError (carrying the layer index) on non-finite gradients.
    void step(MlpModel& model, const Gradients& grads);

    const OptimizerConfig& config() const noexcept { return config_; }
    const Gradients& accumulators() const noexcept { return state_; }
    Gradients& accumulators() noexcept { return state_; }

private:
    OptimizerConfig config_;
    Gradients state_;
};

}  // namespace mhp
