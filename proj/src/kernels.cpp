#include "mhp/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "mhp/error.hpp"

namespace mhp::kernels {

Target point_target(const LossKind& loss, std::span<const double> sample) {
    if (loss.is_classification()) {
        if (sample.size() != 1 || !(sample[0] >= 0.0)) throw ShapeError("cross-entropy sample must be a class index");
        return Target::label(static_cast<std::size_t>(sample[0]));
    }
    return Target::regression(sample);
}

std::size_t nearest(const PointSet& generators, const LossKind& loss, std::span<const double> sample, double* best_loss) {
    const Target target = point_target(loss, sample);
    std::size_t best = 0;
    double best_value = mhp::loss(loss, generators[0], target);
    for (std::size_t j = 1; j < generators.size(); ++j) {
        const double v = mhp::loss(loss, generators[j], target);
        if (v < best_value) {
            best_value = v;
            best = j;
        }
    }
    if (best_loss) *best_loss = best_value;
    return best;
}

namespace {

void check_generators(const PointSet& generators) {
    if (generators.empty()) throw ValidationError("at least one generator is required");
}

void check_batch(const Dataset& data, std::span<const std::size_t> indices, const std::vector<std::vector<bool>>& masks) {
    if (masks.size() != indices.size()) throw ShapeError("batch_gradient: one dropout mask per sample required");
    for (auto i : indices) {
        if (i >= data.size()) throw ShapeError("batch_gradient: sample index out of range");
    }
}

// Adds one sample's contribution (scaled by `scale`) into `grads` and returns
// {meta-loss, oracle-min loss}.
std::pair<double, double> accumulate_sample(const MlpModel& model, const MetaLossConfig& config, const Dataset& data,
                                            std::size_t i, const std::vector<bool>& mask, double scale,
                                            Gradients& grads) {
    const auto x = data.input(i);
    const auto trace = forward_trace(model, x);
    const auto hyps = hypotheses_from_output(model, trace.post.back());
    const Target target = data.target(i);
    const auto assignment = assign(config, hyps, target, mask);
    const double meta = meta_loss(config, hyps, target, assignment);
    double oracle = assignment.per_hypothesis_losses[0];
    for (double v : assignment.per_hypothesis_losses) oracle = std::min(oracle, v);
    const auto upstream = meta_loss_upstream_grads(config, hyps, target, assignment);
    backward_accumulate(model, trace, x, upstream.flat(), scale, grads);
    return {meta, oracle};
}

void accumulate_eval(const MlpModel& model, const Dataset& data, const LossKind& loss, std::size_t i, EvalSums& sums) {
    const auto hyps = forward(model, data.input(i));
    const Target target = data.target(i);
    double best = 0.0;
    for (std::size_t j = 0; j < hyps.size(); ++j) {
        const double v = mhp::loss(loss, hyps[j], target);
        sums.per_head[j] += v;
        best = j == 0 ? v : std::min(best, v);
    }
    sums.oracle_min += best;
    ++sums.count;
}

std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

}  // namespace

std::vector<std::size_t> assign_cells(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_generators(generators);
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
    std::vector<std::size_t> out(samples.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = nearest(generators, loss, samples[static_cast<std::size_t>(i)]);
    }
    return out;
}

double sum_min_loss(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_generators(generators);
    const std::size_t n = samples.size();
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n, kSampleChunk));
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kSampleChunk;
        const std::size_t end = std::min(n, begin + kSampleChunk);
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            double v = 0.0;
            nearest(generators, loss, samples[i], &v);
            s += v;
        }
        partial[static_cast<std::size_t>(c)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

BatchResult batch_gradient(const MlpModel& model, const MetaLossConfig& config, const Dataset& data,
                           std::span<const std::size_t> indices, const std::vector<std::vector<bool>>& masks) {
    check_batch(data, indices, masks);
    const std::size_t n = indices.size();
    const double scale = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n, kGradientChunk));
    std::vector<BatchResult> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        auto& part = partial[static_cast<std::size_t>(c)];
        part.gradients = Gradients(model);
        const std::size_t begin = static_cast<std::size_t>(c) * kGradientChunk;
        const std::size_t end = std::min(n, begin + kGradientChunk);
        for (std::size_t b = begin; b < end; ++b) {
            const auto [meta, oracle] = accumulate_sample(model, config, data, indices[b], masks[b], scale, part.gradients);
            part.sum_meta_loss += meta;
            part.sum_oracle_loss += oracle;
            ++part.count;
        }
    }
    BatchResult out;
    out.gradients = Gradients(model);
    for (const auto& part : partial) {
        out.gradients.add_scaled(part.gradients, 1.0);
        out.sum_meta_loss += part.sum_meta_loss;
        out.sum_oracle_loss += part.sum_oracle_loss;
        out.count += part.count;
    }
    return out;
}

EvalSums eval_sums(const MlpModel& model, const Dataset& data, const LossKind& loss) {
    const std::size_t n = data.size();
    const std::size_t m = model.num_hypotheses();
    const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n, kSampleChunk));
    std::vector<EvalSums> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        auto& part = partial[static_cast<std::size_t>(c)];
        part.per_head.assign(m, 0.0);
        const std::size_t begin = static_cast<std::size_t>(c) * kSampleChunk;
        const std::size_t end = std::min(n, begin + kSampleChunk);
        for (std::size_t i = begin; i < end; ++i) accumulate_eval(model, data, loss, i, part);
    }
    EvalSums out;
    out.per_head.assign(m, 0.0);
    for (const auto& part : partial) {
        out.oracle_min += part.oracle_min;
        for (std::size_t j = 0; j < m; ++j) out.per_head[j] += part.per_head[j];
        out.count += part.count;
    }
    return out;
}

std::vector<HypothesisSet> forward_all(const MlpModel& model, const Dataset& data) {
    const auto n = static_cast<std::ptrdiff_t>(data.size());
    std::vector<HypothesisSet> out(data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = forward(model, data.input(static_cast<std::size_t>(i)));
    }
    return out;
}

namespace reference {

std::vector<std::size_t> assign_cells(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_generators(generators);
    std::vector<std::size_t> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out.push_back(nearest(generators, loss, samples[i]));
    return out;
}

double sum_min_loss(const PointSet& generators, const LossKind& loss, const PointSet& samples) {
    check_generators(generators);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double v = 0.0;
        nearest(generators, loss, samples[i], &v);
        total += v;
    }
    return total;
}

BatchResult batch_gradient(const MlpModel& model, const MetaLossConfig& config, const Dataset& data,
                           std::span<const std::size_t> indices, const std::vector<std::vector<bool>>& masks) {
    check_batch(data, indices, masks);
    BatchResult out;
    out.gradients = Gradients(model);
    const double scale = indices.empty() ? 0.0 : 1.0 / static_cast<double>(indices.size());
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto [meta, oracle] = accumulate_sample(model, config, data, indices[b], masks[b], scale, out.gradients);
        out.sum_meta_loss += meta;
        out.sum_oracle_loss += oracle;
        ++out.count;
    }
    return out;
}

EvalSums eval_sums(const MlpModel& model, const Dataset& data, const LossKind& loss) {
    EvalSums out;
    out.per_head.assign(model.num_hypotheses(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) accumulate_eval(model, data, loss, i, out);
    return out;
}

}  // namespace reference

}  // namespace mhp::kernels
