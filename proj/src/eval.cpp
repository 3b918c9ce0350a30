#include "mhp/eval.hpp"

#include <algorithm>
#include <cmath>

#include "mhp/error.hpp"
#include "mhp/kernels.hpp"

namespace mhp::eval {

namespace {

void check_data(const MlpModel& model, const Dataset& data) {
    if (data.empty()) throw ValidationError("eval: empty dataset");
    if (data.input_dim != model.input_dim()) throw ShapeError("eval: dataset input_dim differs from model");
}

}  // namespace

double oracle_min_loss(const MlpModel& model, const Dataset& data, const LossKind& loss) {
    check_data(model, data);
    const auto sums = kernels::eval_sums(model, data, loss);
    return sums.oracle_min / static_cast<double>(sums.count);
}

double head_loss(const MlpModel& model, const Dataset& data, const LossKind& loss, std::size_t head) {
    check_data(model, data);
    if (head >= model.num_hypotheses()) throw ValidationError("eval: head index out of range");
    const auto sums = kernels::eval_sums(model, data, loss);
    return sums.per_head[head] / static_cast<double>(sums.count);
}

namespace {

std::vector<double> hypothesis_mean(const HypothesisSet& h) {
    std::vector<double> mean(h.dim(), 0.0);
    for (std::size_t j = 0; j < h.size(); ++j) {
        for (std::size_t k = 0; k < h.dim(); ++k) mean[k] += h[j][k];
    }
    for (auto& v : mean) v /= static_cast<double>(h.size());
    return mean;
}

}  // namespace

double hypothesis_variance(const HypothesisSet& hypotheses) {
    if (hypotheses.size() < 2) throw ValidationError("hypothesis_variance: needs at least two hypotheses");
    const auto mean = hypothesis_mean(hypotheses);
    double total = 0.0;
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < hypotheses.dim(); ++k) s += (hypotheses[j][k] - mean[k]) * (hypotheses[j][k] - mean[k]);
        total += std::sqrt(s);
    }
    return total / static_cast<double>(hypotheses.size());
}

std::vector<double> variance_map(const HypothesisSet& hypotheses) {
    if (hypotheses.size() < 2) throw ValidationError("variance_map: needs at least two hypotheses");
    const auto mean = hypothesis_mean(hypotheses);
    std::vector<double> out(hypotheses.dim(), 0.0);
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        for (std::size_t k = 0; k < hypotheses.dim(); ++k) out[k] += (hypotheses[j][k] - mean[k]) * (hypotheses[j][k] - mean[k]);
    }
    for (auto& v : out) v /= static_cast<double>(hypotheses.size());
    return out;
}

std::vector<double> mean_variance_map(const MlpModel& model, const Dataset& data) {
    check_data(model, data);
    std::vector<double> out(model.output_dim(), 0.0);
    for (const auto& h : kernels::forward_all(model, data)) {
        const auto map = variance_map(h);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += map[k];
    }
    for (auto& v : out) v /= static_cast<double>(data.size());
    return out;
}

double mean_hypothesis_variance(const MlpModel& model, const Dataset& data) {
    check_data(model, data);
    double total = 0.0;
    for (const auto& h : kernels::forward_all(model, data)) total += hypothesis_variance(h);
    return total / static_cast<double>(data.size());
}

double sharpness(const HypothesisSet& hypotheses, std::size_t width, std::size_t height, std::size_t channels) {
    if (width == 0 || height == 0 || channels == 0 || hypotheses.dim() != width * height * channels) {
        throw ShapeError("sharpness: hypotheses are not W x H x C images");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        const auto img = hypotheses[j];
        for (std::size_t c = 0; c < channels; ++c) {
            const double* plane = img.data() + c * width * height;
            for (std::size_t y = 0; y < height; ++y) {
                for (std::size_t x = 0; x < width; ++x) {
                    const double v = plane[y * width + x];
                    const double gx = x + 1 < width ? plane[y * width + x + 1] - v : 0.0;
                    const double gy = y + 1 < height ? plane[(y + 1) * width + x] - v : 0.0;
                    total += gx * gx + gy * gy;
                }
            }
        }
    }
    return total / static_cast<double>(channels * width * height * hypotheses.size());
}

double mean_sharpness(const MlpModel& model, const Dataset& data, std::size_t width, std::size_t height,
                      std::size_t channels) {
    check_data(model, data);
    double total = 0.0;
    for (const auto& h : kernels::forward_all(model, data)) total += sharpness(h, width, height, channels);
    return total / static_cast<double>(data.size());
}

std::vector<std::size_t> predicted_labels(const HypothesisSet& logits) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        const auto row = logits[j];
        out.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MultiLabelScores multilabel_scores(const MlpModel& model, const Dataset& data) {
    check_data(model, data);
    if (data.label_sets.size() != data.size()) throw ValidationError("multilabel_scores: dataset lacks true label sets");
    MultiLabelScores scores;
    const auto all = kernels::forward_all(model, data);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto predicted = predicted_labels(all[i]);
        const auto& truth = data.label_sets[i];
        std::size_t hits = 0;
        for (auto c : truth) hits += std::binary_search(predicted.begin(), predicted.end(), c) ? 1 : 0;
        std::size_t correct = 0;
        for (auto c : predicted) correct += std::find(truth.begin(), truth.end(), c) != truth.end() ? 1 : 0;
        scores.recall_at_m += static_cast<double>(hits) / static_cast<double>(truth.size());
        scores.precision += static_cast<double>(correct) / static_cast<double>(predicted.size());
    }
    scores.recall_at_m /= static_cast<double>(data.size());
    scores.precision /= static_cast<double>(data.size());
    return scores;
}

}  // namespace mhp::eval
