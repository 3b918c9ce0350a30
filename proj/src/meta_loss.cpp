#include "mhp/meta_loss.hpp"

#include <algorithm>
#include <cmath>

#include "mhp/error.hpp"

namespace mhp {

void MetaLossConfig::validate() const {
    if (num_hypotheses == 0) throw ValidationError("meta-loss: M must be at least 1");
    if (num_hypotheses >= 2 && !(epsilon > 0.0 && epsilon < 1.0)) {
        throw ValidationError("meta-loss: epsilon must lie in (0, 1) when M >= 2");
    }
    if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) throw ValidationError("meta-loss: dropout_prob must lie in [0, 1)");
    if (base_loss.type == LossType::TukeyBiweight && !(base_loss.tukey_c > 0.0)) {
        throw ValidationError("meta-loss: Tukey constant must be positive");
    }
}

std::vector<bool> sample_dropout_mask(const MetaLossConfig& config, Rng& rng) {
    const std::size_t m = config.num_hypotheses;
    std::vector<bool> mask(m, false);
    if (m < 2 || config.dropout_prob <= 0.0) return mask;
    std::size_t dropped = 0;
    for (std::size_t j = 0; j < m; ++j) {
        mask[j] = rng.bernoulli(config.dropout_prob);
        dropped += mask[j] ? 1 : 0;
    }
    if (dropped == m) std::fill(mask.begin(), mask.end(), false);
    return mask;
}

AssignmentResult assign(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target,
                        const std::vector<bool>& dropped_mask) {
    const std::size_t m = hypotheses.size();
    if (m != config.num_hypotheses) throw ShapeError("assign: hypothesis count does not match config M");
    if (dropped_mask.size() != m) throw ShapeError("assign: dropout mask size mismatch");

    AssignmentResult result;
    result.dropped_mask = dropped_mask;
    if (std::all_of(dropped_mask.begin(), dropped_mask.end(), [](bool d) { return d; })) {
        std::fill(result.dropped_mask.begin(), result.dropped_mask.end(), false);
    }
    result.per_hypothesis_losses.resize(m);
    for (std::size_t j = 0; j < m; ++j) result.per_hypothesis_losses[j] = loss(config.base_loss, hypotheses[j], target);

    std::size_t active = 0;
    bool found = false;
    for (std::size_t j = 0; j < m; ++j) {
        if (result.dropped_mask[j]) continue;
        ++active;
        if (!found || result.per_hypothesis_losses[j] < result.per_hypothesis_losses[result.best_index]) {
            result.best_index = j;
            found = true;
        }
    }

    result.weights.assign(m, 0.0);
    if (active == 1) {
        result.weights[result.best_index] = 1.0;
        return result;
    }
    const double share = config.epsilon / static_cast<double>(active - 1);
    for (std::size_t j = 0; j < m; ++j) {
        if (!result.dropped_mask[j]) result.weights[j] = share;
    }
    result.weights[result.best_index] = 1.0 - config.epsilon;
    return result;
}

AssignmentResult assign(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target, Rng& rng) {
    return assign(config, hypotheses, target, sample_dropout_mask(config, rng));
}

double meta_loss(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target,
                 const AssignmentResult& assignment) {
    if (assignment.weights.size() != hypotheses.size()) throw ShapeError("meta_loss: assignment size mismatch");
    if (hypotheses.size() == 1) return loss(config.base_loss, hypotheses[0], target);
    double total = 0.0;
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        if (assignment.weights[j] == 0.0) continue;
        total += assignment.weights[j] * loss(config.base_loss, hypotheses[j], target);
    }
    return total;
}

HypothesisSet meta_loss_upstream_grads(const MetaLossConfig& config, const HypothesisSet& hypotheses,
                                       const Target& target, const AssignmentResult& assignment) {
    if (assignment.weights.size() != hypotheses.size()) throw ShapeError("meta_loss_upstream_grads: assignment size mismatch");
    HypothesisSet grads(hypotheses.size(), hypotheses.dim());
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
        const double w = assignment.weights[j];
        if (w == 0.0) continue;
        auto g = grads[j];
        loss_grad(config.base_loss, hypotheses[j], target, g);
        if (w != 1.0) {
            for (auto& v : g) v *= w;
        }
    }
    return grads;
}

}  // namespace mhp
