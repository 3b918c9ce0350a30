#pragma once

#include <cstddef>
#include <vector>

#include "mhp/hypotheses.hpp"
#include "mhp/losses.hpp"
#include "mhp/rng.hpp"

namespace mhp {

struct MetaLossConfig {
    std::size_t num_hypotheses = 1;
    double epsilon = 0.05;
    double dropout_prob = 0.01;
    LossKind base_loss = LossKind::l2();

    /// Requires M >= 1, 0 < epsilon < 1 when M >= 2, dropout in [0, 1).
    void validate() const;
};

struct AssignmentResult {
    std::size_t best_index = 0;
    std::vector<double> weights;
    std::vector<double> per_hypothesis_losses;
    std::vector<bool> dropped_mask;
};

/// Drops each hypothesis independently with `dropout_prob`; if every
/// hypothesis would drop, none does. Always all-active when M == 1.
std::vector<bool> sample_dropout_mask(const MetaLossConfig& config, Rng& rng);

/// Relaxed winner-takes-all assignment. Among active hypotheses the one with
/// the lowest loss (lowest index on ties) gets 1 - epsilon, the other A - 1
/// active ones share epsilon equally, dropped ones get 0. A single active
/// hypothesis gets weight 1.
AssignmentResult assign(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target,
                        const std::vector<bool>& dropped_mask);
AssignmentResult assign(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target, Rng& rng);

/// sum_j weights[j] * L(f^j, y)
double meta_loss(const MetaLossConfig& config, const HypothesisSet& hypotheses, const Target& target,
                 const AssignmentResult& assignment);

/// weights[j] * dL/df^j for every hypothesis.
HypothesisSet meta_loss_upstream_grads(const MetaLossConfig& config, const HypothesisSet& hypotheses,
                                       const Target& target, const AssignmentResult& assignment);

}  // namespace mhp
