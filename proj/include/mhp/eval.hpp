#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mhp/dataset.hpp"
#include "mhp/hypotheses.hpp"
#include "mhp/losses.hpp"
#include "mhp/network.hpp"

namespace mhp::eval {

/// Mean over samples of the best hypothesis' loss.
double oracle_min_loss(const MlpModel& model, const Dataset& data, const LossKind& loss);

/// Mean loss of a single head.
double head_loss(const MlpModel& model, const Dataset& data, const LossKind& loss, std::size_t head = 0);

/// (1/M) sum_j |f^j - mean|_2. Requires M >= 2.
double hypothesis_variance(const HypothesisSet& hypotheses);

/// Per-coordinate variance across hypotheses, (1/M) sum_j (f^j_p - mean_p)^2.
std::vector<double> variance_map(const HypothesisSet& hypotheses);

/// Per-coordinate variance of the hypotheses around their mean, averaged over a dataset.
std::vector<double> mean_variance_map(const MlpModel& model, const Dataset& data);

/// Dataset average of hypothesis_variance.
double mean_hypothesis_variance(const MlpModel& model, const Dataset& data);

/// Mean squared forward-difference gradient of grid-shaped hypotheses:
///   1/(C W H M) sum_{c,p,j} |G^j_c(p)|^2
/// The difference along an axis is zero on the last row/column.
double sharpness(const HypothesisSet& hypotheses, std::size_t width, std::size_t height, std::size_t channels = 1);

double mean_sharpness(const MlpModel& model, const Dataset& data, std::size_t width, std::size_t height,
                      std::size_t channels = 1);

struct MultiLabelScores {
    double recall_at_m = 0.0;
    double precision = 0.0;
};

/// Predicted set = deduplicated per-hypothesis argmax classes.
std::vector<std::size_t> predicted_labels(const HypothesisSet& logits);

MultiLabelScores multilabel_scores(const MlpModel& model, const Dataset& data);

struct MetricsReport {
    std::optional<double> oracle_min_loss;
    std::optional<double> shp_baseline_loss;
    std::optional<std::vector<double>> per_hypothesis_variance;
    std::optional<double> mean_hypothesis_variance;
    std::optional<double> sharpness;
    std::optional<double> label_recall_at_m;
    std::optional<double> label_precision;
};

}  // namespace mhp::eval
