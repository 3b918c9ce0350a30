#pragma once

// Data-parallel hot loops. Each kernel has an OpenMP implementation and a
// serial reference in `kernels::reference` that the tests compare against.
// Parallel reductions go through fixed-size chunks summed in chunk order, so
// results do not depend on the number of threads.

#include <cstddef>
#include <span>
#include <vector>

#include "mhp/dataset.hpp"
#include "mhp/losses.hpp"
#include "mhp/meta_loss.hpp"
#include "mhp/network.hpp"

namespace mhp::kernels {

inline constexpr std::size_t kSampleChunk = 1024;
inline constexpr std::size_t kGradientChunk = 8;

/// Loss target for a stored sample point. Cross-entropy samples are
/// 1-dimensional points holding the class index.
Target point_target(const LossKind& loss, std::span<const double> sample);

/// Index of the minimising generator for one sample, lowest index on ties.
std::size_t nearest(const PointSet& generators, const LossKind& loss, std::span<const double> sample, double* best_loss = nullptr);

struct BatchResult {
    Gradients gradients;  // mean over the batch
    double sum_meta_loss = 0.0;
    double sum_oracle_loss = 0.0;
    std::size_t count = 0;
};

/// Per-sample sums over a dataset: oracle-min loss, and the loss of every
/// head individually.
struct EvalSums {
    double oracle_min = 0.0;
    std::vector<double> per_head;
    std::size_t count = 0;
};

std::vector<std::size_t> assign_cells(const PointSet& generators, const LossKind& loss, const PointSet& samples);
double sum_min_loss(const PointSet& generators, const LossKind& loss, const PointSet& samples);

/// Mean meta-loss gradient over `indices`; masks[i] is the dropout mask of
/// indices[i].
BatchResult batch_gradient(const MlpModel& model, const MetaLossConfig& config, const Dataset& data,
                           std::span<const std::size_t> indices, const std::vector<std::vector<bool>>& masks);

EvalSums eval_sums(const MlpModel& model, const Dataset& data, const LossKind& loss);

/// All forward passes of a dataset, in sample order.
std::vector<HypothesisSet> forward_all(const MlpModel& model, const Dataset& data);

namespace reference {

std::vector<std::size_t> assign_cells(const PointSet& generators, const LossKind& loss, const PointSet& samples);
double sum_min_loss(const PointSet& generators, const LossKind& loss, const PointSet& samples);
BatchResult batch_gradient(const MlpModel& model, const MetaLossConfig& config, const Dataset& data,
                           std::span<const std::size_t> indices, const std::vector<std::vector<bool>>& masks);
EvalSums eval_sums(const MlpModel& model, const Dataset& data, const LossKind& loss);

}  // namespace reference

}  // namespace mhp::kernels
