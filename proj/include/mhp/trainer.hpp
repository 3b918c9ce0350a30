#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mhp/dataset.hpp"
#include "mhp/meta_loss.hpp"
#include "mhp/network.hpp"
#include "mhp/rng.hpp"

namespace mhp {

struct TrainSchedule {
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double mean_meta_loss = 0.0;
    double oracle_min_loss = 0.0;
    double wall_ms = 0.0;
};

/// Produces the training set of one epoch. A fixed dataset ignores both
/// arguments; a sampler draws fresh data from `rng`.
using DataSource = std::function<Dataset(std::size_t epoch, Rng& rng)>;

DataSource fixed_data(Dataset data);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Minibatch training on the relaxed winner-takes-all meta-loss:
///   forward -> assign (with hypothesis dropout) -> weighted loss gradients
///   -> backward -> optimizer step.
/// Batch loss is the mean of per-sample meta-losses. Data order, dropout masks
/// and sampled data are drawn from streams derived from `schedule.seed`, so a
/// run is reproducible bit-for-bit. Throws DivergenceError (with epoch and
/// batch index) on a non-finite loss or gradient.
std::vector<EpochMetrics> train(MlpModel& model, const DataSource& data, const MetaLossConfig& config,
                                Optimizer& optimizer, const TrainSchedule& schedule,
                                const EpochCallback& on_epoch = {});

}  // namespace mhp
