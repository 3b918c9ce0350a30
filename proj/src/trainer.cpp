#include "mhp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mhp/error.hpp"
#include "mhp/kernels.hpp"

namespace mhp {

DataSource fixed_data(Dataset data) {
    return [d = std::move(data)](std::size_t, Rng&) { return d; };
}

std::vector<EpochMetrics> train(MlpModel& model, const DataSource& data, const MetaLossConfig& config,
                                Optimizer& optimizer, const TrainSchedule& schedule, const EpochCallback& on_epoch) {
    config.validate();
    if (config.num_hypotheses != model.num_hypotheses()) throw ValidationError("train: config M differs from model M");
    if (schedule.batch_size == 0) throw ValidationError("train: batch_size must be positive");

    const Rng root(schedule.seed);
    std::vector<EpochMetrics> log;
    log.reserve(schedule.epochs);
    for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        Rng data_rng = root.derive(3 * epoch);
        Rng order_rng = root.derive(3 * epoch + 1);
        Rng dropout_rng = root.derive(3 * epoch + 2);

        const Dataset batch_data = data(epoch, data_rng);
        if (batch_data.empty()) throw ValidationError("train: empty dataset");
        if (batch_data.input_dim != model.input_dim()) throw ShapeError("train: dataset input_dim differs from model");
        if (!batch_data.classification() && batch_data.target_dim != model.output_dim()) {
            throw ShapeError("train: dataset target_dim differs from model output_dim");
        }
        if (batch_data.classification() && batch_data.num_classes != model.output_dim()) {
            throw ShapeError("train: class count differs from model output_dim");
        }

        std::vector<std::size_t> order(batch_data.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), order_rng.engine());

        double sum_meta = 0.0;
        double sum_oracle = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += schedule.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), begin + schedule.batch_size);
            std::span<const std::size_t> indices(order.data() + begin, end - begin);
            std::vector<std::vector<bool>> masks;
            masks.reserve(indices.size());
            for (std::size_t b = 0; b < indices.size(); ++b) masks.push_back(sample_dropout_mask(config, dropout_rng));

            auto result = kernels::batch_gradient(model, config, batch_data, indices, masks);
            if (!std::isfinite(result.sum_meta_loss)) {
                throw DivergenceError("non-finite meta-loss at epoch " + std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_index),
                                      DivergenceError::npos, epoch, batch_index);
            }
            try {
                optimizer.step(model, result.gradients);
            } catch (const DivergenceError& e) {
                throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_index),
                                      e.layer(), epoch, batch_index);
            }
            sum_meta += result.sum_meta_loss;
            sum_oracle += result.sum_oracle_loss;
        }

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.mean_meta_loss = sum_meta / static_cast<double>(order.size());
        metrics.oracle_min_loss = sum_oracle / static_cast<double>(order.size());
        metrics.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        log.push_back(metrics);
        if (on_epoch) on_epoch(metrics);
    }
    return log;
}

}  // namespace mhp
