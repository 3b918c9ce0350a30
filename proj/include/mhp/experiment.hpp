#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhp/datagen.hpp"
#include "mhp/io.hpp"
#include "mhp/meta_loss.hpp"
#include "mhp/network.hpp"
#include "mhp/trainer.hpp"

namespace mhp {

using json = nlohmann::json;

/// Training run description; the JSON form is the `train --config` file:
///   {M, epsilon, dropout_prob, base_loss, epochs, batch_size, learning_rate,
///    momentum | decay, optimizer, seed, hidden, dataset}
/// `dataset` is a task spec, see make_task().
struct TrainConfig {
    std::size_t num_hypotheses = 1;
    double epsilon = 0.05;
    double dropout_prob = 0.01;
    LossKind base_loss = LossKind::l2();
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    OptimizerConfig optimizer{OptimizerKind::SGDMomentum, 0.01, 0.9};
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{50, 50};
    json dataset = {{"task", "temporal2d"}, {"n", 10000}};

    static TrainConfig from_json(const json& doc);
    json to_json() const;
    MetaLossConfig meta_loss() const;
};

/// Training data plus the shapes a model needs to consume it.
struct Task {
    std::string name;
    DataSource source;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    bool classification = false;
    json spec;
};

/// Task specs:
///   {"task": "temporal2d", "n"}                          t ~ U[0,1], fresh every epoch
///   {"task": "gridframe", "n", "width", "height", "start", "terminals", "probabilities"}
///   {"task": "multilabel", "n", "num_classes", "copies", "noise", "spec_seed", "label_sets"}
///   {"task": "gmm", "n", "means", "covariances", "weights"}
///   {"path": "<dir or data.csv>"}                        fixed dataset from disk
Task make_task(const json& spec);

/// Shared by `gen` and tasks: one dataset draw of `n` samples from a spec.
Dataset generate_dataset(const json& spec, std::size_t n, Rng& rng);

datagen::GridFrameSpec grid_spec_from_json(const json& spec);
json grid_spec_to_json(const datagen::GridFrameSpec& spec);
datagen::MultiLabelSpec multilabel_spec_from_json(const json& spec);

struct TrainedRun {
    io::Checkpoint checkpoint;
    std::vector<EpochMetrics> log;
};

/// Builds the model from the config and task, trains it, and packages a checkpoint.
TrainedRun run_training(const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace mhp
