#include "mhp/experiment.hpp"

#include "mhp/error.hpp"

namespace mhp {

namespace {

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key) || doc[key].is_null()) return fallback;
    try {
        return doc[key].get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field '") + key + "': " + e.what());
    }
}

constexpr std::uint64_t kInitStream = 0xFFFF'FFFF'0000'0001ULL;

}  // namespace

TrainConfig TrainConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
    TrainConfig c;
    c.num_hypotheses = get_or<std::size_t>(doc, "M", c.num_hypotheses);
    c.epsilon = get_or<double>(doc, "epsilon", c.epsilon);
    c.dropout_prob = get_or<double>(doc, "dropout_prob", c.dropout_prob);
    c.base_loss = parse_loss_kind(get_or<std::string>(doc, "base_loss", "l2"));
    c.epochs = get_or<std::size_t>(doc, "epochs", c.epochs);
    c.batch_size = get_or<std::size_t>(doc, "batch_size", c.batch_size);
    c.optimizer.kind = optimizer_kind_from_string(get_or<std::string>(doc, "optimizer", "sgd_momentum"));
    c.optimizer.learning_rate = get_or<double>(doc, "learning_rate", c.optimizer.learning_rate);
    if (doc.contains("momentum") && doc.contains("decay")) {
        throw ValidationError("config: give either 'momentum' or 'decay', not both");
    }
    c.optimizer.momentum = get_or<double>(doc, "momentum", get_or<double>(doc, "decay", c.optimizer.momentum));
    c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
    c.hidden = get_or<std::vector<std::size_t>>(doc, "hidden", c.hidden);
    if (doc.contains("dataset")) c.dataset = doc["dataset"];
    if (c.epochs == 0) throw ValidationError("config: epochs must be positive");
    if (c.batch_size == 0) throw ValidationError("config: batch_size must be positive");
    c.meta_loss().validate();
    return c;
}

json TrainConfig::to_json() const {
    json doc = {{"M", num_hypotheses},
                {"epsilon", epsilon},
                {"dropout_prob", dropout_prob},
                {"base_loss", to_string(base_loss)},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"optimizer", to_string(optimizer.kind)},
                {"learning_rate", optimizer.learning_rate},
                {"seed", seed},
                {"hidden", hidden},
                {"dataset", dataset}};
    doc[optimizer.kind == OptimizerKind::RMSProp ? "decay" : "momentum"] = optimizer.momentum;
    return doc;
}

MetaLossConfig TrainConfig::meta_loss() const { return {num_hypotheses, epsilon, dropout_prob, base_loss}; }

datagen::GridFrameSpec grid_spec_from_json(const json& spec) {
    datagen::GridFrameSpec g;
    g.width = get_or<std::size_t>(spec, "width", g.width);
    g.height = get_or<std::size_t>(spec, "height", g.height);
    if (spec.contains("start")) {
        const auto s = spec["start"].get<std::vector<std::size_t>>();
        if (s.size() != 2) throw ValidationError("gridframe: start must be [x, y]");
        g.start = {s[0], s[1]};
    }
    if (spec.contains("terminals")) {
        g.terminals.clear();
        for (const auto& t : spec["terminals"]) {
            const auto p = t.get<std::vector<std::size_t>>();
            if (p.size() != 2) throw ValidationError("gridframe: terminals must be [x, y] pairs");
            g.terminals.push_back({p[0], p[1]});
        }
        g.probabilities.assign(g.terminals.size(), 1.0 / static_cast<double>(g.terminals.size()));
    }
    if (spec.contains("probabilities")) g.probabilities = spec["probabilities"].get<std::vector<double>>();
    g.validate();
    return g;
}

json grid_spec_to_json(const datagen::GridFrameSpec& g) {
    json terminals = json::array();
    for (const auto& p : g.terminals) terminals.push_back({p.x, p.y});
    return {{"task", "gridframe"},
            {"width", g.width},
            {"height", g.height},
            {"channels", g.channels},
            {"start", {g.start.x, g.start.y}},
            {"terminals", terminals},
            {"probabilities", g.probabilities}};
}

datagen::MultiLabelSpec multilabel_spec_from_json(const json& spec) {
    const auto classes = get_or<std::size_t>(spec, "num_classes", 6);
    auto sets = spec.contains("label_sets") ? spec["label_sets"].get<std::vector<std::vector<std::size_t>>>()
                                            : datagen::non_opposite_pairs(classes);
    Rng rng(get_or<std::uint64_t>(spec, "spec_seed", 1));
    return datagen::make_multilabel_spec(classes, sets, get_or<std::size_t>(spec, "copies", 10), rng,
                                         get_or<double>(spec, "noise", 0.1));
}

Dataset generate_dataset(const json& spec, std::size_t n, Rng& rng) {
    const auto task = get_or<std::string>(spec, "task", "");
    if (task == "temporal2d") {
        if (spec.contains("t") && !spec["t"].is_null()) return datagen::sample_temporal2d(spec["t"].get<double>(), n, rng);
        return datagen::sample_temporal2d_mixed(n, rng);
    }
    if (task == "gridframe") return datagen::sample_gridframe(grid_spec_from_json(spec), n, rng);
    if (task == "multilabel") return datagen::sample_multilabel(multilabel_spec_from_json(spec), n, rng);
    if (task == "gmm") {
        const auto means = get_or<std::vector<std::vector<double>>>(spec, "means", {{-2.0}, {2.0}});
        const auto covs = get_or<std::vector<std::vector<double>>>(spec, "covariances", {{0.25}, {0.25}});
        const auto weights = get_or<std::vector<double>>(spec, "weights", {0.5, 0.5});
        return datagen::gaussian_mixture_dataset(datagen::sample_gaussian_mixture(means, covs, weights, n, rng));
    }
    throw ValidationError("unknown task '" + task + "'");
}

Task make_task(const json& spec) {
    if (!spec.is_object()) throw ValidationError("dataset spec must be a JSON object");
    Task task;
    task.spec = spec;
    if (spec.contains("path")) {
        auto loaded = io::read_dataset(spec["path"].get<std::string>());
        auto data = std::move(loaded.data);
        task.name = loaded.sidecar.value("task", std::string("file"));
        task.input_dim = data.input_dim;
        task.output_dim = data.classification() ? data.num_classes : data.target_dim;
        task.classification = data.classification();
        task.source = fixed_data(std::move(data));
        return task;
    }
    task.name = get_or<std::string>(spec, "task", "");
    const auto n = get_or<std::size_t>(spec, "n", 10000);
    if (n == 0) throw ValidationError("dataset: n must be positive");
    Rng probe(0);
    const Dataset shape = generate_dataset(spec, 1, probe);
    task.input_dim = shape.input_dim;
    task.output_dim = shape.classification() ? shape.num_classes : shape.target_dim;
    task.classification = shape.classification();
    task.source = [spec, n](std::size_t, Rng& rng) { return generate_dataset(spec, n, rng); };
    return task;
}

TrainedRun run_training(const TrainConfig& config, const EpochCallback& on_epoch) {
    const auto meta = config.meta_loss();
    meta.validate();
    const Task task = make_task(config.dataset);
    if (task.classification != config.base_loss.is_classification()) {
        throw ValidationError("config: base_loss does not match the dataset's target type");
    }
    Rng init = Rng(config.seed).derive(kInitStream);
    TrainedRun run;
    run.checkpoint.model =
        MlpModel::create(task.input_dim, config.hidden, task.output_dim, config.num_hypotheses, init);
    Optimizer optimizer(config.optimizer, run.checkpoint.model);
    TrainSchedule schedule{config.epochs, config.batch_size, config.seed};
    run.log = train(run.checkpoint.model, task.source, meta, optimizer, schedule, on_epoch);
    run.checkpoint.optimizer = std::move(optimizer);
    run.checkpoint.seed = config.seed;
    run.checkpoint.base_loss = config.base_loss;
    run.checkpoint.extra = {{"config", config.to_json()}, {"task", task.name}};
    return run;
}

}  // namespace mhp
