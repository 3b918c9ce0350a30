// mhp: generate data, train multiple-hypothesis models, evaluate them, and
// export Voronoi tessellations.
//
// Exit codes: 0 success, 2 usage/validation, 3 IO, 4 numerical divergence.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhp/datagen.hpp"
#include "mhp/error.hpp"
#include "mhp/eval.hpp"
#include "mhp/experiment.hpp"
#include "mhp/io.hpp"
#include "mhp/kernels.hpp"
#include "mhp/voronoi.hpp"

#ifndef MHP_VERSION
#define MHP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiverged = 4;

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Manifest {
public:
    Manifest(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)), started_(utc_now()) {}

    void set_config(json config) { config_ = std::move(config); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void add_output(const fs::path& p) { outputs_.push_back(fs::relative(p, out_).generic_string()); }

    void write() const {
        for (const auto& o : outputs_) {
            if (!fs::exists(out_ / o)) throw mhp::IoError("manifest lists missing output " + o);
        }
        json doc = {{"command", command_}, {"config", config_},     {"seed", seed_},
                    {"version", MHP_VERSION}, {"started_at", started_}, {"finished_at", utc_now()},
                    {"outputs", outputs_}};
        mhp::io::write_text_atomic(out_ / "manifest.json", doc.dump(1) + "\n");
    }

private:
    std::string command_;
    fs::path out_;
    std::string started_;
    json config_ = json::object();
    std::uint64_t seed_ = 0;
    std::vector<std::string> outputs_;
};

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* env = std::getenv("MHP_SEED");
    if (!env || !*env) return fallback;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw mhp::ValidationError(std::string("MHP_SEED is not an unsigned integer: ") + env);
    }
}

json parse_spec_arg(const std::string& text) {
    if (text.empty()) return json::object();
    if (fs::exists(text)) return mhp::io::read_json(text);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw mhp::ValidationError(std::string("--spec is neither a file nor valid JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string task;
    long long n = -1;
    std::uint64_t seed = 0;
    std::string out;
    std::string spec;
    double t = -1.0;
};

int cmd_gen(const GenArgs& a) {
    if (a.n <= 0) throw mhp::ValidationError("--n must be positive");
    json spec = parse_spec_arg(a.spec);
    spec["task"] = a.task;
    if (a.t >= 0.0) {
        if (a.task != "temporal2d") throw mhp::ValidationError("--t applies to temporal2d only");
        spec["t"] = a.t;
    }
    spec["n"] = a.n;
    const std::uint64_t seed = seed_from_env(a.seed);
    mhp::Rng rng(seed);
    const auto data = mhp::generate_dataset(spec, static_cast<std::size_t>(a.n), rng);

    const fs::path out(a.out);
    Manifest manifest("gen", out);
    manifest.set_config(spec);
    manifest.set_seed(seed);
    mhp::io::write_dataset(out, data, a.task, spec, seed);
    manifest.add_output(out / "data.csv");
    manifest.add_output(out / "data.json");
    manifest.write();
    std::cerr << "gen: task=" << a.task << " n=" << a.n << " seed=" << seed << " -> " << (out / "data.csv").string()
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string out;
    std::string data;
    bool record_timing = false;
};

int cmd_train(const TrainArgs& a) {
    auto config = mhp::TrainConfig::from_json(mhp::io::read_json(a.config));
    if (!a.data.empty()) config.dataset = {{"path", fs::absolute(a.data).string()}};
    config.seed = seed_from_env(config.seed);

    const fs::path out(a.out);
    fs::create_directories(out);
    Manifest manifest("train", out);
    manifest.set_config(config.to_json());
    manifest.set_seed(config.seed);
    std::cerr << "train: M=" << config.num_hypotheses << " loss=" << mhp::to_string(config.base_loss)
              << " seed=" << config.seed << "\n";

    std::string log;
    auto run = mhp::run_training(config, [&](const mhp::EpochMetrics& m) {
        log += mhp::io::metrics_line(m, a.record_timing) + "\n";
    });

    mhp::io::write_text_atomic(out / "config.json", config.to_json().dump(1) + "\n");
    mhp::io::write_text_atomic(out / "metrics.jsonl", log);
    mhp::io::save_checkpoint(out / "checkpoint.json", run.checkpoint);
    for (const char* f : {"config.json", "metrics.jsonl", "checkpoint.json"}) manifest.add_output(out / f);
    manifest.write();
    const auto& last = run.log.back();
    std::cerr << "train: final mean_meta_loss=" << last.mean_meta_loss << " oracle_min_loss=" << last.oracle_min_loss
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string metrics = "oracle_min";
    std::string baseline;
    std::string out;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_eval(const EvalArgs& a) {
    const auto cp = mhp::io::load_checkpoint(a.checkpoint);
    const auto loaded = mhp::io::read_dataset(a.data);
    const auto& model = cp.model;
    const auto& data = loaded.data;
    const auto metrics = split_list(a.metrics);
    if (metrics.empty()) throw mhp::ValidationError("--metrics is empty");

    const bool grid = loaded.sidecar.value("task", std::string()) == "gridframe";
    std::size_t width = 0, height = 0;
    if (grid) {
        const auto spec = mhp::grid_spec_from_json(loaded.sidecar.at("spec"));
        width = spec.width;
        height = spec.height;
    }

    json report = json::object();
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> tables;
    for (const auto& metric : metrics) {
        if (metric == "oracle_min") {
            report["oracle_min_loss"] = mhp::eval::oracle_min_loss(model, data, cp.base_loss);
        } else if (metric == "shp_baseline") {
            if (a.baseline.empty()) throw mhp::ValidationError("shp_baseline needs --baseline <checkpoint>");
            const auto base = mhp::io::load_checkpoint(a.baseline);
            report["shp_baseline_loss"] = mhp::eval::oracle_min_loss(base.model, data, cp.base_loss);
        } else if (metric == "hypothesis_variance") {
            if (model.num_hypotheses() < 2) throw mhp::ValidationError("hypothesis_variance needs M >= 2");
            const auto map = mhp::eval::mean_variance_map(model, data);
            report["per_hypothesis_variance"] = map;
            report["mean_hypothesis_variance"] = mhp::eval::mean_hypothesis_variance(model, data);
            if (grid) {
                std::vector<std::vector<double>> rows(height, std::vector<double>(width));
                for (std::size_t y = 0; y < height; ++y) {
                    for (std::size_t x = 0; x < width; ++x) rows[y][x] = map[y * width + x];
                }
                tables.emplace_back("variance_map.csv", std::move(rows));
            }
        } else if (metric == "sharpness") {
            if (!grid || model.output_dim() != width * height) {
                throw mhp::ValidationError("sharpness requires a grid-frame model and dataset");
            }
            report["sharpness"] = mhp::eval::mean_sharpness(model, data, width, height);
            const auto h = mhp::forward(model, data.input(0));
            std::vector<std::vector<double>> rows;
            for (std::size_t j = 0; j < h.size(); ++j) rows.emplace_back(h[j].begin(), h[j].end());
            tables.emplace_back("hypotheses.csv", std::move(rows));
        } else if (metric == "multilabel") {
            if (!data.classification()) throw mhp::ValidationError("multilabel scores need a classification dataset");
            const auto s = mhp::eval::multilabel_scores(model, data);
            report["label_recall_at_M"] = s.recall_at_m;
            report["label_precision"] = s.precision;
        } else {
            throw mhp::ValidationError("unknown metric '" + metric + "'");
        }
    }

    if (!a.out.empty()) {
        const fs::path out(a.out);
        Manifest manifest("eval", out);
        manifest.set_config({{"checkpoint", a.checkpoint}, {"data", a.data}, {"metrics", metrics}});
        manifest.set_seed(cp.seed);
        mhp::io::write_text_atomic(out / "metrics.json", report.dump(1) + "\n");
        manifest.add_output(out / "metrics.json");
        for (const auto& [name, rows] : tables) {
            mhp::io::write_csv_matrix(out / name, {}, rows);
            manifest.add_output(out / name);
        }
        manifest.write();
    }
    std::cout << report.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct LloydArgs {
    std::string data;
    long long m = 0;
    std::size_t restarts = 5;
    double tol = 1e-6;
    std::size_t max_iters = 500;
    std::uint64_t seed = 0;
    std::string out;
};

json points_json(const mhp::PointSet& p) {
    json out = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(std::vector<double>(p[i].begin(), p[i].end()));
    return out;
}

mhp::PointSet points_from_json(const json& arr) {
    mhp::PointSet p;
    for (const auto& row : arr) p.push_back(row.get<std::vector<double>>());
    if (p.empty()) throw mhp::ValidationError("no generators");
    return p;
}

int cmd_lloyd(const LloydArgs& a) {
    if (a.m <= 0) throw mhp::ValidationError("--m must be positive");
    if (a.restarts == 0) throw mhp::ValidationError("--restarts must be positive");
    const auto loaded = mhp::io::read_dataset(a.data);
    if (loaded.data.classification()) throw mhp::ValidationError("lloyd needs regression targets");
    const auto samples = loaded.data.target_points();
    const std::uint64_t seed = seed_from_env(a.seed);
    mhp::Rng rng(seed);
    const auto result = mhp::voronoi::lloyd_restarts(samples, static_cast<std::size_t>(a.m), a.restarts, rng,
                                                     {a.max_iters, a.tol});
    for (const auto& e : result.reseeds) {
        std::cerr << "lloyd: empty cell " << e.cell << " reseeded at iteration " << e.iteration << "\n";
    }

    json reseeds = json::array();
    for (const auto& e : result.reseeds) reseeds.push_back({{"iteration", e.iteration}, {"cell", e.cell}});
    json doc = {{"generators", points_json(result.generators)},
                {"quantization_error", result.quantization_error},
                {"iterations", result.iterations},
                {"converged", result.converged},
                {"residual", result.residual},
                {"reseeds", reseeds},
                {"m", a.m},
                {"restarts", a.restarts},
                {"tol", a.tol},
                {"seed", seed}};
    const fs::path out(a.out);
    Manifest manifest("lloyd", out);
    manifest.set_config({{"data", a.data}, {"m", a.m}, {"restarts", a.restarts}, {"tol", a.tol}, {"max_iters", a.max_iters}});
    manifest.set_seed(seed);
    mhp::io::write_text_atomic(out / "generators.json", doc.dump(1) + "\n");
    manifest.add_output(out / "generators.json");
    manifest.write();
    std::cout << json{{"quantization_error", result.quantization_error}, {"iterations", result.iterations},
                      {"converged", result.converged}}
                     .dump()
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TessellateArgs {
    std::string checkpoint;
    std::string generators;
    double t = 0.0;
    long long samples = 10000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_tessellate(const TessellateArgs& a) {
    if (a.checkpoint.empty() == a.generators.empty()) {
        throw mhp::ValidationError("give exactly one of --checkpoint or --generators");
    }
    if (a.samples <= 0) throw mhp::ValidationError("--samples must be positive");
    mhp::PointSet generators;
    mhp::LossKind loss = mhp::LossKind::l2();
    if (!a.checkpoint.empty()) {
        const auto cp = mhp::io::load_checkpoint(a.checkpoint);
        if (cp.model.input_dim() != 1 || cp.model.output_dim() != 2) {
            throw mhp::ValidationError("tessellate expects a temporal-2D model (1 input, 2 outputs)");
        }
        loss = cp.base_loss;
        const double x[1] = {a.t};
        const auto h = mhp::forward(cp.model, x);
        for (std::size_t j = 0; j < h.size(); ++j) generators.push_back(h[j]);
    } else {
        const auto doc = mhp::io::read_json(a.generators);
        generators = points_from_json(doc.at("generators"));
        if (doc.contains("loss")) loss = mhp::parse_loss_kind(doc["loss"].get<std::string>());
    }
    if (loss.is_classification()) throw mhp::ValidationError("tessellate exports need a regression loss");

    const std::uint64_t seed = seed_from_env(a.seed);
    mhp::Rng rng(seed);
    const auto data = mhp::datagen::sample_temporal2d(a.t, static_cast<std::size_t>(a.samples), rng);
    const auto samples = data.target_points();
    const auto result = mhp::voronoi::tessellate(generators, loss, samples);

    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        rows.push_back({samples[i][0], samples[i][1], static_cast<double>(result.tessellation.assignments[i])});
    }
    const fs::path out(a.out);
    Manifest manifest("tessellate", out);
    manifest.set_config({{"checkpoint", a.checkpoint}, {"generators", a.generators}, {"t", a.t}, {"samples", a.samples}});
    manifest.set_seed(seed);
    mhp::io::write_csv_matrix(out / "tessellation.csv", {"sample_x", "sample_y", "cell_index"}, rows);
    json cell_means = json::array();
    for (std::size_t j = 0; j < generators.size(); ++j) {
        if (result.stats.empty(j)) {
            cell_means.push_back(nullptr);
        } else {
            cell_means.push_back(std::vector<double>(result.stats.means[j].begin(), result.stats.means[j].end()));
        }
    }
    json doc = {{"t", a.t},
                {"loss", mhp::to_string(loss)},
                {"generators", points_json(generators)},
                {"cell_counts", result.tessellation.cell_counts},
                {"cell_means", cell_means},
                {"seed", seed}};
    mhp::io::write_text_atomic(out / "generators.json", doc.dump(1) + "\n");
    manifest.add_output(out / "tessellation.csv");
    manifest.add_output(out / "generators.json");
    manifest.write();
    std::cout << json{{"cells", generators.size()}, {"cell_counts", result.tessellation.cell_counts}}.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple hypothesis prediction: data generation, training, evaluation, tessellation"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset (data.csv + data.json)");
    gen_cmd->add_option("--task", gen.task, "temporal2d | multilabel | gridframe | gmm")
        ->required()
        ->check(CLI::IsMember({"temporal2d", "multilabel", "gridframe", "gmm"}));
    gen_cmd->add_option("--n", gen.n, "Number of samples")->required();
    gen_cmd->add_option("--seed", gen.seed, "RNG seed (MHP_SEED overrides)");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--spec", gen.spec, "Task spec overrides (JSON text or file)");
    gen_cmd->add_option("--t", gen.t, "Fixed time for temporal2d (default: t ~ U[0,1] per sample)");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON config");
    train_cmd->add_option("--config", train.config, "Training config JSON")->required();
    train_cmd->add_option("--out", train.out, "Run directory")->required();
    train_cmd->add_option("--data", train.data, "Train on a dataset produced by gen instead of the config's spec");
    train_cmd->add_flag("--record-timing", train.record_timing, "Write real wall_ms values into metrics.jsonl");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint; prints a MetricsReport JSON");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint JSON")->required();
    eval_cmd->add_option("--data", ev.data, "Dataset directory or data.csv")->required();
    eval_cmd->add_option("--metrics", ev.metrics,
                         "Comma list: oracle_min, shp_baseline, hypothesis_variance, sharpness, multilabel");
    eval_cmd->add_option("--baseline", ev.baseline, "SHP checkpoint for shp_baseline");
    eval_cmd->add_option("--out", ev.out, "Also write metrics.json and CSV exports here");

    LloydArgs ll;
    auto* lloyd_cmd = app.add_subcommand("lloyd", "Lloyd's algorithm oracle on a dataset's targets");
    lloyd_cmd->add_option("--data", ll.data, "Dataset directory or data.csv")->required();
    lloyd_cmd->add_option("--m", ll.m, "Number of generators")->required();
    lloyd_cmd->add_option("--restarts", ll.restarts, "k-means++ restarts");
    lloyd_cmd->add_option("--tol", ll.tol, "Convergence tolerance on generator movement");
    lloyd_cmd->add_option("--max-iters", ll.max_iters, "Iteration cap per restart");
    lloyd_cmd->add_option("--seed", ll.seed, "RNG seed (MHP_SEED overrides)");
    lloyd_cmd->add_option("--out", ll.out, "Output directory")->required();

    TessellateArgs ts;
    auto* tess_cmd = app.add_subcommand("tessellate", "Export the Voronoi tessellation of a temporal-2D model at t");
    tess_cmd->add_option("--checkpoint", ts.checkpoint, "Checkpoint JSON");
    tess_cmd->add_option("--generators", ts.generators, "generators.json from a previous export");
    tess_cmd->add_option("--t", ts.t, "Time in [0, 1]");
    tess_cmd->add_option("--samples", ts.samples, "Number of samples drawn at t");
    tess_cmd->add_option("--seed", ts.seed, "RNG seed (MHP_SEED overrides)");
    tess_cmd->add_option("--out", ts.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen);
        if (*train_cmd) return cmd_train(train);
        if (*eval_cmd) return cmd_eval(ev);
        if (*lloyd_cmd) return cmd_lloyd(ll);
        if (*tess_cmd) return cmd_tessellate(ts);
    } catch (const mhp::DivergenceError& e) {
        std::cerr << "error: training diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const mhp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const mhp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
