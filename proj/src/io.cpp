#include "mhp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mhp/error.hpp"

namespace mhp::io {

namespace {

json layers_to_json(const std::vector<LayerGradient>& layers) {
    json out = json::array();
    for (const auto& l : layers) out.push_back({{"weight", l.weight}, {"bias", l.bias}});
    return out;
}

template <class T>
T required(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ValidationError(std::string("checkpoint: missing field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: bad field '") + key + "': " + e.what());
    }
}

}  // namespace

json checkpoint_to_json(const Checkpoint& cp) {
    const auto& model = cp.model;
    json activations = json::array();
    json params = json::array();
    for (const auto& layer : model.layers()) {
        activations.push_back(to_string(layer.activation));
        params.push_back({{"weight", layer.weight}, {"bias", layer.bias}});
    }
    json doc = {
        {"schema_version", kCheckpointSchemaVersion},
        {"layer_dims", model.layer_dims()},
        {"activations", activations},
        {"M", model.num_hypotheses()},
        {"output_dim", model.output_dim()},
        {"seed", cp.seed},
        {"base_loss", to_string(cp.base_loss)},
        {"parameters", params},
    };
    if (cp.optimizer) {
        const auto& cfg = cp.optimizer->config();
        doc["optimizer"] = {
            {"kind", to_string(cfg.kind)},
            {"learning_rate", cfg.learning_rate},
            {"momentum", cfg.momentum},
            {"accumulators", layers_to_json(cp.optimizer->accumulators().layers())},
        };
    } else {
        doc["optimizer"] = nullptr;
    }
    if (!cp.extra.empty()) doc["extra"] = cp.extra;
    return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("checkpoint: not a JSON object");
    const int version = required<int>(doc, "schema_version");
    if (version != kCheckpointSchemaVersion) {
        throw ValidationError("checkpoint: unsupported schema_version " + std::to_string(version));
    }
    const auto dims = required<std::vector<std::size_t>>(doc, "layer_dims");
    const auto activations = required<std::vector<std::string>>(doc, "activations");
    const auto& params = doc.at("parameters");
    if (dims.size() < 2 || activations.size() != dims.size() - 1 || !params.is_array() ||
        params.size() != dims.size() - 1) {
        throw ShapeError("checkpoint: layer_dims, activations and parameters disagree");
    }
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        DenseLayer layer;
        layer.in = dims[k];
        layer.out = dims[k + 1];
        layer.activation = activation_from_string(activations[k]);
        layer.weight = required<std::vector<double>>(params[k], "weight");
        layer.bias = required<std::vector<double>>(params[k], "bias");
        layers.push_back(std::move(layer));
    }
    Checkpoint cp;
    cp.model = MlpModel(std::move(layers), required<std::size_t>(doc, "output_dim"), required<std::size_t>(doc, "M"));
    cp.seed = required<std::uint64_t>(doc, "seed");
    cp.base_loss = parse_loss_kind(doc.value("base_loss", std::string("l2")));
    if (doc.contains("optimizer") && doc["optimizer"].is_object()) {
        const auto& o = doc["optimizer"];
        OptimizerConfig cfg{optimizer_kind_from_string(required<std::string>(o, "kind")),
                            required<double>(o, "learning_rate"), required<double>(o, "momentum")};
        Optimizer opt(cfg, cp.model);
        const auto& acc = o.at("accumulators");
        if (!acc.is_array() || acc.size() != opt.accumulators().layers().size()) {
            throw ShapeError("checkpoint: optimizer accumulators do not match model");
        }
        for (std::size_t k = 0; k < acc.size(); ++k) {
            auto w = required<std::vector<double>>(acc[k], "weight");
            auto b = required<std::vector<double>>(acc[k], "bias");
            auto& dst = opt.accumulators().layers()[k];
            if (w.size() != dst.weight.size() || b.size() != dst.bias.size()) {
                throw ShapeError("checkpoint: optimizer accumulator shape mismatch");
            }
            dst.weight = std::move(w);
            dst.bias = std::move(b);
        }
        cp.optimizer = std::move(opt);
    }
    if (doc.contains("extra")) cp.extra = doc["extra"];
    return cp;
}

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
    write_text_atomic(path, checkpoint_to_json(checkpoint).dump(1) + "\n");
}

Checkpoint load_checkpoint(const fs::path& path) { return checkpoint_from_json(read_json(path)); }

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::vector<std::string> dataset_columns(const Dataset& data, const std::string& task) {
    std::vector<std::string> cols;
    if (task == "temporal2d" && data.input_dim == 1) {
        cols.push_back("t");
    } else {
        for (std::size_t k = 0; k < data.input_dim; ++k) cols.push_back("x" + std::to_string(k + 1));
    }
    if (data.classification()) {
        cols.push_back("label");
        if (!data.label_sets.empty()) cols.push_back("label_set");
    } else {
        for (std::size_t k = 0; k < data.target_dim; ++k) cols.push_back("y" + std::to_string(k + 1));
    }
    return cols;
}

void write_dataset(const fs::path& dir, const Dataset& data, const std::string& task, const json& spec,
                   std::uint64_t seed) {
    const auto cols = dataset_columns(data, task);
    std::string csv;
    for (std::size_t k = 0; k < cols.size(); ++k) csv += (k ? "," : "") + cols[k];
    csv += "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.input(i);
        for (std::size_t k = 0; k < x.size(); ++k) csv += (k ? "," : "") + format_double(x[k]);
        if (data.classification()) {
            csv += "," + std::to_string(data.labels[i]);
            if (!data.label_sets.empty()) {
                csv += ",";
                for (std::size_t k = 0; k < data.label_sets[i].size(); ++k) {
                    csv += (k ? "|" : "") + std::to_string(data.label_sets[i][k]);
                }
            }
        } else {
            for (double v : data.target_values(i)) csv += "," + format_double(v);
        }
        csv += "\n";
    }
    json sidecar = {{"task", task},
                    {"spec", spec},
                    {"seed", seed},
                    {"n", data.size()},
                    {"input_dim", data.input_dim},
                    {"target_dim", data.target_dim},
                    {"num_classes", data.num_classes},
                    {"columns", cols}};
    write_text_atomic(dir / "data.csv", csv);
    write_text_atomic(dir / "data.json", sidecar.dump(1) + "\n");
}

namespace {

double parse_number(const std::string& cell, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ValidationError("dataset: bad number '" + cell + "' on line " + std::to_string(line));
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

LoadedDataset read_dataset(const fs::path& path) {
    const fs::path csv_path = fs::is_directory(path) ? path / "data.csv" : path;
    fs::path sidecar_path = csv_path;
    sidecar_path.replace_extension(".json");
    if (!fs::exists(csv_path)) throw IoError("dataset not found: " + csv_path.string());
    if (!fs::exists(sidecar_path)) throw IoError("dataset sidecar not found: " + sidecar_path.string());

    LoadedDataset out;
    out.sidecar = read_json(sidecar_path);
    auto& d = out.data;
    d.input_dim = out.sidecar.value("input_dim", std::size_t{0});
    d.target_dim = out.sidecar.value("target_dim", std::size_t{0});
    d.num_classes = out.sidecar.value("num_classes", std::size_t{0});
    const std::size_t expected_cols =
        d.input_dim + (d.num_classes > 0 ? 1 : d.target_dim);

    std::istringstream in(read_text(csv_path));
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() < expected_cols) throw ShapeError("dataset: too few columns on line " + std::to_string(line_no));
        for (std::size_t k = 0; k < d.input_dim; ++k) d.inputs.push_back(parse_number(cells[k], line_no));
        if (d.num_classes > 0) {
            d.labels.push_back(static_cast<std::size_t>(parse_number(cells[d.input_dim], line_no)));
            if (cells.size() > d.input_dim + 1) {
                std::vector<std::size_t> set;
                for (const auto& c : split(cells[d.input_dim + 1], '|')) {
                    set.push_back(static_cast<std::size_t>(parse_number(c, line_no)));
                }
                d.label_sets.push_back(std::move(set));
            }
        } else {
            for (std::size_t k = 0; k < d.target_dim; ++k) d.targets.push_back(parse_number(cells[d.input_dim + k], line_no));
        }
    }
    d.validate();
    return out;
}

void write_csv_matrix(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string csv;
    for (std::size_t k = 0; k < header.size(); ++k) csv += (k ? "," : "") + header[k];
    if (!header.empty()) csv += "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) csv += (k ? "," : "") + format_double(row[k]);
        csv += "\n";
    }
    write_text_atomic(path, csv);
}

std::string metrics_line(const EpochMetrics& m, bool record_timing) {
    json j = {{"epoch", m.epoch},
              {"mean_meta_loss", m.mean_meta_loss},
              {"oracle_min_loss", m.oracle_min_loss},
              {"wall_ms", record_timing ? m.wall_ms : 0.0}};
    return j.dump();
}

}  // namespace mhp::io
