#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhp/dataset.hpp"
#include "mhp/losses.hpp"
#include "mhp/network.hpp"
#include "mhp/trainer.hpp"

namespace mhp::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kCheckpointSchemaVersion = 1;

struct Checkpoint {
    MlpModel model;
    std::optional<Optimizer> optimizer;
    std::uint64_t seed = 0;
    LossKind base_loss = LossKind::l2();
    /// Free-form extras (training config, task description).
    json extra = json::object();
};

json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const json& doc);
void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const fs::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Writes through a temporary file and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);
json read_json(const fs::path& path);

/// Column names of a dataset's CSV header.
std::vector<std::string> dataset_columns(const Dataset& data, const std::string& task);

/// `dir/data.csv` (header + one row per sample) and `dir/data.json`
/// sidecar {task, spec, seed, n, input_dim, target_dim, num_classes, columns}.
void write_dataset(const fs::path& dir, const Dataset& data, const std::string& task, const json& spec,
                   std::uint64_t seed);

struct LoadedDataset {
    Dataset data;
    json sidecar;
};

/// Reads `path` (a data.csv, or a directory containing one) and its sidecar.
LoadedDataset read_dataset(const fs::path& path);

void write_csv_matrix(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

/// {epoch, mean_meta_loss, oracle_min_loss, wall_ms} on one line.
std::string metrics_line(const EpochMetrics& m, bool record_timing);

}  // namespace mhp::io
