#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcavity/reference.hpp"
#include "qcavity/train.hpp"

namespace qcavity {

inline constexpr const char* kCodeVersion = "0.1.0";

// fields.csv: header x,y,u,v,p,speed, one row per node in grid order
// (row-major from the bottom row). Values are printed with 17 significant
// digits so a reread is bit-exact and identical runs produce identical bytes.
void write_fields_csv(const std::filesystem::path& file, const FieldGrid& g);

// Rebuilds the grid from fields.csv. The Reynolds number is not part of the
// schema (it travels in manifests and checkpoints); the field is left 0.
FieldGrid read_fields_csv(const std::filesystem::path& file);

// loss_history.csv: epoch,L_pde,L_wall,L_lid,L_ref,total,rel_l2_u,rel_l2_p.
// Rows without reference metrics leave the two rel columns empty.
void write_loss_history_csv(const std::filesystem::path& file,
                            const std::vector<EpochRecord>& history);

// Training configuration as JSON. Every key is emitted on write; on read,
// missing keys fall back to defaults, unknown keys are an error naming them.
std::string config_to_json_string(const TrainConfig& config);
TrainConfig config_from_json_string(const std::string& text);
TrainConfig read_config(const std::filesystem::path& file);

struct Checkpoint {
    TrainConfig config;
    std::vector<double> theta;
};

// Parameter checkpoint: JSON carrying the config echo (seed included), the
// named segment layout, and the flat parameter vector.
void write_checkpoint(const std::filesystem::path& file, const TrainConfig& config,
                      std::span<const double> theta);
Checkpoint read_checkpoint(const std::filesystem::path& file);

// metrics.json with exactly two blocks, {"speed": {...}, "pressure": {...}},
// each holding mse, rel_l2, max_abs (plus the absolute-norm flag when set).
void write_metrics_json(const std::filesystem::path& file, const GridMetrics& m);

// Minimal vector heatmap: one rect per grid cell under a linear color map,
// with the value range printed beneath. Row j = 0 is drawn at the bottom.
void write_svg_heatmap(const std::filesystem::path& file, int nx, int ny,
                       std::span<const double> values, const std::string& title);

// Run manifest. `args` records command-line inputs for commands that have no
// TrainConfig; `config`, when given, embeds the full configuration echo so
// the run can be re-executed exactly from the manifest alone.
struct ManifestInfo {
    std::string command;
    std::vector<std::pair<std::string, std::string>> args;
    std::vector<std::string> outputs;
    std::vector<std::string> notes;
};
void write_manifest(const std::filesystem::path& file, const ManifestInfo& info,
                    const TrainConfig* config = nullptr);
TrainConfig read_manifest_config(const std::filesystem::path& file);

} // namespace qcavity
