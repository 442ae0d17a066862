#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcavity/model.hpp"
#include "qcavity/optim.hpp"
#include "qcavity/reference.hpp"

namespace qcavity {

enum class OptimizerKind { Lbfgs, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct TrainConfig {
    ModelConfig model;
    double reynolds = 10.0;
    double lambda_b = 10.0;
    int epochs = 100;
    int grid_nx = 50, grid_ny = 50; // collocation grid
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Lbfgs;
    LbfgsOptions lbfgs;  // used when optimizer == Lbfgs
    double adam_lr = 5e-3;
};

// One row of the loss history. Entry 0 holds the untouched initial
// parameters; row k the state after k optimizer steps. The relative errors
// are filled only when train() was handed a reference solution.
struct EpochRecord {
    int epoch = 0;
    LossBreakdown loss;
    bool has_metrics = false;
    double rel_l2_u = 0.0;
    double rel_l2_p = 0.0;
};

enum class TrainStatus {
    Completed,         // ran the full epoch budget
    GradientConverged, // L-BFGS met its gradient tolerance early
    Stalled,           // line search exhausted; parameters are the best seen
};

std::string to_string(TrainStatus status);

struct TrainResult {
    std::vector<double> theta;
    std::vector<EpochRecord> history;
    TrainStatus status = TrainStatus::Completed;
    int epochs_run = 0;
};

// Evaluate a model's fields on a uniform nx-by-ny grid over the unit square,
// in the same node layout solve_reference produces, so the two can be fed to
// metrics() directly.
FieldGrid model_field_grid(const Model& model, std::span<const double> theta, int nx, int ny,
                           double reynolds);

// Full training run: seeds the parameters, builds the collocation set, and
// drives the configured optimizer for `epochs` steps on the physics loss.
// Deterministic for a fixed config and seed. A non-finite loss or gradient
// aborts with a NumericError naming the epoch. When `reference` is non-null,
// every history row additionally records relative L2 errors of u and p
// against it (the model is evaluated at the reference nodes).
TrainResult train(const TrainConfig& config, const FieldGrid* reference = nullptr);

} // namespace qcavity
