#pragma once

#include <span>
#include <vector>

#include "qcavity/collocation.hpp"
#include "qcavity/embedding.hpp"
#include "qcavity/fields.hpp"
#include "qcavity/model_config.hpp"

namespace qcavity {

// Assembled solver for one configuration: circuit templates and parameter
// layout are built once and shared by every point evaluation. Immutable after
// make_model, so safe to use from worker threads.
struct Model {
    ModelConfig config;
    ParamLayout layout;
    CircuitSpec solver;    // encoding + variational block (quantum kinds)
    CircuitSpec embedding; // trainable embedding circuit (QNN kind)
    MlpSpec fnn;           // shared embedding network (FNN kind)
    MlpSpec pinn;          // per-field networks (classical kind)
};

Model make_model(const ModelConfig& config);

// Full-order evaluation at one point: psi carries third-order jets (for the
// velocity derivatives), p first-order.
FieldSample eval_fields(const Model& model, std::span<const double> theta, double x, double y);

struct LossBreakdown {
    double pde = 0.0;
    double wall = 0.0;
    double lid = 0.0;
    double ref = 0.0;
    double total = 0.0;
    double lambda_b = 0.0;
};

// Four-term physics loss: mean squared momentum residuals over the interior,
// mean squared velocity violations on wall and lid, squared pressure at the
// reference point; total = pde + lambda_b * (wall + lid + ref).
LossBreakdown total_loss(const Model& model, std::span<const double> theta,
                         const CollocationSet& colloc, double reynolds, double lambda_b);

// Exact gradient of LossBreakdown.total for every trainable parameter, via
// reverse sweeps through the circuits/networks composed with the residual
// slot adjoints. Accumulation order is fixed (chunked by point index), so
// results are bit-identical for any worker count. Optionally reports the
// loss breakdown of the same evaluation.
std::vector<double> loss_gradient(const Model& model, std::span<const double> theta,
                                  const CollocationSet& colloc, double reynolds, double lambda_b,
                                  LossBreakdown* breakdown = nullptr);

} // namespace qcavity
