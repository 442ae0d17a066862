#include "qcavity/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcavity/collocation.hpp"
#include "qcavity/errors.hpp"
#include "qcavity/fields.hpp"

namespace qcavity {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::Lbfgs: return "lbfgs";
    case OptimizerKind::Adam: return "adam";
    }
    throw ConfigError("unknown optimizer kind");
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "lbfgs") return OptimizerKind::Lbfgs;
    if (name == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected lbfgs or adam)");
}

std::string to_string(TrainStatus status) {
    switch (status) {
    case TrainStatus::Completed: return "completed";
    case TrainStatus::GradientConverged: return "gradient_converged";
    case TrainStatus::Stalled: return "stalled";
    }
    throw ConfigError("unknown train status");
}

FieldGrid model_field_grid(const Model& model, std::span<const double> theta, int nx, int ny,
                           double reynolds) {
    if (nx < 2 || ny < 2) throw ConfigError("model_field_grid: grid must be at least 2x2");
    FieldGrid g;
    g.nx = nx;
    g.ny = ny;
    g.reynolds = reynolds;
    g.xs.resize(nx);
    g.ys.resize(ny);
    for (int i = 0; i < nx; ++i) g.xs[i] = double(i) / (nx - 1);
    for (int j = 0; j < ny; ++j) g.ys[j] = double(j) / (ny - 1);
    const std::size_t n = std::size_t(nx) * ny;
    g.u.resize(n);
    g.v.resize(n);
    g.p.resize(n);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const FieldSample s = eval_fields(model, theta, g.xs[i], g.ys[j]);
            const int c = g.index(i, j);
            g.u[c] = s.psi[slot::fy];
            g.v[c] = -s.psi[slot::fx];
            g.p[c] = s.p[slot::f];
        }
    }
    return g;
}

TrainResult train(const TrainConfig& config, const FieldGrid* reference) {
    if (config.epochs < 1)
        throw ConfigError("train: epochs must be >= 1, got " + std::to_string(config.epochs));
    if (!(config.reynolds > 0.0)) throw ConfigError("train: reynolds must be positive");
    if (!(config.lambda_b >= 0.0)) throw ConfigError("train: lambda_b must be nonnegative");
    if (config.grid_nx < 3 || config.grid_ny < 3)
        throw ConfigError("train: collocation grid must be at least 3x3");
    if (config.optimizer == OptimizerKind::Adam && !(config.adam_lr > 0.0))
        throw ConfigError("train: adam_lr must be positive");

    const Model model = make_model(config.model);
    const CollocationSet colloc =
        make_collocation(config.grid_nx, config.grid_ny, config.model.domain);
    std::vector<double> theta = init_params(config.model, config.seed);

    TrainResult result;

    int epochs_done = 0; // for non-finite diagnostics: the epoch being computed
    const auto check_finite = [&epochs_done](double loss, std::span<const double> grad) {
        if (!std::isfinite(loss))
            throw NumericError("train: non-finite loss while computing epoch " +
                               std::to_string(epochs_done + 1));
        for (std::size_t i = 0; i < grad.size(); ++i)
            if (!std::isfinite(grad[i]))
                throw NumericError("train: non-finite gradient component " + std::to_string(i) +
                                   " while computing epoch " + std::to_string(epochs_done + 1));
    };

    const auto record = [&](int epoch, const LossBreakdown& bd, std::span<const double> th) {
        EpochRecord row;
        row.epoch = epoch;
        row.loss = bd;
        if (reference) {
            const FieldGrid pred =
                model_field_grid(model, th, reference->nx, reference->ny, config.reynolds);
            const GridMetrics m = metrics(pred, *reference);
            row.has_metrics = true;
            row.rel_l2_u = m.u.rel_l2;
            row.rel_l2_p = m.p.rel_l2;
        }
        result.history.push_back(row);
    };

    const LossBreakdown initial =
        total_loss(model, theta, colloc, config.reynolds, config.lambda_b);
    check_finite(initial.total, {});
    record(0, initial, theta);

    if (config.optimizer == OptimizerKind::Lbfgs) {
        const LossGradFn objective = [&](std::span<const double> th,
                                         std::span<double> grad) -> double {
            LossBreakdown bd;
            if (grad.empty()) {
                bd = total_loss(model, th, colloc, config.reynolds, config.lambda_b);
            } else {
                const std::vector<double> g =
                    loss_gradient(model, th, colloc, config.reynolds, config.lambda_b, &bd);
                std::copy(g.begin(), g.end(), grad.begin());
            }
            check_finite(bd.total, grad);
            return bd.total;
        };
        const LbfgsObserver observer = [&](int iter, double, double,
                                           std::span<const double> th) {
            const LossBreakdown bd =
                total_loss(model, th, colloc, config.reynolds, config.lambda_b);
            record(iter, bd, th);
            epochs_done = iter;
        };
        LbfgsResult r =
            lbfgs_minimize(objective, std::move(theta), config.epochs, config.lbfgs, observer);
        result.theta = std::move(r.theta);
        result.epochs_run = r.iterations;
        switch (r.status) {
        case LbfgsStatus::Converged: result.status = TrainStatus::GradientConverged; break;
        case LbfgsStatus::IterationLimit: result.status = TrainStatus::Completed; break;
        case LbfgsStatus::LineSearchFailed: result.status = TrainStatus::Stalled; break;
        }
    } else {
        AdamState adam;
        adam.lr = config.adam_lr;
        for (int e = 1; e <= config.epochs; ++e) {
            LossBreakdown bd;
            const std::vector<double> g =
                loss_gradient(model, theta, colloc, config.reynolds, config.lambda_b, &bd);
            check_finite(bd.total, g);
            adam_step(adam, theta, g);
            const LossBreakdown after =
                total_loss(model, theta, colloc, config.reynolds, config.lambda_b);
            check_finite(after.total, {});
            epochs_done = e;
            record(e, after, theta);
        }
        result.theta = std::move(theta);
        result.epochs_run = config.epochs;
        result.status = TrainStatus::Completed;
    }
    return result;
}

} // namespace qcavity
