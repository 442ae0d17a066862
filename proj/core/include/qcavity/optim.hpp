#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qcavity {

// Objective callback. Returns the loss at `theta`; when `grad` is non-empty it
// must have theta.size() elements and receives the full gradient. Callers pass
// an empty span for value-only evaluations (line-search trials), which lets
// expensive backward sweeps be skipped. The callback must be deterministic.
using LossGradFn = std::function<double(std::span<const double> theta, std::span<double> grad)>;

struct AdamState {
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m;
    std::vector<double> v;
    long step = 0; // completed updates
};

// One bias-corrected Adam update, in place. Moment buffers are allocated on
// first use and must keep the same length afterwards.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad);

struct LbfgsOptions {
    int history = 10;        // curvature pairs kept
    double c1 = 1e-4;        // Armijo sufficient-decrease constant
    double shrink = 0.5;     // backtracking factor
    int max_trials = 20;     // line-search evaluations per direction
    double grad_tol = 0.0;   // stop when ||grad||_2 <= grad_tol
    int max_failures = 5;    // consecutive failed line searches before giving up
};

enum class LbfgsStatus {
    Converged,        // gradient norm reached grad_tol
    IterationLimit,   // ran max_iters accepted steps
    LineSearchFailed, // max_failures consecutive searches found no decrease
};

struct LbfgsResult {
    std::vector<double> theta;
    std::vector<double> loss_history; // f at theta0, then after each accepted step
    LbfgsStatus status = LbfgsStatus::IterationLimit;
    int iterations = 0; // accepted steps
};

// Callback invoked after every accepted step with (iteration index starting at
// 1, loss, gradient 2-norm, current parameters).
using LbfgsObserver =
    std::function<void(int iter, double loss, double grad_norm, std::span<const double> theta)>;

// Limited-memory BFGS with backtracking Armijo line search. Two-loop recursion
// over at most `history` curvature pairs; pairs are admitted only when
// s.y > 1e-10. A direction whose line search fails is retried as a plain
// gradient step with fresh memory; `max_failures` consecutive dead ends end
// the run with LineSearchFailed. Loss values along accepted steps never
// increase.
LbfgsResult lbfgs_minimize(const LossGradFn& f, std::vector<double> theta0, int max_iters,
                           const LbfgsOptions& opts = {}, const LbfgsObserver& observer = {});

} // namespace qcavity
