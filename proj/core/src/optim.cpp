#include "qcavity/optim.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <string>

#include "qcavity/errors.hpp"

namespace qcavity {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho; // 1 / (s.y)
};

// d <- -H g per the standard two-loop recursion, with the usual gamma = s.y / y.y
// scaling of the seed Hessian from the most recent pair.
void search_direction(const std::deque<CurvaturePair>& pairs, std::span<const double> g,
                      std::vector<double>& d) {
    const std::size_t n = g.size();
    d.assign(g.begin(), g.end());
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        const auto& p = pairs[i];
        alpha[i] = p.rho * dot(p.s, d);
        for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[i] * p.y[k];
    }
    if (!pairs.empty()) {
        const auto& last = pairs.back();
        const double yy = dot(last.y, last.y);
        if (yy > 0.0) {
            const double gamma = 1.0 / (last.rho * yy);
            for (double& x : d) x *= gamma;
        }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const double beta = p.rho * dot(p.y, d);
        for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[i] - beta) * p.s[k];
    }
    for (double& x : d) x = -x;
}

struct SearchOutcome {
    bool accepted = false;
    double f = 0.0;
    double step = 0.0;
};

// Armijo line search from unit step. Non-finite trial values count as
// rejections so the search walks back out of overflow regions. When the unit
// step already satisfies sufficient decrease the step is grown geometrically
// for as long as the Armijo bound keeps holding and the value keeps
// improving; without this, near-flat valleys where curvature pairs fail the
// positive-curvature test leave the direction scaled by 1/lambda_max and the
// iterate creeps. All evaluations count toward the trial budget.
SearchOutcome backtrack(const LossGradFn& f, std::span<const double> theta,
                        std::span<const double> d, double fval, double gd,
                        const LbfgsOptions& opts, std::vector<double>& trial) {
    const auto eval_at = [&](double step) {
        for (std::size_t k = 0; k < theta.size(); ++k) trial[k] = theta[k] + step * d[k];
        return f(trial, {});
    };
    const auto armijo = [&](double step, double ft) {
        return std::isfinite(ft) && ft <= fval + opts.c1 * step * gd;
    };

    double step = 1.0;
    double ft = eval_at(step);
    int used = 1;
    if (armijo(step, ft)) {
        SearchOutcome best{true, ft, step};
        const double grow = 1.0 / opts.shrink;
        while (used < opts.max_trials) {
            const double next = best.step * grow;
            const double fn = eval_at(next);
            ++used;
            if (!armijo(next, fn) || fn >= best.f) break;
            best = {true, fn, next};
        }
        return best;
    }
    while (used < opts.max_trials) {
        step *= opts.shrink;
        ft = eval_at(step);
        ++used;
        if (armijo(step, ft)) return {true, ft, step};
    }
    return {};
}

} // namespace

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad) {
    if (grad.size() != theta.size())
        throw ConfigError("adam_step: gradient length " + std::to_string(grad.size()) +
                          " does not match parameter length " + std::to_string(theta.size()));
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    if (state.m.size() != theta.size() || state.v.size() != theta.size())
        throw ConfigError("adam_step: moment buffers sized for a different parameter vector");
    if (!all_finite(grad)) throw NumericError("adam_step: non-finite gradient");

    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        theta[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

LbfgsResult lbfgs_minimize(const LossGradFn& f, std::vector<double> theta0, int max_iters,
                           const LbfgsOptions& opts, const LbfgsObserver& observer) {
    if (!f) throw ConfigError("lbfgs_minimize: empty objective callback");
    if (theta0.empty()) throw ConfigError("lbfgs_minimize: empty parameter vector");
    if (max_iters < 0) throw ConfigError("lbfgs_minimize: negative iteration cap");
    if (opts.history < 1 || opts.max_trials < 1 || opts.max_failures < 1 ||
        !(opts.shrink > 0.0 && opts.shrink < 1.0) || !(opts.c1 > 0.0 && opts.c1 < 1.0) ||
        !(opts.grad_tol >= 0.0))
        throw ConfigError("lbfgs_minimize: invalid line-search options");

    const std::size_t n = theta0.size();
    LbfgsResult res;
    res.theta = std::move(theta0);

    std::vector<double> g(n), g_new(n), d(n), trial(n);
    double fval = f(res.theta, g);
    if (!std::isfinite(fval) || !all_finite(g))
        throw NumericError("lbfgs_minimize: non-finite loss or gradient at the starting point");
    res.loss_history.push_back(fval);

    double gnorm = norm2(g);
    if (gnorm <= opts.grad_tol) {
        res.status = LbfgsStatus::Converged;
        return res;
    }

    std::deque<CurvaturePair> pairs;
    int failures = 0;
    int iter = 1;
    while (iter <= max_iters) {
        search_direction(pairs, g, d);
        double gd = dot(g, d);
        if (!(gd < 0.0)) { // not a descent direction; restart from steepest descent
            pairs.clear();
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            gd = -gnorm * gnorm;
        }

        SearchOutcome out = backtrack(f, res.theta, d, fval, gd, opts, trial);
        if (!out.accepted && !pairs.empty()) {
            // Quasi-Newton direction stalled: drop the memory and retry along
            // the plain gradient before declaring a failure.
            pairs.clear();
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            gd = -gnorm * gnorm;
            out = backtrack(f, res.theta, d, fval, gd, opts, trial);
        }
        if (!out.accepted) {
            pairs.clear();
            if (++failures >= opts.max_failures) {
                res.status = LbfgsStatus::LineSearchFailed;
                return res;
            }
            continue; // parameters unchanged; retry counts toward the failure cap
        }
        failures = 0;

        for (std::size_t k = 0; k < n; ++k) trial[k] = res.theta[k] + out.step * d[k];
        const double f_acc = f(trial, g_new);
        if (!std::isfinite(f_acc) || !all_finite(g_new))
            throw NumericError("lbfgs_minimize: non-finite loss or gradient at an accepted step");

        CurvaturePair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            pair.s[k] = trial[k] - res.theta[k];
            pair.y[k] = g_new[k] - g[k];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > 1e-10) { // positive-curvature admission
            pair.rho = 1.0 / sy;
            pairs.push_back(std::move(pair));
            if (pairs.size() > static_cast<std::size_t>(opts.history)) pairs.pop_front();
        }

        res.theta.swap(trial);
        fval = f_acc;
        g.swap(g_new);
        gnorm = norm2(g);
        res.loss_history.push_back(fval);
        res.iterations = iter;
        if (observer) observer(iter, fval, gnorm, res.theta);
        if (gnorm <= opts.grad_tol) {
            res.status = LbfgsStatus::Converged;
            return res;
        }
        ++iter;
    }
    res.status = LbfgsStatus::IterationLimit;
    return res;
}

} // namespace qcavity
