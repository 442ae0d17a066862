#include "qcavity/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcavity/errors.hpp"
#include "qcavity/simulate.hpp"

namespace qcavity {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEdge = 1.0 - 1e-12;
} // namespace

std::pair<Jet2<double>, Jet2<double>> normalize(double x, double y, const Domain& domain,
                                                int order) {
    constexpr double tol = 1e-12;
    if (x < domain.x0 - tol || x > domain.x1 + tol || y < domain.y0 - tol || y > domain.y1 + tol)
        throw ConfigError("point outside the domain");
    const double sx = 2.0 / domain.width();
    const double sy = 2.0 / domain.height();
    auto xt = Jet2<double>::variable(sx * (x - domain.x0) - 1.0, sx, 0.0, order);
    auto yt = Jet2<double>::variable(sy * (y - domain.y0) - 1.0, 0.0, sy, order);
    return {xt, yt};
}

std::vector<Jet2<double>> chebyshev_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                           int n_qubits) {
    if (n_qubits < 1) throw ConfigError("n_qubits must be >= 1");
    auto clamped = [](Jet2<double> j) {
        j[slot::f] = std::clamp(j[slot::f], -kEdge, kEdge);
        return j;
    };
    const auto ax = acos(clamped(xt));
    const auto ay = acos(clamped(yt));
    std::vector<Jet2<double>> angles;
    angles.reserve(std::size_t(n_qubits));
    for (int q = 0; q < n_qubits; ++q) {
        const double degree = double(q / 2 + 1);
        angles.push_back(degree * (q % 2 == 0 ? ax : ay));
    }
    return angles;
}

std::vector<Jet2<double>> fnn_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                     const MlpSpec& spec, std::span<const double> theta,
                                     MlpCache* cache) {
    if (spec.sizes.front() != 2) throw ConfigError("embedding network takes two inputs");
    const Jet2<double> in[] = {xt, yt};
    auto out = mlp_forward(spec, theta, in, cache);
    for (auto& z : out) z = kPi * tanh(z);
    return out;
}

void fnn_angle_backprop(const MlpSpec& spec, std::span<const double> theta, const MlpCache& cache,
                        std::span<const Jet2<double>> angle_adj, std::span<double> grad) {
    const auto& out_preact = cache.preact.back();
    if (angle_adj.size() != out_preact.size())
        throw ConfigError("angle adjoint length mismatch");
    // alpha = pi * tanh(z): pull the cotangent through the squash first.
    std::vector<Jet2<double>> z_adj;
    z_adj.reserve(angle_adj.size());
    for (std::size_t i = 0; i < angle_adj.size(); ++i)
        z_adj.push_back(
            adjoint_mul(jet_elem_prime(Elem::Tanh, out_preact[i]), kPi * angle_adj[i]));
    mlp_backprop(spec, theta, cache, z_adj, grad);
}

std::vector<Jet2<double>> qnn_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                     std::span<const double> theta, const CircuitSpec& spec) {
    if (spec.n_inputs != 2) throw ConfigError("embedding circuit takes two inputs");
    const sim::Types<Jet2<double>> t{xt.order()};
    const Jet2<double> in[] = {xt, yt};
    const auto st = simulate_circuit<Jet2<double>>(spec, theta, in, t);
    std::vector<Jet2<double>> angles;
    angles.reserve(std::size_t(spec.n_qubits));
    for (int q = 0; q < spec.n_qubits; ++q) angles.push_back(kPi * expval_z(st, q));
    return angles;
}

void qnn_angle_backprop(const CircuitSpec& spec, std::span<const double> theta,
                        const Jet2<double>& xt, const Jet2<double>& yt,
                        std::span<const Jet2<double>> angle_adj, std::span<double> grad) {
    if (grad.size() != std::size_t(spec.n_params))
        throw ConfigError("gradient segment length mismatch");
    if (angle_adj.size() != std::size_t(spec.n_qubits))
        throw ConfigError("angle adjoint length mismatch");
    const sim::Types<Jet2<double>> t{xt.order()};
    const Jet2<double> in[] = {xt, yt};
    for (int q = 0; q < spec.n_qubits; ++q) {
        const auto sweep = adjoint_gradients<Jet2<double>>(spec, theta, in, t, q, true, false);
        for (int m = 0; m < spec.n_params; ++m)
            grad[std::size_t(m)] +=
                kPi * jet_dot(angle_adj[std::size_t(q)], sweep.d_params[std::size_t(m)]);
    }
}

} // namespace qcavity
