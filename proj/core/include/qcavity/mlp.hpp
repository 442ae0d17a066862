#pragma once

#include <span>
#include <vector>

#include "qcavity/errors.hpp"
#include "qcavity/jet.hpp"

namespace qcavity {

// Fully connected network with tanh hidden activations and a linear output
// layer, evaluated on jets so spatial derivatives ride along automatically.
// Parameter segment layout, layer by layer: W row-major [out][in], then b.
struct MlpSpec {
    std::vector<int> sizes; // sizes.front() inputs ... sizes.back() outputs
};

inline std::size_t mlp_param_count(const MlpSpec& spec) {
    if (spec.sizes.size() < 2) throw ConfigError("mlp needs at least two layers");
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
        if (spec.sizes[l] < 1 || spec.sizes[l + 1] < 1)
            throw ConfigError("mlp layer sizes must be positive");
        n += std::size_t(spec.sizes[l] + 1) * std::size_t(spec.sizes[l + 1]);
    }
    return n;
}

// Intermediate states kept for the reverse pass.
struct MlpCache {
    std::vector<std::vector<Jet2<double>>> layer_in; // input to each affine layer
    std::vector<std::vector<Jet2<double>>> preact;   // affine output before activation
};

inline std::vector<Jet2<double>> mlp_forward(const MlpSpec& spec,
                                             std::span<const double> params,
                                             std::span<const Jet2<double>> inputs,
                                             MlpCache* cache = nullptr) {
    const std::size_t n_layers = spec.sizes.size() - 1;
    if (params.size() != mlp_param_count(spec))
        throw ConfigError("mlp parameter segment has wrong length");
    if (inputs.size() != std::size_t(spec.sizes.front()))
        throw ConfigError("mlp input vector has wrong length");
    if (cache) {
        cache->layer_in.assign(n_layers, {});
        cache->preact.assign(n_layers, {});
    }
    const int order = inputs.empty() ? 1 : inputs[0].order();
    std::vector<Jet2<double>> a(inputs.begin(), inputs.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int n_in = spec.sizes[l];
        const int n_out = spec.sizes[l + 1];
        if (cache) cache->layer_in[l] = a;
        std::vector<Jet2<double>> z;
        z.reserve(std::size_t(n_out));
        const double* W = params.data() + off;
        const double* b = W + std::size_t(n_out) * std::size_t(n_in);
        for (int i = 0; i < n_out; ++i) {
            auto zi = Jet2<double>::constant(b[i], order);
            for (int j = 0; j < n_in; ++j) zi += W[std::size_t(i) * n_in + j] * a[std::size_t(j)];
            z.push_back(zi);
        }
        off += std::size_t(n_out) * std::size_t(n_in + 1);
        if (cache) cache->preact[l] = z;
        if (l + 1 == n_layers) return z;
        a.clear();
        for (const auto& zi : z) a.push_back(tanh(zi));
    }
    return a; // unreachable: n_layers >= 1
}

// Reverse pass for S = sum_k jet_dot(out_adj[k], out[k]). Accumulates dS/dparams
// into grad (+=) and returns the adjoints of the network inputs.
inline std::vector<Jet2<double>> mlp_backprop(const MlpSpec& spec,
                                              std::span<const double> params,
                                              const MlpCache& cache,
                                              std::span<const Jet2<double>> out_adj,
                                              std::span<double> grad) {
    const std::size_t n_layers = spec.sizes.size() - 1;
    if (grad.size() != mlp_param_count(spec))
        throw ConfigError("mlp gradient segment has wrong length");
    if (out_adj.size() != std::size_t(spec.sizes.back()))
        throw ConfigError("mlp output adjoint has wrong length");

    std::vector<std::size_t> offsets(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += std::size_t(spec.sizes[l] + 1) * std::size_t(spec.sizes[l + 1]);
    }

    std::vector<Jet2<double>> z_adj(out_adj.begin(), out_adj.end());
    for (std::size_t li = n_layers; li-- > 0;) {
        const int n_in = spec.sizes[li];
        const int n_out = spec.sizes[li + 1];
        if (li + 1 < n_layers) {
            // z_adj currently holds the activation adjoint; pull it back
            // through a = tanh(z) using the preactivation saved going forward.
            for (int i = 0; i < n_out; ++i)
                z_adj[std::size_t(i)] = adjoint_mul(
                    jet_elem_prime(Elem::Tanh, cache.preact[li][std::size_t(i)]),
                    z_adj[std::size_t(i)]);
        }
        const double* W = params.data() + offsets[li];
        double* gW = grad.data() + offsets[li];
        double* gb = gW + std::size_t(n_out) * std::size_t(n_in);
        const auto& a = cache.layer_in[li];
        std::vector<Jet2<double>> a_adj(std::size_t(n_in),
                                        Jet2<double>::constant(0.0, z_adj[0].order()));
        for (int i = 0; i < n_out; ++i) {
            gb[i] += z_adj[std::size_t(i)][slot::f]; // bias enters the value slot only
            for (int j = 0; j < n_in; ++j) {
                gW[std::size_t(i) * n_in + j] += jet_dot(z_adj[std::size_t(i)], a[std::size_t(j)]);
                a_adj[std::size_t(j)] += W[std::size_t(i) * n_in + j] * z_adj[std::size_t(i)];
            }
        }
        z_adj = std::move(a_adj);
    }
    return z_adj;
}

} // namespace qcavity
