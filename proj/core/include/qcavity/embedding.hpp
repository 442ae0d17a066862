#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qcavity/circuit.hpp"
#include "qcavity/jet.hpp"
#include "qcavity/mlp.hpp"
#include "qcavity/model_config.hpp"

namespace qcavity {

// Maps a domain point onto [-1,1]^2, returned as jets seeded on the X/Y axes
// with the affine Jacobian so downstream derivatives are w.r.t. (x, y).
std::pair<Jet2<double>, Jet2<double>> normalize(double x, double y, const Domain& domain,
                                               int order);

// Fixed arccos tower. Qubit q reads the x coordinate when q is even, y when
// odd, with degree k = q/2 + 1: angles (acos xt, acos yt, 2 acos xt, ...).
// Values are clamped to |.| <= 1 - 1e-12 before acos (value slot only), so
// corner points keep finite derivatives.
std::vector<Jet2<double>> chebyshev_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                           int n_qubits);

// Classical-network embedding: tanh hidden layer(s), output squashed to
// pi*tanh(.) so the angle range matches the circuit embedding. `cache`, when
// given, is filled for fnn_angle_backprop.
std::vector<Jet2<double>> fnn_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                     const MlpSpec& spec, std::span<const double> theta,
                                     MlpCache* cache = nullptr);

// Pulls angle cotangents back to the network parameter segment (+= into grad).
void fnn_angle_backprop(const MlpSpec& spec, std::span<const double> theta, const MlpCache& cache,
                        std::span<const Jet2<double>> angle_adj, std::span<double> grad);

// Circuit embedding: alpha_i = pi * <Z_i> of the embedding circuit run on
// jet-valued inputs (xt, yt).
std::vector<Jet2<double>> qnn_angles(const Jet2<double>& xt, const Jet2<double>& yt,
                                     std::span<const double> theta, const CircuitSpec& spec);

// Pulls angle cotangents back to the embedding-circuit angles (+= into grad):
// one reverse sweep per readout qubit.
void qnn_angle_backprop(const CircuitSpec& spec, std::span<const double> theta,
                        const Jet2<double>& xt, const Jet2<double>& yt,
                        std::span<const Jet2<double>> angle_adj, std::span<double> grad);

} // namespace qcavity
