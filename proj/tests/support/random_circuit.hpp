#pragma once

// Random circuit generation shared by the simulator tests and the acceptance
// battery. Parameters are dense by construction; when inputs are requested,
// every input index is bound at least once.

#include <random>
#include <vector>

#include "qcavity/circuit.hpp"

namespace testsupport {

inline qcavity::CircuitSpec make_random_circuit(std::mt19937_64& rng, int n_qubits, int n_layers,
                                                int n_inputs) {
    using namespace qcavity;
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    spec.n_inputs = n_inputs;
    const GateKind kinds[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
    int next_param = 0;
    for (int k = 0; k < n_inputs; ++k)
        spec.gates.push_back(
            GateOp::rotation(GateKind::RY, k % n_qubits, Binding::input(k)));
    for (int layer = 0; layer < n_layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q)
            spec.gates.push_back(
                GateOp::rotation(kinds[rng() % 3], q, Binding::param(next_param++)));
        if (n_inputs > 0 && rng() % 2 == 0) {
            const int k = int(rng() % std::size_t(n_inputs));
            const int q = int(rng() % std::size_t(n_qubits));
            if (rng() % 3 == 0)
                spec.gates.push_back(
                    GateOp::rotation(kinds[rng() % 3], q, Binding::input_scaled(k, 0.7)));
            else
                spec.gates.push_back(GateOp::rotation(kinds[rng() % 3], q, Binding::input(k)));
        }
        for (int q = 0; q + 1 < n_qubits; ++q)
            if (rng() % 4 != 0) spec.gates.push_back(GateOp::cnot(q, q + 1));
    }
    spec.n_params = next_param;
    return spec;
}

inline std::vector<double> random_params(std::mt19937_64& rng, int n, double lo = -1.5,
                                         double hi = 1.5) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = dist(rng);
    return v;
}

} // namespace testsupport
