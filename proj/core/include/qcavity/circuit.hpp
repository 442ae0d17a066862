#pragma once

#include <string>
#include <vector>

#include "qcavity/errors.hpp"

namespace qcavity {

enum class GateKind { RX, RY, RZ, CNOT };

/// Where a rotation gate takes its angle from. CNOTs carry no binding.
struct Binding {
    enum class Kind { Param, Input, InputScaled, Fixed } kind = Kind::Fixed;
    int index = -1;    // Param / Input / InputScaled
    double scale = 1.0; // InputScaled factor
    double value = 0.0; // Fixed angle

    static Binding param(int i) { return {Kind::Param, i, 1.0, 0.0}; }
    static Binding input(int k) { return {Kind::Input, k, 1.0, 0.0}; }
    static Binding input_scaled(int k, double factor) { return {Kind::InputScaled, k, factor, 0.0}; }
    static Binding fixed(double v) { return {Kind::Fixed, -1, 1.0, v}; }
};

struct GateOp {
    GateKind kind;
    int qubit;      // rotation target, or CNOT control
    int qubit2 = -1; // CNOT target
    Binding binding;

    static GateOp rotation(GateKind k, int qubit, Binding b) { return {k, qubit, -1, b}; }
    static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target, Binding{}}; }
};

/// Immutable gate program. Param and Input indices are dense: every index in
/// [0, n_params) / [0, n_inputs) is referenced by at least one gate.
struct CircuitSpec {
    int n_qubits = 0;
    std::vector<GateOp> gates;
    int n_params = 0;
    int n_inputs = 0;
};

/// Throws ConfigError on non-dense indices, out-of-range qubits, or bindings
/// on CNOTs.
void validate_circuit(const CircuitSpec& spec);

/// Hardware-efficient solver ansatz: per layer Rx, Ry, Rz on every qubit (each
/// angle a fresh parameter, reading order qubit 0 first), then the linear CNOT
/// chain 0->1, 1->2, ..., n-2 -> n-1. n_params = 3 * n_qubits * n_layers.
CircuitSpec build_vqc(int n_qubits, int n_layers);

/// Trainable embedding circuit: per layer Ry(input 0) on even qubits and
/// Ry(input 1) on odd qubits, then trainable Rx, Ry, Rz per qubit, then the
/// linear CNOT chain. n_params = 3 * n_qubits * n_layers, n_inputs = 2.
CircuitSpec build_qnn_embedding(int n_qubits, int n_layers);

/// Data-encoding layer: one Ry(input i) per qubit i. n_inputs = n_qubits.
CircuitSpec build_encoding_layer(int n_qubits);

/// Encoding layer followed by the VQC: the per-field solver circuit. Inputs
/// are the n_qubits encoding angles, parameters are the VQC angles.
CircuitSpec build_solver_circuit(int n_qubits, int vqc_layers);

/// Gate list + layout as a JSON document (for run manifests).
std::string circuit_to_json(const CircuitSpec& spec);

} // namespace qcavity
