#include "qcavity/circuit.hpp"

#include <algorithm>

#include <json.hpp>

namespace qcavity {

namespace {

void check_entangler_args(int n_qubits, int n_layers) {
    if (n_qubits < 2)
        throw ConfigError("circuit template needs n_qubits >= 2, got " + std::to_string(n_qubits));
    if (n_qubits > 8)
        throw ConfigError("statevector backend supports at most 8 qubits");
    if (n_layers < 1)
        throw ConfigError("circuit template needs n_layers >= 1, got " + std::to_string(n_layers));
}

void append_trainable_block(CircuitSpec& spec, int& next_param) {
    for (int q = 0; q < spec.n_qubits; ++q)
        for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ})
            spec.gates.push_back(GateOp::rotation(k, q, Binding::param(next_param++)));
}

void append_cnot_chain(CircuitSpec& spec) {
    for (int q = 0; q + 1 < spec.n_qubits; ++q)
        spec.gates.push_back(GateOp::cnot(q, q + 1));
}

} // namespace

CircuitSpec build_vqc(int n_qubits, int n_layers) {
    check_entangler_args(n_qubits, n_layers);
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    int next_param = 0;
    for (int layer = 0; layer < n_layers; ++layer) {
        append_trainable_block(spec, next_param);
        append_cnot_chain(spec);
    }
    spec.n_params = next_param;
    spec.n_inputs = 0;
    return spec;
}

CircuitSpec build_qnn_embedding(int n_qubits, int n_layers) {
    check_entangler_args(n_qubits, n_layers);
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    int next_param = 0;
    for (int layer = 0; layer < n_layers; ++layer) {
        // Input 0 carries the normalized x coordinate, input 1 the y coordinate.
        for (int q = 0; q < n_qubits; ++q)
            spec.gates.push_back(GateOp::rotation(GateKind::RY, q, Binding::input(q % 2)));
        append_trainable_block(spec, next_param);
        append_cnot_chain(spec);
    }
    spec.n_params = next_param;
    spec.n_inputs = 2;
    return spec;
}

CircuitSpec build_encoding_layer(int n_qubits) {
    if (n_qubits < 1) throw ConfigError("encoding layer needs n_qubits >= 1");
    if (n_qubits > 8) throw ConfigError("statevector backend supports at most 8 qubits");
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    for (int q = 0; q < n_qubits; ++q)
        spec.gates.push_back(GateOp::rotation(GateKind::RY, q, Binding::input(q)));
    spec.n_params = 0;
    spec.n_inputs = n_qubits;
    return spec;
}

CircuitSpec build_solver_circuit(int n_qubits, int vqc_layers) {
    CircuitSpec spec = build_encoding_layer(n_qubits);
    const CircuitSpec vqc = build_vqc(n_qubits, vqc_layers);
    spec.gates.insert(spec.gates.end(), vqc.gates.begin(), vqc.gates.end());
    spec.n_params = vqc.n_params;
    return spec;
}

void validate_circuit(const CircuitSpec& spec) {
    if (spec.n_qubits < 1 || spec.n_qubits > 8)
        throw ConfigError("circuit n_qubits out of range");
    std::vector<bool> param_seen(std::size_t(spec.n_params), false);
    std::vector<bool> input_seen(std::size_t(spec.n_inputs), false);
    for (const auto& g : spec.gates) {
        if (g.qubit < 0 || g.qubit >= spec.n_qubits)
            throw ConfigError("gate qubit out of range");
        if (g.kind == GateKind::CNOT) {
            if (g.qubit2 < 0 || g.qubit2 >= spec.n_qubits || g.qubit2 == g.qubit)
                throw ConfigError("cnot qubit pair invalid");
            continue;
        }
        switch (g.binding.kind) {
        case Binding::Kind::Param:
            if (g.binding.index < 0 || g.binding.index >= spec.n_params)
                throw ConfigError("param binding index out of range");
            param_seen[std::size_t(g.binding.index)] = true;
            break;
        case Binding::Kind::Input:
        case Binding::Kind::InputScaled:
            if (g.binding.index < 0 || g.binding.index >= spec.n_inputs)
                throw ConfigError("input binding index out of range");
            input_seen[std::size_t(g.binding.index)] = true;
            break;
        case Binding::Kind::Fixed:
            break;
        }
    }
    if (!std::all_of(param_seen.begin(), param_seen.end(), [](bool b) { return b; }))
        throw ConfigError("circuit param indices are not dense");
    if (!std::all_of(input_seen.begin(), input_seen.end(), [](bool b) { return b; }))
        throw ConfigError("circuit input indices are not dense");
}

std::string circuit_to_json(const CircuitSpec& spec) {
    nlohmann::json doc;
    doc["n_qubits"] = spec.n_qubits;
    doc["n_params"] = spec.n_params;
    doc["n_inputs"] = spec.n_inputs;
    auto gates = nlohmann::json::array();
    for (const auto& g : spec.gates) {
        nlohmann::json jg;
        switch (g.kind) {
        case GateKind::RX: jg["kind"] = "rx"; break;
        case GateKind::RY: jg["kind"] = "ry"; break;
        case GateKind::RZ: jg["kind"] = "rz"; break;
        case GateKind::CNOT: jg["kind"] = "cnot"; break;
        }
        if (g.kind == GateKind::CNOT) {
            jg["control"] = g.qubit;
            jg["target"] = g.qubit2;
        } else {
            jg["qubit"] = g.qubit;
            switch (g.binding.kind) {
            case Binding::Kind::Param:
                jg["binding"] = {{"type", "param"}, {"index", g.binding.index}};
                break;
            case Binding::Kind::Input:
                jg["binding"] = {{"type", "input"}, {"index", g.binding.index}};
                break;
            case Binding::Kind::InputScaled:
                jg["binding"] = {{"type", "input_scaled"},
                                 {"index", g.binding.index},
                                 {"factor", g.binding.scale}};
                break;
            case Binding::Kind::Fixed:
                jg["binding"] = {{"type", "fixed"}, {"value", g.binding.value}};
                break;
            }
        }
        gates.push_back(std::move(jg));
    }
    doc["gates"] = std::move(gates);
    return doc.dump(2);
}

} // namespace qcavity
