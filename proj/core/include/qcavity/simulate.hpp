#pragma once

#include <span>

#include "qcavity/circuit.hpp"
#include "qcavity/statevector.hpp"

namespace qcavity {

namespace sim {

template <class S>
S resolve_angle(const GateOp& g, std::span<const double> params, std::span<const S> inputs,
                const Types<S>& t) {
    switch (g.binding.kind) {
    case Binding::Kind::Param:
        return t.lift_const(params[std::size_t(g.binding.index)]);
    case Binding::Kind::Input:
        return inputs[std::size_t(g.binding.index)];
    case Binding::Kind::InputScaled:
        return inputs[std::size_t(g.binding.index)] * g.binding.scale;
    case Binding::Kind::Fixed:
        return t.lift_const(g.binding.value);
    }
    throw ConfigError("unknown binding kind");
}

inline Pauli rotation_axis(GateKind k) {
    switch (k) {
    case GateKind::RX: return Pauli::X;
    case GateKind::RY: return Pauli::Y;
    case GateKind::RZ: return Pauli::Z;
    default: throw ConfigError("not a rotation gate");
    }
}

inline void check_bindings(const CircuitSpec& spec, std::size_t n_params, std::size_t n_inputs) {
    if (n_params != std::size_t(spec.n_params))
        throw ConfigError("parameter vector length " + std::to_string(n_params) +
                          " does not match circuit layout " + std::to_string(spec.n_params));
    if (n_inputs != std::size_t(spec.n_inputs))
        throw ConfigError("input vector length " + std::to_string(n_inputs) +
                          " does not match circuit layout " + std::to_string(spec.n_inputs));
}

// <bra| sigma_axis(qubit) |ket> without materializing sigma|ket>.
template <class A>
auto pauli_inner(const Statevector<A>& bra, const Statevector<A>& ket, int qubit, Pauli axis) {
    auto conj_mul = [](const A& b, const A& k) {
        if constexpr (std::is_same_v<A, std::complex<double>>) {
            return std::conj(b) * k;
        } else {
            return jet_mul(qcavity::conj(b), k);
        }
    };
    using R = decltype(conj_mul(std::declval<A>(), std::declval<A>()));
    const std::size_t mask = std::size_t(1) << qubit;
    const std::complex<double> i{0.0, 1.0};
    R acc{};
    bool first = true;
    auto add = [&](R v) {
        if (first) {
            acc = std::move(v);
            first = false;
        } else {
            acc += v;
        }
    };
    for (std::size_t k = 0; k < bra.size(); ++k) {
        if (k & mask) continue;
        const std::size_t k1 = k | mask;
        switch (axis) {
        case Pauli::X:
            add(conj_mul(bra.amp[k], ket.amp[k1]) + conj_mul(bra.amp[k1], ket.amp[k]));
            break;
        case Pauli::Y:
            add(conj_mul(bra.amp[k], ket.amp[k1] * (-i)) + conj_mul(bra.amp[k1], ket.amp[k] * i));
            break;
        case Pauli::Z:
            add(conj_mul(bra.amp[k], ket.amp[k]) -
                conj_mul(bra.amp[k1], ket.amp[k1]));
            break;
        }
    }
    return acc;
}

inline double imag_of(const std::complex<double>& v) { return v.imag(); }
inline Jet2<double> imag_of(const Jet2<std::complex<double>>& v) { return imag_part(v); }

inline double shift_angle(double angle, double delta) { return angle + delta; }
inline Jet2<double> shift_angle(Jet2<double> angle, double delta) {
    angle[slot::f] += delta;
    return angle;
}

} // namespace sim

/// Runs the gate program on |0...0>. `shift_gate`, when >= 0, adds `delta` to
/// the bound angle of that single gate occurrence (the parameter-shift hook).
template <class S>
Statevector<sim::AmpOf<S>> simulate_circuit(const CircuitSpec& spec,
                                            std::span<const double> params,
                                            std::span<const S> inputs, const sim::Types<S>& t,
                                            int shift_gate = -1, double delta = 0.0) {
    sim::check_bindings(spec, params.size(), inputs.size());
    auto st = zero_state(spec.n_qubits, t);
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        const GateOp& gate = spec.gates[g];
        if (gate.kind == GateKind::CNOT) {
            apply_cnot(st, gate.qubit, gate.qubit2);
            continue;
        }
        S angle = sim::resolve_angle(gate, params, inputs, t);
        if (int(g) == shift_gate) angle = sim::shift_angle(angle, delta);
        apply_rotation(st, gate.qubit, sim::rotation_axis(gate.kind), angle, t);
    }
    return st;
}

template <class S>
S run_circuit(const CircuitSpec& spec, std::span<const double> params,
              std::span<const S> inputs, const sim::Types<S>& t) {
    return expval_sum_z(simulate_circuit(spec, params, inputs, t));
}

template <class S>
S run_circuit(const CircuitSpec& spec, std::span<const double> params, std::span<const S> inputs,
              const sim::Types<S>& t, int shift_gate, double delta) {
    return expval_sum_z(simulate_circuit(spec, params, inputs, t, shift_gate, delta));
}

/// Scalar-only convenience entry point.
inline double run_circuit(const CircuitSpec& spec, std::span<const double> params,
                          std::span<const double> inputs = {}) {
    return run_circuit<double>(spec, params, inputs, sim::Types<double>{});
}

/// Exact derivative of run_circuit w.r.t. params[param_index]:
/// [f(theta + pi/2) - f(theta - pi/2)] / 2 per bound gate occurrence, summed.
/// Component-wise on jet outputs, so spatial-derivative slots are also
/// differentiated exactly in theta.
template <class S>
S param_shift_derivative(const CircuitSpec& spec, std::span<const double> params,
                         std::span<const S> inputs, int param_index, const sim::Types<S>& t) {
    if (param_index < 0 || param_index >= spec.n_params)
        throw ConfigError("param_shift_derivative: parameter index out of range");
    constexpr double half_pi = 1.5707963267948966;
    S acc{};
    bool first = true;
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        const GateOp& gate = spec.gates[g];
        if (gate.kind == GateKind::CNOT || gate.binding.kind != Binding::Kind::Param ||
            gate.binding.index != param_index)
            continue;
        const S plus = run_circuit(spec, params, inputs, t, int(g), half_pi);
        const S minus = run_circuit(spec, params, inputs, t, int(g), -half_pi);
        S term = plus - minus;
        term *= 0.5;
        if (first) {
            acc = std::move(term);
            first = false;
        } else {
            acc += term;
        }
    }
    if (first) throw ConfigError("param_shift_derivative: parameter is bound to no gate");
    return acc;
}

/// Shift-rule derivative w.r.t. the value of input `input_index` (constant
/// perturbation of the bound angles, chain-scaled for InputScaled bindings).
template <class S>
S input_shift_derivative(const CircuitSpec& spec, std::span<const double> params,
                         std::span<const S> inputs, int input_index, const sim::Types<S>& t) {
    if (input_index < 0 || input_index >= spec.n_inputs)
        throw ConfigError("input_shift_derivative: input index out of range");
    constexpr double half_pi = 1.5707963267948966;
    S acc{};
    bool first = true;
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        const GateOp& gate = spec.gates[g];
        if (gate.kind == GateKind::CNOT) continue;
        const auto bk = gate.binding.kind;
        if ((bk != Binding::Kind::Input && bk != Binding::Kind::InputScaled) ||
            gate.binding.index != input_index)
            continue;
        const S plus = run_circuit(spec, params, inputs, t, int(g), half_pi);
        const S minus = run_circuit(spec, params, inputs, t, int(g), -half_pi);
        S term = plus - minus;
        term *= 0.5 * (bk == Binding::Kind::InputScaled ? gate.binding.scale : 1.0);
        if (first) {
            acc = std::move(term);
            first = false;
        } else {
            acc += term;
        }
    }
    if (first) throw ConfigError("input_shift_derivative: input is bound to no gate");
    return acc;
}

/// Derivatives of one diagonal-observable expectation w.r.t. every parameter
/// and input, by a single reverse sweep (forward state, observable-weighted
/// bra, then gate-by-gate undo). Exactly equals the shift rule but costs O(G)
/// gate applications for the whole gradient instead of O(G) per parameter.
/// observable_qubit < 0 selects Sum_j Z_j, otherwise the single Z_q.
template <class S>
struct CircuitGradients {
    std::vector<S> d_params;
    std::vector<S> d_inputs;
};

template <class S>
CircuitGradients<S> adjoint_gradients(const CircuitSpec& spec, std::span<const double> params,
                                      std::span<const S> inputs, const sim::Types<S>& t,
                                      int observable_qubit = -1, bool want_params = true,
                                      bool want_inputs = false) {
    auto phi = simulate_circuit(spec, params, inputs, t);
    auto bra = phi;
    const int n = spec.n_qubits;
    for (std::size_t k = 0; k < bra.size(); ++k) {
        double w;
        if (observable_qubit < 0)
            w = double(n) - 2.0 * double(std::popcount(k));
        else
            w = (k >> observable_qubit) & 1 ? -1.0 : 1.0;
        bra.amp[k] = bra.amp[k] * std::complex<double>(w, 0.0);
    }
    CircuitGradients<S> out;
    auto zero = [&] {
        if constexpr (std::is_same_v<S, double>) {
            (void)t;
            return 0.0;
        } else {
            return Jet2<double>(t.order);
        }
    };
    if (want_params) out.d_params.assign(std::size_t(spec.n_params), zero());
    if (want_inputs) out.d_inputs.assign(std::size_t(spec.n_inputs), zero());
    for (std::size_t gi = spec.gates.size(); gi-- > 0;) {
        const GateOp& gate = spec.gates[gi];
        if (gate.kind == GateKind::CNOT) {
            apply_cnot(phi, gate.qubit, gate.qubit2);
            apply_cnot(bra, gate.qubit, gate.qubit2);
            continue;
        }
        const Pauli axis = sim::rotation_axis(gate.kind);
        const auto bk = gate.binding.kind;
        const bool need = (want_params && bk == Binding::Kind::Param) ||
                          (want_inputs &&
                           (bk == Binding::Kind::Input || bk == Binding::Kind::InputScaled));
        if (need) {
            // dU/da = -(i/2) sigma U gives dE/da = 2 Re<bra| -(i/2) sigma |phi>
            //       = Im <bra| sigma |phi>, with phi the post-gate state.
            S deriv = sim::imag_of(sim::pauli_inner(bra, phi, gate.qubit, axis));
            if (bk == Binding::Kind::Param) {
                out.d_params[std::size_t(gate.binding.index)] += deriv;
            } else {
                if (bk == Binding::Kind::InputScaled) deriv *= gate.binding.scale;
                out.d_inputs[std::size_t(gate.binding.index)] += deriv;
            }
        }
        const S angle = sim::resolve_angle(gate, params, inputs, t);
        apply_rotation(phi, gate.qubit, axis, -angle, t);
        apply_rotation(bra, gate.qubit, axis, -angle, t);
    }
    return out;
}

} // namespace qcavity
