#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qcavity/errors.hpp"
#include "qcavity/jet.hpp"

namespace qcavity {

enum class Pauli { X, Y, Z };

/// Dense statevector over n_qubits <= 8 qubits, little-endian (qubit 0 is the
/// least significant bit of the amplitude index). The amplitude type A is
/// std::complex<double> for plain evaluation or Jet2<std::complex<double>>
/// when gate angles carry spatial jets.
template <class A>
struct Statevector {
    int n_qubits = 0;
    std::vector<A> amp;

    std::size_t size() const { return amp.size(); }
};

namespace sim {

// Maps an angle scalar type S in {double, Jet2<double>} to its amplitude type
// and provides the lifts used by gate application.
template <class S>
struct Types;

template <>
struct Types<double> {
    using Amp = std::complex<double>;
    static Amp one() { return {1.0, 0.0}; }
    static Amp zero() { return {0.0, 0.0}; }
    static double half_cos(double a) { return std::cos(0.5 * a); }
    static double half_sin(double a) { return std::sin(0.5 * a); }
    // phase * s as an amplitude factor.
    static Amp factor(double s, std::complex<double> phase) { return phase * s; }
    static Amp mul(const Amp& x, const Amp& y) { return x * y; }
    static double lift_const(double v) { return v; }
};

template <>
struct Types<Jet2<double>> {
    using Amp = Jet2<std::complex<double>>;
    int order;
    Amp one() const { return Amp::constant({1.0, 0.0}, order); }
    Amp zero() const { return Amp(order); }
    static Jet2<double> half_cos(const Jet2<double>& a) { return cos(a * 0.5); }
    static Jet2<double> half_sin(const Jet2<double>& a) { return sin(a * 0.5); }
    static Amp factor(const Jet2<double>& s, std::complex<double> phase) {
        Amp out(s.order());
        for (int k = 0; k < s.size(); ++k) out[k] = phase * s[k];
        return out;
    }
    static Amp mul(const Amp& x, const Amp& y) { return jet_mul(x, y); }
    Jet2<double> lift_const(double v) const { return Jet2<double>::constant(v, order); }
};

template <class S>
using AmpOf = typename Types<S>::Amp;

} // namespace sim

/// |0...0> with amplitude type chosen by the traits instance.
template <class S>
Statevector<sim::AmpOf<S>> zero_state(int n_qubits, const sim::Types<S>& t) {
    if (n_qubits < 1 || n_qubits > 8)
        throw ConfigError("statevector supports 1..8 qubits, got " + std::to_string(n_qubits));
    Statevector<sim::AmpOf<S>> st;
    st.n_qubits = n_qubits;
    st.amp.assign(std::size_t(1) << n_qubits, t.zero());
    st.amp[0] = t.one();
    return st;
}

namespace sim {

inline void check_qubit(int n_qubits, int q) {
    if (q < 0 || q >= n_qubits)
        throw ConfigError("qubit index " + std::to_string(q) + " out of range for " +
                          std::to_string(n_qubits) + " qubits");
}

} // namespace sim

/// exp(-i angle sigma_axis / 2) on one qubit. Jet angles propagate through the
/// half-angle trig slot-exactly.
template <class S>
void apply_rotation(Statevector<sim::AmpOf<S>>& st, int qubit, Pauli axis, const S& angle,
                    const sim::Types<S>& t) {
    sim::check_qubit(st.n_qubits, qubit);
    using Amp = sim::AmpOf<S>;
    const S c = t.half_cos(angle);
    const S s = t.half_sin(angle);
    const std::size_t mask = std::size_t(1) << qubit;
    const std::size_t n = st.size();
    if (axis == Pauli::Z) {
        // diag(e^{-i a/2}, e^{+i a/2})
        const Amp d0 = t.factor(c, {1.0, 0.0}) + t.factor(s, {0.0, -1.0});
        const Amp d1 = t.factor(c, {1.0, 0.0}) + t.factor(s, {0.0, 1.0});
        for (std::size_t k = 0; k < n; ++k)
            st.amp[k] = t.mul((k & mask) ? d1 : d0, st.amp[k]);
        return;
    }
    const Amp diag = t.factor(c, {1.0, 0.0});
    Amp f01, f10;
    if (axis == Pauli::X) {
        f01 = t.factor(s, {0.0, -1.0});
        f10 = t.factor(s, {0.0, -1.0});
    } else { // Y
        f01 = t.factor(s, {-1.0, 0.0});
        f10 = t.factor(s, {1.0, 0.0});
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (k & mask) continue;
        const std::size_t k1 = k | mask;
        const Amp a0 = st.amp[k];
        const Amp a1 = st.amp[k1];
        st.amp[k] = t.mul(diag, a0) + t.mul(f01, a1);
        st.amp[k1] = t.mul(f10, a0) + t.mul(diag, a1);
    }
}

template <class A>
void apply_cnot(Statevector<A>& st, int control, int target) {
    sim::check_qubit(st.n_qubits, control);
    sim::check_qubit(st.n_qubits, target);
    if (control == target) throw ConfigError("cnot control and target must differ");
    const std::size_t cm = std::size_t(1) << control;
    const std::size_t tm = std::size_t(1) << target;
    for (std::size_t k = 0; k < st.size(); ++k)
        if ((k & cm) && !(k & tm)) std::swap(st.amp[k], st.amp[k | tm]);
}

/// sigma_axis on one qubit (used by the reverse-accumulation sweep).
template <class A>
void apply_pauli(Statevector<A>& st, int qubit, Pauli axis) {
    sim::check_qubit(st.n_qubits, qubit);
    const std::size_t mask = std::size_t(1) << qubit;
    const std::complex<double> i{0.0, 1.0};
    for (std::size_t k = 0; k < st.size(); ++k) {
        if (k & mask) continue;
        const std::size_t k1 = k | mask;
        switch (axis) {
        case Pauli::X:
            std::swap(st.amp[k], st.amp[k1]);
            break;
        case Pauli::Y: {
            const A a0 = st.amp[k];
            st.amp[k] = st.amp[k1] * (-i);
            st.amp[k1] = a0 * i;
            break;
        }
        case Pauli::Z:
            st.amp[k1] = st.amp[k1] * std::complex<double>(-1.0, 0.0);
            break;
        }
    }
}

namespace sim {

// |a|^2 for both amplitude kinds; jets return the real jet of a * conj(a) and
// enforce the cancellation of the imaginary slots.
inline double abs_sq(const std::complex<double>& a) { return std::norm(a); }

inline Jet2<double> abs_sq(const Jet2<std::complex<double>>& a) {
    const auto prod = jet_mul(qcavity::conj(a), a);
    for (int s = 0; s < prod.size(); ++s)
        if (std::abs(prod[s].imag()) >= 1e-10)
            throw NumericError("expectation imaginary part exceeds 1e-10");
    return real_part(prod);
}

template <class A>
auto weighted_parity_sum(const Statevector<A>& st, int fixed_qubit) {
    // fixed_qubit < 0 sums Z over all qubits, otherwise a single Z_q.
    using R = decltype(abs_sq(std::declval<A>()));
    R acc{};
    bool first = true;
    for (std::size_t k = 0; k < st.size(); ++k) {
        double w;
        if (fixed_qubit < 0)
            w = double(st.n_qubits) - 2.0 * double(std::popcount(k));
        else
            w = (k >> fixed_qubit) & 1 ? -1.0 : 1.0;
        if (w == 0.0) continue;
        R term = abs_sq(st.amp[k]);
        term *= w;
        if (first) {
            acc = term;
            first = false;
        } else {
            acc += term;
        }
    }
    return acc;
}

} // namespace sim

/// Sum_j <Z_j>, in [-n_qubits, n_qubits] at the value level.
template <class A>
auto expval_sum_z(const Statevector<A>& st) {
    return sim::weighted_parity_sum(st, -1);
}

/// Single-qubit <Z_q> (the per-qubit readout of the trainable embedding).
template <class A>
auto expval_z(const Statevector<A>& st, int qubit) {
    sim::check_qubit(st.n_qubits, qubit);
    return sim::weighted_parity_sum(st, qubit);
}

/// Value-level squared 2-norm; 1 within 1e-12 for any gate sequence.
template <class A>
double norm_sq(const Statevector<A>& st) {
    double acc = 0.0;
    for (const auto& a : st.amp) {
        if constexpr (std::is_same_v<A, std::complex<double>>) {
            acc += std::norm(a);
        } else {
            acc += std::norm(a.value());
        }
    }
    return acc;
}

/// <bra|ket> with conjugation on the bra side.
template <class A>
auto inner_product(const Statevector<A>& bra, const Statevector<A>& ket) {
    if constexpr (std::is_same_v<A, std::complex<double>>) {
        std::complex<double> acc{};
        for (std::size_t k = 0; k < bra.size(); ++k) acc += std::conj(bra.amp[k]) * ket.amp[k];
        return acc;
    } else {
        Jet2<std::complex<double>> acc(bra.amp[0].order());
        for (std::size_t k = 0; k < bra.size(); ++k)
            acc += jet_mul(qcavity::conj(bra.amp[k]), ket.amp[k]);
        return acc;
    }
}

} // namespace qcavity
