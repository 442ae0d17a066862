#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <type_traits>

#include "qcavity/errors.hpp"

namespace qcavity {

/// Slot indices of a bivariate jet. Slots are grouped by total degree and
/// ordered by descending x-degree within a group:
///   (f, f_x, f_y, f_xx, f_xy, f_yy, f_xxx, f_xxy, f_xyy, f_yyy)
/// Slots hold raw derivative values, not factorial-scaled Taylor coefficients.
namespace slot {
inline constexpr int f = 0;
inline constexpr int fx = 1;
inline constexpr int fy = 2;
inline constexpr int fxx = 3;
inline constexpr int fxy = 4;
inline constexpr int fyy = 5;
inline constexpr int fxxx = 6;
inline constexpr int fxxy = 7;
inline constexpr int fxyy = 8;
inline constexpr int fyyy = 9;
} // namespace slot

namespace jet_detail {

inline constexpr int kMaxOrder = 3;
inline constexpr int kMaxSlots = 10;

// x-degree and y-degree of each slot.
inline constexpr std::array<int, kMaxSlots> kDegX = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
inline constexpr std::array<int, kMaxSlots> kDegY = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};

inline constexpr std::array<std::array<int, 4>, 4> kBinom = {{
    {{1, 0, 0, 0}},
    {{1, 1, 0, 0}},
    {{1, 2, 1, 0}},
    {{1, 3, 3, 1}},
}};

constexpr int slot_index(int dx, int dy) {
    const int d = dx + dy;
    return d * (d + 1) / 2 + dy;
}

constexpr int slot_count(int order) { return (order + 1) * (order + 2) / 2; }

inline void check_order(int order) {
    if (order < 1 || order > kMaxOrder)
        throw ConfigError("jet order must be in [1, 3], got " + std::to_string(order));
}

} // namespace jet_detail

/// Truncated bivariate Taylor jet of order 1, 2, or 3. The coefficient type T
/// is double for field values and gate angles, std::complex<double> inside
/// statevector amplitudes. Value semantics throughout; all operations require
/// both operands to carry the same order.
template <class T>
class Jet2 {
public:
    using value_type = T;

    Jet2() : order_(1) { c_.fill(T{}); }

    explicit Jet2(int order) : order_(order) {
        jet_detail::check_order(order);
        c_.fill(T{});
    }

    static Jet2 constant(T value, int order) {
        Jet2 j(order);
        j.c_[slot::f] = value;
        return j;
    }

    /// Jet of the coordinate function with the given first derivatives,
    /// e.g. variable(x, 2/w, 0, o) seeds an affine map with slope 2/w in x.
    static Jet2 variable(T value, T dx, T dy, int order) {
        Jet2 j(order);
        j.c_[slot::f] = value;
        j.c_[slot::fx] = dx;
        j.c_[slot::fy] = dy;
        return j;
    }

    int order() const { return order_; }
    int size() const { return jet_detail::slot_count(order_); }

    T& operator[](int s) { return c_[s]; }
    const T& operator[](int s) const { return c_[s]; }

    T value() const { return c_[slot::f]; }

    Jet2& operator+=(const Jet2& o) {
        require_same_order(o);
        for (int s = 0; s < size(); ++s) c_[s] += o.c_[s];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        require_same_order(o);
        for (int s = 0; s < size(); ++s) c_[s] -= o.c_[s];
        return *this;
    }
    Jet2& operator*=(const T& k) {
        for (int s = 0; s < size(); ++s) c_[s] *= k;
        return *this;
    }

    Jet2 operator-() const {
        Jet2 r(*this);
        for (int s = 0; s < r.size(); ++s) r.c_[s] = -r.c_[s];
        return r;
    }

    void require_same_order(const Jet2& o) const {
        if (order_ != o.order_)
            throw ConfigError("jet order mismatch: " + std::to_string(order_) + " vs " +
                              std::to_string(o.order_));
    }

private:
    int order_;
    std::array<T, jet_detail::kMaxSlots> c_;
};

enum class Axis { X, Y };

/// Seeds a coordinate variable: value slot plus a unit first derivative on the
/// chosen axis.
inline Jet2<double> jet_var(double value, Axis axis, int order) {
    return Jet2<double>::variable(value, axis == Axis::X ? 1.0 : 0.0,
                                  axis == Axis::Y ? 1.0 : 0.0, order);
}

template <class T>
Jet2<T> operator+(Jet2<T> a, const Jet2<T>& b) { return a += b; }

template <class T>
Jet2<T> operator-(Jet2<T> a, const Jet2<T>& b) { return a -= b; }

template <class T, class K>
    requires std::is_convertible_v<decltype(std::declval<T>() * std::declval<K>()), T>
Jet2<T> operator*(Jet2<T> a, const K& k) { return a *= T(k); }

template <class T, class K>
    requires std::is_convertible_v<decltype(std::declval<T>() * std::declval<K>()), T>
Jet2<T> operator*(const K& k, Jet2<T> a) { return a *= T(k); }

/// Leibniz product on raw derivatives:
///   (fg)^(a,b) = sum_{i<=a, j<=b} C(a,i) C(b,j) f^(i,j) g^(a-i, b-j)
/// truncated at the common order. Mixed coefficient types are allowed
/// (real jet times complex jet yields a complex jet).
template <class T1, class T2>
auto jet_mul(const Jet2<T1>& x, const Jet2<T2>& y) {
    using R = decltype(std::declval<T1>() * std::declval<T2>());
    using namespace jet_detail;
    if (x.order() != y.order())
        throw ConfigError("jet order mismatch in jet_mul");
    Jet2<R> out(x.order());
    const int n = out.size();
    for (int s = 0; s < n; ++s) {
        const int a = kDegX[s], b = kDegY[s];
        R acc{};
        for (int i = 0; i <= a; ++i) {
            for (int j = 0; j <= b; ++j) {
                const double w = double(kBinom[a][i] * kBinom[b][j]);
                acc += w * x[slot_index(i, j)] * y[slot_index(a - i, b - j)];
            }
        }
        out[s] = acc;
    }
    return out;
}

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) { return jet_mul(a, b); }

/// Supported elementary functions. arccos requires |value| < 1; callers that
/// evaluate at domain corners clamp the value slot to 1 - 1e-12 first.
enum class Elem { Sin, Cos, Exp, Tanh, Acos, Recip };

/// Derivatives 0..4 of fn at v. The fourth derivative feeds the adjoint of
/// composition, which is the jet of fn' and needs one extra level.
template <class T>
std::array<T, 5> elem_derivs(Elem fn, T v) {
    using std::cos;
    using std::exp;
    using std::sin;
    using std::tanh;
    std::array<T, 5> g{};
    switch (fn) {
    case Elem::Sin: {
        const T s = sin(v), c = cos(v);
        g = {s, c, -s, -c, s};
        break;
    }
    case Elem::Cos: {
        const T s = sin(v), c = cos(v);
        g = {c, -s, -c, s, c};
        break;
    }
    case Elem::Exp: {
        const T e = exp(v);
        g = {e, e, e, e, e};
        break;
    }
    case Elem::Tanh: {
        const T t = tanh(v);
        const T u = T(1) - t * t; // sech^2
        g = {t, u, T(-2) * t * u, u * (T(6) * t * t - T(2)), u * (T(16) * t - T(24) * t * t * t)};
        break;
    }
    case Elem::Acos: {
        if constexpr (std::is_floating_point_v<T>) {
            if (!(std::abs(v) < T(1)))
                throw ConfigError("jet_elem(acos): |value| must be < 1");
        }
        using std::acos;
        using std::sqrt;
        const T w = T(1) / sqrt(T(1) - v * v);
        const T w2 = w * w;
        g = {acos(v), -w, -v * w * w2, -(T(1) + T(2) * v * v) * w * w2 * w2,
             T(-3) * v * (T(3) + T(2) * v * v) * w * w2 * w2 * w2};
        break;
    }
    case Elem::Recip: {
        if constexpr (std::is_floating_point_v<T>) {
            if (v == T(0)) throw NumericError("jet division by zero value");
        }
        const T r = T(1) / v;
        const T r2 = r * r;
        g = {r, -r2, T(2) * r2 * r, T(-6) * r2 * r2, T(24) * r2 * r2 * r};
        break;
    }
    }
    return g;
}

namespace jet_detail {

// Composition by truncated series: with du = x minus its value slot,
//   g(x) = g0 + g1 du + g2/2 du^2 + g3/6 du^3
// which is exact for raw-derivative storage at order <= 3. `shift` selects the
// derivative table of fn (0) or fn' (1).
template <class T>
Jet2<T> compose(const std::array<T, 5>& g, const Jet2<T>& x, int shift) {
    Jet2<T> du = x;
    du[slot::f] = T{};
    Jet2<T> out = Jet2<T>::constant(g[shift], x.order());
    out += du * g[shift + 1];
    if (x.order() >= 2) {
        const Jet2<T> du2 = jet_mul(du, du);
        out += du2 * (g[shift + 2] / T(2));
        if (x.order() >= 3) out += jet_mul(du2, du) * (g[shift + 3] / T(6));
    }
    return out;
}

} // namespace jet_detail

/// Composition fn(x) via Faa di Bruno in truncated-series form.
template <class T>
Jet2<T> jet_elem(Elem fn, const Jet2<T>& x) {
    return jet_detail::compose(elem_derivs(fn, x.value()), x, 0);
}

/// Jet of fn'(x); this is the Jacobian factor of jet_elem, see adjoint_mul.
template <class T>
Jet2<T> jet_elem_prime(Elem fn, const Jet2<T>& x) {
    return jet_detail::compose(elem_derivs(fn, x.value()), x, 1);
}

template <class T> Jet2<T> sin(const Jet2<T>& x) { return jet_elem(Elem::Sin, x); }
template <class T> Jet2<T> cos(const Jet2<T>& x) { return jet_elem(Elem::Cos, x); }
template <class T> Jet2<T> exp(const Jet2<T>& x) { return jet_elem(Elem::Exp, x); }
template <class T> Jet2<T> tanh(const Jet2<T>& x) { return jet_elem(Elem::Tanh, x); }
template <class T> Jet2<T> acos(const Jet2<T>& x) { return jet_elem(Elem::Acos, x); }

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
    return jet_mul(a, jet_elem(Elem::Recip, b));
}

/// Slot-wise dot product over the active slots.
template <class T1, class T2>
auto jet_dot(const Jet2<T1>& a, const Jet2<T2>& b) {
    using R = decltype(std::declval<T1>() * std::declval<T2>());
    if (a.order() != b.order()) throw ConfigError("jet order mismatch in jet_dot");
    R acc{};
    for (int s = 0; s < a.size(); ++s) acc += a[s] * b[s];
    return acc;
}

/// Adjoint of multiplication by a fixed jet c: for any jet t,
///   jet_dot(z, jet_mul(c, t)) == jet_dot(adjoint_mul(c, z), t).
/// Because the Jacobian of both jet_mul (in one factor) and jet_elem is
/// multiplication by a fixed jet, this single primitive backpropagates
/// cotangents through all jet algebra used by the models.
template <class T>
Jet2<T> adjoint_mul(const Jet2<T>& c, const Jet2<T>& z) {
    using namespace jet_detail;
    if (c.order() != z.order()) throw ConfigError("jet order mismatch in adjoint_mul");
    Jet2<T> out(z.order());
    const int n = z.size();
    for (int t = 0; t < n; ++t) {
        const int ta = kDegX[t], tb = kDegY[t];
        T acc{};
        for (int s = 0; s < n; ++s) {
            const int sa = kDegX[s], sb = kDegY[s];
            if (sa < ta || sb < tb) continue;
            const double w = double(kBinom[sa][ta] * kBinom[sb][tb]);
            acc += w * z[s] * c[slot_index(sa - ta, sb - tb)];
        }
        out[t] = acc;
    }
    return out;
}

inline Jet2<std::complex<double>> to_complex(const Jet2<double>& x) {
    Jet2<std::complex<double>> out(x.order());
    for (int s = 0; s < x.size(); ++s) out[s] = std::complex<double>(x[s], 0.0);
    return out;
}

inline Jet2<std::complex<double>> conj(const Jet2<std::complex<double>>& x) {
    Jet2<std::complex<double>> out(x.order());
    for (int s = 0; s < x.size(); ++s) out[s] = std::conj(x[s]);
    return out;
}

inline Jet2<double> real_part(const Jet2<std::complex<double>>& x) {
    Jet2<double> out(x.order());
    for (int s = 0; s < x.size(); ++s) out[s] = x[s].real();
    return out;
}

inline Jet2<double> imag_part(const Jet2<std::complex<double>>& x) {
    Jet2<double> out(x.order());
    for (int s = 0; s < x.size(); ++s) out[s] = x[s].imag();
    return out;
}

inline bool all_finite(const Jet2<double>& x) {
    for (int s = 0; s < x.size(); ++s)
        if (!std::isfinite(x[s])) return false;
    return true;
}

} // namespace qcavity
