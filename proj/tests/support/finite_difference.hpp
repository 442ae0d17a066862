#pragma once

// Independent finite-difference oracles used to cross-check analytic
// derivatives. Central differences with one Richardson refinement; higher and
// mixed partials are built by nesting, so the oracle shares no code with the
// jet propagation it validates.

#include <functional>

#include "qcavity/jet.hpp"

namespace fd {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// (4 D(h/2) - D(h)) / 3 kills the leading h^2 truncation term.
inline double central(const Fn1& f, double x, double h) {
    auto d = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

inline Fn2 d_dx(Fn2 f, double h) {
    return [f, h](double x, double y) {
        return central([&](double t) { return f(t, y); }, x, h);
    };
}

inline Fn2 d_dy(Fn2 f, double h) {
    return [f, h](double x, double y) {
        return central([&](double t) { return f(x, t); }, y, h);
    };
}

// Estimates every slot of the order-`order` jet of f at (x, y) by nested
// differencing of the plain scalar function.
inline qcavity::Jet2<double> jet_estimate(const Fn2& f, double x, double y, int order,
                                          double h = 1e-3) {
    qcavity::Jet2<double> out(order);
    for (int s = 0; s < out.size(); ++s) {
        const int a = qcavity::jet_detail::kDegX[s];
        const int b = qcavity::jet_detail::kDegY[s];
        Fn2 g = f;
        for (int i = 0; i < a; ++i) g = d_dx(g, h);
        for (int j = 0; j < b; ++j) g = d_dy(g, h);
        out[s] = g(x, y);
    }
    return out;
}

// One-dimensional central difference (no nesting) for parameter derivatives.
inline double param_derivative(const Fn1& f, double theta, double h = 1e-4) {
    return (f(theta + h) - f(theta - h)) / (2.0 * h);
}

inline bool close(double a, double b, double rtol, double atol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rtol * scale + atol;
}

} // namespace fd
