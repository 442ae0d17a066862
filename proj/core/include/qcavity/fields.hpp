#pragma once

#include "qcavity/errors.hpp"
#include "qcavity/jet.hpp"

namespace qcavity {

// One model evaluation at a point: pressure to first derivatives, stream
// function to third (second velocity derivatives live in psi's third order).
struct FieldSample {
    Jet2<double> p{1};
    Jet2<double> psi{3};
};

// Velocity components and derivatives read straight off the psi jet via
// u = psi_y, v = -psi_x. Divergence-free by construction: u_x + v_y is the
// same slot with opposite signs.
struct Velocities {
    double u, v;
    double u_x, u_y, u_xx, u_yy;
    double v_x, v_y, v_xx, v_yy;
};

inline Velocities velocities(const FieldSample& s) {
    if (s.psi.order() < 3) throw ConfigError("velocity derivatives need a third-order psi jet");
    Velocities vel;
    vel.u = s.psi[slot::fy];
    vel.v = -s.psi[slot::fx];
    vel.u_x = s.psi[slot::fxy];
    vel.u_y = s.psi[slot::fyy];
    vel.u_xx = s.psi[slot::fxxy];
    vel.u_yy = s.psi[slot::fyyy];
    vel.v_x = -s.psi[slot::fxx];
    vel.v_y = -s.psi[slot::fxy];
    vel.v_xx = -s.psi[slot::fxxx];
    vel.v_yy = -s.psi[slot::fxyy];
    return vel;
}

struct Residuals {
    double rx, ry;
};

// Steady momentum balance in residual form:
//   R_x = u u_x + v u_y + p_x - nu (u_xx + u_yy),  nu = 1/Re,
// and the same with v for R_y.
inline Residuals momentum_residuals(const FieldSample& s, double reynolds) {
    if (reynolds <= 0) throw ConfigError("reynolds must be positive");
    const double nu = 1.0 / reynolds;
    const auto vel = velocities(s);
    Residuals r;
    r.rx = vel.u * vel.u_x + vel.v * vel.u_y + s.p[slot::fx] - nu * (vel.u_xx + vel.u_yy);
    r.ry = vel.u * vel.v_x + vel.v * vel.v_y + s.p[slot::fy] - nu * (vel.v_xx + vel.v_yy);
    return r;
}

// Cotangents of S = c_rx R_x + c_ry R_y with respect to the (psi, p) jet
// slots, accumulated (+=) into the adjoint jets. Hand-derived from the
// residual formulas above; validated against finite differences in the tests.
inline void residual_adjoints(const FieldSample& s, double reynolds, double c_rx, double c_ry,
                              Jet2<double>& psi_adj, Jet2<double>& p_adj) {
    if (reynolds <= 0) throw ConfigError("reynolds must be positive");
    const double nu = 1.0 / reynolds;
    const auto& psi = s.psi;
    psi_adj[slot::fx] += c_rx * (-psi[slot::fyy]) + c_ry * psi[slot::fxy];
    psi_adj[slot::fy] += c_rx * psi[slot::fxy] + c_ry * (-psi[slot::fxx]);
    psi_adj[slot::fxx] += c_ry * (-psi[slot::fy]);
    psi_adj[slot::fxy] += c_rx * psi[slot::fy] + c_ry * psi[slot::fx];
    psi_adj[slot::fyy] += c_rx * (-psi[slot::fx]);
    psi_adj[slot::fxxx] += c_ry * nu;
    psi_adj[slot::fxxy] += c_rx * (-nu);
    psi_adj[slot::fxyy] += c_ry * nu;
    psi_adj[slot::fyyy] += c_rx * (-nu);
    p_adj[slot::fx] += c_rx;
    p_adj[slot::fy] += c_ry;
}

} // namespace qcavity
