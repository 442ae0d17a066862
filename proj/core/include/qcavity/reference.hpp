#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qcavity {

// Collocated uniform grid of primitive fields, row-major from the bottom row;
// node (i, j) lives at index j*nx + i, the lid is the j = ny-1 row.
struct FieldGrid {
    int nx = 0, ny = 0;
    std::vector<double> xs, ys; // axis coordinates, sizes nx and ny
    std::vector<double> u, v, p;
    double reynolds = 0.0;

    int index(int i, int j) const { return j * nx + i; }
};

// Five-point second difference (N + S + E + W - 4C) / h^2; exact for quadratics.
double laplacian_stencil(double center, double north, double south, double east, double west,
                         double h);

using OdeRhs = std::function<void(std::span<const double> y, std::span<double> dydt)>;

struct Rk45Outcome {
    bool accepted = false;
    double h_next = 0.0;
    double error_norm = 0.0; // scaled; accepted iff <= 1
};

// One attempt of the embedded Dormand-Prince 4(5) pair with the standard
// mixed atol/rtol error norm. Advances `state` in place when the error test
// passes; either way proposes the next step size. Throws when h drops below
// 1e-12 (stiffness guard).
Rk45Outcome rk45_step(const OdeRhs& rhs, std::vector<double>& state, double h, double rtol,
                      double atol);

struct ReferenceOptions {
    double steady_tol = 1e-6; // infinity norm of the pseudo-time derivative
    double rtol = 1e-4;
    double atol = 1e-8;
    long max_attempts = 2500000; // step attempts before declaring non-convergence
};

// Steady cavity flow by pseudo-time artificial compressibility (beta = 1):
// du/dtau = -(u u_x + v u_y) - p_x + (1/Re) lap u, likewise v,
// dp/dtau = -(u_x + v_y), second-order central differences, velocity
// Dirichlet rows pinned exactly (lid u = 1, walls 0), boundary pressure
// relaxed to its nearest interior neighbor. Integrates until the pseudo-time
// derivative falls below steady_tol, then gauges p so p(0,0) = 0.
FieldGrid solve_reference(double reynolds, int nx, int ny, const ReferenceOptions& opts = {});

struct FieldMetrics {
    double mse = 0.0;
    double rel_l2 = 0.0;
    double max_abs = 0.0;
    bool absolute_norm = false; // set when ||ref|| = 0 and rel_l2 holds ||pred - ref||
};

FieldMetrics field_metrics(std::span<const double> pred, std::span<const double> ref);

struct GridMetrics {
    FieldMetrics u, v, p, speed;
};

// Per-field error metrics on matching grids; pressure is compared after both
// sides are gauged to p(0,0) = 0, speed is the pointwise velocity magnitude.
GridMetrics metrics(const FieldGrid& pred, const FieldGrid& ref);

struct GridSample {
    double u = 0.0, v = 0.0, p = 0.0;
};

// Bilinear interpolation at an in-domain point.
GridSample grid_interpolate(const FieldGrid& g, double x, double y);

} // namespace qcavity
