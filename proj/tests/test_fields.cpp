#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qcavity/collocation.hpp"
#include "qcavity/fields.hpp"
#include "support/finite_difference.hpp"

using namespace qcavity;

namespace {

// Manufactured sample with psi given as an exact jet and p = 0.
FieldSample psi_sample(const Jet2<double>& psi) {
    FieldSample s;
    s.psi = psi;
    s.p = Jet2<double>(1);
    return s;
}

std::mt19937_64 field_rng(97);

FieldSample random_sample(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FieldSample s;
    for (int k = 0; k < s.psi.size(); ++k) s.psi[k] = dist(rng);
    for (int k = 0; k < s.p.size(); ++k) s.p[k] = dist(rng);
    return s;
}

} // namespace

TEST_CASE("grid partition counts") {
    auto big = make_collocation(50, 50);
    CHECK(big.lid.size() == 50);
    CHECK(big.wall.size() == 146);
    CHECK(big.interior.size() == 2304);

    auto tiny = make_collocation(3, 3);
    CHECK(tiny.lid.size() == 3);
    CHECK(tiny.wall.size() == 5);
    CHECK(tiny.interior.size() == 1);
    CHECK(tiny.interior[0].x == doctest::Approx(0.5));
    CHECK(tiny.interior[0].y == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_collocation(2, 5), ConfigError);
    CHECK_THROWS_AS(make_collocation(5, 2), ConfigError);
}

TEST_CASE("grid partition covers every node exactly once") {
    for (auto [nx, ny] : {std::pair{4, 7}, {5, 5}, {3, 9}}) {
        auto set = make_collocation(nx, ny);
        CHECK(int(set.lid.size() + set.wall.size() + set.interior.size()) == nx * ny);
        std::set<std::pair<double, double>> seen;
        auto note = [&](const std::vector<Point>& pts) {
            for (const auto& p : pts) seen.insert({p.x, p.y});
        };
        note(set.lid);
        note(set.wall);
        note(set.interior);
        CHECK(int(seen.size()) == nx * ny);
        for (const auto& p : set.lid) CHECK(p.y == 1.0);
        for (const auto& p : set.wall) {
            CHECK(p.y < 1.0);
            CHECK((p.x == 0.0 || p.x == 1.0 || p.y == 0.0));
        }
        for (const auto& p : set.interior) {
            CHECK(p.x > 0.0);
            CHECK(p.x < 1.0);
            CHECK(p.y > 0.0);
            CHECK(p.y < 1.0);
        }
        CHECK(set.reference_point.x == 0.0);
        CHECK(set.reference_point.y == 0.0);
    }
    // Both top corners drive the lid.
    auto set = make_collocation(4, 4);
    CHECK(std::any_of(set.lid.begin(), set.lid.end(),
                      [](const Point& p) { return p.x == 0.0; }));
    CHECK(std::any_of(set.lid.begin(), set.lid.end(),
                      [](const Point& p) { return p.x == 1.0; }));
}

TEST_CASE("velocities from the stream function") {
    // psi = x y at (2,3): u = x, v = -y; divergence splits as u_x = 1, v_y = -1.
    auto s = psi_sample(jet_var(2.0, Axis::X, 3) * jet_var(3.0, Axis::Y, 3));
    auto vel = velocities(s);
    CHECK(vel.u == doctest::Approx(2.0));
    CHECK(vel.v == doctest::Approx(-3.0));
    CHECK(vel.u_x == doctest::Approx(1.0));
    CHECK(vel.v_y == doctest::Approx(-1.0));

    // psi = x^2 y at (1,1).
    const auto jx = jet_var(1.0, Axis::X, 3);
    auto s2 = psi_sample(jx * jx * jet_var(1.0, Axis::Y, 3));
    auto vel2 = velocities(s2);
    CHECK(vel2.u == doctest::Approx(1.0));
    CHECK(vel2.v == doctest::Approx(-2.0));
    CHECK(vel2.u_xx == doctest::Approx(2.0));
    CHECK(vel2.u_yy == 0.0);

    FieldSample low;
    low.psi = Jet2<double>(2);
    CHECK_THROWS_AS(velocities(low), ConfigError);
}

TEST_CASE("divergence vanishes structurally") {
    for (int rep = 0; rep < 20; ++rep) {
        auto s = random_sample(field_rng);
        auto vel = velocities(s);
        CHECK(vel.u_x + vel.v_y == 0.0);
    }
}

TEST_CASE("momentum residuals: pinned values") {
    FieldSample zero;
    auto r0 = momentum_residuals(zero, 10.0);
    CHECK(r0.rx == 0.0);
    CHECK(r0.ry == 0.0);

    auto uniform = psi_sample(jet_var(0.6, Axis::Y, 3)); // psi = y: u = 1 everywhere
    auto ru = momentum_residuals(uniform, 10.0);
    CHECK(ru.rx == 0.0);
    CHECK(ru.ry == 0.0);
}

TEST_CASE("momentum residuals: symbolic oracle at (1,1)") {
    // psi = x^2 y, p = 0, Re = 10: R_x = 2x^3 - 0.2, R_y = 2x^2 y.
    FieldSample s;
    const auto jx = jet_var(1.0, Axis::X, 3);
    const auto jy = jet_var(1.0, Axis::Y, 3);
    s.psi = jx * jx * jy;
    s.p = Jet2<double>(1);
    auto r = momentum_residuals(s, 10.0);
    CHECK(std::abs(r.rx - 1.8) < 1e-10);
    CHECK(std::abs(r.ry - 2.0) < 1e-10);
    CHECK_THROWS_AS(momentum_residuals(s, 0.0), ConfigError);
}

TEST_CASE("residual slot adjoints match FD over every jet slot") {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        auto s = random_sample(field_rng);
        const double re = 0.5 + 20.0 * std::abs(dist(field_rng));
        const double c_rx = dist(field_rng);
        const double c_ry = dist(field_rng);
        Jet2<double> psi_adj(3), p_adj(1);
        residual_adjoints(s, re, c_rx, c_ry, psi_adj, p_adj);
        auto objective = [&](const FieldSample& f) {
            auto r = momentum_residuals(f, re);
            return c_rx * r.rx + c_ry * r.ry;
        };
        const double h = 1e-6;
        for (int k = 0; k < s.psi.size(); ++k) {
            auto plus = s, minus = s;
            plus.psi[k] += h;
            minus.psi[k] -= h;
            const double want = (objective(plus) - objective(minus)) / (2 * h);
            CHECK(fd::close(psi_adj[k], want, 1e-7, 1e-9));
        }
        for (int k = 0; k < s.p.size(); ++k) {
            auto plus = s, minus = s;
            plus.p[k] += h;
            minus.p[k] -= h;
            const double want = (objective(plus) - objective(minus)) / (2 * h);
            CHECK(fd::close(p_adj[k], want, 1e-7, 1e-9));
        }
    }
}
