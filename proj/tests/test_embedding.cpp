#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcavity/embedding.hpp"
#include "qcavity/simulate.hpp"
#include "support/finite_difference.hpp"

using namespace qcavity;

namespace {
constexpr double pi = std::numbers::pi;
const Domain unit_square{};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

Jet2<double> random_cotangent(std::mt19937_64& rng, int order) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Jet2<double> j(order);
    for (int s = 0; s < j.size(); ++s) j[s] = dist(rng);
    return j;
}
} // namespace

TEST_CASE("coordinate normalization") {
    auto [xt, yt] = normalize(0.5, 0.5, unit_square, 2);
    CHECK(xt.value() == doctest::Approx(0.0));
    CHECK(yt.value() == doctest::Approx(0.0));
    CHECK(xt[slot::fx] == doctest::Approx(2.0));
    CHECK(xt[slot::fy] == 0.0);
    CHECK(yt[slot::fy] == doctest::Approx(2.0));
    CHECK(xt[slot::fxx] == 0.0);

    auto [x0, y0] = normalize(0.0, 0.0, unit_square, 1);
    CHECK(x0.value() == doctest::Approx(-1.0));
    CHECK(y0.value() == doctest::Approx(-1.0));
    auto [x1, y1] = normalize(1.0, 1.0, unit_square, 1);
    CHECK(x1.value() == doctest::Approx(1.0));
    CHECK(y1.value() == doctest::Approx(1.0));

    Domain wide{-2.0, 6.0, 0.0, 4.0};
    auto [wx, wy] = normalize(2.0, 1.0, wide, 1);
    CHECK(wx.value() == doctest::Approx(0.0));
    CHECK(wx[slot::fx] == doctest::Approx(0.25));
    CHECK(wy.value() == doctest::Approx(-0.5));
    CHECK(wy[slot::fy] == doctest::Approx(0.5));

    CHECK_THROWS_AS(normalize(1.5, 0.5, unit_square, 1), ConfigError);
    CHECK_THROWS_AS(normalize(0.5, -0.1, unit_square, 1), ConfigError);
}

TEST_CASE("fixed tower angles: pinned values") {
    auto [xt, yt] = normalize(0.5, 0.5, unit_square, 1);
    auto a = chebyshev_angles(xt, yt, 4);
    REQUIRE(a.size() == 4);
    CHECK(a[0].value() == doctest::Approx(pi / 2));
    CHECK(a[1].value() == doctest::Approx(pi / 2));
    CHECK(a[2].value() == doctest::Approx(pi));
    CHECK(a[3].value() == doctest::Approx(pi));

    auto [xe, ye] = normalize(1.0, 0.5, unit_square, 1);
    auto edge = chebyshev_angles(xe, ye, 2);
    CHECK(edge[0].value() == doctest::Approx(0.0));

    const double c = 0.5 * (std::cos(1.0) + 1.0); // x with xt = cos(1)
    auto [xc, yc] = normalize(c, c, unit_square, 1);
    auto two = chebyshev_angles(xc, yc, 2);
    CHECK(two[0].value() == doctest::Approx(1.0));
    CHECK(two[1].value() == doctest::Approx(1.0));
}

TEST_CASE("fixed tower angles: jets match the FD oracle and ignore parameters") {
    for (int q = 0; q < 4; ++q) {
        const double x0 = 0.37, y0 = 0.81;
        auto [xt, yt] = normalize(x0, y0, unit_square, 3);
        const auto a = chebyshev_angles(xt, yt, 4);
        const auto oracle = fd::jet_estimate(
            [&](double x, double y) {
                auto [xs, ys] = normalize(x, y, unit_square, 1);
                return chebyshev_angles(xs, ys, 4)[std::size_t(q)].value();
            },
            x0, y0, 3);
        for (int s = 0; s < a[std::size_t(q)].size(); ++s)
            CHECK(fd::close(a[std::size_t(q)][s], oracle[s], 1e-5, 1e-6));
    }
}

TEST_CASE("corner points stay differentiable after clamping") {
    auto [xt, yt] = normalize(0.0, 1.0, unit_square, 3);
    auto a = chebyshev_angles(xt, yt, 4);
    for (const auto& j : a)
        for (int s = 0; s < j.size(); ++s) CHECK(std::isfinite(j[s]));
    CHECK(a[0].value() == doctest::Approx(pi));
    CHECK(a[1].value() == doctest::Approx(0.0));
}

TEST_CASE("network embedding: zero parameters give zero angles") {
    MlpSpec spec{{2, 52, 4}};
    std::vector<double> theta(mlp_param_count(spec), 0.0);
    auto [xt, yt] = normalize(0.3, 0.7, unit_square, 3);
    auto a = fnn_angles(xt, yt, spec, theta);
    REQUIRE(a.size() == 4);
    for (const auto& j : a)
        for (int s = 0; s < j.size(); ++s) CHECK(j[s] == 0.0);
}

TEST_CASE("network embedding: jets match the FD oracle; angles bounded") {
    std::mt19937_64 rng(17);
    MlpSpec spec{{2, 7, 4}};
    auto theta = random_vec(rng, mlp_param_count(spec), -0.8, 0.8);
    const double x0 = 0.42, y0 = 0.58;
    auto [xt, yt] = normalize(x0, y0, unit_square, 3);
    auto a = fnn_angles(xt, yt, spec, theta);
    for (int q = 0; q < 4; ++q) {
        CHECK(std::abs(a[std::size_t(q)].value()) < pi);
        const auto oracle = fd::jet_estimate(
            [&](double x, double y) {
                auto [xs, ys] = normalize(x, y, unit_square, 1);
                return fnn_angles(xs, ys, spec, theta)[std::size_t(q)].value();
            },
            x0, y0, 3);
        for (int s = 0; s < a[std::size_t(q)].size(); ++s)
            CHECK(fd::close(a[std::size_t(q)][s], oracle[s], 1e-5, 1e-6));
    }
}

TEST_CASE("network embedding: parameter pullback matches FD") {
    // Objective S = sum_i jet_dot(w_i, alpha_i) for random cotangents w_i.
    std::mt19937_64 rng(29);
    MlpSpec spec{{2, 5, 3}};
    auto theta = random_vec(rng, mlp_param_count(spec), -0.9, 0.9);
    auto [xt, yt] = normalize(0.35, 0.6, unit_square, 3);
    std::vector<Jet2<double>> w;
    for (int i = 0; i < 3; ++i) w.push_back(random_cotangent(rng, 3));

    auto objective = [&](std::span<const double> th) {
        auto a = fnn_angles(xt, yt, spec, th);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += jet_dot(w[i], a[i]);
        return s;
    };

    MlpCache cache;
    (void)fnn_angles(xt, yt, spec, theta, &cache);
    std::vector<double> grad(theta.size(), 0.0);
    fnn_angle_backprop(spec, theta, cache, w, grad);

    for (std::size_t m = 0; m < theta.size(); ++m) {
        const double want = fd::param_derivative(
            [&](double v) {
                auto th = theta;
                th[m] = v;
                return objective(th);
            },
            theta[m]);
        CHECK(fd::close(grad[m], want, 1e-5, 1e-7));
    }
}

TEST_CASE("circuit embedding: identity point and angle bound") {
    auto spec = build_qnn_embedding(4, 2);
    std::vector<double> theta(std::size_t(spec.n_params), 0.0);
    auto [xt, yt] = normalize(0.5, 0.5, unit_square, 3);
    auto a = qnn_angles(xt, yt, theta, spec);
    REQUIRE(a.size() == 4);
    for (const auto& j : a) CHECK(j.value() == doctest::Approx(pi));

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        auto th = random_vec(rng, theta.size(), -2.5, 2.5);
        std::uniform_real_distribution<double> pos(0.0, 1.0);
        auto [xr, yr] = normalize(pos(rng), pos(rng), unit_square, 1);
        for (const auto& j : qnn_angles(xr, yr, th, spec))
            CHECK(std::abs(j.value()) <= pi + 1e-12);
    }
}

TEST_CASE("circuit embedding: jets match the FD oracle") {
    std::mt19937_64 rng(41);
    auto spec = build_qnn_embedding(2, 1);
    auto theta = random_vec(rng, std::size_t(spec.n_params), -1.2, 1.2);
    const double x0 = 0.62, y0 = 0.27;
    auto [xt, yt] = normalize(x0, y0, unit_square, 3);
    auto a = qnn_angles(xt, yt, theta, spec);
    for (int q = 0; q < 2; ++q) {
        const auto oracle = fd::jet_estimate(
            [&](double x, double y) {
                auto [xs, ys] = normalize(x, y, unit_square, 1);
                const double in[] = {xs.value(), ys.value()};
                const sim::Types<double> t{};
                return pi * expval_z(simulate_circuit<double>(spec, theta, in, t), q);
            },
            x0, y0, 3);
        // Absolute floor set by nested third-order FD noise on exact zeros.
        for (int s = 0; s < a[std::size_t(q)].size(); ++s)
            CHECK(fd::close(a[std::size_t(q)][s], oracle[s], 1e-5, 1e-5));
    }
}

TEST_CASE("circuit embedding: parameter pullback matches FD") {
    std::mt19937_64 rng(53);
    auto spec = build_qnn_embedding(2, 1);
    auto theta = random_vec(rng, std::size_t(spec.n_params), -1.0, 1.0);
    auto [xt, yt] = normalize(0.44, 0.71, unit_square, 3);
    std::vector<Jet2<double>> w;
    for (int i = 0; i < spec.n_qubits; ++i) w.push_back(random_cotangent(rng, 3));

    auto objective = [&](std::span<const double> th) {
        auto a = qnn_angles(xt, yt, th, spec);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += jet_dot(w[i], a[i]);
        return s;
    };

    std::vector<double> grad(theta.size(), 0.0);
    qnn_angle_backprop(spec, theta, xt, yt, w, grad);
    for (std::size_t m = 0; m < theta.size(); ++m) {
        const double want = fd::param_derivative(
            [&](double v) {
                auto th = theta;
                th[m] = v;
                return objective(th);
            },
            theta[m]);
        CHECK(fd::close(grad[m], want, 1e-5, 1e-7));
    }
}

TEST_CASE("angle values are independent of jet order") {
    std::mt19937_64 rng(67);
    auto qspec = build_qnn_embedding(4, 2);
    auto qtheta = random_vec(rng, std::size_t(qspec.n_params), -1.0, 1.0);
    MlpSpec fspec{{2, 6, 4}};
    auto ftheta = random_vec(rng, mlp_param_count(fspec), -1.0, 1.0);
    for (double x : {0.1, 0.5, 0.9}) {
        for (double y : {0.2, 0.8}) {
            auto [x1, y1] = normalize(x, y, unit_square, 1);
            auto [x3, y3] = normalize(x, y, unit_square, 3);
            auto c1 = chebyshev_angles(x1, y1, 4);
            auto c3 = chebyshev_angles(x3, y3, 4);
            auto f1 = fnn_angles(x1, y1, fspec, ftheta);
            auto f3 = fnn_angles(x3, y3, fspec, ftheta);
            auto q1 = qnn_angles(x1, y1, qtheta, qspec);
            auto q3 = qnn_angles(x3, y3, qtheta, qspec);
            for (int i = 0; i < 4; ++i) {
                CHECK(std::abs(c1[std::size_t(i)].value() - c3[std::size_t(i)].value()) < 1e-12);
                CHECK(std::abs(f1[std::size_t(i)].value() - f3[std::size_t(i)].value()) < 1e-12);
                CHECK(std::abs(q1[std::size_t(i)].value() - q3[std::size_t(i)].value()) < 1e-12);
            }
        }
    }
}
