#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "qcavity/model.hpp"
#include "support/finite_difference.hpp"

using namespace qcavity;

namespace {

constexpr double pi = std::numbers::pi;

ModelConfig tiny_config(ModelKind kind) {
    ModelConfig c;
    c.kind = kind;
    c.n_qubits = 2;
    c.vqc_layers = 1;
    c.embedding_layers = 1;
    c.fnn_hidden = 3;
    c.pinn_hidden = {3};
    return c;
}

std::vector<double> random_theta(const ModelConfig& c, std::uint64_t seed, double scale = 1.0) {
    auto theta = init_params(c, seed);
    for (auto& v : theta) v *= scale;
    return theta;
}

} // namespace

TEST_CASE("field evaluation: all-zero parameters at the center") {
    // With every angle zero the embedding emits alpha = pi on each qubit and
    // the encoding flips all of them. The CNOT chain then walks the flipped
    // state through a period-4 orbit, so the Z-sum readout depends on the
    // layer count: -4 when layers % 4 == 0, and 0 for the 10-layer default.
    ModelConfig c;
    c.kind = ModelKind::Qnn;
    c.n_qubits = 4;
    c.vqc_layers = 4;
    c.embedding_layers = 5;
    auto m = make_model(c);
    std::vector<double> theta(m.layout.total, 0.0);
    auto s = eval_fields(m, theta, 0.5, 0.5);
    CHECK(s.p.value() == doctest::Approx(-4.0));
    CHECK(s.psi.value() == doctest::Approx(-4.0));

    c.vqc_layers = 10;
    auto m10 = make_model(c);
    std::vector<double> theta10(m10.layout.total, 0.0);
    auto s10 = eval_fields(m10, theta10, 0.5, 0.5);
    CHECK(s10.psi.value() == doctest::Approx(0.0));
}

TEST_CASE("field values stay within the readout bound") {
    std::mt19937_64 rng(11);
    for (ModelKind kind : {ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn}) {
        auto cfg = tiny_config(kind);
        auto m = make_model(cfg);
        for (int rep = 0; rep < 5; ++rep) {
            auto theta = random_theta(cfg, rng(), 10.0);
            std::uniform_real_distribution<double> pos(0.0, 1.0);
            auto s = eval_fields(m, theta, pos(rng), pos(rng));
            CHECK(std::abs(s.p.value()) <= cfg.n_qubits + 1e-12);
            CHECK(std::abs(s.psi.value()) <= cfg.n_qubits + 1e-12);
        }
    }
}

TEST_CASE("field jets match the spatial FD oracle") {
    std::mt19937_64 rng(23);
    for (ModelKind kind :
         {ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn, ModelKind::ClassicalPinn}) {
        auto cfg = tiny_config(kind);
        auto m = make_model(cfg);
        auto theta = random_theta(cfg, 7, kind == ModelKind::ClassicalPinn ? 1.0 : 8.0);
        const double x0 = 0.41, y0 = 0.67;
        auto s = eval_fields(m, theta, x0, y0);
        const auto oracle = fd::jet_estimate(
            [&](double x, double y) { return eval_fields(m, theta, x, y).psi.value(); }, x0, y0,
            3);
        for (int k = 0; k < s.psi.size(); ++k) {
            INFO("kind ", int(kind), " slot ", k);
            CHECK(fd::close(s.psi[k], oracle[k], 1e-4, 1e-4));
        }
        const auto p_oracle = fd::jet_estimate(
            [&](double x, double y) { return eval_fields(m, theta, x, y).p.value(); }, x0, y0, 1);
        for (int k = 0; k < s.p.size(); ++k) CHECK(fd::close(s.p[k], p_oracle[k], 1e-5, 1e-7));
    }
}

TEST_CASE("divergence vanishes for every model kind") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> pos(0.02, 0.98);
    for (ModelKind kind :
         {ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn, ModelKind::ClassicalPinn}) {
        auto cfg = tiny_config(kind);
        auto m = make_model(cfg);
        for (int rep = 0; rep < 25; ++rep) {
            auto theta = random_theta(cfg, rng(), 5.0);
            auto s = eval_fields(m, theta, pos(rng), pos(rng));
            auto vel = velocities(s);
            CHECK(vel.u_x + vel.v_y == 0.0);
        }
    }
}

TEST_CASE("zero classical network: loss reduces to the lid penalty") {
    auto cfg = tiny_config(ModelKind::ClassicalPinn);
    auto m = make_model(cfg);
    std::vector<double> theta(m.layout.total, 0.0);
    auto colloc = make_collocation(5, 5);
    const double lambda_b = 10.0;
    auto bd = total_loss(m, theta, colloc, 10.0, lambda_b);
    CHECK(bd.pde == 0.0);
    CHECK(bd.wall == 0.0);
    CHECK(bd.lid == doctest::Approx(1.0));
    CHECK(bd.ref == 0.0);
    CHECK(bd.total == doctest::Approx(lambda_b));
}

TEST_CASE("loss breakdown recomputed from field evaluations") {
    // Independent assembly oracle: evaluate the fields at every collocation
    // point and apply the written loss formulas directly.
    auto cfg = tiny_config(ModelKind::Qnn);
    auto m = make_model(cfg);
    auto theta = random_theta(cfg, 3, 6.0);
    auto colloc = make_collocation(4, 4);
    const double re = 10.0, lambda_b = 7.5;
    auto bd = total_loss(m, theta, colloc, re, lambda_b);

    double pde = 0.0;
    for (const auto& pt : colloc.interior) {
        auto r = momentum_residuals(eval_fields(m, theta, pt.x, pt.y), re);
        pde += r.rx * r.rx + r.ry * r.ry;
    }
    pde /= double(colloc.interior.size());
    double wall = 0.0;
    for (const auto& pt : colloc.wall) {
        auto vel = velocities(eval_fields(m, theta, pt.x, pt.y));
        wall += vel.u * vel.u + vel.v * vel.v;
    }
    wall /= double(colloc.wall.size());
    double lid = 0.0;
    for (const auto& pt : colloc.lid) {
        auto vel = velocities(eval_fields(m, theta, pt.x, pt.y));
        lid += (vel.u - 1.0) * (vel.u - 1.0) + vel.v * vel.v;
    }
    lid /= double(colloc.lid.size());
    const double p0 = eval_fields(m, theta, 0.0, 0.0).p.value();

    CHECK(bd.pde == doctest::Approx(pde).epsilon(1e-12));
    CHECK(bd.wall == doctest::Approx(wall).epsilon(1e-12));
    CHECK(bd.lid == doctest::Approx(lid).epsilon(1e-12));
    CHECK(bd.ref == doctest::Approx(p0 * p0).epsilon(1e-12));
    CHECK(std::abs(bd.total - (bd.pde + lambda_b * (bd.wall + bd.lid + bd.ref))) < 1e-12);
    CHECK(bd.total >= 0.0);
}

TEST_CASE("boundary weight zero leaves only the interior term") {
    auto cfg = tiny_config(ModelKind::Chebyshev);
    auto m = make_model(cfg);
    auto theta = random_theta(cfg, 5, 4.0);
    auto colloc = make_collocation(4, 4);
    auto bd = total_loss(m, theta, colloc, 10.0, 0.0);
    CHECK(bd.total == bd.pde);
}

TEST_CASE("loss is a set function of each point class") {
    auto cfg = tiny_config(ModelKind::Fnn);
    auto m = make_model(cfg);
    auto theta = random_theta(cfg, 9, 3.0);
    auto colloc = make_collocation(4, 4);
    auto bd = total_loss(m, theta, colloc, 10.0, 10.0);
    std::mt19937_64 rng(77);
    auto shuffled = colloc;
    std::shuffle(shuffled.interior.begin(), shuffled.interior.end(), rng);
    std::shuffle(shuffled.wall.begin(), shuffled.wall.end(), rng);
    std::shuffle(shuffled.lid.begin(), shuffled.lid.end(), rng);
    auto bd2 = total_loss(m, theta, shuffled, 10.0, 10.0);
    CHECK(bd2.total == doctest::Approx(bd.total).epsilon(1e-12));
}

TEST_CASE("shifting any circuit angle by 2 pi preserves the loss") {
    auto cfg = tiny_config(ModelKind::Qnn);
    auto m = make_model(cfg);
    auto theta = random_theta(cfg, 13, 5.0);
    auto colloc = make_collocation(3, 3);
    const auto base = total_loss(m, theta, colloc, 10.0, 10.0).total;
    for (std::size_t k : {std::size_t(0), m.layout.vqc_p.offset, m.layout.embed_psi.offset,
                          m.layout.vqc_psi.offset + 3}) {
        auto shifted = theta;
        shifted[k] += 2 * pi;
        CHECK(std::abs(total_loss(m, shifted, colloc, 10.0, 10.0).total - base) < 1e-10);
    }
}

TEST_CASE("loss gradient matches finite differences on tiny configs") {
    auto colloc = make_collocation(3, 3);
    const double re = 10.0, lambda_b = 10.0;
    for (ModelKind kind :
         {ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn, ModelKind::ClassicalPinn}) {
        auto cfg = tiny_config(kind);
        // The arccos tower has ~1e6 derivative slopes at domain edges, which
        // drives the boundary loss to ~1e12 and buries every O(1) gradient
        // component under FD roundoff (eps * L / h ~ 1). Check that kind's
        // machinery on an inset grid instead, where the oracle can resolve
        // all components; edge behavior is exercised by the loss-value tests.
        if (kind == ModelKind::Chebyshev) cfg.domain = {-0.5, 1.5, -0.5, 1.5};
        auto m = make_model(cfg);
        auto theta = random_theta(cfg, 21, kind == ModelKind::ClassicalPinn ? 1.0 : 6.0);
        LossBreakdown bd;
        auto grad = loss_gradient(m, theta, colloc, re, lambda_b, &bd);
        CHECK(grad.size() == std::size_t(total_param_count(cfg)));
        CHECK(bd.total == doctest::Approx(total_loss(m, theta, colloc, re, lambda_b).total));
        const double h = 1e-4;
        for (std::size_t k = 0; k < grad.size(); ++k) {
            auto plus = theta, minus = theta;
            plus[k] += h;
            minus[k] -= h;
            const double want = (total_loss(m, plus, colloc, re, lambda_b).total -
                                 total_loss(m, minus, colloc, re, lambda_b).total) /
                                (2 * h);
            INFO("kind ", int(kind), " param ", k);
            CHECK(fd::close(grad[k], want, 1e-4, 1e-7));
        }
    }
}

TEST_CASE("gradient accumulation is independent of the worker count") {
    auto cfg = tiny_config(ModelKind::Qnn);
    auto m = make_model(cfg);
    auto theta = random_theta(cfg, 2, 5.0);
    auto colloc = make_collocation(5, 5);
    auto base = loss_gradient(m, theta, colloc, 10.0, 10.0);
    setenv("QCAVITY_THREADS", "3", 1);
    auto threaded = loss_gradient(m, theta, colloc, 10.0, 10.0);
    setenv("QCAVITY_THREADS", "1", 1);
    auto serial = loss_gradient(m, theta, colloc, 10.0, 10.0);
    unsetenv("QCAVITY_THREADS");
    CHECK(base == threaded);
    CHECK(base == serial);
}

TEST_CASE("mismatched parameter vectors are rejected") {
    auto cfg = tiny_config(ModelKind::Qnn);
    auto m = make_model(cfg);
    std::vector<double> wrong(m.layout.total + 1, 0.0);
    auto colloc = make_collocation(3, 3);
    CHECK_THROWS_AS(eval_fields(m, wrong, 0.5, 0.5), ConfigError);
    CHECK_THROWS_AS(total_loss(m, wrong, colloc, 10.0, 10.0), ConfigError);
    CollocationSet empty;
    empty.wall = colloc.wall;
    empty.lid = colloc.lid;
    std::vector<double> ok(m.layout.total, 0.0);
    CHECK_THROWS_AS(total_loss(m, ok, empty, 10.0, 10.0), ConfigError);
}
