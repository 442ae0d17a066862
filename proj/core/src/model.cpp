#include "qcavity/model.hpp"

#include <cmath>

#include "qcavity/errors.hpp"
#include "qcavity/parallel.hpp"
#include "qcavity/simulate.hpp"

namespace qcavity {

Model make_model(const ModelConfig& config) {
    validate_config(config);
    Model m;
    m.config = config;
    m.layout = make_layout(config);
    switch (config.kind) {
    case ModelKind::Chebyshev:
    case ModelKind::Fnn:
    case ModelKind::Qnn:
        m.solver = build_solver_circuit(config.n_qubits, config.vqc_layers);
        if (config.kind == ModelKind::Qnn)
            m.embedding = build_qnn_embedding(config.n_qubits, config.embedding_layers);
        if (config.kind == ModelKind::Fnn) m.fnn = fnn_embedding_spec(config);
        break;
    case ModelKind::ClassicalPinn:
        m.pinn = pinn_field_spec(config);
        break;
    }
    return m;
}

namespace {

std::span<const double> seg(std::span<const double> theta, const ParamSegment& s) {
    return theta.subspan(s.offset, s.length);
}

std::span<double> seg(std::span<double> v, const ParamSegment& s) {
    return v.subspan(s.offset, s.length);
}

// Everything the reverse pass needs from one field's forward evaluation.
struct FieldEval {
    Jet2<double> value{1};
    Jet2<double> xt{1}, yt{1};
    std::vector<Jet2<double>> alpha; // encoding angles (quantum kinds)
    MlpCache cache;                  // FNN embedding / classical network tape
};

// psi_field selects the segment pair; order is the jet order to propagate.
Jet2<double> field_forward(const Model& m, std::span<const double> theta, bool psi_field,
                           double x, double y, int order, FieldEval* keep) {
    const auto& lay = m.layout;
    auto [xt, yt] = normalize(x, y, m.config.domain, order);
    if (keep) {
        keep->xt = xt;
        keep->yt = yt;
    }
    if (m.config.kind == ModelKind::ClassicalPinn) {
        const Jet2<double> in[] = {xt, yt};
        auto out = mlp_forward(m.pinn, seg(theta, psi_field ? lay.mlp_psi : lay.mlp_p), in,
                               keep ? &keep->cache : nullptr);
        if (keep) keep->value = out[0];
        return out[0];
    }
    std::vector<Jet2<double>> alpha;
    switch (m.config.kind) {
    case ModelKind::Chebyshev:
        alpha = chebyshev_angles(xt, yt, m.config.n_qubits);
        break;
    case ModelKind::Fnn:
        alpha = fnn_angles(xt, yt, m.fnn, seg(theta, lay.embed_p), keep ? &keep->cache : nullptr);
        break;
    case ModelKind::Qnn:
        alpha = qnn_angles(xt, yt, seg(theta, psi_field ? lay.embed_psi : lay.embed_p),
                           m.embedding);
        break;
    case ModelKind::ClassicalPinn:
        break; // handled above
    }
    const sim::Types<Jet2<double>> t{order};
    auto value = run_circuit<Jet2<double>>(m.solver, seg(theta, psi_field ? lay.vqc_psi : lay.vqc_p),
                                           alpha, t);
    if (keep) {
        keep->alpha = std::move(alpha);
        keep->value = value;
    }
    return value;
}

// Pulls the cotangent jet on one field value back to the parameter vector.
void field_backward(const Model& m, std::span<const double> theta, bool psi_field,
                    const FieldEval& ev, const Jet2<double>& cotangent, std::span<double> grad) {
    const auto& lay = m.layout;
    if (m.config.kind == ModelKind::ClassicalPinn) {
        const Jet2<double> adj[] = {cotangent};
        mlp_backprop(m.pinn, seg(theta, psi_field ? lay.mlp_psi : lay.mlp_p), ev.cache, adj,
                     seg(grad, psi_field ? lay.mlp_psi : lay.mlp_p));
        return;
    }
    const sim::Types<Jet2<double>> t{cotangent.order()};
    const bool trainable_embedding = m.config.kind != ModelKind::Chebyshev;
    const auto sweep = adjoint_gradients<Jet2<double>>(
        m.solver, seg(theta, psi_field ? lay.vqc_psi : lay.vqc_p), ev.alpha, t, -1, true,
        trainable_embedding);
    auto vqc_grad = seg(grad, psi_field ? lay.vqc_psi : lay.vqc_p);
    for (std::size_t k = 0; k < sweep.d_params.size(); ++k)
        vqc_grad[k] += jet_dot(cotangent, sweep.d_params[k]);
    if (!trainable_embedding) return;

    // Cotangents on the encoding angles: the solver output's dependence on
    // the alpha_k jet is multiplication by the input-shift jet d_inputs[k].
    std::vector<Jet2<double>> alpha_adj;
    alpha_adj.reserve(sweep.d_inputs.size());
    for (const auto& dk : sweep.d_inputs) alpha_adj.push_back(adjoint_mul(dk, cotangent));

    if (m.config.kind == ModelKind::Fnn) {
        fnn_angle_backprop(m.fnn, seg(theta, lay.embed_p), ev.cache, alpha_adj,
                           seg(grad, lay.embed_p));
    } else {
        const auto& emb = psi_field ? lay.embed_psi : lay.embed_p;
        qnn_angle_backprop(m.embedding, seg(theta, emb), ev.xt, ev.yt, alpha_adj,
                           seg(grad, emb));
    }
}

enum class PointClass { Interior, Wall, Lid, Ref };

struct PointTask {
    double x, y;
    PointClass cls;
};

// Raw (unscaled) per-class sums from one chunk of points, plus that chunk's
// gradient contribution when requested.
struct ChunkAccum {
    double pde = 0.0, wall = 0.0, lid = 0.0, ref = 0.0;
    std::vector<double> grad;
};

struct Scales {
    double interior, wall, lid, ref; // d(total)/d(raw class sum)
};

void accumulate_point(const Model& m, std::span<const double> theta, const PointTask& pt,
                      double reynolds, const Scales& sc, bool want_grad, ChunkAccum& acc) {
    switch (pt.cls) {
    case PointClass::Interior: {
        FieldEval psi_ev, p_ev;
        FieldSample s;
        s.psi = field_forward(m, theta, true, pt.x, pt.y, 3, want_grad ? &psi_ev : nullptr);
        s.p = field_forward(m, theta, false, pt.x, pt.y, 1, want_grad ? &p_ev : nullptr);
        const auto r = momentum_residuals(s, reynolds);
        acc.pde += r.rx * r.rx + r.ry * r.ry;
        if (!want_grad) return;
        const double c_rx = sc.interior * 2.0 * r.rx;
        const double c_ry = sc.interior * 2.0 * r.ry;
        Jet2<double> psi_adj(3), p_adj(1);
        residual_adjoints(s, reynolds, c_rx, c_ry, psi_adj, p_adj);
        field_backward(m, theta, true, psi_ev, psi_adj, acc.grad);
        field_backward(m, theta, false, p_ev, p_adj, acc.grad);
        return;
    }
    case PointClass::Wall:
    case PointClass::Lid: {
        const bool lid = pt.cls == PointClass::Lid;
        const double u_bc = lid ? 1.0 : 0.0;
        FieldEval ev;
        const auto psi = field_forward(m, theta, true, pt.x, pt.y, 1, want_grad ? &ev : nullptr);
        const double u = psi[slot::fy];
        const double v = -psi[slot::fx];
        const double du = u - u_bc;
        (lid ? acc.lid : acc.wall) += du * du + v * v;
        if (!want_grad) return;
        const double scale = lid ? sc.lid : sc.wall;
        Jet2<double> adj(1);
        adj[slot::fy] = scale * 2.0 * du;
        adj[slot::fx] = -scale * 2.0 * v;
        field_backward(m, theta, true, ev, adj, acc.grad);
        return;
    }
    case PointClass::Ref: {
        FieldEval ev;
        const auto p = field_forward(m, theta, false, pt.x, pt.y, 1, want_grad ? &ev : nullptr);
        acc.ref += p.value() * p.value();
        if (!want_grad) return;
        Jet2<double> adj(1);
        adj[slot::f] = sc.ref * 2.0 * p.value();
        field_backward(m, theta, false, ev, adj, acc.grad);
        return;
    }
    }
}

// Fixed chunking of the point list; per-chunk partials are folded serially in
// chunk order so results do not depend on the worker count.
constexpr std::size_t kChunk = 32;

LossBreakdown evaluate(const Model& m, std::span<const double> theta,
                       const CollocationSet& colloc, double reynolds, double lambda_b,
                       std::vector<double>* grad_out) {
    if (theta.size() != m.layout.total) throw ConfigError("parameter vector length mismatch");
    if (colloc.interior.empty()) throw ConfigError("empty interior collocation set");
    if (reynolds <= 0) throw ConfigError("reynolds must be positive");

    std::vector<PointTask> tasks;
    tasks.reserve(colloc.interior.size() + colloc.wall.size() + colloc.lid.size() + 1);
    for (const auto& p : colloc.interior) tasks.push_back({p.x, p.y, PointClass::Interior});
    for (const auto& p : colloc.wall) tasks.push_back({p.x, p.y, PointClass::Wall});
    for (const auto& p : colloc.lid) tasks.push_back({p.x, p.y, PointClass::Lid});
    tasks.push_back({colloc.reference_point.x, colloc.reference_point.y, PointClass::Ref});

    Scales sc;
    sc.interior = 1.0 / double(colloc.interior.size());
    sc.wall = colloc.wall.empty() ? 0.0 : lambda_b / double(colloc.wall.size());
    sc.lid = colloc.lid.empty() ? 0.0 : lambda_b / double(colloc.lid.size());
    sc.ref = lambda_b;

    const bool want_grad = grad_out != nullptr;
    const std::size_t n_chunks = (tasks.size() + kChunk - 1) / kChunk;
    std::vector<ChunkAccum> partial(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto& acc = partial[c];
        if (want_grad) acc.grad.assign(m.layout.total, 0.0);
        const std::size_t hi = std::min(tasks.size(), (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < hi; ++i)
            accumulate_point(m, theta, tasks[i], reynolds, sc, want_grad, acc);
    });

    LossBreakdown out;
    out.lambda_b = lambda_b;
    if (want_grad) grad_out->assign(m.layout.total, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        out.pde += partial[c].pde;
        out.wall += partial[c].wall;
        out.lid += partial[c].lid;
        out.ref += partial[c].ref;
        if (want_grad)
            for (std::size_t k = 0; k < grad_out->size(); ++k)
                (*grad_out)[k] += partial[c].grad[k];
    }
    out.pde /= double(colloc.interior.size());
    if (!colloc.wall.empty()) out.wall /= double(colloc.wall.size());
    if (!colloc.lid.empty()) out.lid /= double(colloc.lid.size());
    out.total = out.pde + lambda_b * (out.wall + out.lid + out.ref);
    if (!std::isfinite(out.total)) throw NumericError("non-finite loss");
    return out;
}

} // namespace

FieldSample eval_fields(const Model& model, std::span<const double> theta, double x, double y) {
    if (theta.size() != model.layout.total) throw ConfigError("parameter vector length mismatch");
    FieldSample s;
    s.psi = field_forward(model, theta, true, x, y, 3, nullptr);
    s.p = field_forward(model, theta, false, x, y, 1, nullptr);
    return s;
}

LossBreakdown total_loss(const Model& model, std::span<const double> theta,
                         const CollocationSet& colloc, double reynolds, double lambda_b) {
    return evaluate(model, theta, colloc, reynolds, lambda_b, nullptr);
}

std::vector<double> loss_gradient(const Model& model, std::span<const double> theta,
                                  const CollocationSet& colloc, double reynolds, double lambda_b,
                                  LossBreakdown* breakdown) {
    std::vector<double> grad;
    const auto bd = evaluate(model, theta, colloc, reynolds, lambda_b, &grad);
    if (breakdown) *breakdown = bd;
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericError("non-finite gradient");
    return grad;
}

} // namespace qcavity
