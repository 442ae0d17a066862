#include "qcavity/model_config.hpp"

#include <cmath>
#include <random>

#include "qcavity/circuit.hpp"
#include "qcavity/errors.hpp"

namespace qcavity {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Chebyshev: return "chebyshev";
    case ModelKind::Fnn: return "fnn";
    case ModelKind::Qnn: return "qnn";
    case ModelKind::ClassicalPinn: return "pinn";
    }
    throw ConfigError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "chebyshev") return ModelKind::Chebyshev;
    if (name == "fnn") return ModelKind::Fnn;
    if (name == "qnn") return ModelKind::Qnn;
    if (name == "pinn") return ModelKind::ClassicalPinn;
    throw ConfigError("unknown model kind '" + name + "'");
}

void validate_config(const ModelConfig& config) {
    if (config.domain.width() <= 0 || config.domain.height() <= 0)
        throw ConfigError("domain must have positive extent");
    if (config.kind == ModelKind::ClassicalPinn) {
        if (config.pinn_hidden.empty()) throw ConfigError("pinn needs at least one hidden layer");
        for (int w : config.pinn_hidden)
            if (w < 1) throw ConfigError("pinn hidden widths must be positive");
        return;
    }
    if (config.n_qubits < 2 || config.n_qubits > 8)
        throw ConfigError("n_qubits must be in [2, 8]");
    if (config.vqc_layers < 1) throw ConfigError("vqc_layers must be >= 1");
    if (config.kind == ModelKind::Qnn && config.embedding_layers < 1)
        throw ConfigError("embedding_layers must be >= 1");
    if (config.kind == ModelKind::Fnn && config.fnn_hidden < 1)
        throw ConfigError("fnn_hidden must be >= 1");
}

MlpSpec fnn_embedding_spec(const ModelConfig& config) {
    return MlpSpec{{2, config.fnn_hidden, config.n_qubits}};
}

MlpSpec pinn_field_spec(const ModelConfig& config) {
    std::vector<int> sizes{2};
    sizes.insert(sizes.end(), config.pinn_hidden.begin(), config.pinn_hidden.end());
    sizes.push_back(1);
    return MlpSpec{sizes};
}

ParamLayout make_layout(const ModelConfig& config) {
    validate_config(config);
    ParamLayout layout;
    std::size_t off = 0;
    auto place = [&off](ParamSegment& seg, std::size_t len) {
        seg = {off, len};
        off += len;
    };
    switch (config.kind) {
    case ModelKind::Chebyshev: {
        const auto vqc = std::size_t(build_vqc(config.n_qubits, config.vqc_layers).n_params);
        place(layout.vqc_p, vqc);
        place(layout.vqc_psi, vqc);
        break;
    }
    case ModelKind::Fnn: {
        const auto vqc = std::size_t(build_vqc(config.n_qubits, config.vqc_layers).n_params);
        place(layout.embed_p, mlp_param_count(fnn_embedding_spec(config)));
        place(layout.vqc_p, vqc);
        place(layout.vqc_psi, vqc);
        break;
    }
    case ModelKind::Qnn: {
        const auto vqc = std::size_t(build_vqc(config.n_qubits, config.vqc_layers).n_params);
        const auto emb =
            std::size_t(build_qnn_embedding(config.n_qubits, config.embedding_layers).n_params);
        place(layout.embed_p, emb);
        place(layout.vqc_p, vqc);
        place(layout.embed_psi, emb);
        place(layout.vqc_psi, vqc);
        break;
    }
    case ModelKind::ClassicalPinn: {
        const auto net = mlp_param_count(pinn_field_spec(config));
        place(layout.mlp_p, net);
        place(layout.mlp_psi, net);
        break;
    }
    }
    layout.total = off;
    return layout;
}

int total_param_count(const ModelConfig& config) {
    return int(make_layout(config).total);
}

namespace {

// Fixed-width uniform draw in [0, 1); keeps initialization identical across
// standard libraries (std::uniform_real_distribution is not portable).
double unit_uniform(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_uniform(rng);
}

void fill_angles(std::mt19937_64& rng, std::vector<double>& out, const ParamSegment& seg) {
    for (std::size_t k = 0; k < seg.length; ++k)
        out[seg.offset + k] = uniform(rng, -0.1, 0.1);
}

void fill_mlp(std::mt19937_64& rng, std::vector<double>& out, const ParamSegment& seg,
              const MlpSpec& spec) {
    std::size_t pos = seg.offset;
    for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
        const double bound = 1.0 / std::sqrt(double(spec.sizes[l]));
        const auto layer_len = std::size_t(spec.sizes[l] + 1) * std::size_t(spec.sizes[l + 1]);
        for (std::size_t k = 0; k < layer_len; ++k) out[pos++] = uniform(rng, -bound, bound);
    }
}

} // namespace

std::vector<double> init_params(const ModelConfig& config, std::uint64_t seed) {
    const auto layout = make_layout(config);
    std::vector<double> out(layout.total, 0.0);
    std::mt19937_64 rng(seed);
    switch (config.kind) {
    case ModelKind::Chebyshev:
        fill_angles(rng, out, layout.vqc_p);
        fill_angles(rng, out, layout.vqc_psi);
        break;
    case ModelKind::Fnn:
        fill_mlp(rng, out, layout.embed_p, fnn_embedding_spec(config));
        fill_angles(rng, out, layout.vqc_p);
        fill_angles(rng, out, layout.vqc_psi);
        break;
    case ModelKind::Qnn:
        fill_angles(rng, out, layout.embed_p);
        fill_angles(rng, out, layout.vqc_p);
        fill_angles(rng, out, layout.embed_psi);
        fill_angles(rng, out, layout.vqc_psi);
        break;
    case ModelKind::ClassicalPinn:
        fill_mlp(rng, out, layout.mlp_p, pinn_field_spec(config));
        fill_mlp(rng, out, layout.mlp_psi, pinn_field_spec(config));
        break;
    }
    return out;
}

} // namespace qcavity
