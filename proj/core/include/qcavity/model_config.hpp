#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcavity/mlp.hpp"

namespace qcavity {

// Which field-solver family a run uses. The three quantum kinds share the
// VQC readout and differ only in how coordinates become encoding angles.
enum class ModelKind {
    Chebyshev,     // fixed arccos tower, no trainable embedding
    Fnn,           // shared classical network producing the angles
    Qnn,           // per-solver trainable embedding circuit
    ClassicalPinn, // no circuits at all: two plain MLPs
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct Domain {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

struct ModelConfig {
    ModelKind kind = ModelKind::Qnn;
    int n_qubits = 4;
    int vqc_layers = 10;
    int embedding_layers = 5; // QNN embedding depth
    int fnn_hidden = 52;      // FNN embedding hidden width
    std::vector<int> pinn_hidden = {32, 32, 32, 32};
    Domain domain;
};

struct ParamSegment {
    std::size_t offset = 0;
    std::size_t length = 0;
    bool empty() const { return length == 0; }
    std::size_t end() const { return offset + length; }
};

// Layout of the flat trainable vector. Unused segments have length 0.
// Quantum kinds order the segments p-solver first, then psi-solver; the FNN
// embedding is a single network shared by both solvers, stored in embed_p.
struct ParamLayout {
    ParamSegment embed_p;
    ParamSegment vqc_p;
    ParamSegment embed_psi;
    ParamSegment vqc_psi;
    ParamSegment mlp_p;
    ParamSegment mlp_psi;
    std::size_t total = 0;
};

void validate_config(const ModelConfig& config);

MlpSpec fnn_embedding_spec(const ModelConfig& config);   // 2 -> hidden -> n_qubits
MlpSpec pinn_field_spec(const ModelConfig& config);      // 2 -> hidden... -> 1

ParamLayout make_layout(const ModelConfig& config);
int total_param_count(const ModelConfig& config);

// Seeded initial parameters: circuit angles ~ U(-0.1, 0.1); network weights
// and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)). Draws follow layout order,
// so the same seed gives bit-identical vectors on every platform.
std::vector<double> init_params(const ModelConfig& config, std::uint64_t seed);

} // namespace qcavity
