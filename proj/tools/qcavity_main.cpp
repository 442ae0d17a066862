#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcavity/embedding.hpp"
#include "qcavity/errors.hpp"
#include "qcavity/io.hpp"
#include "qcavity/parallel.hpp"
#include "qcavity/train.hpp"

namespace fs = std::filesystem;
using namespace qcavity;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::vector<double> speed_field(const FieldGrid& g) {
    std::vector<double> s(g.u.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::hypot(g.u[k], g.v[k]);
    return s;
}

struct ReferenceArgs {
    double re = 0.0;
    int nx = 0, ny = 0;
    std::string out;
    double steady_tol = 1e-6;
    bool no_svg = false;
};

void cmd_reference(const ReferenceArgs& a) {
    ensure_dir(a.out);
    ReferenceOptions opts;
    opts.steady_tol = a.steady_tol;
    const FieldGrid g = solve_reference(a.re, a.nx, a.ny, opts);

    const fs::path out(a.out);
    write_fields_csv(out / "fields.csv", g);
    ManifestInfo info;
    info.command = "reference";
    info.args = {{"re", std::to_string(a.re)},
                 {"nx", std::to_string(a.nx)},
                 {"ny", std::to_string(a.ny)},
                 {"steady_tol", std::to_string(a.steady_tol)}};
    info.outputs = {"fields.csv"};
    if (!a.no_svg) {
        write_svg_heatmap(out / "speed.svg", g.nx, g.ny, speed_field(g), "speed, Re=" +
                          std::to_string(a.re));
        write_svg_heatmap(out / "pressure.svg", g.nx, g.ny, g.p,
                          "pressure, Re=" + std::to_string(a.re));
        info.outputs.push_back("speed.svg");
        info.outputs.push_back("pressure.svg");
    }
    info.outputs.push_back("manifest.json");
    write_manifest(out / "manifest.json", info);
}

struct TrainArgs {
    std::string config;
    std::string out;
    std::string reference; // optional fields.csv for per-epoch metrics
};

void cmd_train(const TrainArgs& a) {
    const TrainConfig cfg = read_config(a.config);
    ensure_dir(a.out);
    const fs::path out(a.out);

    std::optional<FieldGrid> ref;
    if (!a.reference.empty()) ref = read_fields_csv(a.reference);

    TrainResult result;
    try {
        result = train(cfg, ref ? &*ref : nullptr);
    } catch (const NumericError& e) {
        // Dump enough to replay the aborting trajectory: the run is
        // deterministic, so the config echo plus seed is the full state.
        ManifestInfo info;
        info.command = "train";
        info.notes = {std::string("aborted: ") + e.what()};
        write_manifest(out / "abort.json", info, &cfg);
        throw;
    }

    write_checkpoint(out / "checkpoint.json", cfg, result.theta);
    write_loss_history_csv(out / "loss_history.csv", result.history);
    ManifestInfo info;
    info.command = "train";
    info.outputs = {"checkpoint.json", "loss_history.csv", "manifest.json"};
    info.notes = {"status: " + to_string(result.status),
                  "epochs_run: " + std::to_string(result.epochs_run),
                  "final_total_loss: " + std::to_string(result.history.back().loss.total)};
    write_manifest(out / "manifest.json", info, &cfg);
}

struct InferArgs {
    std::string checkpoint;
    std::string reference;
    std::string out;
};

void cmd_infer(const InferArgs& a) {
    const Checkpoint ck = read_checkpoint(a.checkpoint);
    const FieldGrid ref = read_fields_csv(a.reference);
    ensure_dir(a.out);
    const fs::path out(a.out);

    const Model model = make_model(ck.config.model);
    const FieldGrid pred =
        model_field_grid(model, ck.theta, ref.nx, ref.ny, ck.config.reynolds);
    const GridMetrics m = metrics(pred, ref);

    write_fields_csv(out / "predicted.csv", pred);
    FieldGrid err = pred;
    for (std::size_t k = 0; k < err.u.size(); ++k) {
        err.u[k] = pred.u[k] - ref.u[k];
        err.v[k] = pred.v[k] - ref.v[k];
        err.p[k] = (pred.p[k] - pred.p[0]) - (ref.p[k] - ref.p[0]); // gauge both sides
    }
    write_fields_csv(out / "errors.csv", err);
    write_metrics_json(out / "metrics.json", m);
    write_svg_heatmap(out / "error_speed.svg", err.nx, err.ny, speed_field(err),
                      "velocity error magnitude");

    ManifestInfo info;
    info.command = "infer";
    info.args = {{"checkpoint", a.checkpoint}, {"reference", a.reference}};
    info.outputs = {"predicted.csv", "errors.csv", "metrics.json", "error_speed.svg",
                    "manifest.json"};
    write_manifest(out / "manifest.json", info, &ck.config);
}

struct CompareArgs {
    std::string config;
    std::string out;
};

void cmd_compare_embeddings(const CompareArgs& a) {
    const TrainConfig base = read_config(a.config);
    ensure_dir(a.out);
    const fs::path out(a.out);

    ManifestInfo info;
    info.command = "compare-embeddings";
    const int nx = base.grid_nx, ny = base.grid_ny;

    for (const ModelKind kind : {ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn}) {
        ModelConfig mc = base.model;
        mc.kind = kind;
        const Model model = make_model(mc);
        const std::vector<double> theta = init_params(mc, base.seed);
        const int nq = mc.n_qubits;
        const std::string name = to_string(kind);

        std::vector<std::vector<double>> grids(nq);
        for (auto& g : grids) g.resize(std::size_t(nx) * ny);
        std::string csv = "x,y";
        for (int q = 0; q < nq; ++q) csv += ",alpha" + std::to_string(q);
        csv += '\n';

        for (int j = 0; j < ny; ++j) {
            const double y = double(j) / (ny - 1);
            for (int i = 0; i < nx; ++i) {
                const double x = double(i) / (nx - 1);
                const auto [xt, yt] = normalize(x, y, mc.domain, 1);
                std::vector<Jet2<double>> alpha;
                if (kind == ModelKind::Chebyshev) {
                    alpha = chebyshev_angles(xt, yt, nq);
                } else if (kind == ModelKind::Fnn) {
                    const auto seg = model.layout.embed_p;
                    alpha = fnn_angles(xt, yt, model.fnn,
                                       std::span(theta).subspan(seg.offset, seg.length));
                } else {
                    const auto seg = model.layout.embed_p;
                    alpha = qnn_angles(xt, yt,
                                       std::span(theta).subspan(seg.offset, seg.length),
                                       model.embedding);
                }
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g", x, y);
                csv += buf;
                for (int q = 0; q < nq; ++q) {
                    const double v = alpha[q][slot::f];
                    grids[q][std::size_t(j) * nx + i] = v;
                    std::snprintf(buf, sizeof buf, ",%.17g", v);
                    csv += buf;
                }
                csv += '\n';
            }
        }

        const std::string csv_name = "alpha_" + name + ".csv";
        {
            std::FILE* f = std::fopen((out / csv_name).string().c_str(), "wb");
            if (!f) throw IoError("cannot write " + (out / csv_name).string());
            std::fwrite(csv.data(), 1, csv.size(), f);
            std::fclose(f);
        }
        info.outputs.push_back(csv_name);
        for (int q = 0; q < nq; ++q) {
            const std::string svg_name = "alpha_" + name + "_q" + std::to_string(q) + ".svg";
            write_svg_heatmap(out / svg_name, nx, ny, grids[q],
                              name + " encoding angle, qubit " + std::to_string(q));
            info.outputs.push_back(svg_name);
        }
    }
    info.outputs.push_back("manifest.json");
    write_manifest(out / "manifest.json", info, &base);
}

struct SweepArgs {
    std::string axis;
    std::string values;
    std::string config;
    std::string out;
    bool parallel = false;
};

void cmd_sweep(const SweepArgs& a) {
    const TrainConfig base = read_config(a.config);
    if (a.axis != "qubits" && a.axis != "reynolds")
        throw ConfigError("sweep axis must be 'qubits' or 'reynolds', got '" + a.axis + "'");

    std::vector<double> values;
    {
        std::size_t pos = 0;
        while (pos <= a.values.size()) {
            const std::size_t next = a.values.find(',', pos);
            const std::string tok =
                a.values.substr(pos, next == std::string::npos ? next : next - pos);
            if (!tok.empty()) {
                try {
                    values.push_back(std::stod(tok));
                } catch (...) {
                    throw ConfigError("sweep value '" + tok + "' is not a number");
                }
            }
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    }
    if (values.empty()) throw ConfigError("sweep needs a non-empty --values list");
    if (a.axis == "qubits")
        for (const double v : values)
            if (double(int(v)) != v) throw ConfigError("qubit counts must be integers");

    ensure_dir(a.out);
    const fs::path out(a.out);
    const std::vector<ModelKind> kinds{ModelKind::Chebyshev, ModelKind::Fnn, ModelKind::Qnn};

    struct Cell {
        double final_loss = std::nan("");
        std::string error;
        std::vector<EpochRecord> history;
    };
    std::vector<Cell> cells(values.size() * kinds.size());

    const auto run_cell = [&](std::size_t idx) {
        const double value = values[idx / kinds.size()];
        const ModelKind kind = kinds[idx % kinds.size()];
        TrainConfig cfg = base;
        cfg.model.kind = kind;
        if (a.axis == "qubits") cfg.model.n_qubits = int(value);
        else cfg.reynolds = value;
        Cell& cell = cells[idx];
        try {
            const TrainResult r = train(cfg);
            cell.final_loss = r.history.back().loss.total;
            cell.history = r.history;
        } catch (const std::exception& e) {
            cell.error = e.what(); // record and keep sweeping
        }
    };

    if (a.parallel && worker_count() > 1) {
        std::vector<std::future<void>> pending;
        for (std::size_t idx = 0; idx < cells.size(); ++idx) {
            pending.push_back(std::async(std::launch::async, run_cell, idx));
            if (int(pending.size()) >= worker_count()) {
                for (auto& f : pending) f.get();
                pending.clear();
            }
        }
        for (auto& f : pending) f.get();
    } else {
        for (std::size_t idx = 0; idx < cells.size(); ++idx) run_cell(idx);
    }

    std::string summary = a.axis + ",chebyshev,fnn,qnn\n";
    ManifestInfo info;
    info.command = "sweep";
    info.args = {{"axis", a.axis}, {"values", a.values}};
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", values[vi]);
        summary += buf;
        for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
            const Cell& cell = cells[vi * kinds.size() + ki];
            if (cell.error.empty()) {
                std::snprintf(buf, sizeof buf, ",%.17g", cell.final_loss);
                summary += buf;
            } else {
                summary += ",nan";
                char vbuf[32];
                std::snprintf(vbuf, sizeof vbuf, "%g", values[vi]);
                info.notes.push_back("failed " + a.axis + "=" + std::string(vbuf) + " " +
                                     to_string(kinds[ki]) + ": " + cell.error);
            }
        }
        summary += '\n';
    }
    {
        std::FILE* f = std::fopen((out / "summary.csv").string().c_str(), "wb");
        if (!f) throw IoError("cannot write " + (out / "summary.csv").string());
        std::fwrite(summary.data(), 1, summary.size(), f);
        std::fclose(f);
    }
    info.outputs = {"summary.csv"};
    for (std::size_t vi = 0; vi < values.size(); ++vi)
        for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
            const Cell& cell = cells[vi * kinds.size() + ki];
            if (cell.error.empty() && !cell.history.empty()) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%g", values[vi]);
                const std::string name = "history_" + a.axis + std::string(buf) + "_" +
                                         to_string(kinds[ki]) + ".csv";
                write_loss_history_csv(out / name, cell.history);
                info.outputs.push_back(name);
            }
        }
    info.outputs.push_back("manifest.json");
    write_manifest(out / "manifest.json", info, &base);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid quantum-classical physics-informed solver for lid-driven cavity flow"};
    app.require_subcommand(1);

    ReferenceArgs ra;
    auto* ref_cmd = app.add_subcommand("reference", "Solve the cavity flow on a grid");
    ref_cmd->add_option("--re", ra.re, "Reynolds number")->required();
    ref_cmd->add_option("--nx", ra.nx, "grid nodes in x")->required();
    ref_cmd->add_option("--ny", ra.ny, "grid nodes in y")->required();
    ref_cmd->add_option("--out", ra.out, "output directory")->required();
    ref_cmd->add_option("--steady-tol", ra.steady_tol, "steady-state tolerance");
    ref_cmd->add_flag("--no-svg", ra.no_svg, "skip the SVG heatmaps");

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON config");
    train_cmd->add_option("--config", ta.config, "JSON config file")->required();
    train_cmd->add_option("--out", ta.out, "output directory")->required();
    train_cmd->add_option("--reference", ta.reference, "reference fields.csv for metrics");

    InferArgs ia;
    auto* infer_cmd = app.add_subcommand("infer", "Evaluate a checkpoint against a reference");
    infer_cmd->add_option("--checkpoint", ia.checkpoint, "checkpoint.json")->required();
    infer_cmd->add_option("--reference", ia.reference, "reference fields.csv")->required();
    infer_cmd->add_option("--out", ia.out, "output directory")->required();

    CompareArgs ca;
    auto* cmp_cmd =
        app.add_subcommand("compare-embeddings", "Dump encoding angles for all strategies");
    cmp_cmd->add_option("--config", ca.config, "JSON config file")->required();
    cmp_cmd->add_option("--out", ca.out, "output directory")->required();

    SweepArgs sa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train across an axis of values");
    sweep_cmd->add_option("--axis", sa.axis, "qubits or reynolds")->required();
    sweep_cmd->add_option("--values", sa.values, "comma-separated list")->required();
    sweep_cmd->add_option("--config", sa.config, "JSON config file")->required();
    sweep_cmd->add_option("--out", sa.out, "output directory")->required();
    sweep_cmd->add_flag("--parallel", sa.parallel, "run sweep cells concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ref_cmd->parsed()) cmd_reference(ra);
        else if (train_cmd->parsed()) cmd_train(ta);
        else if (infer_cmd->parsed()) cmd_infer(ia);
        else if (cmp_cmd->parsed()) cmd_compare_embeddings(ca);
        else if (sweep_cmd->parsed()) cmd_sweep(sa);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "qcavity: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "qcavity: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "qcavity: %s\n", e.what());
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "qcavity: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qcavity: unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
