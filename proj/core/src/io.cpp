#include "qcavity/io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qcavity/errors.hpp"

namespace qcavity {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << text;
    out.flush();
    if (!out.good()) throw IoError("write failed: " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + file.string());
    return ss.str();
}

// 17 significant digits: shortest text that reproduces the double exactly.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed JSON in " + what);
    return j;
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_to_json(const TrainConfig& c) {
    json j;
    j["embedding"] = to_string(c.model.kind);
    j["n_qubits"] = c.model.n_qubits;
    j["vqc_layers"] = c.model.vqc_layers;
    j["embedding_layers"] = c.model.embedding_layers;
    j["fnn_hidden"] = c.model.fnn_hidden;
    j["pinn_hidden"] = c.model.pinn_hidden;
    j["domain"] = {c.model.domain.x0, c.model.domain.x1, c.model.domain.y0, c.model.domain.y1};
    j["reynolds"] = c.reynolds;
    j["lambda_b"] = c.lambda_b;
    j["epochs"] = c.epochs;
    j["grid"] = {c.grid_nx, c.grid_ny};
    j["seed"] = c.seed;
    j["optimizer"] = to_string(c.optimizer);
    j["adam_lr"] = c.adam_lr;
    j["lbfgs"] = {{"history", c.lbfgs.history},
                  {"c1", c.lbfgs.c1},
                  {"shrink", c.lbfgs.shrink},
                  {"max_trials", c.lbfgs.max_trials},
                  {"grad_tol", c.lbfgs.grad_tol},
                  {"max_failures", c.lbfgs.max_failures}};
    return j;
}

TrainConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {
        "embedding", "n_qubits",  "vqc_layers", "embedding_layers", "fnn_hidden",
        "pinn_hidden", "domain",  "reynolds",   "lambda_b",         "epochs",
        "grid",        "seed",    "optimizer",  "adam_lr",          "lbfgs"};
    std::string unknown;
    for (const auto& item : j.items())
        if (!known.count(item.key())) unknown += (unknown.empty() ? "" : ", ") + item.key();
    if (!unknown.empty()) throw ConfigError("unknown config key(s): " + unknown);

    TrainConfig c;
    try {
        if (j.contains("embedding")) c.model.kind = model_kind_from_string(j.at("embedding"));
        if (j.contains("n_qubits")) c.model.n_qubits = j.at("n_qubits").get<int>();
        if (j.contains("vqc_layers")) c.model.vqc_layers = j.at("vqc_layers").get<int>();
        if (j.contains("embedding_layers"))
            c.model.embedding_layers = j.at("embedding_layers").get<int>();
        if (j.contains("fnn_hidden")) c.model.fnn_hidden = j.at("fnn_hidden").get<int>();
        if (j.contains("pinn_hidden"))
            c.model.pinn_hidden = j.at("pinn_hidden").get<std::vector<int>>();
        if (j.contains("domain")) {
            const auto d = j.at("domain").get<std::vector<double>>();
            if (d.size() != 4) throw ConfigError("domain must be [x0, x1, y0, y1]");
            c.model.domain = {d[0], d[1], d[2], d[3]};
        }
        if (j.contains("reynolds")) c.reynolds = j.at("reynolds").get<double>();
        if (j.contains("lambda_b")) c.lambda_b = j.at("lambda_b").get<double>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("grid")) {
            const auto g = j.at("grid").get<std::vector<int>>();
            if (g.size() != 2) throw ConfigError("grid must be [nx, ny]");
            c.grid_nx = g[0];
            c.grid_ny = g[1];
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("optimizer")) c.optimizer = optimizer_kind_from_string(j.at("optimizer"));
        if (j.contains("adam_lr")) c.adam_lr = j.at("adam_lr").get<double>();
        if (j.contains("lbfgs")) {
            const json& l = j.at("lbfgs");
            static const std::set<std::string> lknown = {"history",    "c1",
                                                         "shrink",     "max_trials",
                                                         "grad_tol",   "max_failures"};
            for (const auto& item : l.items())
                if (!lknown.count(item.key()))
                    throw ConfigError("unknown lbfgs key: " + item.key());
            if (l.contains("history")) c.lbfgs.history = l.at("history").get<int>();
            if (l.contains("c1")) c.lbfgs.c1 = l.at("c1").get<double>();
            if (l.contains("shrink")) c.lbfgs.shrink = l.at("shrink").get<double>();
            if (l.contains("max_trials")) c.lbfgs.max_trials = l.at("max_trials").get<int>();
            if (l.contains("grad_tol")) c.lbfgs.grad_tol = l.at("grad_tol").get<double>();
            if (l.contains("max_failures"))
                c.lbfgs.max_failures = l.at("max_failures").get<int>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
    return c;
}

} // namespace

void write_fields_csv(const std::filesystem::path& file, const FieldGrid& g) {
    if (g.nx < 1 || g.ny < 1 || g.u.size() != std::size_t(g.nx) * g.ny)
        throw ConfigError("write_fields_csv: malformed grid");
    std::string text = "x,y,u,v,p,speed\n";
    text.reserve(text.size() + g.u.size() * 64);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.index(i, j);
            text += num(g.xs[i]);
            text += ',';
            text += num(g.ys[j]);
            text += ',';
            text += num(g.u[c]);
            text += ',';
            text += num(g.v[c]);
            text += ',';
            text += num(g.p[c]);
            text += ',';
            text += num(std::hypot(g.u[c], g.v[c]));
            text += '\n';
        }
    }
    write_text(file, text);
}

FieldGrid read_fields_csv(const std::filesystem::path& file) {
    std::istringstream in(read_text(file));
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,u,v,p", 0) != 0)
        throw IoError("not a fields csv (bad header): " + file.string());
    std::vector<double> xs, ys, us, vs, ps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double col[6];
        int k = 0;
        std::size_t pos = 0;
        while (k < 6 && pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string tok = line.substr(pos, next == std::string::npos ? next : next - pos);
            try {
                col[k++] = std::stod(tok);
            } catch (...) {
                throw IoError("bad number '" + tok + "' in " + file.string());
            }
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (k < 6) throw IoError("short row in " + file.string());
        xs.push_back(col[0]);
        ys.push_back(col[1]);
        us.push_back(col[2]);
        vs.push_back(col[3]);
        ps.push_back(col[4]);
    }
    if (xs.empty()) throw IoError("empty fields csv: " + file.string());

    FieldGrid g;
    // Row-major from the bottom: x cycles fastest, so nx is the index where
    // the x column first returns to its starting value.
    std::size_t nx = 1;
    while (nx < xs.size() && xs[nx] != xs[0]) ++nx;
    if (xs.size() % nx != 0) throw IoError("ragged grid in " + file.string());
    g.nx = int(nx);
    g.ny = int(xs.size() / nx);
    if (g.ny < 1 || std::size_t(g.nx) * g.ny != xs.size())
        throw IoError("inconsistent grid in " + file.string());
    g.xs.assign(xs.begin(), xs.begin() + g.nx);
    g.ys.resize(g.ny);
    for (int j = 0; j < g.ny; ++j) g.ys[j] = ys[std::size_t(j) * nx];
    g.u = std::move(us);
    g.v = std::move(vs);
    g.p = std::move(ps);
    return g;
}

void write_loss_history_csv(const std::filesystem::path& file,
                            const std::vector<EpochRecord>& history) {
    std::string text = "epoch,L_pde,L_wall,L_lid,L_ref,total,rel_l2_u,rel_l2_p\n";
    for (const EpochRecord& row : history) {
        text += std::to_string(row.epoch);
        text += ',';
        text += num(row.loss.pde);
        text += ',';
        text += num(row.loss.wall);
        text += ',';
        text += num(row.loss.lid);
        text += ',';
        text += num(row.loss.ref);
        text += ',';
        text += num(row.loss.total);
        text += ',';
        if (row.has_metrics) {
            text += num(row.rel_l2_u);
            text += ',';
            text += num(row.rel_l2_p);
        } else {
            text += ',';
        }
        text += '\n';
    }
    write_text(file, text);
}

std::string config_to_json_string(const TrainConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

TrainConfig config_from_json_string(const std::string& text) {
    return config_from_json(parse_json(text, "config"));
}

TrainConfig read_config(const std::filesystem::path& file) {
    return config_from_json(parse_json(read_text(file), file.string()));
}

void write_checkpoint(const std::filesystem::path& file, const TrainConfig& config,
                      std::span<const double> theta) {
    const ParamLayout layout = make_layout(config.model);
    if (theta.size() != layout.total)
        throw ConfigError("write_checkpoint: parameter vector length " +
                          std::to_string(theta.size()) + " does not match layout total " +
                          std::to_string(layout.total));
    json j;
    j["format"] = "qcavity-checkpoint-v1";
    j["version"] = kCodeVersion;
    j["config"] = config_to_json(config);
    const auto seg = [](const ParamSegment& s) { return json{s.offset, s.length}; };
    j["layout"] = {{"embed_p", seg(layout.embed_p)},   {"vqc_p", seg(layout.vqc_p)},
                   {"embed_psi", seg(layout.embed_psi)}, {"vqc_psi", seg(layout.vqc_psi)},
                   {"mlp_p", seg(layout.mlp_p)},       {"mlp_psi", seg(layout.mlp_psi)},
                   {"total", layout.total}};
    j["theta"] = std::vector<double>(theta.begin(), theta.end());
    write_text(file, j.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& file) {
    const json j = parse_json(read_text(file), file.string());
    if (!j.is_object() || j.value("format", "") != "qcavity-checkpoint-v1")
        throw ConfigError("not a checkpoint file: " + file.string());
    Checkpoint ck;
    ck.config = config_from_json(j.at("config"));
    try {
        ck.theta = j.at("theta").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint theta: ") + e.what());
    }
    const ParamLayout layout = make_layout(ck.config.model);
    if (ck.theta.size() != layout.total)
        throw ConfigError("checkpoint parameter count " + std::to_string(ck.theta.size()) +
                          " does not match its config layout (" + std::to_string(layout.total) +
                          ")");
    return ck;
}

void write_metrics_json(const std::filesystem::path& file, const GridMetrics& m) {
    const auto block = [](const FieldMetrics& f) {
        json b{{"mse", f.mse}, {"rel_l2", f.rel_l2}, {"max_abs", f.max_abs}};
        if (f.absolute_norm) b["absolute_norm"] = true;
        return b;
    };
    const json j{{"speed", block(m.speed)}, {"pressure", block(m.p)}};
    write_text(file, j.dump(2) + "\n");
}

void write_svg_heatmap(const std::filesystem::path& file, int nx, int ny,
                       std::span<const double> values, const std::string& title) {
    if (nx < 1 || ny < 1 || values.size() != std::size_t(nx) * ny)
        throw ConfigError("write_svg_heatmap: value count does not match the grid");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    // Five-anchor sequential color map, dark violet to yellow.
    static constexpr int stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    const auto color = [&](double t) {
        t = std::clamp(t, 0.0, 1.0) * 4.0;
        const int s = std::min(3, int(t));
        const double f = t - s;
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                      int(stops[s][0] + f * (stops[s + 1][0] - stops[s][0])),
                      int(stops[s][1] + f * (stops[s + 1][1] - stops[s][1])),
                      int(stops[s][2] + f * (stops[s + 1][2] - stops[s][2])));
        return std::string(buf);
    };

    const double plot = 480.0, top = 24.0, foot = 20.0;
    const double cw = plot / nx, ch = plot / ny;
    std::string svg;
    svg.reserve(std::size_t(nx) * ny * 64 + 512);
    char line[256];
    std::snprintf(line, sizeof line,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  plot, plot + top + foot, plot, plot + top + foot);
    svg += line;
    svg += "<text x=\"4\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">" + title +
           "</text>\n";
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double t = (values[std::size_t(j) * nx + i] - lo) / span;
            std::snprintf(line, sizeof line,
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                          "fill=\"%s\"/>\n",
                          i * cw, top + (ny - 1 - j) * ch, cw + 0.5, ch + 0.5,
                          color(t).c_str());
            svg += line;
        }
    }
    std::snprintf(line, sizeof line,
                  "<text x=\"4\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\">min "
                  "%.6g&#160;&#160;max %.6g</text>\n",
                  plot + top + 15.0, lo, hi);
    svg += line;
    svg += "</svg>\n";
    write_text(file, svg);
}

void write_manifest(const std::filesystem::path& file, const ManifestInfo& info,
                    const TrainConfig* config) {
    json j;
    j["format"] = "qcavity-manifest-v1";
    j["version"] = kCodeVersion;
    j["created_utc"] = timestamp_utc();
    j["command"] = info.command;
    if (!info.args.empty()) {
        json a = json::object();
        for (const auto& [k, v] : info.args) a[k] = v;
        j["args"] = a;
    }
    if (config) {
        j["config"] = config_to_json(*config);
        j["resolved"] = {
            {"param_count", total_param_count(config->model)},
            {"initializer",
             "circuit angles ~ U(-0.1, 0.1); network weights and biases ~ U(+-1/sqrt(fan_in))"},
            {"embedding_sharing",
             "qnn: one embedding circuit per field solver; fnn: one network shared by both"},
            {"csv_schema",
             {{"fields", "x,y,u,v,p,speed"},
              {"loss_history", "epoch,L_pde,L_wall,L_lid,L_ref,total,rel_l2_u,rel_l2_p"}}},
        };
    }
    j["outputs"] = info.outputs;
    if (!info.notes.empty()) j["notes"] = info.notes;
    write_text(file, j.dump(2) + "\n");
}

TrainConfig read_manifest_config(const std::filesystem::path& file) {
    const json j = parse_json(read_text(file), file.string());
    if (!j.is_object() || !j.contains("config"))
        throw ConfigError("manifest has no config echo: " + file.string());
    return config_from_json(j.at("config"));
}

} // namespace qcavity
