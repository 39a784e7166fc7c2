#include "hydrosample/io.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hydrosample {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    j["data"] = data;
    return j;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ValidationError("matrix json: data length does not match dimensions");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[at++];
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

json scenario_json(const InjectionScenario& sc) {
    json j;
    j["source"] = sc.source;
    j["rate_mg_s"] = sc.rate_mg_s;
    j["start_s"] = sc.start_s;
    j["duration_s"] = sc.duration_s;
    j["timestep_s"] = sc.timestep_s;
    j["max_steps"] = sc.max_steps;
    return j;
}

InjectionScenario scenario_from(const json& j) {
    InjectionScenario sc;
    sc.source = j.at("source").get<std::string>();
    sc.rate_mg_s = j.at("rate_mg_s").get<double>();
    sc.start_s = j.at("start_s").get<double>();
    sc.duration_s = j.at("duration_s").get<double>();
    sc.timestep_s = j.at("timestep_s").get<double>();
    sc.max_steps = j.at("max_steps").get<int>();
    return sc;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError(what + ": invalid JSON");
    return j;
}

void expect_format(const json& j, const std::string& tag, const std::string& what) {
    if (j.value("format", "") != tag) {
        throw ValidationError(what + ": expected format '" + tag + "'");
    }
}

} // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw RuntimeError("short write to '" + path.string() + "'");
}

std::string matrix_to_csv(const DataMatrix& m) {
    std::string csv = "t_s";
    for (const auto& id : m.node_index) csv += "," + id;
    csv += "\n";
    for (Eigen::Index k = 0; k < m.values.cols(); ++k) {
        csv += format_double(static_cast<double>(k + 1) * m.timestep_s);
        for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
            csv += "," + format_double(m.values(i, k));
        }
        csv += "\n";
    }
    return csv;
}

std::string matrix_sidecar_json(const DataMatrix& m) {
    json j;
    j["format"] = "hydrosample-matrix-v1";
    j["scenario"] = scenario_json(m.scenario);
    j["node_index"] = m.node_index;
    j["n_steps"] = m.values.cols();
    j["timestep_s"] = m.timestep_s;
    return dump(j);
}

DataMatrix matrix_from_csv(const std::string& csv, const std::string& sidecar_json) {
    const json sidecar = parse_json(sidecar_json, "matrix sidecar");
    expect_format(sidecar, "hydrosample-matrix-v1", "matrix sidecar");

    DataMatrix m;
    m.scenario = scenario_from(sidecar.at("scenario"));
    m.node_index = sidecar.at("node_index").get<std::vector<std::string>>();
    m.timestep_s = sidecar.at("timestep_s").get<double>();

    std::istringstream stream(csv);
    std::string line;
    if (!std::getline(stream, line)) throw ValidationError("matrix csv: missing header");
    std::vector<Eigen::VectorXd> rows;
    const auto n = static_cast<Eigen::Index>(m.node_index.size());
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(cells, cell, ',')) {
            vals.push_back(parse_double(cell, "matrix csv"));
        }
        if (static_cast<Eigen::Index>(vals.size()) != n + 1) {
            throw ValidationError("matrix csv: wrong column count");
        }
        rows.emplace_back(Eigen::Map<Eigen::VectorXd>(vals.data() + 1, n));
    }
    m.values.resize(n, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        m.values.col(static_cast<Eigen::Index>(k)) = rows[k];
    }
    return m;
}

std::string operator_to_json(const GftOperator& op) {
    json j;
    j["format"] = "hydrosample-gft-v1";
    j["rank"] = op.rank;
    j["rank_tol"] = op.rank_tol;
    j["f_inv"] = matrix_json(op.f_inv);
    j["q"] = matrix_json(op.q);
    j["r_factor"] = matrix_json(op.r_factor);
    j["band_support"] = op.band_support;
    j["pivot_columns"] = op.pivot_columns;
    return dump(j);
}

GftOperator operator_from_json(const std::string& text) {
    const json j = parse_json(text, "gft operator");
    expect_format(j, "hydrosample-gft-v1", "gft operator");
    GftOperator op;
    op.rank = j.at("rank").get<int>();
    op.rank_tol = j.at("rank_tol").get<double>();
    op.f_inv = matrix_from(j.at("f_inv"));
    op.q = matrix_from(j.at("q"));
    op.r_factor = matrix_from(j.at("r_factor"));
    op.band_support = j.at("band_support").get<std::vector<int>>();
    op.pivot_columns = j.at("pivot_columns").get<std::vector<int>>();
    return op;
}

std::string sampling_set_to_json(const SamplingSet& s) {
    json j;
    j["format"] = "hydrosample-sampling-set-v1";
    j["nodes"] = s.nodes;
    j["scores"] = s.scores;
    return dump(j);
}

SamplingSet sampling_set_from_json(const std::string& text) {
    const json j = parse_json(text, "sampling set");
    expect_format(j, "hydrosample-sampling-set-v1", "sampling set");
    SamplingSet s;
    s.nodes = j.at("nodes").get<std::vector<int>>();
    s.scores = j.at("scores").get<std::vector<double>>();
    return s;
}

std::string plan_to_json(const SamplingPlan& plan) {
    json j;
    j["format"] = "hydrosample-plan-v1";
    j["nodes"] = plan.nodes;
    j["scores"] = plan.scores;
    j["parents"] = plan.parents;
    json prov;
    struct Visitor {
        json& prov;
        void operator()(const GftSpecificProv& p) const {
            prov["kind"] = "gft_specific";
            prov["source"] = p.source;
        }
        void operator()(const GftFrequentProv& p) const {
            prov["kind"] = "gft_frequent";
            prov["threshold"] = p.threshold;
            if (p.budget > 0) prov["budget"] = p.budget;
        }
        void operator()(const GftImportantProv& p) const {
            prov["kind"] = "gft_important";
            prov["n"] = p.top_n;
        }
        void operator()(const LaplacianProv& p) const {
            prov["kind"] = "laplacian";
            prov["budget"] = p.budget;
        }
        void operator()(const RandomProv& p) const {
            prov["kind"] = "random";
            prov["seed"] = p.seed;
            prov["budget"] = p.budget;
        }
    };
    std::visit(Visitor{prov}, plan.provenance);
    j["provenance"] = prov;
    return dump(j);
}

SamplingPlan plan_from_json(const std::string& text) {
    const json j = parse_json(text, "sampling plan");
    expect_format(j, "hydrosample-plan-v1", "sampling plan");
    SamplingPlan plan;
    plan.nodes = j.at("nodes").get<std::vector<int>>();
    plan.scores = j.at("scores").get<std::vector<double>>();
    plan.parents = j.at("parents").get<std::vector<std::string>>();
    const json& prov = j.at("provenance");
    const std::string kind = prov.at("kind").get<std::string>();
    if (kind == "gft_specific") {
        plan.provenance = GftSpecificProv{prov.at("source").get<std::string>()};
    } else if (kind == "gft_frequent") {
        plan.provenance =
            GftFrequentProv{prov.at("threshold").get<int>(), prov.value("budget", 0)};
    } else if (kind == "gft_important") {
        plan.provenance = GftImportantProv{prov.at("n").get<int>()};
    } else if (kind == "laplacian") {
        plan.provenance = LaplacianProv{prov.at("budget").get<int>()};
    } else if (kind == "random") {
        plan.provenance =
            RandomProv{prov.at("seed").get<std::uint64_t>(), prov.at("budget").get<int>()};
    } else {
        throw ValidationError("sampling plan: unknown provenance kind '" + kind + "'");
    }
    return plan;
}

std::string model_to_json(const MlpModel& model) {
    json j;
    j["format"] = "hydrosample-mlp-v1";
    j["layer_sizes"] = model.layer_sizes;
    json weights = json::array();
    for (const auto& w : model.weights) weights.push_back(matrix_json(w));
    j["weights"] = weights;
    json biases = json::array();
    for (const auto& b : model.biases) biases.push_back(vector_json(b));
    j["biases"] = biases;
    j["hidden_activation"] = "relu";
    j["output_activation"] =
        model.output_activation == OutputActivation::sigmoid ? "sigmoid" : "identity";
    j["input_norm"] = {{"shift", vector_json(model.input_norm.shift)},
                       {"scale", vector_json(model.input_norm.scale)}};
    j["target_norm"] = {{"shift", vector_json(model.target_norm.shift)},
                        {"scale", vector_json(model.target_norm.scale)}};
    j["train_meta"] = {{"epochs", model.train_meta.epochs},
                       {"learning_rate", model.train_meta.learning_rate},
                       {"batch_size", model.train_meta.batch_size},
                       {"seed", model.train_meta.seed},
                       {"final_train_loss", model.train_meta.final_train_loss},
                       {"final_val_loss", model.train_meta.final_val_loss}};
    return dump(j);
}

MlpModel model_from_json(const std::string& text) {
    const json j = parse_json(text, "mlp model");
    expect_format(j, "hydrosample-mlp-v1", "mlp model");
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    for (const auto& w : j.at("weights")) m.weights.push_back(matrix_from(w));
    for (const auto& b : j.at("biases")) m.biases.push_back(vector_from(b));
    const std::string act = j.at("output_activation").get<std::string>();
    if (act == "sigmoid") m.output_activation = OutputActivation::sigmoid;
    else if (act == "identity") m.output_activation = OutputActivation::identity;
    else throw ValidationError("mlp model: unknown output activation '" + act + "'");
    m.input_norm.shift = vector_from(j.at("input_norm").at("shift"));
    m.input_norm.scale = vector_from(j.at("input_norm").at("scale"));
    m.target_norm.shift = vector_from(j.at("target_norm").at("shift"));
    m.target_norm.scale = vector_from(j.at("target_norm").at("scale"));
    const json& meta = j.at("train_meta");
    m.train_meta.epochs = meta.at("epochs").get<int>();
    m.train_meta.learning_rate = meta.at("learning_rate").get<double>();
    m.train_meta.batch_size = meta.at("batch_size").get<int>();
    m.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    m.train_meta.final_train_loss = meta.at("final_train_loss").get<double>();
    m.train_meta.final_val_loss = meta.at("final_val_loss").get<double>();
    return m;
}

std::string report_to_json(const EvalReport& report) {
    json j;
    j["format"] = "hydrosample-report-v1";
    j["plan_id"] = report.plan_id;
    j["scenario_ids"] = report.scenario_ids;
    j["budget_fraction"] = report.budget_fraction;
    j["tiers"] = {{"high", report.tiers.high},
                  {"medium", report.tiers.medium},
                  {"low", report.tiers.low}};
    j["sensitivity"] = report.sensitivity;
    j["specificity"] = report.specificity;
    j["per_node_nrmse"] = report.per_node_nrmse;
    j["mean_nrmse"] = report.mean_nrmse;
    j["polluted_pairs"] = report.polluted_pairs;
    j["clean_pairs"] = report.clean_pairs;
    return dump(j);
}

EvalReport report_from_json(const std::string& text) {
    const json j = parse_json(text, "eval report");
    expect_format(j, "hydrosample-report-v1", "eval report");
    EvalReport r;
    r.plan_id = j.at("plan_id").get<std::string>();
    r.scenario_ids = j.at("scenario_ids").get<std::vector<std::string>>();
    r.budget_fraction = j.at("budget_fraction").get<double>();
    r.tiers.high = j.at("tiers").at("high").get<double>();
    r.tiers.medium = j.at("tiers").at("medium").get<double>();
    r.tiers.low = j.at("tiers").at("low").get<double>();
    r.sensitivity = j.at("sensitivity").get<std::map<std::string, double>>();
    r.specificity = j.at("specificity").get<std::map<std::string, double>>();
    r.per_node_nrmse = j.at("per_node_nrmse").get<std::map<std::string, double>>();
    r.mean_nrmse = j.at("mean_nrmse").get<double>();
    r.polluted_pairs = j.at("polluted_pairs").get<int>();
    r.clean_pairs = j.at("clean_pairs").get<int>();
    return r;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {}

void ArtifactWriter::add(const std::string& relative_path, const std::string& content) {
    if (has(relative_path)) {
        throw RuntimeError("artifact '" + relative_path + "' written twice");
    }
    entries_.emplace_back(relative_path, content);
}

bool ArtifactWriter::has(const std::string& relative_path) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == relative_path; });
}

std::string ArtifactWriter::finalize(const std::string& config_text, bool partial) {
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    json files = json::array();
    for (const auto& [path, content] : entries_) {
        write_file(dir_ / path, content);
        files.push_back({{"path", path},
                         {"bytes", content.size()},
                         {"fnv1a64", to_hex(fnv1a64(content))}});
    }
    json manifest;
    manifest["format"] = "hydrosample-manifest-v1";
    manifest["config_fnv1a64"] = to_hex(fnv1a64(config_text));
    manifest["partial"] = partial;
    manifest["files"] = files;
    const std::string text = dump(manifest);
    write_file(dir_ / "manifest.json", text);
    return text;
}

} // namespace hydrosample
