#include "hydrosample/pipeline.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/io.hpp"
#include "hydrosample/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hydrosample {

using nlohmann::json;

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    cfg.text_ = text;
    std::istringstream stream(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const auto hash = raw.find_first_of("#;");
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        const auto begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t");
        line = line.substr(begin, end - begin + 1);

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
            }
            section = line.substr(1, line.size() - 2);
            continue;
        }
        std::string kv = line;
        std::replace(kv.begin(), kv.end(), '=', ' ');
        std::istringstream iss(kv);
        std::string key;
        iss >> key;
        std::string value;
        std::getline(iss, value);
        const auto vb = value.find_first_not_of(" \t");
        value = vb == std::string::npos ? "" : value.substr(vb);
        const std::string dotted = section.empty() ? key : section + "." + key;
        cfg.values_[dotted] = value;
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string ConfigFile::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("config: missing key '" + key + "'");
    return it->second;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigFile::number(const std::string& key) const {
    return parse_double(get(key), "config key '" + key + "'");
}

double ConfigFile::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

long ConfigFile::integer_or(const std::string& key, long fallback) const {
    return has(key) ? parse_long(get(key), "config key '" + key + "'") : fallback;
}

bool ConfigFile::flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> ConfigFile::words(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream iss(get_or(key, ""));
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::vector<double> ConfigFile::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& w : words(key)) {
        out.push_back(parse_double(w, "config key '" + key + "'"));
    }
    return out;
}

int budget_count(double fraction, int n_junctions) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("budget fraction must be in (0, 1], got " + format_double(fraction));
    }
    const int count = static_cast<int>(std::llround(fraction * n_junctions));
    return std::clamp(count, 1, n_junctions);
}

PipelineConfig PipelineConfig::load(const ConfigFile& file, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    std::filesystem::path net_path = file.get("network.file");
    cfg.network_file = net_path.is_absolute() ? net_path : base_dir / net_path;

    cfg.sources = file.words("scenarios.sources");
    if (cfg.sources.empty()) throw ValidationError("config: scenarios.sources is empty");
    cfg.variants.rates_mg_s = file.numbers("scenarios.rates_mg_s");
    cfg.variants.durations_s = file.numbers("scenarios.durations_s");
    cfg.variants.starts_s = file.has("scenarios.starts_s") ? file.numbers("scenarios.starts_s")
                                                           : std::vector<double>{0.0};
    cfg.variants.timestep_s = file.number("scenarios.timestep_s");
    cfg.variants.max_steps = static_cast<int>(file.integer_or("scenarios.max_steps", 0));
    if (cfg.variants.max_steps <= 0) throw ValidationError("config: scenarios.max_steps must be > 0");

    cfg.rank_tol = file.number_or("plans.rank_tol", 1e-10);
    cfg.gft_f_budgets = file.numbers("plans.gft_f_budgets");
    for (double t : file.numbers("plans.gft_f_thresholds")) {
        cfg.gft_f_thresholds.push_back(static_cast<int>(t));
    }
    for (double n : file.numbers("plans.gft_i_top_n")) {
        cfg.gft_i_top_n.push_back(static_cast<int>(n));
    }
    cfg.laplacian_budgets = file.numbers("plans.laplacian_budgets");
    cfg.random_budgets = file.numbers("plans.random_budgets");

    cfg.training.epochs = static_cast<int>(file.integer_or("training.epochs", 200));
    cfg.training.learning_rate = file.number_or("training.learning_rate", 1e-3);
    cfg.training.batch_size = static_cast<int>(file.integer_or("training.batch_size", 32));
    for (double h : file.numbers("training.hidden")) {
        cfg.decoder_hidden.push_back(static_cast<int>(h));
    }

    for (const auto& w : file.words("evaluate.seeds")) {
        cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long(w, "evaluate.seeds")));
    }
    if (cfg.seeds.empty()) cfg.seeds.push_back(1);

    cfg.reduction_enabled = file.flag_or("reduction.enabled", false);
    cfg.reduction_threshold = file.number_or("reduction.threshold", 0.15);
    return cfg;
}

namespace {

std::string reduction_json(const std::string& source, const ReductionResult& r) {
    json j;
    j["format"] = "hydrosample-reduction-v1";
    j["source"] = source;
    json hist = json::array();
    for (const auto& step : r.history) {
        hist.push_back({{"plan_size", step.plan_size}, {"nrmse", step.nrmse}});
    }
    j["history"] = hist;
    j["retained_nodes"] = r.plan.nodes;
    return j.dump(2) + "\n";
}

} // namespace

ExperimentBundle run_pipeline(const PipelineConfig& config, const std::string& config_text,
                              const std::filesystem::path& out_dir) {
    ArtifactWriter artifacts(out_dir);
    std::string stage = "network";
    try {
        ExperimentBundle bundle{parse_inp(read_file(config.network_file)),
                                {}, {}, {}, {}, {}, {}, {}};
        const PipeNetwork& net = bundle.network;
        const int n = net.junction_count();

        stage = "sweep";
        bundle.matrices = run_scenario_sweep(net, config.sources, config.variants);
        for (const auto& m : bundle.matrices) {
            const std::string base = "matrices/" + scenario_id(m.scenario);
            artifacts.add(base + ".csv", matrix_to_csv(m));
            artifacts.add(base + ".json", matrix_sidecar_json(m));
        }

        stage = "gft-datasets";
        for (const auto& source : config.sources) {
            std::vector<DataMatrix> family;
            for (const auto& m : bundle.matrices) {
                if (m.scenario.source == source) family.push_back(m);
            }
            const DataMatrix combined = concat_columns(family);
            bundle.gft_datasets.push_back(build_gft_dataset(combined, config.rank_tol));
            const auto& plan = bundle.gft_datasets.back();
            artifacts.add("plans/" + plan.id() + ".json", plan_to_json(plan));
        }

        stage = "subset-filter";
        bundle.retained_gft_datasets = filter_subset_datasets(bundle.gft_datasets);

        stage = "plans";
        for (double frac : config.gft_f_budgets) {
            bundle.plans.push_back(
                gft_frequent_budget_plan(bundle.retained_gft_datasets, budget_count(frac, n), n));
        }
        for (int threshold : config.gft_f_thresholds) {
            bundle.plans.push_back(gft_frequent_plan(bundle.retained_gft_datasets, threshold));
        }
        for (int top_n : config.gft_i_top_n) {
            bundle.plans.push_back(gft_important_plan(bundle.retained_gft_datasets, top_n));
        }
        for (double frac : config.laplacian_budgets) {
            bundle.plans.push_back(laplacian_plan(net, budget_count(frac, n)));
        }
        std::vector<SamplingPlan> seeded_random; // evaluated only under their own seed
        for (double frac : config.random_budgets) {
            for (std::uint64_t seed : config.seeds) {
                seeded_random.push_back(random_plan(net, budget_count(frac, n), seed));
            }
        }
        for (const auto& plan : bundle.plans) {
            artifacts.add("plans/" + plan.id() + ".json", plan_to_json(plan));
        }
        for (const auto& plan : seeded_random) {
            artifacts.add("plans/" + plan.id() + ".json", plan_to_json(plan));
        }

        stage = "train-evaluate";
        for (std::uint64_t seed : config.seeds) {
            const ScenarioSplit split =
                split_scenarios(static_cast<int>(bundle.matrices.size()), seed);
            std::vector<DataMatrix> held_out;
            for (int mi : split.held_out) {
                held_out.push_back(bundle.matrices[static_cast<std::size_t>(mi)]);
            }

            std::vector<const SamplingPlan*> for_this_seed;
            for (const auto& plan : bundle.plans) for_this_seed.push_back(&plan);
            for (const auto& plan : seeded_random) {
                if (std::get<RandomProv>(plan.provenance).seed == seed) {
                    for_this_seed.push_back(&plan);
                }
            }

            for (const SamplingPlan* plan : for_this_seed) {
                DecoderOptions opt;
                opt.train = config.training;
                opt.train.seed = seed;
                opt.hidden_sizes = config.decoder_hidden;
                const MlpModel model = train_decoder(*plan, bundle.matrices, seed, opt);
                const std::string tag = plan->id() + "_seed" + std::to_string(seed);
                artifacts.add("models/model_" + tag + ".json", model_to_json(model));
                EvalReport report = evaluate_plan(*plan, model, held_out);
                artifacts.add("reports/report_" + tag + ".json", report_to_json(report));
                bundle.reports.push_back(std::move(report));
            }
        }
        bundle.plans.insert(bundle.plans.end(), seeded_random.begin(), seeded_random.end());

        stage = "reduction";
        if (config.reduction_enabled) {
            const std::uint64_t seed = config.seeds.front();
            for (std::size_t s = 0; s < config.sources.size(); ++s) {
                const std::string& source = config.sources[s];
                std::vector<DataMatrix> family;
                for (const auto& m : bundle.matrices) {
                    if (m.scenario.source == source) family.push_back(m);
                }
                const ScenarioSplit split =
                    split_scenarios(static_cast<int>(family.size()), seed);
                std::vector<DataMatrix> family_held;
                for (int mi : split.held_out) {
                    family_held.push_back(family[static_cast<std::size_t>(mi)]);
                }
                DecoderEvaluator evaluate = [&](const SamplingPlan& candidate) {
                    DecoderOptions opt;
                    opt.train = config.training;
                    opt.train.seed = seed;
                    opt.hidden_sizes = config.decoder_hidden;
                    const MlpModel model = train_decoder(candidate, family, seed, opt);
                    return mean_heldout_nrmse(candidate, model, family_held);
                };
                ReductionResult result = reduce_injection_specific(
                    bundle.gft_datasets[s], config.reduction_threshold, evaluate);
                artifacts.add("reductions/reduction_" + source + ".json",
                              reduction_json(source, result));
                bundle.reductions.emplace(source, std::move(result));
            }
        }

        stage = "export";
        if (!bundle.reports.empty()) {
            artifacts.add("plots.csv", export_plot_data(bundle.reports));
        }

        bundle.manifest = artifacts.finalize(config_text, false);
        return bundle;
    } catch (const std::exception& e) {
        try {
            artifacts.finalize(config_text, true);
        } catch (...) {
            // the partial manifest is best-effort
        }
        throw RuntimeError("pipeline stage '" + stage + "' failed: " + e.what());
    }
}

} // namespace hydrosample
