// Command-line front end: simulate scenarios, build GFT operators and
// sampling plans, train and evaluate decoders, or run the whole pipeline.

#include "hydrosample/errors.hpp"
#include "hydrosample/flow.hpp"
#include "hydrosample/gft.hpp"
#include "hydrosample/io.hpp"
#include "hydrosample/metrics.hpp"
#include "hydrosample/mlp.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/pipeline.hpp"
#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace hydrosample;

namespace {

PipeNetwork load_network(const std::string& path) {
    try {
        return parse_inp(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::vector<DataMatrix> load_matrices(const std::vector<std::string>& csv_paths) {
    std::vector<DataMatrix> out;
    for (const auto& csv : csv_paths) {
        fs::path sidecar = fs::path(csv);
        sidecar.replace_extension(".json");
        out.push_back(matrix_from_csv(read_file(csv), read_file(sidecar)));
    }
    return out;
}

void write_matrix(const DataMatrix& m, const fs::path& out_dir) {
    const std::string base = scenario_id(m.scenario);
    write_file(out_dir / (base + ".csv"), matrix_to_csv(m));
    write_file(out_dir / (base + ".json"), matrix_sidecar_json(m));
    std::cout << base << ": " << m.n_nodes() << " junctions x " << m.n_steps() << " steps\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GFT-driven sparse sampling of water network contaminant dynamics"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", seed, "Seed for seeded operations")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run one injection scenario");
    std::string sim_net, sim_scenario;
    simulate->add_option("--net", sim_net, "Network INP file")->required();
    simulate->add_option("--scenario", sim_scenario, "Scenario key-value file")->required();

    // gft
    auto* gft = app.add_subcommand("gft", "Build a GFT operator and sampling set from a matrix");
    std::string gft_matrix;
    double gft_rank_tol = 1e-10;
    gft->add_option("--matrix", gft_matrix, "Data matrix CSV (sidecar JSON next to it)")->required();
    gft->add_option("--rank-tol", gft_rank_tol, "Relative rank tolerance")->capture_default_str();

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Derive a sampling plan");
    std::string plan_strategy, plan_net;
    std::vector<std::string> plan_inputs;
    int plan_budget = 0, plan_threshold = 0, plan_top_n = 0;
    plan_cmd->add_option("--strategy", plan_strategy,
                         "gft-specific | gft-f | gft-f-budget | gft-i | laplacian | random")
        ->required();
    plan_cmd->add_option("--net", plan_net, "Network INP file (laplacian/random/budget)");
    plan_cmd->add_option("--matrix", plan_inputs, "Matrix CSVs (gft-specific) or plan JSONs (gft-f/gft-i)");
    plan_cmd->add_option("--budget", plan_budget, "Node count (laplacian/random/gft-f-budget)");
    plan_cmd->add_option("--threshold", plan_threshold, "Occurrence threshold (gft-f)");
    plan_cmd->add_option("--top-n", plan_top_n, "Top-n nodes per dataset (gft-i)");

    // train
    auto* train = app.add_subcommand("train", "Train a decoder for a plan");
    std::string train_plan;
    std::vector<std::string> train_matrices;
    int train_epochs = 200, train_batch = 32;
    double train_lr = 1e-3;
    train->add_option("--plan", train_plan, "Plan JSON")->required();
    train->add_option("--matrix", train_matrices, "Matrix CSVs")->required();
    train->add_option("--epochs", train_epochs)->capture_default_str();
    train->add_option("--batch-size", train_batch)->capture_default_str();
    train->add_option("--learning-rate", train_lr)->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained decoder on matrices");
    std::string eval_plan, eval_model;
    std::vector<std::string> eval_matrices;
    evaluate->add_option("--plan", eval_plan, "Plan JSON")->required();
    evaluate->add_option("--model", eval_model, "Model JSON")->required();
    evaluate->add_option("--matrix", eval_matrices, "Matrix CSVs")->required();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run the full experiment from a config file");
    std::string pipeline_config;
    pipeline->add_option("--config", pipeline_config, "Pipeline config file")->required();

    // export
    auto* export_cmd = app.add_subcommand("export", "Flatten report JSONs into plot CSV");
    std::vector<std::string> export_reports;
    export_cmd->add_option("--report", export_reports, "Report JSON files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            const PipeNetwork net = load_network(sim_net);
            const InjectionScenario scenario = parse_scenario(read_file(sim_scenario));
            validate_scenario(net, scenario);
            const FlowField flows = solve_flows(net);
            write_matrix(simulate_transport(net, flows, scenario), out_dir);
        } else if (*gft) {
            auto matrices = load_matrices({gft_matrix});
            const GftOperator op = build_gft_operator(matrices.front().values, gft_rank_tol);
            const SamplingSet set = select_sampling_set(op, SelectionStrategy::greedy);
            write_file(fs::path(out_dir) / "operator.json", operator_to_json(op));
            write_file(fs::path(out_dir) / "sampling_set.json", sampling_set_to_json(set));
            std::cout << "rank " << op.rank << ", sampling set of " << set.nodes.size()
                      << " nodes\n";
        } else if (*plan_cmd) {
            SamplingPlan plan;
            if (plan_strategy == "gft-specific") {
                plan = build_gft_dataset(concat_columns(load_matrices(plan_inputs)));
            } else if (plan_strategy == "gft-f" || plan_strategy == "gft-f-budget" ||
                       plan_strategy == "gft-i") {
                std::vector<SamplingPlan> parents;
                for (const auto& p : plan_inputs) parents.push_back(plan_from_json(read_file(p)));
                if (plan_strategy == "gft-f") {
                    plan = gft_frequent_plan(parents, plan_threshold);
                } else if (plan_strategy == "gft-f-budget") {
                    const PipeNetwork net = load_network(plan_net);
                    plan = gft_frequent_budget_plan(parents, plan_budget, net.junction_count());
                } else {
                    plan = gft_important_plan(parents, plan_top_n);
                }
            } else if (plan_strategy == "laplacian") {
                plan = laplacian_plan(load_network(plan_net), plan_budget);
            } else if (plan_strategy == "random") {
                plan = random_plan(load_network(plan_net), plan_budget, seed);
            } else {
                throw ValidationError("unknown plan strategy '" + plan_strategy + "'");
            }
            write_file(fs::path(out_dir) / (plan.id() + ".json"), plan_to_json(plan));
            std::cout << plan.id() << ": " << plan.nodes.size() << " nodes\n";
        } else if (*train) {
            const SamplingPlan plan = plan_from_json(read_file(train_plan));
            DecoderOptions opt;
            opt.train.epochs = train_epochs;
            opt.train.batch_size = train_batch;
            opt.train.learning_rate = train_lr;
            opt.train.seed = seed;
            const MlpModel model = train_decoder(plan, load_matrices(train_matrices), seed, opt);
            write_file(fs::path(out_dir) / ("model_" + plan.id() + ".json"), model_to_json(model));
            std::cout << "trained " << plan.id() << ", final train loss "
                      << model.train_meta.final_train_loss << "\n";
        } else if (*evaluate) {
            const SamplingPlan plan = plan_from_json(read_file(eval_plan));
            const MlpModel model = model_from_json(read_file(eval_model));
            const EvalReport report = evaluate_plan(plan, model, load_matrices(eval_matrices));
            write_file(fs::path(out_dir) / ("report_" + plan.id() + ".json"),
                       report_to_json(report));
            std::cout << plan.id() << ": low-tier sensitivity " << report.sensitivity.at("low")
                      << ", specificity " << report.specificity.at("low") << "\n";
        } else if (*pipeline) {
            const std::string text = read_file(pipeline_config);
            const ConfigFile file = ConfigFile::parse(text);
            const PipelineConfig config =
                PipelineConfig::load(file, fs::path(pipeline_config).parent_path());
            const ExperimentBundle bundle = run_pipeline(config, text, out_dir);
            std::cout << "pipeline complete: " << bundle.reports.size() << " reports under "
                      << out_dir << "\n";
        } else if (*export_cmd) {
            std::vector<EvalReport> reports;
            for (const auto& p : export_reports) reports.push_back(report_from_json(read_file(p)));
            write_file(fs::path(out_dir) / "plots.csv", export_plot_data(reports));
            std::cout << "wrote plots.csv (" << reports.size() << " reports)\n";
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
