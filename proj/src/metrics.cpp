#include "hydrosample/metrics.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hydrosample {

double nrmse(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate,
             double scenario_max) {
    if (reference.size() == 0) throw ValidationError("nrmse: empty series");
    if (reference.size() != estimate.size()) {
        throw ValidationError("nrmse: series lengths differ");
    }
    const double range = reference.maxCoeff() - reference.minCoeff();
    if (range == 0.0) {
        const double deviation = (estimate.array() - reference(0)).abs().maxCoeff();
        return deviation < 1e-9 * scenario_max ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const double rmse = std::sqrt((reference - estimate).squaredNorm() /
                                  static_cast<double>(reference.size()));
    return rmse / range;
}

double nrmse(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate) {
    const double scenario_max =
        reference.size() > 0 ? reference.cwiseAbs().maxCoeff() : 0.0;
    return nrmse(reference, estimate, scenario_max);
}

bool classify_polluted(const Eigen::VectorXd& series, double scenario_max) {
    if (!(scenario_max > 0.0)) throw ValidationError("classify_polluted: scenario_max must be > 0");
    return series.maxCoeff() > 0.01 * scenario_max;
}

std::string scenario_id(const InjectionScenario& sc) {
    return sc.source + "_r" + format_double(sc.rate_mg_s) + "_d" + format_double(sc.duration_s) +
           "_s" + format_double(sc.start_s);
}

EvalReport evaluate_plan(const SamplingPlan& plan, const DynamicsPredictor& predict,
                         const std::vector<DataMatrix>& test_matrices,
                         const AccuracyTiers& tiers) {
    if (test_matrices.empty()) throw ValidationError("evaluate_plan: empty test set");

    EvalReport report;
    report.plan_id = plan.id();
    report.tiers = tiers;
    const int n = test_matrices.front().n_nodes();
    report.budget_fraction = static_cast<double>(plan.nodes.size()) / static_cast<double>(n);

    const std::vector<std::pair<std::string, double>> tier_list{
        {"high", tiers.high}, {"medium", tiers.medium}, {"low", tiers.low}};

    std::map<std::string, int> sens_hits;
    std::map<std::string, int> spec_hits;
    for (const auto& [name, cut] : tier_list) {
        sens_hits[name] = 0;
        spec_hits[name] = 0;
    }
    std::map<std::string, double> node_nrmse_sum;
    std::map<std::string, int> node_nrmse_count;
    double nrmse_sum = 0.0;

    for (const auto& matrix : test_matrices) {
        report.scenario_ids.push_back(scenario_id(matrix.scenario));
        const double scenario_max = matrix.values.maxCoeff();
        if (!(scenario_max > 0.0)) continue; // nothing ever polluted: no pairs to score

        Eigen::MatrixXd sensors(static_cast<Eigen::Index>(plan.nodes.size()),
                                matrix.values.cols());
        for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
            sensors.row(static_cast<Eigen::Index>(i)) = matrix.values.row(plan.nodes[i]);
        }
        const Eigen::MatrixXd estimate = predict(sensors);
        if (estimate.rows() != matrix.values.rows() || estimate.cols() != matrix.values.cols()) {
            throw RuntimeError("evaluate_plan: predictor returned a wrong-shaped matrix");
        }

        for (int j = 0; j < n; ++j) {
            const Eigen::VectorXd ref = matrix.values.row(j);
            const Eigen::VectorXd est = estimate.row(j);
            if (classify_polluted(ref, scenario_max)) {
                ++report.polluted_pairs;
                const double err = nrmse(ref, est, scenario_max);
                nrmse_sum += err;
                const std::string& jid = matrix.node_index[static_cast<std::size_t>(j)];
                node_nrmse_sum[jid] += err;
                ++node_nrmse_count[jid];
                for (const auto& [name, cut] : tier_list) {
                    if (err <= cut) ++sens_hits[name];
                }
            } else {
                ++report.clean_pairs;
                const bool est_clean = !classify_polluted(est, scenario_max);
                for (const auto& [name, cut] : tier_list) {
                    if (est_clean) ++spec_hits[name];
                }
            }
        }
    }

    for (const auto& [name, cut] : tier_list) {
        report.sensitivity[name] =
            report.polluted_pairs > 0
                ? static_cast<double>(sens_hits[name]) / report.polluted_pairs
                : 1.0;
        report.specificity[name] =
            report.clean_pairs > 0 ? static_cast<double>(spec_hits[name]) / report.clean_pairs
                                   : 1.0;
    }
    report.mean_nrmse = report.polluted_pairs > 0 ? nrmse_sum / report.polluted_pairs : 0.0;
    for (const auto& [jid, total] : node_nrmse_sum) {
        report.per_node_nrmse[jid] = total / node_nrmse_count[jid];
    }
    return report;
}

EvalReport evaluate_plan(const SamplingPlan& plan, const MlpModel& model,
                         const std::vector<DataMatrix>& test_matrices,
                         const AccuracyTiers& tiers) {
    DynamicsPredictor predict = [&](const Eigen::MatrixXd& sensors) {
        return predict_dynamics(model, plan, sensors);
    };
    return evaluate_plan(plan, predict, test_matrices, tiers);
}

double mean_heldout_nrmse(const SamplingPlan& plan, const MlpModel& model,
                          const std::vector<DataMatrix>& held_out) {
    if (held_out.empty()) throw ValidationError("mean_heldout_nrmse: no held-out matrices");
    double sum = 0.0;
    int count = 0;
    for (const auto& matrix : held_out) {
        Eigen::MatrixXd sensors(static_cast<Eigen::Index>(plan.nodes.size()),
                                matrix.values.cols());
        for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
            sensors.row(static_cast<Eigen::Index>(i)) = matrix.values.row(plan.nodes[i]);
        }
        const Eigen::MatrixXd estimate = predict_dynamics(model, plan, sensors);
        const double scenario_max = matrix.values.maxCoeff();
        if (!(scenario_max > 0.0)) continue;
        for (int j = 0; j < matrix.n_nodes(); ++j) {
            const Eigen::VectorXd ref = matrix.values.row(j);
            if (!classify_polluted(ref, scenario_max)) continue; // flat series: +inf sentinel
            sum += nrmse(ref, estimate.row(j), scenario_max);
            ++count;
        }
    }
    if (count == 0) throw ValidationError("mean_heldout_nrmse: no polluted junctions to score");
    return sum / count;
}

std::string export_plot_data(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("export_plot_data: no reports");
    std::vector<const EvalReport*> sorted;
    sorted.reserve(reports.size());
    for (const auto& r : reports) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const EvalReport* a, const EvalReport* b) {
        if (a->plan_id != b->plan_id) return a->plan_id < b->plan_id;
        return a->budget_fraction < b->budget_fraction;
    });

    std::string csv = "plan,budget_fraction,tier,sensitivity,specificity,mean_nrmse\n";
    for (const EvalReport* r : sorted) {
        for (const char* tier : {"high", "medium", "low"}) {
            csv += r->plan_id + "," + format_double(r->budget_fraction) + "," + tier + "," +
                   format_double(r->sensitivity.at(tier)) + "," +
                   format_double(r->specificity.at(tier)) + "," + format_double(r->mean_nrmse) +
                   "\n";
        }
    }
    return csv;
}

} // namespace hydrosample
