#ifndef HYDROSAMPLE_METRICS_HPP
#define HYDROSAMPLE_METRICS_HPP

#include "hydrosample/mlp.hpp"
#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hydrosample {

/// Accuracy tiers: a junction's dynamics count as reconstructed at a tier
/// when its normalized RMSE is at or below the tier threshold.
struct AccuracyTiers {
    double high = 0.05;
    double medium = 0.15;
    double low = 0.30;
};

/// RMSE divided by the reference range. A flat reference yields 0 when the
/// estimate deviates by less than 1e-9 * scenario_max, +infinity otherwise.
double nrmse(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate,
             double scenario_max);
double nrmse(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate);

/// A series is polluted when it exceeds 1% of the scenario-wide peak.
bool classify_polluted(const Eigen::VectorXd& series, double scenario_max);

struct EvalReport {
    std::string plan_id;
    std::vector<std::string> scenario_ids;
    double budget_fraction = 0.0;
    AccuracyTiers tiers;
    std::map<std::string, double> sensitivity; // tier name -> fraction
    std::map<std::string, double> specificity; // tier name -> fraction
    std::map<std::string, double> per_node_nrmse; // junction id -> mean nrmse (polluted only)
    double mean_nrmse = 0.0; // over polluted (scenario, junction) pairs
    int polluted_pairs = 0;
    int clean_pairs = 0;
};

/// Reconstruction backend: maps |plan| x K sensor rows to an N x K estimate.
using DynamicsPredictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// Scores a plan + predictor on held-out scenarios. Sensitivity pools
/// polluted (scenario, junction) pairs whose nrmse clears each tier;
/// specificity pools clean pairs whose reconstruction stays clean.
EvalReport evaluate_plan(const SamplingPlan& plan, const DynamicsPredictor& predict,
                         const std::vector<DataMatrix>& test_matrices,
                         const AccuracyTiers& tiers = {});

/// Convenience overload wrapping a trained decoder model.
EvalReport evaluate_plan(const SamplingPlan& plan, const MlpModel& model,
                         const std::vector<DataMatrix>& test_matrices,
                         const AccuracyTiers& tiers = {});

/// Mean nrmse over polluted junctions of held-out scenarios; the score
/// reduce_injection_specific thresholds against.
double mean_heldout_nrmse(const SamplingPlan& plan, const MlpModel& model,
                          const std::vector<DataMatrix>& held_out);

/// Long-format CSV: plan, budget_fraction, tier, sensitivity, specificity,
/// mean_nrmse; sorted by (plan, budget), tiers high/medium/low per report.
std::string export_plot_data(const std::vector<EvalReport>& reports);

/// Deterministic scenario label used in reports and filenames.
std::string scenario_id(const InjectionScenario& sc);

} // namespace hydrosample

#endif
