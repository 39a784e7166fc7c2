#ifndef HYDROSAMPLE_PLANS_HPP
#define HYDROSAMPLE_PLANS_HPP

#include "hydrosample/gft.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/transport.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace hydrosample {

/// How a plan was derived; the parameters are sufficient to rebuild it.
struct GftSpecificProv { std::string source; };
struct GftFrequentProv { int threshold = 0; int budget = 0; }; // budget 0 = no truncation
struct GftImportantProv { int top_n = 0; };
struct LaplacianProv { int budget = 0; };
struct RandomProv { std::uint64_t seed = 0; int budget = 0; };

using PlanProvenance =
    std::variant<GftSpecificProv, GftFrequentProv, GftImportantProv, LaplacianProv, RandomProv>;

/// An ordered junction subset to instrument with sensors. `scores`, when
/// present, parallels `nodes` (importance at selection time).
struct SamplingPlan {
    std::vector<int> nodes;
    std::vector<double> scores;
    PlanProvenance provenance;
    std::vector<std::string> parents;

    std::string id() const; // deterministic, filename-safe
};

/// Per-source optimal node list: GFT operator + greedy selection on one
/// scenario's data matrix. Node order is importance order.
SamplingPlan build_gft_dataset(const DataMatrix& x, double rank_tol = 1e-10);

/// Horizontal concatenation of matrices sharing a node indexing, used to
/// build one GFT dataset per source out of its variant runs.
DataMatrix concat_columns(const std::vector<DataMatrix>& matrices);

/// Drops plans whose node set is contained in (or equals) another retained
/// plan's set. Equal sets keep the lowest source id. Input order preserved.
std::vector<SamplingPlan> filter_subset_datasets(const std::vector<SamplingPlan>& plans);

/// Nodes appearing in at least `threshold` of the plans, ordered by
/// descending count then ascending index.
SamplingPlan gft_frequent_plan(const std::vector<SamplingPlan>& plans, int threshold);

/// The `budget` most frequent nodes across the plans (same ordering rule);
/// used for budget-matched comparisons against the baselines. When the
/// budget exceeds the nodes seen in any plan, the remaining junctions are
/// appended in ascending index order with count 0.
SamplingPlan gft_frequent_budget_plan(const std::vector<SamplingPlan>& plans, int budget,
                                      int n_junctions);

/// Union of the top-n nodes of each plan, ordered by the best rank position
/// a node achieves in any plan, then ascending index.
SamplingPlan gft_important_plan(const std::vector<SamplingPlan>& plans, int top_n);

/// Baseline: spectral leverage scores over the `budget` lowest-nonzero
/// eigenvectors of the unweighted junction-graph Laplacian. Eigenvalue
/// clusters are weighted atomically so degenerate spectra rank stably.
SamplingPlan laplacian_plan(const PipeNetwork& net, int budget);

/// Baseline: uniform sample of `budget` junctions without replacement.
SamplingPlan random_plan(const PipeNetwork& net, int budget, std::uint64_t seed);

/// Trains and scores a decoder for a candidate plan; returns the mean
/// normalized RMSE on a held-out variant split.
using DecoderEvaluator = std::function<double(const SamplingPlan&)>;

struct ReductionStep {
    int plan_size = 0;
    double nrmse = 0.0;
};

struct ReductionResult {
    SamplingPlan plan;
    std::vector<ReductionStep> history;
};

/// Drops the least important node one at a time, re-evaluating after each
/// drop; returns the smallest plan whose evaluation stayed within
/// `accuracy_threshold`. Throws if even the full plan fails.
ReductionResult reduce_injection_specific(const SamplingPlan& plan, double accuracy_threshold,
                                          const DecoderEvaluator& evaluate);

} // namespace hydrosample

#endif
