#include "hydrosample/plans.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace hydrosample {

std::string SamplingPlan::id() const {
    struct Visitor {
        std::string operator()(const GftSpecificProv& p) const {
            return "gft_specific_" + p.source;
        }
        std::string operator()(const GftFrequentProv& p) const {
            std::string s = "gft_f_t" + std::to_string(p.threshold);
            if (p.budget > 0) s += "_b" + std::to_string(p.budget);
            return s;
        }
        std::string operator()(const GftImportantProv& p) const {
            return "gft_i_n" + std::to_string(p.top_n);
        }
        std::string operator()(const LaplacianProv& p) const {
            return "laplacian_b" + std::to_string(p.budget);
        }
        std::string operator()(const RandomProv& p) const {
            return "random_s" + std::to_string(p.seed) + "_b" + std::to_string(p.budget);
        }
    };
    return std::visit(Visitor{}, provenance);
}

SamplingPlan build_gft_dataset(const DataMatrix& x, double rank_tol) {
    const GftOperator op = build_gft_operator(x.values, rank_tol);
    const SamplingSet set = select_sampling_set(op, SelectionStrategy::greedy);
    SamplingPlan plan;
    plan.nodes = set.nodes;
    plan.scores = set.scores;
    plan.provenance = GftSpecificProv{x.scenario.source};
    return plan;
}

DataMatrix concat_columns(const std::vector<DataMatrix>& matrices) {
    if (matrices.empty()) throw ValidationError("concat_columns: no matrices");
    const auto& first = matrices.front();
    Eigen::Index total = 0;
    for (const auto& m : matrices) {
        if (m.node_index != first.node_index) {
            throw ValidationError("concat_columns: matrices use different node indexings");
        }
        total += m.values.cols();
    }
    DataMatrix out;
    out.node_index = first.node_index;
    out.timestep_s = first.timestep_s;
    out.scenario = first.scenario;
    out.values.resize(first.values.rows(), total);
    Eigen::Index at = 0;
    for (const auto& m : matrices) {
        out.values.middleCols(at, m.values.cols()) = m.values;
        at += m.values.cols();
    }
    return out;
}

std::vector<SamplingPlan> filter_subset_datasets(const std::vector<SamplingPlan>& plans) {
    for (const auto& p : plans) {
        if (!std::holds_alternative<GftSpecificProv>(p.provenance)) {
            throw ValidationError("filter_subset_datasets: all plans must be gft_specific");
        }
    }
    std::vector<std::set<int>> sets;
    sets.reserve(plans.size());
    for (const auto& p : plans) sets.emplace_back(p.nodes.begin(), p.nodes.end());

    auto source_of = [&](std::size_t i) {
        return std::get<GftSpecificProv>(plans[i].provenance).source;
    };

    std::vector<SamplingPlan> out;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        bool drop = false;
        for (std::size_t j = 0; j < plans.size() && !drop; ++j) {
            if (i == j) continue;
            if (!std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end())) {
                continue;
            }
            if (sets[i] == sets[j]) {
                // equal sets: keep the lowest source id, then the earliest
                const auto si = source_of(i);
                const auto sj = source_of(j);
                drop = sj < si || (sj == si && j < i);
            } else {
                drop = true; // proper subset of plan j
            }
        }
        if (!drop) out.push_back(plans[i]);
    }
    return out;
}

namespace {

/// (count desc, index asc) frequency ranking over all plan nodes.
std::vector<std::pair<int, int>> frequency_ranking(const std::vector<SamplingPlan>& plans) {
    std::map<int, int> counts;
    for (const auto& p : plans) {
        for (int v : p.nodes) ++counts[v];
    }
    std::vector<std::pair<int, int>> ranked; // (node, count)
    ranked.reserve(counts.size());
    for (const auto& [node, count] : counts) ranked.emplace_back(node, count);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

std::vector<std::string> parent_ids(const std::vector<SamplingPlan>& plans) {
    std::vector<std::string> out;
    out.reserve(plans.size());
    for (const auto& p : plans) out.push_back(p.id());
    return out;
}

} // namespace

SamplingPlan gft_frequent_plan(const std::vector<SamplingPlan>& plans, int threshold) {
    if (plans.empty()) throw ValidationError("gft_frequent_plan: no plans");
    if (threshold < 1) throw ValidationError("gft_frequent_plan: threshold must be >= 1");
    const auto ranked = frequency_ranking(plans);
    SamplingPlan out;
    out.provenance = GftFrequentProv{threshold, 0};
    out.parents = parent_ids(plans);
    int max_count = 0;
    for (const auto& [node, count] : ranked) {
        max_count = std::max(max_count, count);
        if (count >= threshold) {
            out.nodes.push_back(node);
            out.scores.push_back(static_cast<double>(count));
        }
    }
    if (out.nodes.empty()) {
        throw ValidationError("gft_frequent_plan: threshold " + std::to_string(threshold) +
                              " leaves no nodes; the maximum usable threshold is " +
                              std::to_string(max_count));
    }
    return out;
}

SamplingPlan gft_frequent_budget_plan(const std::vector<SamplingPlan>& plans, int budget,
                                      int n_junctions) {
    if (plans.empty()) throw ValidationError("gft_frequent_budget_plan: no plans");
    if (budget < 1 || budget > n_junctions) {
        throw ValidationError("gft_frequent_budget_plan: budget must be in [1, " +
                              std::to_string(n_junctions) + "]");
    }
    auto ranked = frequency_ranking(plans);
    if (static_cast<int>(ranked.size()) < budget) {
        std::set<int> seen;
        for (const auto& [node, count] : ranked) seen.insert(node);
        for (int v = 0; v < n_junctions && static_cast<int>(ranked.size()) < budget; ++v) {
            if (!seen.count(v)) ranked.emplace_back(v, 0);
        }
    }
    SamplingPlan out;
    out.parents = parent_ids(plans);
    for (int i = 0; i < budget; ++i) {
        out.nodes.push_back(ranked[static_cast<std::size_t>(i)].first);
        out.scores.push_back(static_cast<double>(ranked[static_cast<std::size_t>(i)].second));
    }
    // the effective threshold is the count of the last node taken
    out.provenance = GftFrequentProv{ranked[static_cast<std::size_t>(budget - 1)].second, budget};
    return out;
}

SamplingPlan gft_important_plan(const std::vector<SamplingPlan>& plans, int top_n) {
    if (plans.empty()) throw ValidationError("gft_important_plan: no plans");
    if (top_n < 1) throw ValidationError("gft_important_plan: n must be >= 1");
    std::map<int, int> best_rank; // node -> best (lowest) position achieved
    for (const auto& p : plans) {
        const int take = std::min<int>(top_n, static_cast<int>(p.nodes.size()));
        for (int pos = 0; pos < take; ++pos) {
            const int node = p.nodes[static_cast<std::size_t>(pos)];
            auto it = best_rank.find(node);
            if (it == best_rank.end() || pos < it->second) best_rank[node] = pos;
        }
    }
    std::vector<std::pair<int, int>> ranked(best_rank.begin(), best_rank.end()); // (node, best)
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    SamplingPlan out;
    out.provenance = GftImportantProv{top_n};
    out.parents = parent_ids(plans);
    for (const auto& [node, best] : ranked) {
        out.nodes.push_back(node);
        out.scores.push_back(static_cast<double>(best));
    }
    return out;
}

SamplingPlan laplacian_plan(const PipeNetwork& net, int budget) {
    const int n = net.junction_count();
    if (budget < 1 || budget > n) {
        throw ValidationError("laplacian_plan: budget must be in [1, " + std::to_string(n) + "]");
    }

    // Unweighted simple graph over junctions; reservoir-adjacent pipes drop.
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : net.pipes()) {
        const auto a = net.junction_index(p.from);
        const auto b = net.junction_index(p.to);
        if (a && b) {
            adj(*a, *b) = 1.0;
            adj(*b, *a) = 1.0;
        }
    }
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        lap(i, i) = adj.row(i).sum();
    }
    lap -= adj;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
    if (eig.info() != Eigen::Success) throw RuntimeError("laplacian_plan: eigensolver failed");
    const Eigen::VectorXd& vals = eig.eigenvalues(); // ascending
    const Eigen::MatrixXd& vecs = eig.eigenvectors();

    const double scale = std::max(1.0, std::abs(vals(n - 1)));
    const double zero_tol = 1e-9 * scale;
    const double cluster_tol = 1e-8 * scale;

    // Nonzero eigenvalues grouped into degenerate clusters; a cluster that is
    // only partially inside the budget contributes its (basis-independent)
    // projector diagonal scaled by the fraction taken.
    int first_nonzero = 0;
    while (first_nonzero < n && std::abs(vals(first_nonzero)) <= zero_tol) ++first_nonzero;
    const int available = n - first_nonzero;
    const int wanted = std::min(budget, available);

    Eigen::VectorXd score = Eigen::VectorXd::Zero(n);
    int taken = 0;
    int idx = first_nonzero;
    while (taken < wanted && idx < n) {
        int end = idx + 1;
        while (end < n && std::abs(vals(end) - vals(idx)) <= cluster_tol) ++end;
        const int cluster_size = end - idx;
        const int need = std::min(cluster_size, wanted - taken);
        Eigen::VectorXd cluster_diag = Eigen::VectorXd::Zero(n);
        for (int e = idx; e < end; ++e) {
            cluster_diag += vecs.col(e).cwiseAbs2();
        }
        score += cluster_diag * (static_cast<double>(need) / static_cast<double>(cluster_size));
        taken += need;
        idx = end;
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (score(a) != score(b)) return score(a) > score(b);
        return a < b;
    });
    // scores equal up to eigensolver noise are ties; resolve them by index
    const double tie_tol = 1e-9;
    std::size_t group = 0;
    while (group < order.size()) {
        std::size_t end = group + 1;
        const double lead = score(order[group]);
        while (end < order.size() &&
               std::abs(score(order[end]) - lead) <= tie_tol * std::max(1.0, std::abs(lead))) {
            ++end;
        }
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(group),
                  order.begin() + static_cast<std::ptrdiff_t>(end));
        group = end;
    }

    SamplingPlan out;
    out.provenance = LaplacianProv{budget};
    for (int i = 0; i < budget; ++i) {
        const int node = order[static_cast<std::size_t>(i)];
        out.nodes.push_back(node);
        out.scores.push_back(score(node));
    }
    return out;
}

SamplingPlan random_plan(const PipeNetwork& net, int budget, std::uint64_t seed) {
    const int n = net.junction_count();
    if (budget < 1 || budget > n) {
        throw ValidationError("random_plan: budget must be in [1, " + std::to_string(n) + "]");
    }
    SplitRng rng(seed);
    SamplingPlan out;
    out.nodes = sample_without_replacement(n, budget, rng);
    out.provenance = RandomProv{seed, budget};
    return out;
}

ReductionResult reduce_injection_specific(const SamplingPlan& plan, double accuracy_threshold,
                                          const DecoderEvaluator& evaluate) {
    if (!std::holds_alternative<GftSpecificProv>(plan.provenance)) {
        throw ValidationError("reduce_injection_specific: plan must be gft_specific");
    }
    if (!(accuracy_threshold > 0.0)) {
        throw ValidationError("reduce_injection_specific: threshold must be > 0");
    }
    if (plan.nodes.empty()) throw ValidationError("reduce_injection_specific: empty plan");

    ReductionResult result;
    SamplingPlan current = plan;

    const double full_score = evaluate(current);
    result.history.push_back({static_cast<int>(current.nodes.size()), full_score});
    if (!(full_score <= accuracy_threshold)) {
        throw RuntimeError("reduce_injection_specific: the full GFT dataset already misses the "
                           "threshold (nrmse " +
                           format_double(full_score) + " > " + format_double(accuracy_threshold) +
                           ")");
    }

    result.plan = current;
    while (current.nodes.size() > 1) {
        current.nodes.pop_back(); // lowest-importance node is last
        if (!current.scores.empty()) current.scores.pop_back();
        const double score = evaluate(current);
        result.history.push_back({static_cast<int>(current.nodes.size()), score});
        if (!(score <= accuracy_threshold)) break;
        result.plan = current;
    }
    return result;
}

} // namespace hydrosample
