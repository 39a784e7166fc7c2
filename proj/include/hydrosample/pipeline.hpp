#ifndef HYDROSAMPLE_PIPELINE_HPP
#define HYDROSAMPLE_PIPELINE_HPP

#include "hydrosample/metrics.hpp"
#include "hydrosample/mlp.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hydrosample {

/// Sectioned key-value configuration (`[section]`, `key = value`,
/// `#`/`;` comments). Keys are addressed as "section.key".
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text);

    bool has(const std::string& dotted_key) const;
    std::string get(const std::string& dotted_key) const;
    std::string get_or(const std::string& dotted_key, const std::string& fallback) const;
    double number(const std::string& dotted_key) const;
    double number_or(const std::string& dotted_key, double fallback) const;
    long integer_or(const std::string& dotted_key, long fallback) const;
    bool flag_or(const std::string& dotted_key, bool fallback) const;
    std::vector<std::string> words(const std::string& dotted_key) const;
    std::vector<double> numbers(const std::string& dotted_key) const;

    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::map<std::string, std::string> values_;
};

struct PipelineConfig {
    std::filesystem::path network_file;

    std::vector<std::string> sources;
    VariantSpec variants;

    double rank_tol = 1e-10;
    std::vector<double> gft_f_budgets;      // fractions of junction count
    std::vector<int> gft_f_thresholds;      // absolute occurrence thresholds
    std::vector<int> gft_i_top_n;
    std::vector<double> laplacian_budgets;  // fractions
    std::vector<double> random_budgets;     // fractions

    TrainOptions training;
    std::vector<int> decoder_hidden;        // empty = default width

    std::vector<std::uint64_t> seeds;

    bool reduction_enabled = false;
    double reduction_threshold = 0.15;

    /// Parses the config file; `base_dir` anchors relative paths.
    static PipelineConfig load(const ConfigFile& file, const std::filesystem::path& base_dir);
};

struct ExperimentBundle {
    PipeNetwork network;
    std::vector<DataMatrix> matrices;
    std::vector<SamplingPlan> gft_datasets;          // one per source, pre-filter
    std::vector<SamplingPlan> retained_gft_datasets; // after subset filtering
    std::vector<SamplingPlan> plans;                 // general plans + baselines
    std::vector<EvalReport> reports;
    std::map<std::string, ReductionResult> reductions; // source -> result
    std::string manifest;
};

/// End-to-end experiment: sweep, GFT datasets, subset filtering, general
/// plans, per-seed decoder training + evaluation, optional injection-specific
/// reduction, plot export, manifest. Rerunning with identical config text
/// and seeds reproduces identical artifact bytes.
ExperimentBundle run_pipeline(const PipelineConfig& config, const std::string& config_text,
                              const std::filesystem::path& out_dir);

/// Fraction-of-junctions budget to a node count (at least 1).
int budget_count(double fraction, int n_junctions);

} // namespace hydrosample

#endif
