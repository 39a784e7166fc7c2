#ifndef HYDROSAMPLE_IO_HPP
#define HYDROSAMPLE_IO_HPP

#include "hydrosample/gft.hpp"
#include "hydrosample/metrics.hpp"
#include "hydrosample/mlp.hpp"
#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hydrosample {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// DataMatrix as CSV (header `t_s,<junction ids...>`, one row per step,
/// t_s stamps the end of each step) plus a JSON sidecar with the scenario.
std::string matrix_to_csv(const DataMatrix& m);
std::string matrix_sidecar_json(const DataMatrix& m);
DataMatrix matrix_from_csv(const std::string& csv, const std::string& sidecar_json);

std::string operator_to_json(const GftOperator& op);
GftOperator operator_from_json(const std::string& text);

std::string sampling_set_to_json(const SamplingSet& s);
SamplingSet sampling_set_from_json(const std::string& text);

std::string plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const std::string& text);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Collects deterministic (path, content) pairs and writes them plus a
/// manifest.json naming every file with its size and FNV-1a fingerprint.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path out_dir);

    void add(const std::string& relative_path, const std::string& content);
    bool has(const std::string& relative_path) const;

    /// Writes all files plus the manifest; returns the manifest bytes.
    /// `partial` marks manifests written after a stage aborted.
    std::string finalize(const std::string& config_text, bool partial = false);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace hydrosample

#endif
