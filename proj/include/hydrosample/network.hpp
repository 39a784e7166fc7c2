#ifndef HYDROSAMPLE_NETWORK_HPP
#define HYDROSAMPLE_NETWORK_HPP

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hydrosample {

struct Junction {
    std::string id;
    double demand_m3s = 0.0; // >= 0
};

struct Reservoir {
    std::string id;
    double head_m = 0.0;
};

struct Pipe {
    std::string id;
    std::string from;
    std::string to;
    double length_m = 0.0;   // > 0
    double diameter_m = 0.0; // > 0
};

/// Static topology of a water distribution network. Junction order is the
/// canonical node indexing used by every downstream matrix: row i of a data
/// matrix is junctions()[i].
class PipeNetwork {
public:
    PipeNetwork(std::vector<Junction> junctions,
                std::vector<Reservoir> reservoirs,
                std::vector<Pipe> pipes);

    const std::vector<Junction>& junctions() const { return junctions_; }
    const std::vector<Reservoir>& reservoirs() const { return reservoirs_; }
    const std::vector<Pipe>& pipes() const { return pipes_; }

    int junction_count() const { return static_cast<int>(junctions_.size()); }

    /// Canonical junction index, or nullopt if the id names a reservoir or
    /// is unknown.
    std::optional<int> junction_index(const std::string& id) const;
    bool is_reservoir(const std::string& id) const;
    bool has_node(const std::string& id) const;

    bool operator==(const PipeNetwork& other) const;

private:
    void validate() const;

    std::vector<Junction> junctions_;
    std::vector<Reservoir> reservoirs_;
    std::vector<Pipe> pipes_;
    std::unordered_map<std::string, int> junction_index_;
    std::unordered_map<std::string, int> reservoir_index_;
};

/// One chemical injection: `rate_mg_s` enters `source` during
/// [start_s, start_s + duration_s).
struct InjectionScenario {
    std::string source;
    double rate_mg_s = 0.0;
    double start_s = 0.0;
    double duration_s = 0.0;
    double timestep_s = 0.0;
    int max_steps = 0;

    bool operator==(const InjectionScenario&) const = default;
};

/// Parses the supported INP subset ([JUNCTIONS], [RESERVOIRS], [PIPES]).
/// Any other section is rejected. Throws ValidationError with a line number
/// on malformed input.
PipeNetwork parse_inp(const std::string& text);

/// Canonical text form; parse_inp(serialize_inp(net)) == net.
std::string serialize_inp(const PipeNetwork& net);

/// Parses the flat key-value scenario file (keys: source, rate_mg_s,
/// start_s, duration_s, timestep_s, max_steps).
InjectionScenario parse_scenario(const std::string& text);

/// Checks scenario invariants against a network: source must be a junction,
/// duration a positive integer multiple of timestep, rate positive.
void validate_scenario(const PipeNetwork& net, const InjectionScenario& scenario);

} // namespace hydrosample

#endif
