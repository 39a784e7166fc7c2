#ifndef HYDROSAMPLE_TRANSPORT_HPP
#define HYDROSAMPLE_TRANSPORT_HPP

#include "hydrosample/flow.hpp"
#include "hydrosample/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hydrosample {

/// Node-by-time concentration matrix for one injection scenario.
/// values(i, k) is the concentration (mg/L) at junction node_index[i]
/// during step k; rows follow the canonical junction indexing.
struct DataMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> node_index;
    double timestep_s = 0.0;
    InjectionScenario scenario;

    int n_nodes() const { return static_cast<int>(values.rows()); }
    int n_steps() const { return static_cast<int>(values.cols()); }
};

/// Per-step contaminant accounting, for conservation checks.
struct MassBalanceStep {
    double injected_cum_mg = 0.0;
    double in_pipe_mg = 0.0;
    double in_junction_mg = 0.0;
    double expelled_demand_cum_mg = 0.0;
    double absorbed_reservoir_cum_mg = 0.0;

    double in_network_mg() const { return in_pipe_mg + in_junction_mg; }
    double accounted_mg() const {
        return in_pipe_mg + in_junction_mg + expelled_demand_cum_mg + absorbed_reservoir_cum_mg;
    }
};

/// Eulerian donor-cell advection of an injected chemical over stationary
/// flows. Pipes are split into uniform segments no shorter than the distance
/// travelled per step, so the per-segment Courant number never exceeds 1.
/// Junction mixing is complete; demands withdraw at the mixed concentration;
/// reservoirs absorb whatever reaches them and feed back clean water.
/// Stops once the injection window has passed and the in-network mass has
/// fallen below 1e-6 of the injected total, or at scenario.max_steps.
DataMatrix simulate_transport(const PipeNetwork& net, const FlowField& flows,
                              const InjectionScenario& scenario,
                              std::vector<MassBalanceStep>* trace = nullptr);

/// Scenario grid for sweeps; every combination of source x rate x duration
/// x start is simulated.
struct VariantSpec {
    std::vector<double> rates_mg_s;
    std::vector<double> durations_s;
    std::vector<double> starts_s;
    double timestep_s = 0.0;
    int max_steps = 0;
};

/// Runs one simulation per (source, rate, duration, start), ordered
/// lexicographically over the given lists. Flows are solved once and shared.
std::vector<DataMatrix> run_scenario_sweep(const PipeNetwork& net,
                                           const std::vector<std::string>& sources,
                                           const VariantSpec& variants);

} // namespace hydrosample

#endif
