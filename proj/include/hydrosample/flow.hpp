#ifndef HYDROSAMPLE_FLOW_HPP
#define HYDROSAMPLE_FLOW_HPP

#include "hydrosample/network.hpp"

#include <vector>

namespace hydrosample {

/// Steady-state hydraulic solution. Vectors are aligned with the network's
/// junction / reservoir / pipe ordering. Pipe flow is signed: positive means
/// water moves from `from` to `to`.
struct FlowField {
    std::vector<double> junction_head_m;
    std::vector<double> reservoir_head_m;
    std::vector<double> pipe_flow_m3s;
    std::vector<double> pipe_velocity_ms;

    double head_of(const PipeNetwork& net, const std::string& node_id) const;
};

/// Cross-sectional area of a pipe, m^2.
double pipe_area_m2(const Pipe& p);

/// Solves the linearized potential-flow system: pipe conductance
/// w = diameter^2 / length, reservoir heads fixed, junction demands as sinks.
/// Flow on a pipe is w * (head_from - head_to).
FlowField solve_flows(const PipeNetwork& net);

} // namespace hydrosample

#endif
