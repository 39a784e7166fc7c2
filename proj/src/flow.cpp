#include "hydrosample/flow.hpp"
#include "hydrosample/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace hydrosample {

double FlowField::head_of(const PipeNetwork& net, const std::string& node_id) const {
    if (auto ji = net.junction_index(node_id)) {
        return junction_head_m[static_cast<std::size_t>(*ji)];
    }
    for (std::size_t i = 0; i < net.reservoirs().size(); ++i) {
        if (net.reservoirs()[i].id == node_id) return reservoir_head_m[i];
    }
    throw ValidationError("unknown node id '" + node_id + "'");
}

double pipe_area_m2(const Pipe& p) {
    return std::numbers::pi * p.diameter_m * p.diameter_m / 4.0;
}

FlowField solve_flows(const PipeNetwork& net) {
    const int nj = net.junction_count();
    const auto& pipes = net.pipes();

    // Assemble the junction block of the weighted Laplacian; reservoir heads
    // enter the right-hand side as Dirichlet values.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nj, nj);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nj);
    for (int j = 0; j < nj; ++j) {
        rhs(j) = -net.junctions()[static_cast<std::size_t>(j)].demand_m3s;
    }

    auto reservoir_head = [&](const std::string& id) -> double {
        for (const auto& r : net.reservoirs()) {
            if (r.id == id) return r.head_m;
        }
        throw ValidationError("unknown reservoir '" + id + "'");
    };

    for (const auto& p : pipes) {
        const double w = p.diameter_m * p.diameter_m / p.length_m;
        const auto from_j = net.junction_index(p.from);
        const auto to_j = net.junction_index(p.to);
        if (from_j && to_j) {
            lap(*from_j, *from_j) += w;
            lap(*to_j, *to_j) += w;
            lap(*from_j, *to_j) -= w;
            lap(*to_j, *from_j) -= w;
        } else if (from_j) {
            lap(*from_j, *from_j) += w;
            rhs(*from_j) += w * reservoir_head(p.to);
        } else if (to_j) {
            lap(*to_j, *to_j) += w;
            rhs(*to_j) += w * reservoir_head(p.from);
        }
        // reservoir-to-reservoir pipes do not touch junction heads
    }

    FlowField field;
    field.reservoir_head_m.reserve(net.reservoirs().size());
    for (const auto& r : net.reservoirs()) field.reservoir_head_m.push_back(r.head_m);

    if (nj > 0) {
        Eigen::LDLT<Eigen::MatrixXd> solver(lap);
        if (solver.info() != Eigen::Success) {
            throw RuntimeError("flow solve: singular junction system (junction without a reservoir path?)");
        }
        Eigen::VectorXd heads = solver.solve(rhs);
        if (!heads.allFinite()) {
            throw RuntimeError("flow solve: non-finite heads, junction system is singular");
        }
        field.junction_head_m.assign(heads.data(), heads.data() + nj);
    }

    field.pipe_flow_m3s.reserve(pipes.size());
    field.pipe_velocity_ms.reserve(pipes.size());
    for (const auto& p : pipes) {
        const double w = p.diameter_m * p.diameter_m / p.length_m;
        const double h_from = field.head_of(net, p.from);
        const double h_to = field.head_of(net, p.to);
        const double q = w * (h_from - h_to);
        field.pipe_flow_m3s.push_back(q);
        field.pipe_velocity_ms.push_back(q / pipe_area_m2(p));
    }
    return field;
}

} // namespace hydrosample
