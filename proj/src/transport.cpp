#include "hydrosample/transport.hpp"
#include "hydrosample/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hydrosample {

namespace {

constexpr double kFlowEps = 1e-12;     // m^3/s below which a pipe is stagnant
constexpr double kResidualFrac = 1e-6; // stop once this fraction of injected mass remains
constexpr int kMaxSegments = 400;      // bound on segments for very slow pipes

struct PipeLane {
    int upstream = -1;   // node ordinal the flow leaves (junction idx, or nj+r for reservoirs)
    int downstream = -1; // node ordinal the flow enters
    double q_abs = 0.0;  // m^3/s
    double courant = 0.0;
    std::vector<double> seg_mass_mg;
    bool flowing = false;
};

} // namespace

DataMatrix simulate_transport(const PipeNetwork& net, const FlowField& flows,
                              const InjectionScenario& scenario,
                              std::vector<MassBalanceStep>* trace) {
    validate_scenario(net, scenario);

    const int nj = net.junction_count();
    const auto& pipes = net.pipes();
    const double dt = scenario.timestep_s;

    auto node_ordinal = [&](const std::string& id) -> int {
        if (auto ji = net.junction_index(id)) return *ji;
        for (std::size_t r = 0; r < net.reservoirs().size(); ++r) {
            if (net.reservoirs()[r].id == id) return nj + static_cast<int>(r);
        }
        throw ValidationError("unknown node '" + id + "'");
    };

    std::vector<PipeLane> lanes(pipes.size());
    for (std::size_t p = 0; p < pipes.size(); ++p) {
        const double q = flows.pipe_flow_m3s[p];
        const double v = std::abs(flows.pipe_velocity_ms[p]);
        PipeLane& lane = lanes[p];
        lane.q_abs = std::abs(q);
        lane.flowing = lane.q_abs >= kFlowEps;
        if (!lane.flowing) {
            lane.seg_mass_mg.assign(1, 0.0);
            continue;
        }
        const double travel = v * dt;
        const double length = pipes[p].length_m;
        if (travel > length) {
            throw ValidationError("CFL violation on pipe '" + pipes[p].id + "': velocity*timestep " +
                                  std::to_string(travel) + " m exceeds its length " +
                                  std::to_string(length) + " m");
        }
        const int n_seg = std::clamp(static_cast<int>(length / travel), 1, kMaxSegments);
        lane.seg_mass_mg.assign(static_cast<std::size_t>(n_seg), 0.0);
        lane.courant = travel * static_cast<double>(n_seg) / length;
        if (q >= 0.0) {
            lane.upstream = node_ordinal(pipes[p].from);
            lane.downstream = node_ordinal(pipes[p].to);
        } else {
            lane.upstream = node_ordinal(pipes[p].to);
            lane.downstream = node_ordinal(pipes[p].from);
        }
    }

    // Per-junction steady volumes exchanged each step.
    std::vector<double> inflow_vol(static_cast<std::size_t>(nj), 0.0);
    std::vector<double> outflow_vol(static_cast<std::size_t>(nj), 0.0); // pipes + demand
    for (const auto& lane : lanes) {
        if (!lane.flowing) continue;
        if (lane.downstream < nj) inflow_vol[static_cast<std::size_t>(lane.downstream)] += lane.q_abs * dt;
        if (lane.upstream < nj) outflow_vol[static_cast<std::size_t>(lane.upstream)] += lane.q_abs * dt;
    }
    for (int j = 0; j < nj; ++j) {
        outflow_vol[static_cast<std::size_t>(j)] +=
            net.junctions()[static_cast<std::size_t>(j)].demand_m3s * dt;
    }

    const int source = *net.junction_index(scenario.source);
    const double injection_end = scenario.start_s + scenario.duration_s;

    std::vector<double> junction_mass(static_cast<std::size_t>(nj), 0.0);
    std::vector<double> arrivals(static_cast<std::size_t>(nj), 0.0);
    std::vector<Eigen::VectorXd> columns;

    double injected_cum = 0.0;
    double expelled_cum = 0.0;
    double absorbed_cum = 0.0;

    for (int step = 0; step < scenario.max_steps; ++step) {
        const double t0 = static_cast<double>(step) * dt;
        const double t1 = t0 + dt;

        // 1. Advance pipe contents; last segments discharge into nodes.
        std::fill(arrivals.begin(), arrivals.end(), 0.0);
        for (auto& lane : lanes) {
            if (!lane.flowing) continue;
            auto& seg = lane.seg_mass_mg;
            const double c = lane.courant;
            const double delivered = c * seg.back();
            for (std::size_t i = seg.size() - 1; i > 0; --i) {
                seg[i] += c * (seg[i - 1] - seg[i]);
            }
            seg[0] -= c * seg[0];
            if (lane.downstream < nj) {
                arrivals[static_cast<std::size_t>(lane.downstream)] += delivered;
            } else {
                absorbed_cum += delivered;
            }
        }

        // 2. Injection overlapping this step.
        const double overlap =
            std::max(0.0, std::min(t1, injection_end) - std::max(t0, scenario.start_s));
        if (overlap > 0.0) {
            const double injected = scenario.rate_mg_s * overlap;
            arrivals[static_cast<std::size_t>(source)] += injected;
            injected_cum += injected;
        }

        // 3. Complete mixing at junctions, then dispatch downstream.
        Eigen::VectorXd column(nj);
        for (int j = 0; j < nj; ++j) {
            const auto js = static_cast<std::size_t>(j);
            junction_mass[js] += arrivals[js];
            if (inflow_vol[js] <= 0.0) {
                column(j) = 0.0; // trapped mass stays put; nothing flows
                continue;
            }
            const double conc_m3 = junction_mass[js] / inflow_vol[js]; // mg per m^3
            column(j) = conc_m3 / 1000.0;                              // mg per litre
            const double mixed = junction_mass[js];
            const double vol_out = outflow_vol[js];
            if (vol_out <= 0.0) continue; // sub-threshold outflows: mass stays put
            double dispatched = 0.0;
            for (auto& lane : lanes) {
                if (!lane.flowing || lane.upstream != j) continue;
                const double share = mixed * (lane.q_abs * dt / vol_out);
                lane.seg_mass_mg[0] += share;
                dispatched += share;
            }
            const double demand = net.junctions()[js].demand_m3s;
            if (demand > 0.0) {
                const double share = mixed * (demand * dt / vol_out);
                expelled_cum += share;
                dispatched += share;
            }
            junction_mass[js] = mixed - dispatched;
        }
        columns.push_back(std::move(column));

        if (trace) {
            MassBalanceStep bal;
            bal.injected_cum_mg = injected_cum;
            bal.expelled_demand_cum_mg = expelled_cum;
            bal.absorbed_reservoir_cum_mg = absorbed_cum;
            for (const auto& lane : lanes) {
                for (double m : lane.seg_mass_mg) bal.in_pipe_mg += m;
            }
            for (double m : junction_mass) bal.in_junction_mg += m;
            trace->push_back(bal);
        }

        // 4. Termination: the chemical has effectively left the network.
        if (t1 >= injection_end && injected_cum > 0.0) {
            double in_network = 0.0;
            for (const auto& lane : lanes) {
                for (double m : lane.seg_mass_mg) in_network += m;
            }
            for (double m : junction_mass) in_network += m;
            if (in_network < kResidualFrac * injected_cum) break;
        }
    }

    DataMatrix out;
    out.timestep_s = dt;
    out.scenario = scenario;
    out.node_index.reserve(static_cast<std::size_t>(nj));
    for (const auto& j : net.junctions()) out.node_index.push_back(j.id);
    out.values.resize(nj, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        out.values.col(static_cast<Eigen::Index>(k)) = columns[k];
    }
    return out;
}

std::vector<DataMatrix> run_scenario_sweep(const PipeNetwork& net,
                                           const std::vector<std::string>& sources,
                                           const VariantSpec& variants) {
    if (sources.empty()) throw ValidationError("scenario sweep: sources list is empty");
    if (variants.rates_mg_s.empty() || variants.durations_s.empty() || variants.starts_s.empty()) {
        throw ValidationError("scenario sweep: rates, durations and starts must be non-empty");
    }

    const FlowField flows = solve_flows(net);
    std::vector<DataMatrix> out;
    out.reserve(sources.size() * variants.rates_mg_s.size() * variants.durations_s.size() *
                variants.starts_s.size());

    for (const auto& source : sources) {
        for (double rate : variants.rates_mg_s) {
            for (double duration : variants.durations_s) {
                for (double start : variants.starts_s) {
                    InjectionScenario sc;
                    sc.source = source;
                    sc.rate_mg_s = rate;
                    sc.duration_s = duration;
                    sc.start_s = start;
                    sc.timestep_s = variants.timestep_s;
                    sc.max_steps = variants.max_steps;
                    try {
                        out.push_back(simulate_transport(net, flows, sc));
                    } catch (const Error& e) {
                        throw ValidationError("scenario source=" + source +
                                              " rate=" + std::to_string(rate) +
                                              " duration=" + std::to_string(duration) +
                                              " start=" + std::to_string(start) + ": " + e.what());
                    }
                }
            }
        }
    }
    return out;
}

} // namespace hydrosample
