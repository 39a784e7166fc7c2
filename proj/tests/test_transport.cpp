#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosample/errors.hpp"
#include "hydrosample/io.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/numeric.hpp"
#include "hydrosample/transport.hpp"

#include <cmath>
#include <string>

using namespace hydrosample;

namespace {

PipeNetwork y5() { return parse_inp(read_file(std::string(FIXTURE_DIR) + "/y5.inp")); }

InjectionScenario y5_scenario() {
    InjectionScenario sc;
    sc.source = "J2";
    sc.rate_mg_s = 20.0;
    sc.start_s = 0.0;
    sc.duration_s = 1800.0;
    sc.timestep_s = 60.0;
    sc.max_steps = 400;
    return sc;
}

double worst_balance_error(const std::vector<MassBalanceStep>& trace) {
    double worst = 0.0;
    for (const auto& step : trace) {
        const double scale = std::max(step.injected_cum_mg, 1e-300);
        worst = std::max(worst, std::abs(step.accounted_mg() - step.injected_cum_mg) / scale);
    }
    return worst;
}

} // namespace

TEST_CASE("injection entirely after the horizon gives an all-zero matrix") {
    const PipeNetwork net = y5();
    const FlowField flows = solve_flows(net);
    InjectionScenario sc = y5_scenario();
    sc.max_steps = 50;
    sc.start_s = 60.0 * 60.0 * 24.0; // way past max_steps * dt
    const DataMatrix x = simulate_transport(net, flows, sc);
    CHECK(x.n_steps() == 50);
    CHECK(x.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plug flow arrival time matches L/v within one step") {
    // J0 -> J1 pipe: 100 m at ~1 m/s; continuous injection at J0 from t=0
    const double area = 3.14159265358979323846 * 0.1 * 0.1 / 4.0;
    const std::string inp = std::string("[JUNCTIONS]\nJ0 0\nJ1 ") + format_double(area) +
                            "\n\n[RESERVOIRS]\nR1 50\n\n[PIPES]\n"
                            "P0 R1 J0 30 0.1\nP1 J0 J1 100 0.1\n";
    const PipeNetwork net = parse_inp(inp);
    const FlowField flows = solve_flows(net);
    const std::size_t p1 = 1;
    const double v = std::abs(flows.pipe_velocity_ms[p1]);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

    InjectionScenario sc;
    sc.source = "J0";
    sc.rate_mg_s = 10.0;
    sc.start_s = 0.0;
    sc.timestep_s = 7.0;
    sc.duration_s = 7.0 * 40;
    sc.max_steps = 40;
    const DataMatrix x = simulate_transport(net, flows, sc);

    const int j1 = *net.junction_index("J1");
    int first_nonzero = -1;
    for (int k = 0; k < x.n_steps(); ++k) {
        if (x.values(j1, k) > 0.0) {
            first_nonzero = k + 1; // steps are 1-based in time
            break;
        }
    }
    const int expected = static_cast<int>(std::ceil(100.0 / (v * sc.timestep_s)));
    REQUIRE(first_nonzero > 0);
    CHECK(std::abs(first_nonzero - expected) <= 1);
}

TEST_CASE("junction merge concentration is the flow-weighted mean") {
    // two branches meet at J3; only the J1 branch carries contaminant
    const PipeNetwork net = parse_inp(R"([JUNCTIONS]
J1 0.002
J2 0.001
J3 0.004

[RESERVOIRS]
R1 50
R2 50

[PIPES]
PA R1 J1 50 0.1
PB R2 J2 50 0.12
PC J1 J3 60 0.1
PD J2 J3 40 0.1
)");
    const FlowField flows = solve_flows(net);
    const double q_pa = flows.pipe_flow_m3s[0];
    const double q_pc = flows.pipe_flow_m3s[2];
    const double q_pd = flows.pipe_flow_m3s[3];
    REQUIRE(q_pa > 0.0); // R1 -> J1
    REQUIRE(q_pc > 0.0); // J1 -> J3
    REQUIRE(q_pd > 0.0); // J2 -> J3

    InjectionScenario sc;
    sc.source = "J1";
    sc.rate_mg_s = 100.0;
    sc.start_s = 0.0;
    sc.timestep_s = 5.0;
    sc.duration_s = 5.0 * 400;
    sc.max_steps = 400;
    const DataMatrix x = simulate_transport(net, flows, sc);

    // steady state oracle, in mg/L: c1 = rate / inflow, c3 = c1 Qc / (Qc + Qd)
    const double c1 = sc.rate_mg_s / q_pa / 1000.0;
    const double c3 = (c1 * q_pc) / (q_pc + q_pd);
    const int j1 = *net.junction_index("J1");
    const int j3 = *net.junction_index("J3");
    const int last = x.n_steps() - 1;
    CHECK(x.values(j1, last) == doctest::Approx(c1).epsilon(1e-9));
    CHECK(x.values(j3, last) == doctest::Approx(c3).epsilon(1e-9));
}

TEST_CASE("doubling the rate exactly doubles the matrix") {
    const PipeNetwork net = y5();
    const FlowField flows = solve_flows(net);
    InjectionScenario sc = y5_scenario();
    const DataMatrix base = simulate_transport(net, flows, sc);
    sc.rate_mg_s *= 2.0;
    const DataMatrix doubled = simulate_transport(net, flows, sc);
    REQUIRE(base.n_steps() == doubled.n_steps());
    CHECK((doubled.values - 2.0 * base.values).cwiseAbs().maxCoeff() == 0.0);

    sc.rate_mg_s = y5_scenario().rate_mg_s * 3.0;
    const DataMatrix tripled = simulate_transport(net, flows, sc);
    const double scale = base.values.cwiseAbs().maxCoeff();
    CHECK((tripled.values - 3.0 * base.values).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("mass is conserved at every step") {
    const PipeNetwork net = y5();
    const FlowField flows = solve_flows(net);
    std::vector<MassBalanceStep> trace;
    const DataMatrix x = simulate_transport(net, flows, y5_scenario(), &trace);
    REQUIRE(trace.size() == static_cast<std::size_t>(x.n_steps()));
    CHECK(worst_balance_error(trace) < 1e-6);
    CHECK(x.values.minCoeff() >= 0.0);
}

TEST_CASE("simulation stops once the chemical is expelled") {
    const PipeNetwork net = y5();
    const FlowField flows = solve_flows(net);
    std::vector<MassBalanceStep> trace;
    InjectionScenario sc = y5_scenario();
    sc.max_steps = 4000;
    const DataMatrix x = simulate_transport(net, flows, sc, &trace);
    CHECK(x.n_steps() < sc.max_steps);
    const auto& last = trace.back();
    CHECK(last.in_network_mg() < 1e-6 * last.injected_cum_mg);
    CHECK(last.injected_cum_mg ==
          doctest::Approx(sc.rate_mg_s * sc.duration_s).epsilon(1e-12));
}

TEST_CASE("identical inputs give bit-identical matrices") {
    const PipeNetwork net = y5();
    const FlowField flows = solve_flows(net);
    const DataMatrix a = simulate_transport(net, flows, y5_scenario());
    const DataMatrix b = simulate_transport(net, flows, y5_scenario());
    REQUIRE(a.n_steps() == b.n_steps());
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fast pipe triggers a CFL error naming the pipe") {
    const PipeNetwork net = parse_inp(R"([JUNCTIONS]
J1 0.01

[RESERVOIRS]
R1 50

[PIPES]
PFAST R1 J1 100 0.01
)");
    const FlowField flows = solve_flows(net);
    InjectionScenario sc;
    sc.source = "J1";
    sc.rate_mg_s = 1.0;
    sc.start_s = 0.0;
    sc.timestep_s = 60.0;
    sc.duration_s = 60.0;
    sc.max_steps = 10;
    try {
        simulate_transport(net, flows, sc);
        FAIL("expected a CFL violation");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("PFAST") != std::string::npos);
        CHECK(std::string(e.what()).find("CFL") != std::string::npos);
    }
}

TEST_CASE("stagnant dead-end branch stays clean and conserves mass") {
    const PipeNetwork net = parse_inp(R"([JUNCTIONS]
J1 0.002
JDEAD 0

[RESERVOIRS]
R1 50

[PIPES]
P1 R1 J1 100 0.15
P2 J1 JDEAD 80 0.1
)");
    const FlowField flows = solve_flows(net);
    CHECK(std::abs(flows.pipe_flow_m3s[1]) < 1e-12);
    InjectionScenario sc;
    sc.source = "J1";
    sc.rate_mg_s = 10.0;
    sc.start_s = 0.0;
    sc.timestep_s = 30.0;
    sc.duration_s = 300.0;
    sc.max_steps = 300;
    std::vector<MassBalanceStep> trace;
    const DataMatrix x = simulate_transport(net, flows, sc, &trace);
    const int jdead = *net.junction_index("JDEAD");
    CHECK(x.values.row(jdead).cwiseAbs().maxCoeff() == 0.0);
    CHECK(worst_balance_error(trace) < 1e-6);
}

TEST_CASE("scenario sweep cardinality and lexicographic order") {
    const PipeNetwork net = y5();
    VariantSpec variants;
    variants.rates_mg_s = {10.0, 20.0};
    variants.durations_s = {600.0};
    variants.starts_s = {0.0};
    variants.timestep_s = 60.0;
    variants.max_steps = 120;

    const auto single = run_scenario_sweep(net, {"J2"}, {{10.0}, {600.0}, {0.0}, 60.0, 120});
    CHECK(single.size() == 1);

    const auto sweep = run_scenario_sweep(net, {"J2", "J4", "J5"}, variants);
    REQUIRE(sweep.size() == 6);
    CHECK(sweep[0].scenario.source == "J2");
    CHECK(sweep[0].scenario.rate_mg_s == 10.0);
    CHECK(sweep[1].scenario.rate_mg_s == 20.0);
    CHECK(sweep[2].scenario.source == "J4");
    CHECK(sweep[5].scenario.source == "J5");

    // linearity across the sweep: the 20 mg/s run is exactly twice the 10 mg/s run
    CHECK((sweep[1].values - 2.0 * sweep[0].values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweep errors carry the offending scenario") {
    const PipeNetwork net = y5();
    VariantSpec variants;
    variants.rates_mg_s = {10.0};
    variants.durations_s = {90.0}; // not a multiple of the timestep
    variants.starts_s = {0.0};
    variants.timestep_s = 60.0;
    variants.max_steps = 10;
    try {
        run_scenario_sweep(net, {"J2"}, variants);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("J2") != std::string::npos);
    }
}
