#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosample/errors.hpp"
#include "hydrosample/io.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/numeric.hpp"

#include <string>

using namespace hydrosample;

namespace {

const std::string kMinimal = R"([JUNCTIONS]
J1 0.002

[RESERVOIRS]
R1 50

[PIPES]
P1 R1 J1 100 0.2
)";

std::string y5_text() { return read_file(std::string(FIXTURE_DIR) + "/y5.inp"); }

} // namespace

TEST_CASE("minimal network parses") {
    const PipeNetwork net = parse_inp(kMinimal);
    CHECK(net.junction_count() == 1);
    CHECK(net.reservoirs().size() == 1);
    CHECK(net.pipes().size() == 1);
    CHECK(net.junctions()[0].demand_m3s == 0.002);
    CHECK(net.junction_index("J1").value() == 0);
    CHECK(net.is_reservoir("R1"));
}

TEST_CASE("undeclared pipe endpoint names the node and line") {
    const std::string text = R"([JUNCTIONS]
J1 0

[RESERVOIRS]
R1 10

[PIPES]
P1 R1 J9 100 0.2
)";
    try {
        parse_inp(text);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("J9") != std::string::npos);
        CHECK(msg.find("line 8") != std::string::npos);
    }
}

TEST_CASE("y5 fixture shape and round trip") {
    const std::string text = y5_text();
    const PipeNetwork net = parse_inp(text);
    CHECK(net.junction_count() == 5);
    CHECK(net.reservoirs().size() == 1);
    CHECK(net.pipes().size() == 5);

    const std::string serialized = serialize_inp(net);
    const PipeNetwork reparsed = parse_inp(serialized);
    CHECK(net == reparsed);
    // the committed fixture is in canonical form already
    CHECK(serialized == text);
}

TEST_CASE("canonical junction indexing is stable across parses") {
    const PipeNetwork a = parse_inp(y5_text());
    const PipeNetwork b = parse_inp(y5_text());
    for (int i = 0; i < a.junction_count(); ++i) {
        CHECK(a.junctions()[static_cast<std::size_t>(i)].id ==
              b.junctions()[static_cast<std::size_t>(i)].id);
    }
}

TEST_CASE("serialize emits zero demand column") {
    const PipeNetwork net = parse_inp(R"([JUNCTIONS]
A 0
B 0

[RESERVOIRS]
R 5

[PIPES]
P1 R A 10 0.1
P2 A B 10 0.1
)");
    const std::string out = serialize_inp(net);
    CHECK(out.find("A 0\n") != std::string::npos);
    CHECK(out.find("B 0\n") != std::string::npos);
}

TEST_CASE("parallel pipes are kept distinct") {
    const std::string text = R"([JUNCTIONS]
J1 0.001

[RESERVOIRS]
R1 10

[PIPES]
P1 R1 J1 100 0.2
P2 R1 J1 120 0.15
)";
    const PipeNetwork net = parse_inp(text);
    CHECK(net.pipes().size() == 2);
    const std::string out = serialize_inp(net);
    CHECK(out.find("P1 ") != std::string::npos);
    CHECK(out.find("P2 ") != std::string::npos);
    CHECK(parse_inp(out) == net);
}

TEST_CASE("malformed inputs are rejected with structured errors") {
    auto rejects = [](const std::string& text, const char* needle) {
        try {
            parse_inp(text);
            FAIL_CHECK("accepted malformed input, expected: " << needle);
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    rejects("[TANKS]\nT1 5\n", "unsupported section");
    rejects("J1 0\n", "before any section");
    rejects("[JUNCTIONS]\nJ1 xyz\n", "expected a number");
    rejects("[JUNCTIONS]\nJ1 0\nJ1 1\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 0.1\n",
            "duplicate junction");
    rejects("[JUNCTIONS]\nJ1 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 J1 J1 10 0.1\n", "self-loop");
    rejects("[JUNCTIONS]\nJ1 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 0.1\nP2 R1 J1 9 0.1\n"
            "[JUNCTIONS]\nJ2 0\n",
            "disconnected");
    rejects("[JUNCTIONS]\nJ1 0\nJ2 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 0.1\n",
            "disconnected");
    rejects("[JUNCTIONS]\nJ1 -0.5\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 0.1\n",
            "negative or non-finite demand");
    rejects("[JUNCTIONS]\nJ1 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 0 0.1\n",
            "positive length");
    rejects("[JUNCTIONS]\nJ1 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 -2\n",
            "positive diameter");
    rejects("[JUNCTIONS]\nJ1 0\n[RESERVOIRS]\nR1 1\n[PIPES]\nP1 R1 J1 10 0.1\nP1 R1 J1 9 0.1\n",
            "duplicate pipe");
    rejects("[JUNCTIONS]\nJ1 0 7\n", "junction rows need");
    rejects("[JUNCTIONS] extra\n", "after section header");
}

TEST_CASE("network with no reservoir is rejected") {
    try {
        parse_inp("[JUNCTIONS]\nJ1 0\nJ2 0\n[PIPES]\nP1 J1 J2 10 0.1\n");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("reservoir") != std::string::npos);
    }
}

TEST_CASE("comments and blank lines are ignored") {
    const std::string text = R"(; header comment
[JUNCTIONS]
J1 0.001 ; inline comment

[RESERVOIRS]
R1 50
[PIPES]
P1 R1 J1 100 0.2
)";
    const PipeNetwork net = parse_inp(text);
    CHECK(net.junction_count() == 1);
}

TEST_CASE("random networks round trip") {
    SplitRng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int nj = 1 + static_cast<int>(rng.next_below(6));
        std::vector<Junction> junctions;
        for (int i = 0; i < nj; ++i) {
            junctions.push_back({"J" + std::to_string(i), rng.next_double() * 0.01});
        }
        std::vector<Reservoir> reservoirs{{"R0", rng.next_double(1.0, 100.0)}};
        std::vector<Pipe> pipes;
        pipes.push_back(
            {"P0", "R0", "J0", rng.next_double(10.0, 500.0), rng.next_double(0.05, 0.5)});
        for (int i = 1; i < nj; ++i) {
            const int parent = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i)));
            pipes.push_back({"P" + std::to_string(i), "J" + std::to_string(parent),
                             "J" + std::to_string(i), rng.next_double(10.0, 500.0),
                             rng.next_double(0.05, 0.5)});
        }
        const PipeNetwork net(junctions, reservoirs, pipes);
        CHECK(parse_inp(serialize_inp(net)) == net);
    }
}

TEST_CASE("scenario config parses and validates") {
    const PipeNetwork net = parse_inp(y5_text());
    const std::string text = read_file(std::string(FIXTURE_DIR) + "/y5_scenario.cfg");
    const InjectionScenario sc = parse_scenario(text);
    CHECK(sc.source == "J2");
    CHECK(sc.rate_mg_s == 20.0);
    CHECK(sc.duration_s == 1800.0);
    CHECK(sc.max_steps == 200);
    CHECK_NOTHROW(validate_scenario(net, sc));

    InjectionScenario bad = sc;
    bad.source = "R1";
    CHECK_THROWS_AS(validate_scenario(net, bad), ValidationError);
    bad = sc;
    bad.source = "nope";
    CHECK_THROWS_AS(validate_scenario(net, bad), ValidationError);
    bad = sc;
    bad.duration_s = 90; // not a multiple of 60
    CHECK_THROWS_AS(validate_scenario(net, bad), ValidationError);
    bad = sc;
    bad.rate_mg_s = 0;
    CHECK_THROWS_AS(validate_scenario(net, bad), ValidationError);

    CHECK_THROWS_AS(parse_scenario("source = J1\nwhat = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("source = J1\n"), ValidationError); // missing keys
}
