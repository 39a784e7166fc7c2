#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosample/errors.hpp"
#include "hydrosample/io.hpp"
#include "hydrosample/network.hpp"
#include "hydrosample/numeric.hpp"
#include "hydrosample/plans.hpp"
#include "hydrosample/transport.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

using namespace hydrosample;

namespace {

PipeNetwork y5() { return parse_inp(read_file(std::string(FIXTURE_DIR) + "/y5.inp")); }

DataMatrix matrix_of(const Eigen::MatrixXd& values, const std::string& source = "J1") {
    DataMatrix m;
    m.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        m.node_index.push_back("J" + std::to_string(i + 1));
    }
    m.timestep_s = 60.0;
    m.scenario.source = source;
    m.scenario.rate_mg_s = 1.0;
    m.scenario.start_s = 0.0;
    m.scenario.duration_s = 60.0;
    m.scenario.timestep_s = 60.0;
    m.scenario.max_steps = static_cast<int>(values.cols());
    return m;
}

SamplingPlan specific(const std::string& source, std::vector<int> nodes) {
    SamplingPlan p;
    p.nodes = std::move(nodes);
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        p.scores.push_back(1.0 - 0.1 * static_cast<double>(i));
    }
    p.provenance = GftSpecificProv{source};
    return p;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

/// O(n^2) pairwise oracle for subset filtering.
std::vector<std::size_t> subset_filter_oracle(const std::vector<SamplingPlan>& plans) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto si = as_set(plans[i].nodes);
        bool dominated = false;
        for (std::size_t j = 0; j < plans.size() && !dominated; ++j) {
            if (i == j) continue;
            const auto sj = as_set(plans[j].nodes);
            if (!std::includes(sj.begin(), sj.end(), si.begin(), si.end())) continue;
            if (si == sj) {
                const auto& a = std::get<GftSpecificProv>(plans[i].provenance).source;
                const auto& b = std::get<GftSpecificProv>(plans[j].provenance).source;
                dominated = b < a || (b == a && j < i);
            } else {
                dominated = true;
            }
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

} // namespace

TEST_CASE("rank-1 scenario yields a single-node plan") {
    Eigen::VectorXd u(4);
    u << 1.0, -2.0, 0.5, 3.0;
    Eigen::VectorXd v(7);
    v << 1, 2, 3, 4, 5, 6, 7;
    const DataMatrix m = matrix_of(u * v.transpose(), "J3");
    const SamplingPlan plan = build_gft_dataset(m);
    CHECK(plan.nodes.size() == 1);
    CHECK(plan.id() == "gft_specific_J3");
}

TEST_CASE("y5 scenario plan matches the exhaustive optimum") {
    const PipeNetwork net = y5();
    VariantSpec variants{{20.0}, {1800.0}, {0.0}, 60.0, 300};
    const auto sweep = run_scenario_sweep(net, {"J2"}, variants);
    const SamplingPlan plan = build_gft_dataset(sweep.front());

    const GftOperator op = build_gft_operator(sweep.front().values);
    REQUIRE(binomial(net.junction_count(), op.rank) <= 1e6);
    const SamplingSet exhaustive = select_sampling_set(op, SelectionStrategy::exhaustive);
    CHECK(as_set(plan.nodes) == as_set(exhaustive.nodes));
}

TEST_CASE("injection rate does not change the plan") {
    const PipeNetwork net = y5();
    VariantSpec variants{{10.0, 30.0}, {1800.0}, {0.0}, 60.0, 300};
    const auto sweep = run_scenario_sweep(net, {"J4"}, variants);
    REQUIRE(sweep.size() == 2);
    const SamplingPlan a = build_gft_dataset(sweep[0]);
    const SamplingPlan b = build_gft_dataset(sweep[1]);
    CHECK(a.nodes == b.nodes);
}

TEST_CASE("subset filtering: definitions and oracle") {
    const auto p12 = specific("J1", {1, 2});
    const auto p123 = specific("J2", {1, 2, 3});
    const auto filtered = filter_subset_datasets({p12, p123});
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].nodes == std::vector<int>{1, 2, 3});

    // pairwise-incomparable sets pass through unchanged
    const auto qa = specific("J1", {1, 2});
    const auto qb = specific("J2", {2, 3});
    const auto qc = specific("J3", {3, 4});
    const auto incomparable = filter_subset_datasets({qa, qb, qc});
    CHECK(incomparable.size() == 3);

    // duplicates keep the lowest source id
    const auto d1 = specific("J9", {1, 2});
    const auto d2 = specific("J2", {1, 2});
    const auto d3 = specific("J5", {2, 3});
    const auto dedup = filter_subset_datasets({d1, d2, d3});
    REQUIRE(dedup.size() == 2);
    CHECK(std::get<GftSpecificProv>(dedup[0].provenance).source == "J2");
    CHECK(dedup[1].nodes == std::vector<int>{2, 3});

    SplitRng rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<SamplingPlan> plans;
        const int count = 2 + static_cast<int>(rng.next_below(6));
        for (int i = 0; i < count; ++i) {
            const int size = 1 + static_cast<int>(rng.next_below(4));
            std::vector<int> nodes;
            for (int k = 0; k < size; ++k) {
                nodes.push_back(static_cast<int>(rng.next_below(6)));
            }
            std::sort(nodes.begin(), nodes.end());
            nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
            plans.push_back(specific("J" + std::to_string(i), nodes));
        }
        const auto got = filter_subset_datasets(plans);
        const auto keep = subset_filter_oracle(plans);
        REQUIRE(got.size() == keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            CHECK(got[i].nodes == plans[keep[i]].nodes);
        }
    }
}

TEST_CASE("frequent-node plans") {
    const std::vector<SamplingPlan> plans{specific("J1", {1, 2}), specific("J2", {2, 3}),
                                          specific("J3", {2, 4})};
    const SamplingPlan t2 = gft_frequent_plan(plans, 2);
    CHECK(t2.nodes == std::vector<int>{2});

    const SamplingPlan t1 = gft_frequent_plan(plans, 1);
    CHECK(as_set(t1.nodes) == std::set<int>{1, 2, 3, 4});
    CHECK(t1.nodes.front() == 2); // highest count first

    // identical plans: any threshold <= count returns that node set
    const std::vector<SamplingPlan> same{specific("J1", {0, 3}), specific("J2", {0, 3}),
                                         specific("J3", {0, 3})};
    for (int threshold = 1; threshold <= 3; ++threshold) {
        CHECK(as_set(gft_frequent_plan(same, threshold).nodes) == std::set<int>{0, 3});
    }

    // impossible threshold reports the maximum usable one
    try {
        gft_frequent_plan(plans, 4);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("maximum usable threshold is 3") != std::string::npos);
    }

    // monotone: raising the threshold never adds nodes
    SplitRng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<SamplingPlan> random_plans;
        for (int i = 0; i < 4; ++i) {
            std::vector<int> nodes;
            for (int k = 0; k < 3; ++k) nodes.push_back(static_cast<int>(rng.next_below(5)));
            std::sort(nodes.begin(), nodes.end());
            nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
            random_plans.push_back(specific("J" + std::to_string(i), nodes));
        }
        std::set<int> prev;
        bool prev_valid = false;
        for (int threshold = 1; threshold <= 4; ++threshold) {
            std::set<int> cur;
            try {
                cur = as_set(gft_frequent_plan(random_plans, threshold).nodes);
            } catch (const ValidationError&) {
                break;
            }
            if (prev_valid) {
                CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
            }
            prev = cur;
            prev_valid = true;
        }
    }
}

TEST_CASE("budget-matched frequent plans truncate and pad deterministically") {
    const std::vector<SamplingPlan> plans{specific("J1", {1, 2}), specific("J2", {2, 3})};
    const SamplingPlan b1 = gft_frequent_budget_plan(plans, 1, 6);
    CHECK(b1.nodes == std::vector<int>{2});
    const SamplingPlan b3 = gft_frequent_budget_plan(plans, 3, 6);
    CHECK(b3.nodes == std::vector<int>{2, 1, 3});
    // budget beyond the ranking pads with the remaining junction indices
    const SamplingPlan b6 = gft_frequent_budget_plan(plans, 6, 6);
    CHECK(b6.nodes == std::vector<int>{2, 1, 3, 0, 4, 5});
    CHECK_THROWS_AS(gft_frequent_budget_plan(plans, 7, 6), ValidationError);
}

TEST_CASE("important-node plans") {
    const std::vector<SamplingPlan> ranked{specific("JA", {2, 1}), specific("JB", {2, 3}),
                                           specific("JC", {4, 2})};
    const SamplingPlan n1 = gft_important_plan(ranked, 1);
    CHECK(as_set(n1.nodes) == std::set<int>{2, 4});
    CHECK(n1.nodes == std::vector<int>{2, 4}); // both rank 0; index tie-break

    const SamplingPlan n2 = gft_important_plan(ranked, 2);
    CHECK(as_set(n2.nodes) == std::set<int>{1, 2, 3, 4});

    // n >= max length: the union of everything
    const SamplingPlan big = gft_important_plan(ranked, 99);
    CHECK(as_set(big.nodes) == std::set<int>{1, 2, 3, 4});

    // monotone in n
    for (int n = 1; n < 3; ++n) {
        const auto small_set = as_set(gft_important_plan(ranked, n).nodes);
        const auto big_set = as_set(gft_important_plan(ranked, n + 1).nodes);
        CHECK(std::includes(big_set.begin(), big_set.end(), small_set.begin(), small_set.end()));
    }

    // shared top nodes keep the result smaller than the number of plans
    CHECK(n1.nodes.size() < ranked.size() + 1);
}

TEST_CASE("laplacian plan on a complete junction graph falls back to index order") {
    const PipeNetwork k4 = parse_inp(R"([JUNCTIONS]
J1 0.001
J2 0.001
J3 0.001
J4 0.001

[RESERVOIRS]
R1 20

[PIPES]
PR R1 J1 100 0.2
P12 J1 J2 100 0.1
P13 J1 J3 100 0.1
P14 J1 J4 100 0.1
P23 J2 J3 100 0.1
P24 J2 J4 100 0.1
P34 J3 J4 100 0.1
)");
    for (int budget = 1; budget <= 4; ++budget) {
        const SamplingPlan plan = laplacian_plan(k4, budget);
        std::vector<int> expect;
        for (int i = 0; i < budget; ++i) expect.push_back(i);
        CHECK(plan.nodes == expect);
    }
}

TEST_CASE("laplacian plan on the 3-path picks the first endpoint") {
    const PipeNetwork path3 = parse_inp(R"([JUNCTIONS]
J1 0.001
J2 0.001
J3 0.001

[RESERVOIRS]
R1 20

[PIPES]
PR R1 J1 50 0.2
P12 J1 J2 100 0.1
P23 J2 J3 100 0.1
)");
    const SamplingPlan plan = laplacian_plan(path3, 1);
    REQUIRE(plan.nodes.size() == 1);
    // hand eigendecomposition: Fiedler vector (1, 0, -1)/sqrt(2); endpoints
    // tie at 0.5, the lower index wins
    CHECK(plan.nodes[0] == 0);
    CHECK(plan.scores[0] == doctest::Approx(0.5).epsilon(1e-9));

    const SamplingPlan all = laplacian_plan(path3, 3);
    CHECK(as_set(all.nodes) == std::set<int>{0, 1, 2});

    CHECK_THROWS_AS(laplacian_plan(path3, 0), ValidationError);
    CHECK_THROWS_AS(laplacian_plan(path3, 4), ValidationError);
}

TEST_CASE("random plans are deterministic and uniform") {
    const PipeNetwork net = y5();
    const SamplingPlan all = random_plan(net, 5, 9);
    CHECK(as_set(all.nodes) == std::set<int>{0, 1, 2, 3, 4});

    const SamplingPlan a = random_plan(net, 2, 1234);
    const SamplingPlan b = random_plan(net, 2, 1234);
    CHECK(a.nodes == b.nodes);
    CHECK(a.id() == "random_s1234_b2");

    // frequency over 1000 seeds stays within 5 sigma of budget/N
    std::vector<int> hits(5, 0);
    const int trials = 1000;
    for (int seed = 0; seed < trials; ++seed) {
        for (int v : random_plan(net, 2, static_cast<std::uint64_t>(seed)).nodes) {
            ++hits[static_cast<std::size_t>(v)];
        }
    }
    const double p = 2.0 / 5.0;
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    for (int v = 0; v < 5; ++v) {
        const double freq = static_cast<double>(hits[static_cast<std::size_t>(v)]) / trials;
        CHECK(std::abs(freq - p) < 5.0 * sigma);
    }
}

TEST_CASE("reduction walks down the importance order") {
    // six observed nodes driven by a 2-dimensional latent signal
    SplitRng rng(5150);
    Eigen::MatrixXd lift(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i) {
        lift(i, 0) = rng.next_double(-1.0, 1.0);
        lift(i, 1) = rng.next_double(-1.0, 1.0);
    }
    auto latent = [&](int steps, double phase) {
        Eigen::MatrixXd z(2, steps);
        for (int k = 0; k < steps; ++k) {
            z(0, k) = std::sin(0.2 * k + phase);
            z(1, k) = std::cos(0.13 * k - phase) * 0.7;
        }
        return z;
    };
    const Eigen::MatrixXd train = lift * latent(40, 0.0);
    const Eigen::MatrixXd test = lift * latent(40, 1.1);

    SamplingPlan plan = specific("J1", {0, 1, 2, 3, 4, 5});

    // least-squares oracle: fit test rows from plan rows on the train split
    DecoderEvaluator evaluate = [&](const SamplingPlan& candidate) {
        Eigen::MatrixXd a(train.cols(), static_cast<Eigen::Index>(candidate.nodes.size()));
        for (std::size_t i = 0; i < candidate.nodes.size(); ++i) {
            a.col(static_cast<Eigen::Index>(i)) = train.row(candidate.nodes[i]).transpose();
        }
        const Eigen::MatrixXd coeff =
            a.colPivHouseholderQr().solve(train.transpose()); // |S| x 6
        Eigen::MatrixXd at(test.cols(), static_cast<Eigen::Index>(candidate.nodes.size()));
        for (std::size_t i = 0; i < candidate.nodes.size(); ++i) {
            at.col(static_cast<Eigen::Index>(i)) = test.row(candidate.nodes[i]).transpose();
        }
        const Eigen::MatrixXd predicted = (at * coeff).transpose();
        double total = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double range = test.row(j).maxCoeff() - test.row(j).minCoeff();
            const double rmse = std::sqrt((predicted.row(j) - test.row(j)).squaredNorm() /
                                          static_cast<double>(test.cols()));
            total += rmse / range;
        }
        return total / 6.0;
    };

    const ReductionResult result = reduce_injection_specific(plan, 0.01, evaluate);
    CHECK(result.plan.nodes.size() == 2);
    CHECK(result.plan.nodes == std::vector<int>{0, 1});
    CHECK(result.history.size() == 6); // 6,5,4,3,2 pass; 1 fails
    CHECK(result.history.back().plan_size == 1);

    // a huge threshold reduces all the way to one node
    const ReductionResult loose = reduce_injection_specific(plan, 1e9, evaluate);
    CHECK(loose.plan.nodes.size() == 1);

    // a full plan that already misses the threshold is an error
    DecoderEvaluator hopeless = [](const SamplingPlan&) { return 1.0; };
    try {
        reduce_injection_specific(plan, 0.5, hopeless);
        FAIL("expected an error");
    } catch (const RuntimeError& e) {
        CHECK(std::string(e.what()).find("nrmse 1") != std::string::npos);
    }
}

TEST_CASE("plan json round trips every provenance kind") {
    std::vector<SamplingPlan> plans;
    plans.push_back(specific("J7", {3, 1, 4}));
    SamplingPlan freq;
    freq.nodes = {2, 5};
    freq.scores = {4.0, 2.0};
    freq.provenance = GftFrequentProv{2, 0};
    freq.parents = {"gft_specific_J1", "gft_specific_J2"};
    plans.push_back(freq);
    SamplingPlan fb = freq;
    fb.provenance = GftFrequentProv{1, 2};
    plans.push_back(fb);
    SamplingPlan imp;
    imp.nodes = {0};
    imp.scores = {0.0};
    imp.provenance = GftImportantProv{1};
    plans.push_back(imp);
    SamplingPlan lap;
    lap.nodes = {1, 2};
    lap.scores = {0.9, 0.8};
    lap.provenance = LaplacianProv{2};
    plans.push_back(lap);
    SamplingPlan rnd;
    rnd.nodes = {4};
    rnd.scores = {};
    rnd.provenance = RandomProv{77, 1};
    plans.push_back(rnd);

    for (const auto& plan : plans) {
        const SamplingPlan back = plan_from_json(plan_to_json(plan));
        CHECK(back.nodes == plan.nodes);
        CHECK(back.scores == plan.scores);
        CHECK(back.parents == plan.parents);
        CHECK(back.id() == plan.id());
    }
}

TEST_CASE("concat_columns stacks variants for one source") {
    Eigen::MatrixXd a(3, 2), b(3, 4);
    a.setConstant(1.0);
    b.setConstant(2.0);
    const DataMatrix ma = matrix_of(a);
    const DataMatrix mb = matrix_of(b);
    const DataMatrix joined = concat_columns({ma, mb});
    CHECK(joined.values.cols() == 6);
    CHECK(joined.values(0, 0) == 1.0);
    CHECK(joined.values(2, 5) == 2.0);

    DataMatrix other = mb;
    other.node_index[0] = "different";
    CHECK_THROWS_AS(concat_columns({ma, other}), ValidationError);
}
