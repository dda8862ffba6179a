#include "veer/analysis.hpp"
#include "veer/random.hpp"
#include "veer/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace veer;
using namespace veer::analysis;
using cart::Comparator;
using cart::Condition;
using cart::Rule;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, bool ties) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = ties ? double(rng.below(4)) : rng.uniform();
    }
    return v;
}

Rule rule(std::vector<Condition> conditions) {
    return Rule{std::move(conditions), {0.0}, 1};
}

} // namespace

TEST_CASE("kendall examples") {
    const auto same = kendall_tau({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.tau == 1.0);
    CHECK(same.concordant == 3);
    CHECK(same.n_pairs == 3);
    CHECK(kendall_tau({{1, 2, 3}, {3, 2, 1}}).tau == -1.0);

    const auto tied = kendall_tau({{1, 1, 1}, {2, 2, 2}});
    CHECK_FALSE(tied.tau.has_value());
    CHECK(tied.concordant + tied.discordant == 0);
    CHECK(tied.n_pairs == 3);

    // Tied in one vector only: the pair is discordant.
    const auto partial = kendall_tau({{1, 1}, {1, 2}});
    CHECK(partial.discordant == 1);
    CHECK(partial.tau == -1.0);

    CHECK_THROWS_AS(kendall_tau({{1, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(kendall_tau({{1, 2, 3}, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(kendall_tau({{1}, {1}}), std::invalid_argument);
}

TEST_CASE("kendall matches pair enumeration, with and without ties") {
    Rng rng(11);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 2 + rng.below(80);
        const std::size_t m = trial % 4 == 3 ? 3 : 2;
        const bool ties = trial % 2 == 0;
        ScoreVectors v;
        for (std::size_t k = 0; k < m; ++k) {
            v.push_back(random_vector(rng, n, ties));
        }
        const auto expected = oracle::kendall(v);
        for (const auto& got : {kendall_tau(v), kendall_tau_all_pairs(v), kendall_tau_all_pairs_serial(v)}) {
            CHECK(got.concordant == expected.concordant);
            CHECK(got.discordant == expected.discordant);
            CHECK(got.tau == expected.tau);
            CHECK(got.n_pairs == n * (n - 1) / 2);
        }
    }
}

TEST_CASE("large inputs take the parallel kernel and agree with the serial one") {
    Rng rng(12);
    ScoreVectors v{random_vector(rng, 3000, true), random_vector(rng, 3000, false)};
    const auto fast = kendall_tau(v);
    const auto all = kendall_tau_all_pairs(v);
    const auto serial = kendall_tau_all_pairs_serial(v);
    CHECK(fast.concordant == serial.concordant);
    CHECK(all.concordant == serial.concordant);
    CHECK(all.discordant == serial.discordant);
}

TEST_CASE("kendall properties: bounds, self-agreement, antisymmetry") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(50);
        const auto a = random_vector(rng, n, false);
        const auto b = random_vector(rng, n, trial % 2 == 0);
        const auto t = kendall_tau({a, b});
        if (t.tau) {
            CHECK(*t.tau >= -1.0);
            CHECK(*t.tau <= 1.0);
        }
        CHECK(kendall_tau({a, a}).tau == 1.0);
        const auto c = random_vector(rng, n, false);
        std::vector<double> neg(c.size());
        std::transform(c.begin(), c.end(), neg.begin(), [](double x) { return -x; });
        CHECK(*kendall_tau({a, neg}).tau == doctest::Approx(-*kendall_tau({a, c}).tau).epsilon(1e-12));
    }
}

TEST_CASE("independent objectives give tau near zero") {
    Rng rng(14);
    const auto t = kendall_tau({random_vector(rng, 100, false), random_vector(rng, 100, false)});
    CHECK(std::abs(*t.tau) < 0.15);
}

TEST_CASE("model_disagreement per variant") {
    synth::LandscapeSpec spec;
    spec.n_rows = 400;
    for (double corr : {-1.0, 0.0, 1.0}) {
        spec.correlation = corr;
        spec.seed = 7;
        const ConfigSpace space = synth::generate(spec);
        const Split split = split_holdout(space, 0.5, 3);
        OptimizerParams p;
        p.seed = 3;
        for (Variant v : kAllVariants) {
            auto state = run_smbo(space, split.pool, v, p);
            if (v == Variant::veer) {
                state = train_veer(std::move(state), space, split.pool);
            }
            const std::uint64_t before = space.perf_lookups();
            const auto t = model_disagreement(state, space, split.holdout);
            CHECK(space.perf_lookups() == before);
            if (v == Variant::single_weight || v == Variant::veer) {
                CHECK(t.tau == 1.0);
            } else if (corr == -1.0) {
                CHECK(*t.tau <= -0.9);
            } else if (corr == 1.0) {
                CHECK(*t.tau >= 0.9);
            }
        }
    }
}

TEST_CASE("cliffs delta examples") {
    CHECK(cliffs_delta(std::vector<double>{2}, std::vector<double>{1}) == 1.0);
    CHECK(cliffs_delta(std::vector<double>{3, 1, 2, 2}, std::vector<double>{2, 2, 1, 3}) == 0.0);
    // Pairs (1,2) (1,3) (2,3) favour b, (2,2) ties.
    CHECK(cliffs_delta(std::vector<double>{1, 2}, std::vector<double>{2, 3}) == -0.75);
    CHECK_THROWS_AS(cliffs_delta(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("cliffs delta matches enumeration and is antisymmetric") {
    Rng rng(15);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = random_vector(rng, 1 + rng.below(40), trial % 2 == 0);
        const auto b = random_vector(rng, 1 + rng.below(40), trial % 2 == 0);
        CHECK(cliffs_delta(a, b) == oracle::cliffs(a, b));
        CHECK(cliffs_delta(a, b) == -cliffs_delta(b, a));
    }
}

TEST_CASE("median") {
    CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
    CHECK(median(std::vector<double>{4, 1, 2, 3}) == 2.5);
    CHECK_THROWS_AS(median(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("scott-knott examples") {
    const auto one = scott_knott({{"A", {1, 2, 3}}});
    REQUIRE(one.size() == 1);
    CHECK(one[0].rank == 0);

    const auto two = scott_knott({{"B", {9, 9, 9}}, {"A", {1, 1, 1}}});
    REQUIRE(two.size() == 2);
    CHECK(two[0].treatment == "A");
    CHECK(two[0].rank == 0);
    CHECK(two[1].treatment == "B");
    CHECK(two[1].rank == 1);
    CHECK(two[1].median == 9.0);

    const auto same = scott_knott({{"A", {1, 2, 3}}, {"B", {1, 2, 3}}});
    CHECK(same[0].rank == 0);
    CHECK(same[1].rank == 0);

    CHECK_THROWS_AS(scott_knott({}), std::invalid_argument);
    CHECK_THROWS_AS(scott_knott({{"A", {1}}, {"B", {1, 2}}}), std::invalid_argument);
}

TEST_CASE("scott-knott separates three clear tiers and merges near-duplicates") {
    const auto groups = scott_knott({{"lo1", {1, 1.1, 0.9, 1.05}},
                                     {"lo2", {1.02, 0.95, 1.08, 1.0}},
                                     {"mid", {5, 5.2, 4.9, 5.1}},
                                     {"hi", {9, 9.5, 8.8, 9.1}}});
    std::map<std::string, std::size_t> rank;
    for (const auto& g : groups) {
        rank[g.treatment] = g.rank;
    }
    CHECK(rank["lo1"] == 0);
    CHECK(rank["lo2"] == 0);
    CHECK(rank["mid"] == 1);
    CHECK(rank["hi"] == 2);
    for (std::size_t i = 1; i < groups.size(); ++i) {
        CHECK(groups[i - 1].median <= groups[i].median);
    }
}

TEST_CASE("scott-knott ranks survive increasing affine maps") {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, std::vector<double>> t, mapped;
        const double a = rng.uniform(0.1, 10), b = rng.uniform(-5, 5);
        for (int k = 0; k < 2 + int(rng.below(4)); ++k) {
            const double shift = double(rng.below(3));
            std::vector<double> s;
            for (int i = 0; i < 5 + int(rng.below(10)); ++i) {
                s.push_back(double(rng.below(8)) / 4.0 + shift);
            }
            const std::string name = "t" + std::to_string(k);
            t[name] = s;
            for (double& x : s) {
                x = a * x + b;
            }
            mapped[name] = s;
        }
        const auto g1 = scott_knott(t);
        const auto g2 = scott_knott(mapped);
        REQUIRE(g1.size() == g2.size());
        for (std::size_t i = 0; i < g1.size(); ++i) {
            CHECK(g1[i].treatment == g2[i].treatment);
            CHECK(g1[i].rank == g2[i].rank);
        }
    }
}

TEST_CASE("conflict patterns") {
    const Rule a_true = rule({{"x", 0, Comparator::equal, 1}});
    const Rule b_false = rule({{"x", 0, Comparator::equal, 0}});
    const auto flip = detect_conflicts(std::vector<Rule>{a_true}, std::vector<Rule>{b_false});
    REQUIRE(flip.size() == 1);
    CHECK(flip[0].option == "x");

    const auto bounds = detect_conflicts(std::vector<Rule>{rule({{"x", 0, Comparator::greater, 0.55}})},
                                         std::vector<Rule>{rule({{"x", 0, Comparator::less_equal, 0.05}})});
    CHECK(bounds.size() == 1);

    const auto overlap = detect_conflicts(std::vector<Rule>{rule({{"chunk", 2, Comparator::less_equal, 0.14}})},
                                          std::vector<Rule>{rule({{"chunk", 2, Comparator::greater, 0.05}})});
    CHECK(overlap.size() == 1);

    const auto same = detect_conflicts(std::vector<Rule>{rule({{"x", 0, Comparator::greater, 0.1}})},
                                       std::vector<Rule>{rule({{"x", 0, Comparator::greater, 0.2}})});
    CHECK(same.empty());

    const auto other_option = detect_conflicts(std::vector<Rule>{rule({{"x", 0, Comparator::greater, 0.1}})},
                                               std::vector<Rule>{rule({{"y", 1, Comparator::less_equal, 0.2}})});
    CHECK(other_option.empty());

    // The same pair seen through several rules is reported once.
    const auto dup = detect_conflicts(std::vector<Rule>{a_true, a_true}, std::vector<Rule>{b_false, b_false});
    CHECK(dup.size() == 1);
}

TEST_CASE("conflict rendering") {
    CHECK(render_conflicts({}) == "no conflicting rules\n");
    const auto c = detect_conflicts(std::vector<Rule>{rule({{"tiling", 0, Comparator::equal, 1}})},
                                    std::vector<Rule>{rule({{"tiling", 0, Comparator::equal, 0}})},
                                    {"latency", "energy"});
    const std::string text = render_conflicts(c);
    CHECK(text.find("latency") == 0);
    CHECK(text.find("energy") != std::string::npos);
    CHECK(text.find("tiling = True") != std::string::npos);
    CHECK(text.find("tiling = False") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("a constant single-output model still reports full agreement") {
    synth::LandscapeSpec spec;
    spec.n_rows = 100;
    spec.correlation = -1.0;
    const ConfigSpace space = synth::generate(spec);
    OptimizerState state;
    state.variant = Variant::single_weight;
    state.evaluated = {0, 1, 2, 3};
    state.measured = space.perf_rows(state.evaluated);
    state.surrogates = {cart::fit(space.configs().gather(state.evaluated), Matrix(4, 1, 1.0))};
    std::vector<std::size_t> holdout(50);
    std::iota(holdout.begin(), holdout.end(), 50);
    const auto t = model_disagreement(state, space, holdout);
    CHECK(t.tau == 1.0);
    CHECK(t.concordant == 0);
    CHECK(t.discordant == 0);
}
