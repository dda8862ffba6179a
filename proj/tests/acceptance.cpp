// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion produced a verdict and 1 when one of
// them raised an error. With --strict a FAIL verdict also exits 1.

#include "veer/analysis.hpp"
#include "veer/cart.hpp"
#include "veer/experiment.hpp"
#include "veer/pareto.hpp"
#include "veer/random.hpp"
#include "veer/synth.hpp"

#include "oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

using namespace veer;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Verdict()> check;
};

std::vector<std::size_t> ids_upto(std::size_t n) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t m, bool lattice) {
    Matrix pts(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            pts(i, k) = lattice ? double(rng.below(6)) / 5.0 : rng.uniform();
        }
    }
    return pts;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, bool ties) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = ties ? double(rng.below(5)) : rng.uniform();
    }
    return v;
}

synth::LandscapeSpec landscape(double corr, std::size_t rows, std::uint64_t seed) {
    synth::LandscapeSpec spec;
    spec.correlation = corr;
    spec.n_rows = rows;
    spec.seed = seed;
    return spec;
}

// 1
Verdict nd_sort_oracle() {
    Rng rng(101);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        const Matrix pts = random_points(rng, n, 2 + rng.below(2), trial % 2 == 0);
        const auto ids = ids_upto(n);
        const auto expected = oracle::fronts(pts);
        if (pareto::nd_sort(ids, pts, pareto::DominanceKind::binary) != expected ||
            pareto::nd_sort_serial(ids, pts, pareto::DominanceKind::binary) != expected) {
            ++mismatches;
        }
    }
    return {mismatches == 0, fmt::format("{} of 200 instances differ from the brute-force peel", mismatches)};
}

// 2
Verdict cdom_examples() {
    using V = std::vector<double>;
    const double e = std::numbers::e;
    const double err = std::max({std::abs(pareto::cdom_loss(V{0, 0}, V{1, 1}) + e),
                                 std::abs(pareto::cdom_loss(V{1, 1}, V{0, 0}) + 1 / e),
                                 std::abs(pareto::cdom_loss(V{0, 1}, V{1, 0}) + (e + 1 / e) / 2)});
    const bool directions = pareto::continuous_dominates(V{0, 0}, V{1, 1}) &&
                            !pareto::continuous_dominates(V{1, 1}, V{0, 0}) &&
                            !pareto::continuous_dominates(V{0, 1}, V{1, 0}) &&
                            !pareto::continuous_dominates(V{1, 0}, V{0, 1});

    Rng rng(102);
    std::size_t incomplete = 0, symmetric = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Matrix p = random_points(rng, 2, 2 + rng.below(3), trial % 2 == 0);
        const bool ab = pareto::continuous_dominates(p.row(0), p.row(1));
        const bool ba = pareto::continuous_dominates(p.row(1), p.row(0));
        symmetric += ab && ba;
        const bool distinct = pareto::cdom_loss(p.row(0), p.row(1)) != pareto::cdom_loss(p.row(1), p.row(0));
        incomplete += distinct && !ab && !ba;
    }
    return {err <= 1e-9 && directions && incomplete == 0 && symmetric == 0,
            fmt::format("max example error {:.2e}; over 10000 pairs {} incomparable distinct pairs, {} mutual",
                        err, incomplete, symmetric)};
}

// 3
Verdict tau_landscapes() {
    std::string detail;
    bool pass = true;
    for (double corr : {-1.0, 0.0, 1.0}) {
        experiment::ExperimentConfig cfg;
        cfg.dataset = experiment::DatasetSource::from_landscape(landscape(corr, 500, 3));
        cfg.variants = {Variant::flash, Variant::single_weight, Variant::veer};
        cfg.repeats = 20;
        double flash_lo = 1.0, flash_hi = -1.0;
        std::size_t not_one = 0;
        for (const auto& r : experiment::run_experiment(cfg)) {
            if (r.variant == Variant::flash) {
                const double t = r.tau.value_or(std::nan(""));
                flash_lo = std::min(flash_lo, t);
                flash_hi = std::max(flash_hi, t);
                if (!r.tau || (corr == -1.0 && t > -0.9) || (corr == 1.0 && t < 0.9)) {
                    pass = false;
                }
            } else if (r.tau != 1.0) {
                ++not_one;
                pass = false;
            }
        }
        detail += fmt::format("corr {:+.0f}: flash tau in [{:.3f}, {:.3f}], {} non-unit veer/single_weight; ", corr,
                              flash_lo, flash_hi, not_one);
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 4
Verdict gd_parity() {
    struct Landscape {
        std::string name;
        synth::LandscapeSpec spec;
    };
    std::vector<Landscape> landscapes{{"anti-correlated", landscape(-0.5, 2000, 1)},
                                      {"independent", landscape(0.0, 2000, 1)},
                                      {"concave", landscape(0.0, 2000, 1)}};
    landscapes[2].spec.shape = synth::Shape::concave;

    bool pass = true;
    std::string detail;
    for (const auto& l : landscapes) {
        experiment::ExperimentConfig cfg;
        cfg.dataset = experiment::DatasetSource::from_landscape(l.spec);
        cfg.repeats = 20;
        const auto summary = experiment::aggregate(experiment::run_experiment(cfg));
        std::map<std::string, std::size_t> rank;
        for (const auto& g : summary.tables.front().groups) {
            rank[g.treatment] = g.rank;
        }
        const bool veer_ok = rank.at("veer") <= rank.at("flash");
        const auto& worst = summary.flagged_worst;
        const bool sw_worst = std::find(worst.begin(), worst.end(), "single_weight") != worst.end();
        pass = pass && veer_ok && (l.name != "concave" || sw_worst);
        detail += fmt::format("{}: gd ranks flash {} veer {} single_weight {} multi_out {}, worst [{}]; ", l.name,
                              rank.at("flash"), rank.at("veer"), rank.at("single_weight"), rank.at("multi_out"),
                              fmt::join(worst, ","));
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

// 5
Verdict train_veer_lookups() {
    std::uint64_t total = 0;
    std::size_t runs = 0;
    for (double corr : {-0.5, 0.0, 0.5}) {
        const ConfigSpace space = synth::generate(landscape(corr, 1500, 4));
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Split split = split_holdout(space, 0.5, seed);
            OptimizerParams p;
            p.seed = seed;
            const OptimizerState state = run_smbo(space, split.pool, Variant::veer, p);
            const std::uint64_t before = space.perf_lookups();
            const OptimizerState trained = train_veer(state, space, split.pool);
            total += space.perf_lookups() - before + (trained.measurements - state.measurements);
            ++runs;
        }
    }
    return {total == 0, fmt::format("{} lookups over {} train_veer calls", total, runs)};
}

// 6
Verdict holdout_timing() {
    synth::LandscapeSpec spec = landscape(-0.5, 80000, 1);
    spec.n_binary = 10;
    spec.n_numeric = 4;
    experiment::ExperimentConfig cfg;
    cfg.dataset = experiment::DatasetSource::from_landscape(spec);
    cfg.variants = {Variant::flash, Variant::veer};
    cfg.repeats = 1;
    const auto records = experiment::run_experiment(cfg);
    const auto ratio = experiment::timing_ratio(records);
    std::uint64_t veer_comparisons = 0;
    std::size_t holdout = 0;
    for (const auto& r : records) {
        holdout = r.holdout_size;
        if (r.variant == Variant::veer) {
            veer_comparisons += r.selection_comparisons;
        }
    }
    return {holdout >= 40000 && ratio.at(Variant::veer) >= 10.0 && veer_comparisons == 0,
            fmt::format("holdout {} rows, timing ratio {:.1f}, veer comparisons {}", holdout, ratio.at(Variant::veer),
                        veer_comparisons)};
}

// 7
Verdict kendall_oracle() {
    Rng rng(107);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(60);
        const bool ties = trial % 2 == 0;
        const analysis::ScoreVectors v{random_vector(rng, n, ties), random_vector(rng, n, ties)};
        const auto got = analysis::kendall_tau(v);
        const auto expected = oracle::kendall(v);
        if (got.concordant != expected.concordant || got.discordant != expected.discordant ||
            got.tau != expected.tau) {
            ++mismatches;
        }
    }
    return {mismatches == 0, fmt::format("{} of 1000 vector pairs differ from pair enumeration", mismatches)};
}

// 8
Verdict cliffs_and_scott_knott() {
    Rng rng(108);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_vector(rng, 1 + rng.below(30), trial % 2 == 0);
        const auto b = random_vector(rng, 1 + rng.below(30), trial % 2 == 0);
        mismatches += analysis::cliffs_delta(a, b) != oracle::cliffs(a, b);
    }
    const auto one = analysis::scott_knott({{"A", {1, 2, 3}}});
    const auto two = analysis::scott_knott({{"A", {1, 1, 1}}, {"B", {9, 9, 9}}});
    const auto same = analysis::scott_knott({{"A", {1, 2, 3}}, {"B", {1, 2, 3}}});
    const bool examples = one.size() == 1 && one[0].rank == 0 && two.size() == 2 && two[0].treatment == "A" &&
                          two[0].rank == 0 && two[1].rank == 1 && same.size() == 2 && same[0].rank == 0 &&
                          same[1].rank == 0;
    return {mismatches == 0 && examples,
            fmt::format("{} of 1000 delta mismatches; scott-knott examples {}", mismatches,
                        examples ? "reproduced" : "differ")};
}

// 9
Verdict cart_root_split() {
    Rng rng(109);
    std::size_t mismatches = 0, imperfect = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.below(40);
        const std::size_t f = 1 + rng.below(4);
        const std::size_t m = 1 + rng.below(2);
        Matrix x(n, f), y(n, m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) {
                x(i, j) = double(rng.below(6));
            }
            for (std::size_t k = 0; k < m; ++k) {
                y(i, k) = rng.uniform(-5, 5);
            }
        }
        const std::size_t min_leaf = 1 + rng.below(3);
        const auto expected = oracle::best_root_split(x, y, min_leaf);
        const auto stump = cart::fit(x, y, {1, 2, min_leaf});
        if (!std::isfinite(expected.impurity)) {
            mismatches += stump.leaf_count() != 1;
        } else if (const auto* root = std::get_if<cart::Split>(&stump.nodes()[0])) {
            mismatches += root->option != expected.option || root->threshold != expected.threshold;
        } else {
            ++mismatches;
        }

        // Unrestricted trees interpolate rows with distinct configurations.
        std::set<std::vector<double>> seen;
        std::vector<std::size_t> unique_rows;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = x.row(i);
            if (seen.insert({r.begin(), r.end()}).second) {
                unique_rows.push_back(i);
            }
        }
        const Matrix ux = x.gather(unique_rows), uy = y.gather(unique_rows);
        const auto full = cart::fit(ux, uy, {cart::TreeParams::kUnbounded, 2, 1});
        double sse = 0.0;
        for (std::size_t i = 0; i < ux.rows(); ++i) {
            const auto p = full.predict(ux.row(i));
            for (std::size_t k = 0; k < m; ++k) {
                sse += (p[k] - uy(i, k)) * (p[k] - uy(i, k));
            }
        }
        imperfect += sse != 0.0;
    }
    return {mismatches == 0 && imperfect == 0,
            fmt::format("{} of 100 root splits differ from enumeration; {} unrestricted trees with nonzero MSE",
                        mismatches, imperfect)};
}

// 10
Verdict conflict_patterns() {
    using cart::Comparator;
    auto rules = [](std::string option, Comparator op, double value) {
        return std::vector<cart::Rule>{{{{option, 0, op, value}}, {0.0}, 1}};
    };
    const auto flip = analysis::detect_conflicts(rules("x", Comparator::equal, 1), rules("x", Comparator::equal, 0));
    const auto bounds =
        analysis::detect_conflicts(rules("x", Comparator::greater, 0.55), rules("x", Comparator::less_equal, 0.05));
    const auto overlap =
        analysis::detect_conflicts(rules("x", Comparator::less_equal, 0.14), rules("x", Comparator::greater, 0.05));
    const auto same =
        analysis::detect_conflicts(rules("x", Comparator::greater, 0.1), rules("x", Comparator::greater, 0.2));
    const bool pass = flip.size() == 1 && flip[0].option == "x" && bounds.size() == 1 && overlap.size() == 1 &&
                      same.empty();
    return {pass, fmt::format("binary flip {}, opposite bounds {}, overlapping bounds {}, same direction {}",
                              flip.size(), bounds.size(), overlap.size(), same.size())};
}

// 11
std::vector<std::string> deterministic_part(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) {
        throw std::runtime_error(fmt::format("missing {}", csv.string()));
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t pos = 0;
        for (std::size_t c = 0; c < experiment::deterministic_columns() && pos != std::string::npos; ++c) {
            pos = line.find(',', pos == 0 ? 0 : pos + 1);
        }
        out.push_back(line.substr(0, pos));
    }
    return out;
}

Verdict cli_reproducible() {
    const fs::path root = fs::temp_directory_path() / "veer_acceptance_cli";
    fs::remove_all(root);
    std::vector<std::vector<std::string>> tables;
    for (const char* name : {"a", "b"}) {
        const fs::path out = root / name;
        const std::string cmd = fmt::format("\"{}\" run --rows 600 --corr -0.3 --repeats 3 --seed 11 --out \"{}\" --quiet",
                                            VEER_CLI_PATH, out.string());
        if (std::system(cmd.c_str()) != 0) {
            throw std::runtime_error(fmt::format("command failed: {}", cmd));
        }
        tables.push_back(deterministic_part(out / "records.csv"));
    }
    fs::remove_all(root);
    const bool same = tables[0] == tables[1] && tables[0].size() > 1;
    return {same, fmt::format("{} record lines, timing-free columns {}", tables[0].size() - 1,
                              same ? "identical" : "differ")};
}

} // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::string_view(argv[1]) == "--strict";
    const std::vector<Criterion> criteria{
        {1, "nd_sort equals brute force", 10, nd_sort_oracle},
        {2, "continuous dominance examples and properties", 5, cdom_examples},
        {3, "kendall tau on correlated landscapes", 120, tau_landscapes},
        {4, "gd parity and weighted-sum failure", 600, gd_parity},
        {5, "train_veer makes no lookups", 60, train_veer_lookups},
        {6, "holdout timing ratio", 300, holdout_timing},
        {7, "kendall tau oracle", 5, kendall_oracle},
        {8, "cliffs delta oracle and scott-knott examples", 5, cliffs_and_scott_knott},
        {9, "cart root split oracle", 30, cart_root_split},
        {10, "conflict patterns", 5, conflict_patterns},
        {11, "cli records reproducible", 120, cli_reproducible},
    };

    int failed = 0, errors = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        bool error = false;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, fmt::format("error: {}", e.what())};
            error = true;
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= c.limit_seconds;
        const bool pass = v.pass && in_time;
        fmt::print("criterion {:>2}: {}  {} ({:.2f}s of {:.0f}s){}: {}\n", c.id, pass ? "PASS" : "FAIL", c.name,
                   seconds, c.limit_seconds, in_time ? "" : " over time", v.detail);
        std::fflush(stdout);
        failed += !pass;
        errors += error;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return errors > 0 || (strict && failed > 0) ? 1 : 0;
}
