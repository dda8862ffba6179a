// Command-line front end: run experiments, inspect saved states, generate
// synthetic landscapes and summarise records.

#include "veer/experiment.hpp"
#include "veer/snapshot.hpp"
#include "veer/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace veer;

namespace {

struct LandscapeArgs {
    synth::LandscapeSpec spec;
    std::string shape = "polynomial";
    fs::path spec_file;

    void add(CLI::App& app) {
        app.add_option("--spec", spec_file, "Landscape spec as JSON (fields override the defaults)");
        app.add_option("--binary", spec.n_binary, "Binary options")->capture_default_str();
        app.add_option("--numeric", spec.n_numeric, "Numeric options")->capture_default_str();
        app.add_option("--levels", spec.numeric_levels, "Levels per numeric option")->capture_default_str();
        app.add_option("--rows", spec.n_rows, "Configurations to draw")->capture_default_str();
        app.add_option("--objectives", spec.n_objectives, "Objectives")->capture_default_str();
        app.add_option("--corr", spec.correlation, "Correlation of objective 1 with the rest")->capture_default_str();
        app.add_option("--noise", spec.noise, "Gaussian noise standard deviation")->capture_default_str();
        app.add_option("--landscape-seed", spec.seed, "Generator seed")->capture_default_str();
        app.add_option("--shape", shape, "polynomial or concave")->capture_default_str();
    }

    synth::LandscapeSpec resolve() const {
        if (!spec_file.empty()) {
            std::ifstream in(spec_file);
            if (!in) {
                throw std::runtime_error(fmt::format("cannot open spec '{}'", spec_file.string()));
            }
            return synth::spec_from_json(nlohmann::json::parse(in));
        }
        synth::LandscapeSpec out = spec;
        out.shape = synth::parse_shape(shape);
        return out;
    }
};

std::vector<Variant> parse_variants(const std::vector<std::string>& names) {
    std::vector<Variant> out;
    for (const auto& n : names) {
        out.push_back(parse_variant(n));
    }
    return out;
}

ConfigSpace load_space(const StateSnapshot& snapshot) {
    return experiment::DatasetSource::from_json(snapshot.dataset).load();
}

void print_records(std::span<const experiment::RunRecord> records) {
    fmt::print("{:<14}{:>8}{:>12}{:>10}{:>14}{:>12}\n", "variant", "repeat", "gd", "tau", "measurements",
               "apply_s");
    for (const auto& r : records) {
        fmt::print("{:<14}{:>8}{:>12.5f}{:>10}{:>14}{:>12.6f}\n", to_string(r.variant), r.repeat, r.gd,
                   r.tau ? fmt::format("{:.3f}", *r.tau) : std::string("n/a"), r.measurements, r.apply_seconds);
    }
}

void print_summary(const experiment::Summary& summary) {
    for (const auto& table : summary.tables) {
        fmt::print("\n{} (Scott-Knott, rank 0 is best)\n", table.metric);
        for (const auto& g : table.groups) {
            fmt::print("  rank {}  {:<14} median {}\n", g.rank, g.treatment, g.median);
        }
    }
    if (summary.flagged_worst.empty()) {
        fmt::print("\nno variant is worst on gd by more than a small effect\n");
    } else {
        fmt::print("\nworst on gd: {}\n", fmt::join(summary.flagged_worst, ", "));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective configuration optimisation with regression-tree surrogates"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run every variant over repeated holdout splits");
    LandscapeArgs run_landscape;
    fs::path csv, manifest, out_dir;
    std::vector<std::string> variant_names{"flash", "single_weight", "multi_out", "veer"};
    experiment::ExperimentConfig cfg;
    std::vector<double> weights;
    std::size_t n_unlabeled = 0;
    bool quiet = false;
    run->add_option("--csv", csv, "Dataset CSV (otherwise a synthetic landscape is generated)");
    run->add_option("--manifest", manifest, "Objective manifest for --csv");
    run_landscape.add(*run);
    run->add_option("--variants", variant_names, "Variants to run")->delimiter(',')->capture_default_str();
    run->add_option("--repeats", cfg.repeats, "Repeats")->capture_default_str();
    run->add_option("--seed", cfg.base_seed, "Base seed; repeat r uses seed + r")->capture_default_str();
    run->add_option("--split", cfg.split_fraction, "Holdout fraction")->capture_default_str();
    run->add_option("--initial", cfg.params.initial_samples, "Initial random samples")->capture_default_str();
    run->add_option("--budget", cfg.params.budget, "Lives")->capture_default_str();
    run->add_option("--max-depth", cfg.params.tree.max_depth, "Tree depth limit, -1 for none")->capture_default_str();
    run->add_option("--min-split", cfg.params.tree.min_split, "Smallest node that may split")->capture_default_str();
    run->add_option("--min-leaf", cfg.params.tree.min_leaf, "Smallest leaf")->capture_default_str();
    run->add_option("--weights", weights, "Objective weights")->delimiter(',');
    run->add_option("--unlabeled", n_unlabeled, "Unmeasured rows fed to the rank model (default min(1000, rest))");
    run->add_flag("--oracle", cfg.oracle_surrogates, "Replace surrogates with trees fitted on the full truth");
    run->add_option("--top-k", cfg.rule_top_k, "Leaves per surrogate in conflicts.txt")->capture_default_str();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--quiet", quiet, "Only write files");
    run->callback([&] {
        if (!csv.empty()) {
            if (manifest.empty()) {
                throw CLI::ValidationError("--manifest", "required with --csv");
            }
            cfg.dataset = experiment::DatasetSource::from_files(csv, manifest);
        } else {
            cfg.dataset = experiment::DatasetSource::from_landscape(run_landscape.resolve());
        }
        cfg.variants = parse_variants(variant_names);
        cfg.params.weights = weights;
        if (n_unlabeled > 0) {
            cfg.params.n_unlabeled = n_unlabeled;
        }
        cfg.output_dir = out_dir;
        const auto records = experiment::run_experiment(cfg);
        if (!quiet) {
            print_records(records);
            if (cfg.repeats >= 2) {
                print_summary(experiment::aggregate(records));
            }
            fmt::print("\nwrote {}\n", (out_dir / "records.csv").string());
        }
    });

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a saved optimizer state on its holdout");
    fs::path state_path;
    bool as_json = false;
    evaluate->add_option("--state", state_path, "State snapshot (states/r*_*.json)")->required()->check(CLI::ExistingFile);
    evaluate->add_flag("--json", as_json, "Print JSON");
    evaluate->callback([&] {
        const StateSnapshot snapshot = load_snapshot(state_path);
        const ConfigSpace space = load_space(snapshot);
        const auto ev = experiment::evaluate(snapshot.state, space, snapshot.holdout);
        nlohmann::json j = {
            {"variant", std::string(to_string(snapshot.state.variant))},
            {"gd", ev.gd},
            {"tau", ev.tau.tau ? nlohmann::json(*ev.tau.tau) : nlohmann::json()},
            {"concordant", ev.tau.concordant},
            {"discordant", ev.tau.discordant},
            {"measurements", snapshot.state.measurements},
            {"n_selected", ev.solution.selected.size()},
            {"selection_comparisons", ev.solution.selection_comparisons},
            {"apply_seconds", ev.solution.apply_seconds},
            {"solution_ids", ev.solution.row_ids},
        };
        if (as_json) {
            fmt::print("{}\n", j.dump(2));
            return;
        }
        for (const auto& [key, value] : j.items()) {
            fmt::print("{:<22} {}\n", key, value.dump());
        }
    });

    // explain
    auto* explain = app.add_subcommand("explain", "Print surrogate rules and conflicts of a saved state");
    std::size_t top_k = 3;
    fs::path explain_out;
    explain->add_option("--state", state_path, "State snapshot")->required()->check(CLI::ExistingFile);
    explain->add_option("--top-k", top_k, "Leaves per model")->capture_default_str();
    explain->add_option("--out", explain_out, "Write the report here instead of stdout");
    explain->callback([&] {
        const StateSnapshot snapshot = load_snapshot(state_path);
        const ConfigSpace space = load_space(snapshot);
        const std::string report = experiment::conflict_report(snapshot.state, space, top_k);
        if (explain_out.empty()) {
            fmt::print("{}", report);
            return;
        }
        std::ofstream out(explain_out);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write '{}'", explain_out.string()));
        }
        out << report;
    });

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic landscape as CSV plus manifest");
    LandscapeArgs synth_landscape;
    fs::path synth_csv, synth_manifest;
    synth_landscape.add(*synth_cmd);
    synth_cmd->add_option("--out", synth_csv, "CSV path")->required();
    synth_cmd->add_option("--manifest", synth_manifest, "Manifest path (default: CSV path with .manifest)");
    synth_cmd->callback([&] {
        const ConfigSpace space = synth::generate(synth_landscape.resolve());
        if (synth_manifest.empty()) {
            synth_manifest = fs::path(synth_csv).replace_extension(".manifest");
        }
        write_dataset(space, synth_csv, synth_manifest);
        fmt::print("wrote {} rows to {} and {}\n", space.size(), synth_csv.string(), synth_manifest.string());
    });

    // aggregate
    auto* agg = app.add_subcommand("aggregate", "Median and Scott-Knott tables from records.csv");
    fs::path records_path, agg_out;
    agg->add_option("--records", records_path, "records.csv")->required()->check(CLI::ExistingFile);
    agg->add_option("--out", agg_out, "Output directory (default: next to the records)");
    agg->callback([&] {
        const auto records = experiment::read_records(records_path);
        const auto summary = experiment::aggregate(records);
        const fs::path dir = agg_out.empty() ? records_path.parent_path() : agg_out;
        experiment::write_summary(dir.empty() ? fs::path(".") : dir, summary);
        print_summary(summary);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
