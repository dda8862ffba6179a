#pragma once

#include "veer/analysis.hpp"
#include "veer/dataspace.hpp"
#include "veer/optimize.hpp"
#include "veer/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace veer::experiment {

/// A CSV table with its manifest, or a synthetic landscape.
struct DatasetSource {
    std::filesystem::path csv;
    std::filesystem::path manifest;
    std::optional<synth::LandscapeSpec> landscape;

    static DatasetSource from_files(std::filesystem::path csv, std::filesystem::path manifest);
    static DatasetSource from_landscape(const synth::LandscapeSpec& spec);

    ConfigSpace load() const;
    std::string describe() const;
    nlohmann::json to_json() const;
    static DatasetSource from_json(const nlohmann::json& json);
};

struct ExperimentConfig {
    DatasetSource dataset;
    std::vector<Variant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
    std::size_t repeats = 20;
    /// Share of rows held out from the optimizer.
    double split_fraction = 0.5;
    /// Repeat r runs with seed base_seed + r; params.seed is ignored.
    std::uint64_t base_seed = 0;
    OptimizerParams params;
    /// Swap in surrogates fitted on the full truth (diagnostic).
    bool oracle_surrogates = false;
    /// Leaves of each surrogate quoted in the conflict report.
    std::size_t rule_top_k = 3;
    /// When set, records, tables, conflicts and state snapshots are written here.
    std::optional<std::filesystem::path> output_dir;
};

struct RunRecord {
    Variant variant = Variant::flash;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    double gd = 0.0;
    std::optional<double> tau;
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t measurements = 0;
    std::size_t iterations = 0;
    std::size_t holdout_size = 0;
    std::size_t n_selected = 0;
    std::uint64_t selection_comparisons = 0;
    std::vector<std::size_t> solution_ids;
    /// Wall-clock seconds of final_solutions on the holdout.
    double apply_seconds = 0.0;
};

/// Every (repeat, variant) pair. Training runs concurrently; holdout timing
/// runs afterwards, one run at a time. A failing run aborts with its context.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ConfigSpace& space);

/// One trained variant evaluated on one split.
struct Evaluation {
    Solution solution;
    double gd = 0.0;
    analysis::TauReport tau;
};

/// Selects on the holdout and scores it against the holdout's true front,
/// with objectives min-max normalized over the whole holdout.
Evaluation evaluate(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> holdout);

/// mean(flash apply time) / mean(variant apply time), per variant.
std::map<Variant, double> timing_ratio(std::span<const RunRecord> records);

/// Rules of each per-objective surrogate and the conflicts between every
/// pair of objectives, as text.
std::string conflict_report(const OptimizerState& state, const ConfigSpace& space, std::size_t top_k);

struct MetricTable {
    std::string metric;
    std::vector<analysis::SKGroup> groups;
};

struct Summary {
    /// Scott-Knott results for gd, apply_seconds and measurements (lower is better).
    std::vector<MetricTable> tables;
    /// metric -> variant -> median; also carries tau where defined.
    std::map<std::string, std::map<std::string, double>> medians;
    /// Variants alone at the worst GD rank.
    std::vector<std::string> flagged_worst;
};

Summary aggregate(std::span<const RunRecord> records);

/// Column names of records.csv; timing columns come last.
const std::vector<std::string>& record_columns();
/// Number of leading columns that are free of timing.
std::size_t deterministic_columns();

void write_records(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_records(std::istream& in);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

void write_medians(std::ostream& out, const Summary& summary);
void write_sk_ranks(std::ostream& out, const Summary& summary);
/// records.csv is not touched; writes medians.csv and sk_ranks.csv.
void write_summary(const std::filesystem::path& dir, const Summary& summary);

} // namespace veer::experiment
