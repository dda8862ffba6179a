#include "veer/experiment.hpp"

#include "veer/pareto.hpp"
#include "veer/snapshot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace veer::experiment {

namespace fs = std::filesystem;

DatasetSource DatasetSource::from_files(fs::path csv, fs::path manifest) {
    DatasetSource source;
    source.csv = std::move(csv);
    source.manifest = std::move(manifest);
    return source;
}

DatasetSource DatasetSource::from_landscape(const synth::LandscapeSpec& spec) {
    DatasetSource source;
    source.landscape = spec;
    return source;
}

ConfigSpace DatasetSource::load() const {
    if (landscape) {
        return synth::generate(*landscape);
    }
    if (csv.empty() || manifest.empty()) {
        throw std::invalid_argument("dataset needs a CSV file and a manifest, or a landscape spec");
    }
    return load_dataset(csv, ObjectiveManifest::load(manifest));
}

std::string DatasetSource::describe() const {
    if (landscape) {
        return fmt::format("synthetic {} landscape ({} binary, {} numeric, {} rows, corr {}, seed {})",
                           synth::to_string(landscape->shape), landscape->n_binary, landscape->n_numeric,
                           landscape->n_rows, landscape->correlation, landscape->seed);
    }
    return csv.string();
}

nlohmann::json DatasetSource::to_json() const {
    if (landscape) {
        return {{"landscape", synth::to_json(*landscape)}};
    }
    return {{"csv", fs::absolute(csv).string()}, {"manifest", fs::absolute(manifest).string()}};
}

DatasetSource DatasetSource::from_json(const nlohmann::json& json) {
    if (json.contains("landscape")) {
        return from_landscape(synth::spec_from_json(json.at("landscape")));
    }
    return from_files(json.at("csv").get<std::string>(), json.at("manifest").get<std::string>());
}

namespace {

/// True front of a holdout, normalized over the holdout.
struct Reference {
    MinMax bounds;
    Matrix front;
};

Reference reference_of(const ConfigSpace& space, std::span<const std::size_t> holdout) {
    std::vector<std::size_t> ids(holdout.begin(), holdout.end());
    const Matrix truth = space.perf_rows(ids);
    Reference ref;
    ref.bounds = MinMax::over(truth);
    std::vector<std::size_t> local(ids.size());
    std::iota(local.begin(), local.end(), 0);
    const auto front = pareto::first_front(local, truth, pareto::DominanceKind::binary);
    ref.front = ref.bounds.apply(truth.gather(front));
    return ref;
}

Evaluation evaluate_against(const OptimizerState& state, const ConfigSpace& space,
                            std::span<const std::size_t> holdout, const Reference& ref) {
    Evaluation ev;
    ev.solution = final_solutions(state, space, holdout, Execution::serial);
    ev.gd = pareto::generational_distance(ref.bounds.apply(ev.solution.perf), ref.front);
    ev.tau = analysis::model_disagreement(state, space, holdout);
    return ev;
}

OptimizerState train(const ConfigSpace& space, const Split& split, Variant variant, const ExperimentConfig& cfg,
                     std::uint64_t seed) {
    OptimizerParams params = cfg.params;
    params.seed = seed;
    OptimizerState state = run_smbo(space, split.pool, variant, params);
    if (cfg.oracle_surrogates) {
        state = with_oracle_surrogates(std::move(state), space);
    }
    if (variant == Variant::veer) {
        state = train_veer(std::move(state), space, split.pool);
    }
    return state;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
}

} // namespace

Evaluation evaluate(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> holdout) {
    return evaluate_against(state, space, holdout, reference_of(space, holdout));
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, cfg.dataset.load()); }

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ConfigSpace& space) {
    if (cfg.repeats < 1) {
        throw std::invalid_argument("experiment needs at least one repeat");
    }
    if (cfg.variants.empty()) {
        throw std::invalid_argument("experiment needs at least one variant");
    }

    std::vector<Split> splits;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        splits.push_back(split_holdout(space, cfg.split_fraction, cfg.base_seed + r));
    }

    struct Task {
        std::size_t repeat;
        Variant variant;
    };
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        for (Variant v : cfg.variants) {
            tasks.push_back({r, v});
        }
    }

    std::vector<OptimizerState> states(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    const auto n_tasks = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < n_tasks; ++t) {
        const Task& task = tasks[static_cast<std::size_t>(t)];
        try {
            states[static_cast<std::size_t>(t)] =
                train(space, splits[task.repeat], task.variant, cfg, cfg.base_seed + task.repeat);
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (!errors[t]) {
            continue;
        }
        try {
            std::rethrow_exception(errors[t]);
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("repeat {} ({}, seed {}) failed: {}", tasks[t].repeat,
                                                 to_string(tasks[t].variant), cfg.base_seed + tasks[t].repeat,
                                                 e.what()));
        }
    }

    std::vector<RunRecord> records;
    std::optional<Reference> ref;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& task = tasks[t];
        const Split& split = splits[task.repeat];
        if (t == 0 || tasks[t - 1].repeat != task.repeat) {
            ref = reference_of(space, split.holdout);
        }
        const Evaluation ev = evaluate_against(states[t], space, split.holdout, *ref);

        RunRecord rec;
        rec.variant = task.variant;
        rec.repeat = task.repeat;
        rec.seed = cfg.base_seed + task.repeat;
        rec.gd = ev.gd;
        rec.tau = ev.tau.tau;
        rec.concordant = ev.tau.concordant;
        rec.discordant = ev.tau.discordant;
        rec.measurements = states[t].measurements;
        rec.iterations = states[t].iterations;
        rec.holdout_size = split.holdout.size();
        rec.n_selected = ev.solution.selected.size();
        rec.selection_comparisons = ev.solution.selection_comparisons;
        rec.solution_ids = ev.solution.row_ids;
        rec.apply_seconds = ev.solution.apply_seconds;
        records.push_back(std::move(rec));
    }

    if (cfg.output_dir) {
        const fs::path dir = *cfg.output_dir;
        fs::create_directories(dir / "states");
        {
            std::ostringstream csv;
            write_records(csv, records);
            write_file(dir / "records.csv", csv.str());
        }
        if (cfg.repeats >= 2) {
            write_summary(dir, aggregate(records));
        }
        std::string conflicts = fmt::format("dataset: {}\n", cfg.dataset.describe());
        bool reported = false;
        for (std::size_t t = 0; t < tasks.size() && !reported; ++t) {
            if (tasks[t].repeat == 0 && (tasks[t].variant == Variant::flash || tasks[t].variant == Variant::veer)) {
                conflicts += fmt::format("repeat 0, seed {}\n\n", cfg.base_seed);
                conflicts += conflict_report(states[t], space, cfg.rule_top_k);
                reported = true;
            }
        }
        if (!reported) {
            conflicts += "no variant with per-objective surrogates was run\n";
        }
        write_file(dir / "conflicts.txt", conflicts);
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const Split& split = splits[tasks[t].repeat];
            save_snapshot({states[t], cfg.dataset.to_json(), split.pool, split.holdout},
                          dir / "states" / fmt::format("r{}_{}.json", tasks[t].repeat, to_string(tasks[t].variant)),
                          space.options());
        }
    }
    return records;
}

std::map<Variant, double> timing_ratio(std::span<const RunRecord> records) {
    std::map<Variant, std::pair<double, std::size_t>> sums;
    for (const auto& r : records) {
        auto& [total, count] = sums[r.variant];
        total += r.apply_seconds;
        ++count;
    }
    const auto flash = sums.find(Variant::flash);
    if (flash == sums.end()) {
        throw std::invalid_argument("timing_ratio needs flash records as the baseline");
    }
    const double base = flash->second.first / static_cast<double>(flash->second.second);
    std::map<Variant, double> out;
    for (const auto& [variant, sum] : sums) {
        out[variant] = variant == Variant::flash ? 1.0 : base / (sum.first / static_cast<double>(sum.second));
    }
    return out;
}

std::string conflict_report(const OptimizerState& state, const ConfigSpace& space, std::size_t top_k) {
    std::string text = fmt::format("variant: {}\n", to_string(state.variant));
    if (state.variant == Variant::multi_out || state.variant == Variant::single_weight) {
        text += "one model serves every objective, so there are no per-objective rule sets to compare\n";
        return text;
    }
    std::vector<std::vector<cart::Rule>> rules;
    for (std::size_t k = 0; k < state.surrogates.size(); ++k) {
        rules.push_back(cart::extract_rules(state.surrogates[k], top_k, space.options()));
        text += fmt::format("\nbest leaves for {}:\n", space.objectives()[k].name);
        for (const auto& rule : rules.back()) {
            text += fmt::format("  {}\n", cart::to_string(rule));
        }
    }
    if (state.rank_model) {
        text += "\nbest leaves for the rank model:\n";
        for (const auto& rule : cart::extract_rules(*state.rank_model, top_k, space.options())) {
            text += fmt::format("  {}\n", cart::to_string(rule));
        }
    }
    for (std::size_t a = 0; a < rules.size(); ++a) {
        for (std::size_t b = a + 1; b < rules.size(); ++b) {
            const auto& na = space.objectives()[a].name;
            const auto& nb = space.objectives()[b].name;
            text += fmt::format("\nconflicts {} vs {}:\n", na, nb);
            text += analysis::render_conflicts(analysis::detect_conflicts(rules[a], rules[b], {na, nb}));
        }
    }
    return text;
}

Summary aggregate(std::span<const RunRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("aggregate: no records");
    }
    std::map<std::string, std::map<std::string, std::vector<double>>> samples;
    for (const auto& r : records) {
        const std::string v(to_string(r.variant));
        samples["gd"][v].push_back(r.gd);
        samples["apply_seconds"][v].push_back(r.apply_seconds);
        samples["measurements"][v].push_back(static_cast<double>(r.measurements));
        if (r.tau) {
            samples["tau"][v].push_back(*r.tau);
        }
    }

    Summary summary;
    for (const char* metric : {"gd", "apply_seconds", "measurements"}) {
        for (const auto& [variant, values] : samples[metric]) {
            if (values.size() < 2) {
                throw std::invalid_argument(
                    fmt::format("aggregate: {} has {} sample(s) of {}, need at least 2", variant, values.size(), metric));
            }
        }
        summary.tables.push_back({metric, analysis::scott_knott(samples[metric])});
    }
    for (const auto& [metric, by_variant] : samples) {
        for (const auto& [variant, values] : by_variant) {
            summary.medians[metric][variant] = analysis::median(values);
        }
    }

    const auto& gd = summary.tables.front().groups;
    std::size_t worst = 0;
    for (const auto& g : gd) {
        worst = std::max(worst, g.rank);
    }
    if (worst > 0) {
        for (const auto& g : gd) {
            if (g.rank == worst) {
                summary.flagged_worst.push_back(g.treatment);
            }
        }
    }
    return summary;
}

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> columns{
        "variant",    "repeat",       "seed",       "gd",         "tau",
        "concordant", "discordant",   "measurements", "iterations", "holdout_size",
        "n_selected", "selection_comparisons", "solution_ids", "apply_seconds"};
    return columns;
}

std::size_t deterministic_columns() { return record_columns().size() - 1; }

void write_records(std::ostream& out, std::span<const RunRecord> records) {
    out << fmt::format("{}\n", fmt::join(record_columns(), ","));
    for (const auto& r : records) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.variant), r.repeat, r.seed, r.gd,
                           r.tau ? fmt::format("{}", *r.tau) : std::string(), r.concordant, r.discordant,
                           r.measurements, r.iterations, r.holdout_size, r.n_selected, r.selection_comparisons,
                           fmt::join(r.solution_ids, ";"), r.apply_seconds);
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        cells.emplace_back();
    }
    return cells;
}

template <class T>
T parse_number(const std::string& text, const char* column, std::size_t line) {
    try {
        std::size_t used = 0;
        T value{};
        if constexpr (std::is_floating_point_v<T>) {
            value = std::stod(text, &used);
        } else {
            value = static_cast<T>(std::stoull(text, &used));
        }
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("records line {}: bad {} value '{}'", line, column, text));
    }
}

} // namespace

std::vector<RunRecord> read_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("records: empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (split_line(line, ',') != record_columns()) {
        throw std::runtime_error("records: unexpected header");
    }
    std::vector<RunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto c = split_line(line, ',');
        if (c.size() != record_columns().size()) {
            throw std::runtime_error(fmt::format("records line {}: expected {} cells, got {}", line_no,
                                                 record_columns().size(), c.size()));
        }
        RunRecord r;
        r.variant = parse_variant(c[0]);
        r.repeat = parse_number<std::size_t>(c[1], "repeat", line_no);
        r.seed = parse_number<std::uint64_t>(c[2], "seed", line_no);
        r.gd = parse_number<double>(c[3], "gd", line_no);
        if (!c[4].empty()) {
            r.tau = parse_number<double>(c[4], "tau", line_no);
        }
        r.concordant = parse_number<std::uint64_t>(c[5], "concordant", line_no);
        r.discordant = parse_number<std::uint64_t>(c[6], "discordant", line_no);
        r.measurements = parse_number<std::uint64_t>(c[7], "measurements", line_no);
        r.iterations = parse_number<std::size_t>(c[8], "iterations", line_no);
        r.holdout_size = parse_number<std::size_t>(c[9], "holdout_size", line_no);
        r.n_selected = parse_number<std::size_t>(c[10], "n_selected", line_no);
        r.selection_comparisons = parse_number<std::uint64_t>(c[11], "selection_comparisons", line_no);
        for (const auto& id : split_line(c[12], ';')) {
            r.solution_ids.push_back(parse_number<std::size_t>(id, "solution_ids", line_no));
        }
        r.apply_seconds = parse_number<double>(c[13], "apply_seconds", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<RunRecord> read_records(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open records '{}'", path.string()));
    }
    return read_records(in);
}

void write_medians(std::ostream& out, const Summary& summary) {
    out << "metric,variant,median\n";
    for (const auto& [metric, by_variant] : summary.medians) {
        for (const auto& [variant, value] : by_variant) {
            out << fmt::format("{},{},{}\n", metric, variant, value);
        }
    }
}

void write_sk_ranks(std::ostream& out, const Summary& summary) {
    out << "metric,variant,rank,median,n_samples,flagged_worst\n";
    for (const auto& table : summary.tables) {
        for (const auto& g : table.groups) {
            const bool flagged = table.metric == "gd" && std::find(summary.flagged_worst.begin(),
                                                                   summary.flagged_worst.end(),
                                                                   g.treatment) != summary.flagged_worst.end();
            out << fmt::format("{},{},{},{},{},{}\n", table.metric, g.treatment, g.rank, g.median, g.samples.size(),
                               flagged ? 1 : 0);
        }
    }
}

void write_summary(const fs::path& dir, const Summary& summary) {
    fs::create_directories(dir);
    std::ostringstream medians, ranks;
    write_medians(medians, summary);
    write_sk_ranks(ranks, summary);
    write_file(dir / "medians.csv", medians.str());
    write_file(dir / "sk_ranks.csv", ranks.str());
}

} // namespace veer::experiment
