#pragma once

#include "veer/matrix.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace veer {

enum class OptionKind { binary, numeric };

struct OptionSchema {
    std::string name;
    OptionKind kind = OptionKind::numeric;
    /// Sorted distinct values; {0, 1} for binary options.
    std::vector<double> domain;

    bool contains(double value) const;
};

enum class Direction { minimize, maximize };

struct ObjectiveSchema {
    std::string name;
    Direction direction = Direction::minimize;
};

/// Which CSV columns are objectives, and which way each one points.
struct ObjectiveManifest {
    std::vector<ObjectiveSchema> objectives;

    /// Parses `objective <name> <min|max>` lines; '#' starts a comment.
    static ObjectiveManifest parse(std::istream& in);
    static ObjectiveManifest load(const std::filesystem::path& path);
    void write(std::ostream& out) const;
};

struct Configuration {
    std::size_t id = 0;
    std::vector<double> values;
};

struct PerfVector {
    std::vector<double> values;
    std::optional<std::vector<double>> normalized;
};

struct Row {
    Configuration config;
    PerfVector perf;
};

/// Per-objective min/max taken over a reference set of rows.
struct MinMax {
    std::vector<double> lo;
    std::vector<double> hi;

    static MinMax over(const Matrix& values);
    static MinMax over(const Matrix& values, std::span<const std::size_t> rows);

    /// (v - lo) / (hi - lo) clamped to [0, 1]; 0 when hi == lo.
    double apply(std::size_t objective, double value) const;
    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix apply(const Matrix& values) const;
};

/// Counts reads of true objective values. Copies start from the source count.
class LookupCounter {
public:
    LookupCounter() = default;
    LookupCounter(const LookupCounter& other) : count_(other.get()) {}
    LookupCounter& operator=(const LookupCounter& other) {
        count_.store(other.get(), std::memory_order_relaxed);
        return *this;
    }
    void add(std::uint64_t n = 1) const { count_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t get() const { return count_.load(std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> count_{0};
};

/// The universe of valid configurations with their measured objectives.
///
/// Objective values are held in minimize form: maximize objectives are negated
/// on the way in, so every dominance and loss computation assumes lower is
/// better. Rows are stored in id order and ids are dense in [0, size()).
///
/// Every read of a true objective value (perf, normalized) bumps an
/// instrumented counter, which is how measurement cost is audited.
class ConfigSpace {
public:
    ConfigSpace() = default;
    /// Rows may arrive in any order; perf values are taken as minimize form.
    ConfigSpace(std::vector<OptionSchema> options, std::vector<ObjectiveSchema> objectives,
                std::vector<Row> rows);

    std::size_t size() const { return configs_.rows(); }
    std::size_t n_options() const { return options_.size(); }
    std::size_t n_objectives() const { return objectives_.size(); }

    const std::vector<OptionSchema>& options() const { return options_; }
    const std::vector<ObjectiveSchema>& objectives() const { return objectives_; }

    std::span<const double> config(std::size_t id) const { return configs_.row(id); }
    const Matrix& configs() const { return configs_; }

    /// True objective values of one row, minimize form. Counted.
    std::span<const double> perf(std::size_t id) const;
    /// True objective values of several rows, minimize form. Counted per row.
    Matrix perf_rows(std::span<const std::size_t> ids) const;
    /// Objective value with its original sign, as it appears in the dataset.
    double raw_value(std::size_t id, std::size_t objective) const;

    bool has_normalized() const { return !normalized_.empty(); }
    std::span<const double> normalized(std::size_t id) const;

    std::uint64_t perf_lookups() const { return lookups_.get(); }

    Row row(std::size_t id) const;

private:
    friend ConfigSpace minmax_normalize(const ConfigSpace&, std::span<const std::size_t>);

    std::vector<OptionSchema> options_;
    std::vector<ObjectiveSchema> objectives_;
    Matrix configs_;
    Matrix perf_;
    Matrix normalized_;
    LookupCounter lookups_;
};

/// Reads a header-row CSV; columns named in the manifest are objectives, the
/// rest are options. Two-valued 0/1 or true/false columns become binary.
ConfigSpace load_dataset(const std::filesystem::path& csv, const ObjectiveManifest& manifest);
ConfigSpace load_dataset(std::istream& csv, const ObjectiveManifest& manifest);

/// Writes options then objectives (original signs) as CSV, plus the manifest.
void write_dataset(const ConfigSpace& space, std::ostream& csv);
void write_dataset(const ConfigSpace& space, const std::filesystem::path& csv,
                   const std::filesystem::path& manifest);

/// Copy of `space` whose rows carry min-max normalized objectives, with the
/// bounds taken from the `reference` rows only.
ConfigSpace minmax_normalize(const ConfigSpace& space, std::span<const std::size_t> reference);

struct Split {
    std::vector<std::size_t> pool;
    std::vector<std::size_t> holdout;
};

/// Seeded random partition of the row ids; |holdout| = round-half-up(fraction * n).
Split split_holdout(const ConfigSpace& space, double fraction, std::uint64_t seed);

} // namespace veer
