#include "veer/dataspace.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "veer/random.hpp"

namespace veer {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<double> parse_cell(const std::string& cell) {
    const std::string l = lower(cell);
    if (l == "true") {
        return 1.0;
    }
    if (l == "false") {
        return 0.0;
    }
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        return std::nullopt;
    }
    return value;
}

} // namespace

bool OptionSchema::contains(double value) const {
    return std::binary_search(domain.begin(), domain.end(), value);
}

ObjectiveManifest ObjectiveManifest::parse(std::istream& in) {
    ObjectiveManifest manifest;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream tokens(line);
        std::string keyword, name, direction, extra;
        if (!(tokens >> keyword)) {
            continue;
        }
        if (keyword != "objective" || !(tokens >> name >> direction) || (tokens >> extra)) {
            throw std::runtime_error(fmt::format("manifest line {}: expected 'objective <name> <min|max>'", lineno));
        }
        const std::string dir = lower(direction);
        ObjectiveSchema schema{name, Direction::minimize};
        if (dir == "max" || dir == "maximize") {
            schema.direction = Direction::maximize;
        } else if (dir != "min" && dir != "minimize") {
            throw std::runtime_error(fmt::format("manifest line {}: unknown direction '{}'", lineno, direction));
        }
        for (const auto& existing : manifest.objectives) {
            if (existing.name == name) {
                throw std::runtime_error(fmt::format("manifest line {}: duplicate objective '{}'", lineno, name));
            }
        }
        manifest.objectives.push_back(std::move(schema));
    }
    return manifest;
}

ObjectiveManifest ObjectiveManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open manifest '{}'", path.string()));
    }
    return parse(in);
}

void ObjectiveManifest::write(std::ostream& out) const {
    for (const auto& objective : objectives) {
        fmt::print(out, "objective {} {}\n", objective.name,
                   objective.direction == Direction::maximize ? "max" : "min");
    }
}

MinMax MinMax::over(const Matrix& values) {
    std::vector<std::size_t> all(values.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return over(values, all);
}

MinMax MinMax::over(const Matrix& values, std::span<const std::size_t> rows) {
    if (rows.empty()) {
        throw std::invalid_argument("MinMax: empty reference set");
    }
    MinMax bounds;
    const auto first = values.row(rows.front());
    bounds.lo.assign(first.begin(), first.end());
    bounds.hi = bounds.lo;
    for (std::size_t r : rows) {
        const auto v = values.row(r);
        for (std::size_t k = 0; k < v.size(); ++k) {
            bounds.lo[k] = std::min(bounds.lo[k], v[k]);
            bounds.hi[k] = std::max(bounds.hi[k], v[k]);
        }
    }
    return bounds;
}

double MinMax::apply(std::size_t objective, double value) const {
    const double range = hi[objective] - lo[objective];
    if (!(range > 0.0)) {
        return 0.0;
    }
    return std::clamp((value - lo[objective]) / range, 0.0, 1.0);
}

void MinMax::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = apply(k, in[k]);
    }
}

Matrix MinMax::apply(const Matrix& values) const {
    Matrix out(values.rows(), values.cols());
    for (std::size_t r = 0; r < values.rows(); ++r) {
        apply(values.row(r), out.row(r));
    }
    return out;
}

ConfigSpace::ConfigSpace(std::vector<OptionSchema> options, std::vector<ObjectiveSchema> objectives,
                         std::vector<Row> rows)
    : options_(std::move(options)), objectives_(std::move(objectives)) {
    if (objectives_.size() < 2) {
        throw std::invalid_argument("ConfigSpace: at least two objectives are required");
    }
    for (std::size_t i = 0; i < options_.size(); ++i) {
        const auto& option = options_[i];
        if (option.domain.empty() || std::adjacent_find(option.domain.begin(), option.domain.end(),
                                                        std::greater_equal<>()) != option.domain.end()) {
            throw std::invalid_argument(fmt::format("option '{}': domain must be strictly increasing and non-empty", option.name));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (options_[j].name == option.name) {
                throw std::invalid_argument(fmt::format("duplicate option name '{}'", option.name));
            }
        }
    }
    for (std::size_t i = 0; i < objectives_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (objectives_[j].name == objectives_[i].name) {
                throw std::invalid_argument(fmt::format("duplicate objective name '{}'", objectives_[i].name));
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.config.id < b.config.id; });
    configs_ = Matrix(rows.size(), options_.size());
    perf_ = Matrix(rows.size(), objectives_.size());
    bool any_normalized = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.config.id != i) {
            throw std::invalid_argument("ConfigSpace: row ids must be unique and dense in [0, n)");
        }
        if (row.config.values.size() != options_.size() || row.perf.values.size() != objectives_.size()) {
            throw std::invalid_argument(fmt::format("ConfigSpace: row {} does not match the schema arity", i));
        }
        for (std::size_t j = 0; j < options_.size(); ++j) {
            if (!options_[j].contains(row.config.values[j])) {
                throw std::invalid_argument(fmt::format("ConfigSpace: row {} value {} outside the domain of '{}'",
                                                        i, row.config.values[j], options_[j].name));
            }
            configs_(i, j) = row.config.values[j];
        }
        std::copy(row.perf.values.begin(), row.perf.values.end(), perf_.row(i).begin());
        any_normalized = any_normalized || row.perf.normalized.has_value();
    }
    if (any_normalized) {
        normalized_ = Matrix(rows.size(), objectives_.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& norm = rows[i].perf.normalized;
            if (!norm || norm->size() != objectives_.size()
                || std::any_of(norm->begin(), norm->end(), [](double v) { return !(v >= 0.0 && v <= 1.0); })) {
                throw std::invalid_argument("ConfigSpace: normalized values must be present on all rows and lie in [0,1]");
            }
            std::copy(norm->begin(), norm->end(), normalized_.row(i).begin());
        }
    }
}

std::span<const double> ConfigSpace::perf(std::size_t id) const {
    if (id >= size()) {
        throw std::out_of_range(fmt::format("row id {} out of range", id));
    }
    lookups_.add();
    return perf_.row(id);
}

Matrix ConfigSpace::perf_rows(std::span<const std::size_t> ids) const {
    Matrix out = perf_.gather(ids);
    lookups_.add(ids.size());
    return out;
}

double ConfigSpace::raw_value(std::size_t id, std::size_t objective) const {
    const double v = perf(id)[objective];
    return objectives_[objective].direction == Direction::maximize ? -v : v;
}

std::span<const double> ConfigSpace::normalized(std::size_t id) const {
    if (!has_normalized()) {
        throw std::logic_error("ConfigSpace: objectives have not been normalized");
    }
    lookups_.add();
    return normalized_.row(id);
}

Row ConfigSpace::row(std::size_t id) const {
    Row row;
    row.config.id = id;
    const auto c = config(id);
    row.config.values.assign(c.begin(), c.end());
    const auto p = perf(id);
    row.perf.values.assign(p.begin(), p.end());
    if (has_normalized()) {
        const auto n = normalized_.row(id);
        row.perf.normalized = std::vector<double>(n.begin(), n.end());
    }
    return row;
}

ConfigSpace load_dataset(std::istream& csv, const ObjectiveManifest& manifest) {
    if (manifest.objectives.size() < 2) {
        throw std::runtime_error("dataset needs at least two objective columns");
    }
    std::string line;
    if (!std::getline(csv, line)) {
        throw std::runtime_error("dataset is empty: missing header row");
    }
    const auto header = split_csv_line(line);

    std::vector<std::size_t> objective_columns;
    for (const auto& objective : manifest.objectives) {
        const auto it = std::find(header.begin(), header.end(), objective.name);
        if (it == header.end()) {
            throw std::runtime_error(fmt::format("objective column '{}' is not in the header", objective.name));
        }
        objective_columns.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<std::size_t> option_columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (std::find(objective_columns.begin(), objective_columns.end(), c) == objective_columns.end()) {
            option_columns.push_back(c);
        }
    }

    std::vector<std::vector<double>> cells;
    std::size_t lineno = 1;
    while (std::getline(csv, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error(fmt::format("line {}: expected {} cells, found {}", lineno, header.size(), fields.size()));
        }
        std::vector<double> values(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto parsed = parse_cell(fields[c]);
            if (!parsed) {
                throw std::runtime_error(fmt::format("line {}: non-numeric cell '{}' in column '{}'", lineno, fields[c], header[c]));
            }
            values[c] = *parsed;
        }
        cells.push_back(std::move(values));
    }

    std::vector<OptionSchema> options;
    for (std::size_t c : option_columns) {
        std::vector<double> domain;
        domain.reserve(cells.size());
        for (const auto& row : cells) {
            domain.push_back(row[c]);
        }
        std::sort(domain.begin(), domain.end());
        domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
        const bool binary = domain.size() == 2 && domain[0] == 0.0 && domain[1] == 1.0;
        options.push_back({header[c], binary ? OptionKind::binary : OptionKind::numeric, std::move(domain)});
    }

    std::vector<Row> rows;
    rows.reserve(cells.size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        Row row;
        row.config.id = r;
        for (std::size_t c : option_columns) {
            row.config.values.push_back(cells[r][c]);
        }
        for (std::size_t k = 0; k < objective_columns.size(); ++k) {
            const double v = cells[r][objective_columns[k]];
            row.perf.values.push_back(manifest.objectives[k].direction == Direction::maximize ? -v : v);
        }
        rows.push_back(std::move(row));
    }
    return ConfigSpace(std::move(options), manifest.objectives, std::move(rows));
}

ConfigSpace load_dataset(const std::filesystem::path& csv, const ObjectiveManifest& manifest) {
    std::ifstream in(csv);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open dataset '{}'", csv.string()));
    }
    return load_dataset(in, manifest);
}

void write_dataset(const ConfigSpace& space, std::ostream& csv) {
    std::vector<std::string> header;
    for (const auto& option : space.options()) {
        header.push_back(option.name);
    }
    for (const auto& objective : space.objectives()) {
        header.push_back(objective.name);
    }
    fmt::print(csv, "{}\n", fmt::join(header, ","));
    std::vector<double> line;
    for (std::size_t id = 0; id < space.size(); ++id) {
        line.assign(space.config(id).begin(), space.config(id).end());
        for (std::size_t k = 0; k < space.n_objectives(); ++k) {
            line.push_back(space.raw_value(id, k));
        }
        fmt::print(csv, "{}\n", fmt::join(line, ","));
    }
}

void write_dataset(const ConfigSpace& space, const std::filesystem::path& csv,
                   const std::filesystem::path& manifest) {
    std::ofstream data(csv);
    if (!data) {
        throw std::runtime_error(fmt::format("cannot write '{}'", csv.string()));
    }
    write_dataset(space, data);
    std::ofstream man(manifest);
    if (!man) {
        throw std::runtime_error(fmt::format("cannot write '{}'", manifest.string()));
    }
    ObjectiveManifest{space.objectives()}.write(man);
}

ConfigSpace minmax_normalize(const ConfigSpace& space, std::span<const std::size_t> reference) {
    if (reference.empty()) {
        throw std::invalid_argument("minmax_normalize: empty reference set");
    }
    for (std::size_t id : reference) {
        if (id >= space.size()) {
            throw std::out_of_range(fmt::format("minmax_normalize: reference id {} out of range", id));
        }
    }
    ConfigSpace out = space;
    const MinMax bounds = MinMax::over(space.perf_, reference);
    out.normalized_ = bounds.apply(space.perf_);
    space.lookups_.add(space.size());
    return out;
}

Split split_holdout(const ConfigSpace& space, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("split_holdout: fraction must lie in (0, 1)");
    }
    const std::size_t n = space.size();
    const auto n_holdout = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
    if (n_holdout == 0 || n_holdout >= n) {
        throw std::invalid_argument(fmt::format("split_holdout: fraction {} leaves an empty side for {} rows", fraction, n));
    }
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    Rng rng(seed, 0x5017);
    rng.shuffle(ids);

    Split split;
    split.holdout.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    split.pool.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_holdout), ids.end());
    std::sort(split.holdout.begin(), split.holdout.end());
    std::sort(split.pool.begin(), split.pool.end());
    return split;
}

} // namespace veer
