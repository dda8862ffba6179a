#include "veer/snapshot.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace veer {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& json) {
    Matrix m;
    for (const auto& row : json) {
        m.append_row(row.get<std::vector<double>>());
    }
    return m;
}

nlohmann::json tree_params_to_json(const cart::TreeParams& p) {
    return {{"max_depth", p.max_depth}, {"min_split", p.min_split}, {"min_leaf", p.min_leaf}};
}

cart::TreeParams tree_params_from_json(const nlohmann::json& json) {
    cart::TreeParams p;
    p.max_depth = json.at("max_depth").get<int>();
    p.min_split = json.at("min_split").get<std::size_t>();
    p.min_leaf = json.at("min_leaf").get<std::size_t>();
    return p;
}

} // namespace

nlohmann::json to_json(const OptimizerState& state, std::span<const OptionSchema> options) {
    nlohmann::json params = {
        {"initial_samples", state.params.initial_samples},
        {"budget", state.params.budget},
        {"tree", tree_params_to_json(state.params.tree)},
        {"weights", state.params.weights},
        {"seed", state.params.seed},
    };
    params["n_unlabeled"] = state.params.n_unlabeled ? nlohmann::json(*state.params.n_unlabeled) : nlohmann::json();

    nlohmann::json surrogates = nlohmann::json::array();
    for (const auto& tree : state.surrogates) {
        surrogates.push_back(cart::to_json(tree, options));
    }
    return {
        {"version", kFormatVersion},
        {"variant", std::string(to_string(state.variant))},
        {"params", params},
        {"evaluated", state.evaluated},
        {"measured", matrix_to_json(state.measured)},
        {"archive", state.archive},
        {"surrogates", surrogates},
        {"rank_model", state.rank_model ? cart::to_json(*state.rank_model, options) : nlohmann::json()},
        {"measurements", state.measurements},
        {"iterations", state.iterations},
    };
}

OptimizerState state_from_json(const nlohmann::json& json) {
    if (json.value("version", 0) != kFormatVersion) {
        throw std::runtime_error("unsupported optimizer state format version");
    }
    OptimizerState state;
    state.variant = parse_variant(json.at("variant").get<std::string>());
    const auto& params = json.at("params");
    state.params.initial_samples = params.at("initial_samples").get<std::size_t>();
    state.params.budget = params.at("budget").get<std::size_t>();
    state.params.tree = tree_params_from_json(params.at("tree"));
    state.params.weights = params.at("weights").get<std::vector<double>>();
    state.params.seed = params.at("seed").get<std::uint64_t>();
    if (!params.at("n_unlabeled").is_null()) {
        state.params.n_unlabeled = params.at("n_unlabeled").get<std::size_t>();
    }
    state.evaluated = json.at("evaluated").get<std::vector<std::size_t>>();
    state.measured = matrix_from_json(json.at("measured"));
    state.archive = json.at("archive").get<std::vector<std::size_t>>();
    for (const auto& tree : json.at("surrogates")) {
        state.surrogates.push_back(cart::tree_from_json(tree));
    }
    if (!json.at("rank_model").is_null()) {
        state.rank_model = cart::tree_from_json(json.at("rank_model"));
    }
    state.measurements = json.at("measurements").get<std::uint64_t>();
    state.iterations = json.at("iterations").get<std::size_t>();
    if (state.measured.rows() != state.evaluated.size()) {
        throw std::runtime_error("optimizer state: measured rows do not match evaluated ids");
    }
    return state;
}

void save_snapshot(const StateSnapshot& snapshot, const std::filesystem::path& path,
                   std::span<const OptionSchema> options) {
    nlohmann::json json = {
        {"state", to_json(snapshot.state, options)},
        {"dataset", snapshot.dataset},
        {"pool", snapshot.pool},
        {"holdout", snapshot.holdout},
    };
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write snapshot '{}'", path.string()));
    }
    out << json.dump(1) << '\n';
}

StateSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open snapshot '{}'", path.string()));
    }
    nlohmann::json json;
    try {
        in >> json;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(fmt::format("snapshot '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    StateSnapshot snapshot;
    snapshot.state = state_from_json(json.at("state"));
    snapshot.dataset = json.at("dataset");
    snapshot.pool = json.at("pool").get<std::vector<std::size_t>>();
    snapshot.holdout = json.at("holdout").get<std::vector<std::size_t>>();
    return snapshot;
}

} // namespace veer
