#pragma once

#include "veer/optimize.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace veer {

/// A trained optimizer plus what is needed to rebuild its evaluation context.
struct StateSnapshot {
    OptimizerState state;
    /// How to rebuild the ConfigSpace; opaque here, interpreted by the experiment layer.
    nlohmann::json dataset;
    std::vector<std::size_t> pool;
    std::vector<std::size_t> holdout;
};

nlohmann::json to_json(const OptimizerState& state, std::span<const OptionSchema> options = {});
OptimizerState state_from_json(const nlohmann::json& json);

void save_snapshot(const StateSnapshot& snapshot, const std::filesystem::path& path,
                   std::span<const OptionSchema> options = {});
StateSnapshot load_snapshot(const std::filesystem::path& path);

} // namespace veer
