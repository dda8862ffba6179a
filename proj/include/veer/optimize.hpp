#pragma once

#include "veer/cart.hpp"
#include "veer/dataspace.hpp"
#include "veer/execution.hpp"
#include "veer/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace veer {

/// flash: one CART per objective, predicted front via non-dominated sorting.
/// single_weight: one CART on the equal-weight sum of normalized objectives.
/// multi_out: one multi-output CART, predicted front via non-dominated sorting.
/// veer: flash during search, then a single CART trained on ZIGZAG ranks.
enum class Variant { flash, single_weight, multi_out, veer };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);
inline constexpr Variant kAllVariants[] = {Variant::flash, Variant::single_weight, Variant::multi_out, Variant::veer};

struct OptimizerParams {
    std::size_t initial_samples = 20;
    /// Lives: lost on every acquisition that leaves the archive unchanged.
    std::size_t budget = 10;
    cart::TreeParams tree;
    /// Per-objective preference weights for ZIGZAG and the weighted sum; empty = all ones.
    std::vector<double> weights;
    /// Unmeasured pool rows fed to the VEER rank model; default min(1000, remaining).
    std::optional<std::size_t> n_unlabeled;
    std::uint64_t seed = 0;
};

struct OptimizerState {
    Variant variant = Variant::flash;
    OptimizerParams params;
    /// C_train in acquisition order.
    std::vector<std::size_t> evaluated;
    /// Measured objectives, row i belongs to evaluated[i].
    Matrix measured;
    /// Non-dominated evaluated rows (binary dominance), sorted.
    std::vector<std::size_t> archive;
    std::vector<cart::RegressionTree> surrogates;
    std::optional<cart::RegressionTree> rank_model;
    /// True-performance lookups made on behalf of this run.
    std::uint64_t measurements = 0;
    std::size_t iterations = 0;
};

/// Sequential model-based optimisation over the `pool` rows.
OptimizerState run_smbo(const ConfigSpace& space, std::span<const std::size_t> pool, Variant variant,
                        const OptimizerParams& params);

/// Next pool row to measure. Unevaluated rows only; ties go to the lowest id.
std::size_t acquire(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> pool);

/// Adds the ZIGZAG rank model. Objectives of the unlabeled rows come from the
/// surrogates' predictions, so this never reads the measurement table.
OptimizerState train_veer(OptimizerState state, const ConfigSpace& space, std::span<const std::size_t> pool,
                          std::optional<std::size_t> n_unlabeled = std::nullopt);

/// Replaces the surrogates with unrestricted trees fitted on every row's true
/// values, so predictions reproduce the truth. Diagnostic only: the reads are
/// not charged to `measurements`.
OptimizerState with_oracle_surrogates(OptimizerState state, const ConfigSpace& space);

struct Solution {
    /// Rows the variant picked from predictions alone.
    std::vector<std::size_t> selected;
    /// `selected` reduced to its non-dominated subset under true values.
    std::vector<std::size_t> row_ids;
    /// True objectives of row_ids, minimize form.
    Matrix perf;
    /// Dominance tests spent on selection over the holdout (not the reduction).
    std::uint64_t selection_comparisons = 0;
    /// Wall-clock seconds of the selection step.
    double apply_seconds = 0.0;
};

/// Applies a trained optimizer to the holdout rows.
Solution final_solutions(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> holdout,
                         Execution exec = Execution::serial);

/// Per-output predictions of the variant's selection model(s) over `ids`:
/// one column per objective for flash/multi_out, one column otherwise.
Matrix predict_outputs(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> ids,
                       Execution exec = Execution::parallel);

} // namespace veer
