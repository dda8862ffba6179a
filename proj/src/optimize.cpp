#include "veer/optimize.hpp"

#include "veer/pareto.hpp"
#include "veer/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace veer {

std::string_view to_string(Variant variant) {
    switch (variant) {
    case Variant::flash:
        return "flash";
    case Variant::single_weight:
        return "single_weight";
    case Variant::multi_out:
        return "multi_out";
    case Variant::veer:
        return "veer";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    for (Variant v : kAllVariants) {
        if (to_string(v) == name) {
            return v;
        }
    }
    if (name == "singleweight" || name == "single-weight") {
        return Variant::single_weight;
    }
    if (name == "multiout" || name == "multi-out") {
        return Variant::multi_out;
    }
    throw std::invalid_argument(fmt::format("unknown variant '{}'", name));
}

namespace {

// Random streams, one per consumer, so adding draws in one place never shifts another.
constexpr std::uint64_t kInitialSampleStream = 1;
constexpr std::uint64_t kUnlabeledStream = 2;

std::vector<double> weights_or_ones(const OptimizerParams& params, std::size_t n_objectives) {
    if (params.weights.empty()) {
        return std::vector<double>(n_objectives, 1.0);
    }
    if (params.weights.size() != n_objectives) {
        throw std::invalid_argument("optimizer weights must have one entry per objective");
    }
    for (double w : params.weights) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("optimizer weights must be positive");
        }
    }
    return params.weights;
}

/// Weighted sum of objectives normalized over the measured rows.
Matrix weighted_sum(const Matrix& measured, std::span<const double> weights) {
    const MinMax bounds = MinMax::over(measured);
    Matrix out(measured.rows(), 1);
    for (std::size_t r = 0; r < measured.rows(); ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < measured.cols(); ++k) {
            s += weights[k] * bounds.apply(k, measured(r, k));
        }
        out(r, 0) = s;
    }
    return out;
}

void refit(OptimizerState& state, const ConfigSpace& space) {
    const Matrix x = space.configs().gather(state.evaluated);
    const auto& tree = state.params.tree;
    state.surrogates.clear();
    switch (state.variant) {
    case Variant::flash:
    case Variant::veer:
        for (std::size_t k = 0; k < state.measured.cols(); ++k) {
            Matrix y(state.measured.rows(), 1);
            for (std::size_t r = 0; r < y.rows(); ++r) {
                y(r, 0) = state.measured(r, k);
            }
            state.surrogates.push_back(cart::fit(x, y, tree));
        }
        break;
    case Variant::multi_out:
        state.surrogates.push_back(cart::fit(x, state.measured, tree));
        break;
    case Variant::single_weight:
        state.surrogates.push_back(
            cart::fit(x, weighted_sum(state.measured, weights_or_ones(state.params, state.measured.cols())), tree));
        break;
    }
}

std::vector<std::size_t> archive_of(const OptimizerState& state) {
    return pareto::first_front(state.evaluated, state.measured, pareto::DominanceKind::binary, nullptr,
                               Execution::serial);
}

/// Objective predictions from the per-objective (or multi-output) surrogates.
Matrix predict_objectives(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> ids,
                          Execution exec) {
    if (state.variant == Variant::single_weight) {
        throw std::logic_error("single_weight surrogates predict a scalar, not objectives");
    }
    if (state.variant == Variant::multi_out) {
        return cart::predict_batch(state.surrogates.at(0), space.configs(), ids, exec);
    }
    if (state.surrogates.size() != space.n_objectives()) {
        throw std::logic_error("optimizer state has no fitted per-objective surrogates");
    }
    Matrix out(ids.size(), state.surrogates.size());
    for (std::size_t k = 0; k < state.surrogates.size(); ++k) {
        const Matrix col = cart::predict_batch(state.surrogates[k], space.configs(), ids, exec);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            out(i, k) = col(i, 0);
        }
    }
    return out;
}

/// Ids in `ids` attaining the minimum of a one-column score matrix.
std::vector<std::size_t> argmin_rows(std::span<const std::size_t> ids, const Matrix& scores) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        best = std::min(best, scores(i, 0));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (scores(i, 0) == best) {
            out.push_back(ids[i]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> ids, std::size_t limit, const char* what) {
    std::vector<std::size_t> out(ids.begin(), ids.end());
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw std::invalid_argument(fmt::format("{} contains duplicate row ids", what));
    }
    if (!out.empty() && out.back() >= limit) {
        throw std::out_of_range(fmt::format("{} contains row id {} beyond the space", what, out.back()));
    }
    return out;
}

std::vector<std::size_t> unevaluated(const OptimizerState& state, const ConfigSpace& space,
                                     std::span<const std::size_t> pool) {
    std::vector<char> seen(space.size(), 0);
    for (std::size_t id : state.evaluated) {
        seen[id] = 1;
    }
    std::vector<std::size_t> out;
    for (std::size_t id : pool) {
        if (id >= space.size()) {
            throw std::out_of_range(fmt::format("pool row id {} beyond the space", id));
        }
        if (!seen[id]) {
            out.push_back(id);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void measure(OptimizerState& state, const ConfigSpace& space, std::size_t id) {
    state.measured.append_row(space.perf(id));
    state.evaluated.push_back(id);
    ++state.measurements;
}

} // namespace

std::size_t acquire(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> pool) {
    const std::vector<std::size_t> candidates = unevaluated(state, space, pool);
    if (candidates.empty()) {
        throw std::invalid_argument("acquire: no unevaluated rows left in the pool");
    }
    if (state.surrogates.empty()) {
        throw std::logic_error("acquire: surrogates are not fitted");
    }

    Matrix scores;
    if (state.variant == Variant::veer && state.rank_model) {
        scores = cart::predict_batch(*state.rank_model, space.configs(), candidates);
    } else if (state.variant == Variant::single_weight) {
        scores = cart::predict_batch(state.surrogates.front(), space.configs(), candidates);
    } else {
        // Predictions are leaf means of measured values, so the measured bounds contain them.
        const Matrix predicted = predict_objectives(state, space, candidates, Execution::parallel);
        const Matrix normalized = MinMax::over(state.measured).apply(predicted);
        const std::vector<double> weights = weights_or_ones(state.params, space.n_objectives());
        scores = Matrix(candidates.size(), 1);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            scores(i, 0) = pareto::zigzag_key(normalized.row(i), weights);
        }
    }
    return argmin_rows(candidates, scores).front();
}

OptimizerState run_smbo(const ConfigSpace& space, std::span<const std::size_t> pool, Variant variant,
                        const OptimizerParams& params) {
    const std::vector<std::size_t> sorted_pool = sorted_unique(pool, space.size(), "pool");
    if (params.initial_samples == 0) {
        throw std::invalid_argument("run_smbo: initial_samples must be positive");
    }
    if (sorted_pool.size() < params.initial_samples) {
        throw std::invalid_argument(fmt::format("run_smbo: pool of {} rows is smaller than initial_samples={}",
                                                sorted_pool.size(), params.initial_samples));
    }
    if (params.budget < 1) {
        throw std::invalid_argument("run_smbo: budget must be at least 1");
    }
    weights_or_ones(params, space.n_objectives());

    OptimizerState state;
    state.variant = variant;
    state.params = params;

    Rng rng(params.seed, kInitialSampleStream);
    for (std::size_t id : rng.sample(sorted_pool, params.initial_samples)) {
        measure(state, space, id);
    }
    refit(state, space);
    state.archive = archive_of(state);

    std::size_t lives = params.budget;
    while (lives > 0 && state.evaluated.size() < sorted_pool.size()) {
        const std::size_t next = acquire(state, space, sorted_pool);
        measure(state, space, next);
        refit(state, space);
        std::vector<std::size_t> archive = archive_of(state);
        const bool updated = archive != state.archive;
        state.archive = std::move(archive);
        ++state.iterations;
        if (!updated) {
            --lives;
        }
    }
    return state;
}

OptimizerState train_veer(OptimizerState state, const ConfigSpace& space, std::span<const std::size_t> pool,
                          std::optional<std::size_t> n_unlabeled) {
    if (state.variant != Variant::veer) {
        throw std::invalid_argument("train_veer: state is not a veer optimizer");
    }
    if (state.surrogates.size() != space.n_objectives() || state.evaluated.empty()) {
        throw std::logic_error("train_veer: per-objective surrogates must be fitted first");
    }
    const std::vector<std::size_t> remaining = unevaluated(state, space, pool);
    const std::size_t n = n_unlabeled.value_or(
        state.params.n_unlabeled.value_or(std::min<std::size_t>(1000, remaining.size())));
    if (n > remaining.size()) {
        throw std::invalid_argument(
            fmt::format("train_veer: {} unlabeled rows requested but only {} remain", n, remaining.size()));
    }

    Rng rng(state.params.seed, kUnlabeledStream);
    const std::vector<std::size_t> unlabeled = rng.sample(remaining, n);

    std::vector<std::size_t> ids = state.evaluated;
    ids.insert(ids.end(), unlabeled.begin(), unlabeled.end());
    Matrix objectives = state.measured;
    if (!unlabeled.empty()) {
        const Matrix predicted = predict_objectives(state, space, unlabeled, Execution::parallel);
        for (std::size_t r = 0; r < predicted.rows(); ++r) {
            objectives.append_row(predicted.row(r));
        }
    }

    const Matrix normalized = MinMax::over(objectives).apply(objectives);
    const std::vector<double> weights = weights_or_ones(state.params, space.n_objectives());
    const auto ranked = pareto::zigzag_rank(ids, normalized, pareto::DominanceKind::continuous, weights);

    Matrix ranks(ids.size(), 1);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        ranks(i, 0) = static_cast<double>(ranked[i].rank);
    }
    state.rank_model = cart::fit(space.configs().gather(ids), ranks, state.params.tree);
    return state;
}

OptimizerState with_oracle_surrogates(OptimizerState state, const ConfigSpace& space) {
    OptimizerState full = state;
    full.evaluated.resize(space.size());
    for (std::size_t id = 0; id < space.size(); ++id) {
        full.evaluated[id] = id;
    }
    full.measured = space.perf_rows(full.evaluated);
    full.params.tree = {cart::TreeParams::kUnbounded, 2, 1};
    refit(full, space);
    state.surrogates = std::move(full.surrogates);
    return state;
}

Matrix predict_outputs(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> ids,
                       Execution exec) {
    switch (state.variant) {
    case Variant::flash:
    case Variant::multi_out:
        return predict_objectives(state, space, ids, exec);
    case Variant::single_weight:
        return cart::predict_batch(state.surrogates.at(0), space.configs(), ids, exec);
    case Variant::veer:
        if (state.rank_model) {
            return cart::predict_batch(*state.rank_model, space.configs(), ids, exec);
        }
        return predict_objectives(state, space, ids, exec);
    }
    throw std::logic_error("predict_outputs: unknown variant");
}

Solution final_solutions(const OptimizerState& state, const ConfigSpace& space, std::span<const std::size_t> holdout,
                         Execution exec) {
    if (holdout.empty()) {
        throw std::invalid_argument("final_solutions: empty holdout");
    }
    if (state.variant == Variant::veer && !state.rank_model) {
        throw std::logic_error("final_solutions: veer needs train_veer before it can be applied");
    }
    const std::vector<std::size_t> rows = sorted_unique(holdout, space.size(), "holdout");

    Solution solution;
    pareto::SortStats stats;
    const auto start = std::chrono::steady_clock::now();
    switch (state.variant) {
    case Variant::flash:
    case Variant::multi_out: {
        const Matrix predicted = predict_objectives(state, space, rows, exec);
        solution.selected = pareto::first_front(rows, predicted, pareto::DominanceKind::binary, &stats, exec);
        break;
    }
    case Variant::single_weight:
        solution.selected = argmin_rows(rows, cart::predict_batch(state.surrogates.at(0), space.configs(), rows, exec));
        break;
    case Variant::veer:
        solution.selected = argmin_rows(rows, cart::predict_batch(*state.rank_model, space.configs(), rows, exec));
        break;
    }
    solution.apply_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    solution.selection_comparisons = stats.comparisons;

    // Reporting only: keep the selected rows that no other selected row truly dominates.
    const Matrix truth = space.perf_rows(solution.selected);
    solution.row_ids = pareto::first_front(solution.selected, truth, pareto::DominanceKind::binary, nullptr, exec);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0, j = 0; i < solution.selected.size() && j < solution.row_ids.size(); ++i) {
        if (solution.selected[i] == solution.row_ids[j]) {
            keep.push_back(i);
            ++j;
        }
    }
    solution.perf = truth.gather(keep);
    return solution;
}

} // namespace veer
