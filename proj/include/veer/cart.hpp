#pragma once

#include "veer/dataspace.hpp"
#include "veer/execution.hpp"
#include "veer/matrix.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace veer::cart {

struct TreeParams {
    static constexpr int kUnbounded = -1;

    int max_depth = kUnbounded;
    std::size_t min_split = 4;
    std::size_t min_leaf = 2;

    friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Samples with value <= threshold go left, the rest go right.
struct Split {
    std::size_t option = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;

    friend bool operator==(const Split&, const Split&) = default;
};

struct Leaf {
    std::vector<double> prediction;
    std::size_t n_samples = 0;

    friend bool operator==(const Leaf&, const Leaf&) = default;
};

using Node = std::variant<Split, Leaf>;

/// CART regression tree with one or more outputs, stored as a flat pre-order
/// node array (root at index 0).
class RegressionTree {
public:
    RegressionTree() = default;
    RegressionTree(std::vector<Node> nodes, std::size_t n_features, std::size_t output_arity, TreeParams params);

    std::size_t output_arity() const { return output_arity_; }
    std::size_t n_features() const { return n_features_; }
    const TreeParams& params() const { return params_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }

    /// Edges on the longest root-to-leaf path; 0 for a single leaf.
    std::size_t depth() const;
    std::size_t leaf_count() const;

    /// Index of the leaf reached by `config`.
    std::size_t leaf_index(std::span<const double> config) const;
    std::span<const double> predict(std::span<const double> config) const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    std::vector<Node> nodes_;
    std::size_t n_features_ = 0;
    std::size_t output_arity_ = 0;
    TreeParams params_;
};

/// Greedy top-down induction. Each split minimises the summed child SSE over
/// all outputs, with every output min-max scaled over the node's targets.
/// Thresholds are midpoints between consecutive distinct values; ties go to
/// the lowest option index, then the lowest threshold.
RegressionTree fit(const Matrix& features, const Matrix& targets, const TreeParams& params = {});

/// Rows `ids` of `features` predicted in order; one output row per id.
Matrix predict_batch(const RegressionTree& tree, const Matrix& features, std::span<const std::size_t> ids);
Matrix predict_batch_serial(const RegressionTree& tree, const Matrix& features, std::span<const std::size_t> ids);
inline Matrix predict_batch(const RegressionTree& tree, const Matrix& features, std::span<const std::size_t> ids,
                            Execution exec) {
    return exec == Execution::parallel ? predict_batch(tree, features, ids)
                                       : predict_batch_serial(tree, features, ids);
}

enum class Comparator { less_equal, greater, equal };

/// One test on a decision path. Binary options are rendered as equalities.
struct Condition {
    std::string option;
    std::size_t index = 0;
    Comparator op = Comparator::less_equal;
    double value = 0.0;

    friend bool operator==(const Condition&, const Condition&) = default;
};

/// Which way a condition pushes its option.
enum class Bound { lower, upper };
Bound bound_of(const Condition& condition);

struct Rule {
    std::vector<Condition> conditions;
    std::vector<double> prediction;
    std::size_t n_samples = 0;
};

/// Decision paths to the `top_k` leaves with the lowest mean prediction.
/// Each option keeps at most its tightest upper and lower bound. When
/// `options` is given, names are filled in and binary tests become `= 0/1`.
std::vector<Rule> extract_rules(const RegressionTree& tree, std::size_t top_k,
                                std::span<const OptionSchema> options = {});

std::string to_string(const Condition& condition);
std::string to_string(const Rule& rule);

/// Nested-node JSON with option names, thresholds and leaf means.
nlohmann::json to_json(const RegressionTree& tree, std::span<const OptionSchema> options = {});
RegressionTree tree_from_json(const nlohmann::json& json);

} // namespace veer::cart
