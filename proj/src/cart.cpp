#include "veer/cart.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <numeric>
#include <stdexcept>

namespace veer::cart {

namespace {

struct Candidate {
    std::size_t option = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
    bool found = false;
};

class Builder {
public:
    Builder(const Matrix& x, const Matrix& y, const TreeParams& params) : x_(x), y_(y), params_(params) {}

    std::vector<Node> build() {
        std::vector<std::size_t> idx(x_.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        grow(idx, 0);
        return std::move(nodes_);
    }

private:
    std::size_t grow(std::vector<std::size_t>& idx, int depth) {
        const std::size_t n = idx.size();
        const std::size_t m = y_.cols();

        std::vector<double> mean(m, 0.0), lo(m, std::numeric_limits<double>::infinity()),
            hi(m, -std::numeric_limits<double>::infinity());
        for (std::size_t i : idx) {
            for (std::size_t k = 0; k < m; ++k) {
                const double v = y_(i, k);
                mean[k] += v;
                lo[k] = std::min(lo[k], v);
                hi[k] = std::max(hi[k], v);
            }
        }
        for (auto& v : mean) {
            v /= static_cast<double>(n);
        }

        bool pure = true;
        std::vector<double> scale(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            if (hi[k] > lo[k]) {
                scale[k] = 1.0 / (hi[k] - lo[k]);
                pure = false;
            }
        }

        const bool depth_capped = params_.max_depth != TreeParams::kUnbounded && depth >= params_.max_depth;
        if (pure || n < params_.min_split || depth_capped) {
            return push_leaf(std::move(mean), n);
        }

        const Candidate best = best_split(idx, mean, scale);
        if (!best.found) {
            return push_leaf(std::move(mean), n);
        }

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) {
            (x_(i, best.option) <= best.threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        const std::size_t self = nodes_.size();
        nodes_.emplace_back(Split{best.option, best.threshold, 0, 0});
        const std::size_t l = grow(left, depth + 1);
        const std::size_t r = grow(right, depth + 1);
        auto& split = std::get<Split>(nodes_[self]);
        split.left = l;
        split.right = r;
        return self;
    }

    std::size_t push_leaf(std::vector<double> mean, std::size_t n) {
        nodes_.emplace_back(Leaf{std::move(mean), n});
        return nodes_.size() - 1;
    }

    Candidate best_split(const std::vector<std::size_t>& idx, const std::vector<double>& mean,
                         const std::vector<double>& scale) const {
        const std::size_t n = idx.size();
        const std::size_t m = y_.cols();

        // Centred, scaled targets keep the running-sum SSE well conditioned.
        std::vector<double> z(n * m);
        std::vector<double> total_sum(m, 0.0), total_sq(m, 0.0);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t k = 0; k < m; ++k) {
                const double v = (y_(idx[p], k) - mean[k]) * scale[k];
                z[p * m + k] = v;
                total_sum[k] += v;
                total_sq[k] += v * v;
            }
        }

        Candidate best;
        std::vector<std::size_t> order(n);
        std::vector<double> left_sum(m), left_sq(m);
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return x_(idx[a], f) < x_(idx[b], f); });
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_sq.begin(), left_sq.end(), 0.0);
            for (std::size_t p = 0; p + 1 < n; ++p) {
                const std::size_t row = order[p];
                for (std::size_t k = 0; k < m; ++k) {
                    const double v = z[row * m + k];
                    left_sum[k] += v;
                    left_sq[k] += v * v;
                }
                const double here = x_(idx[row], f);
                const double next = x_(idx[order[p + 1]], f);
                if (!(here < next)) {
                    continue;
                }
                const std::size_t nl = p + 1;
                const std::size_t nr = n - nl;
                if (nl < params_.min_leaf || nr < params_.min_leaf) {
                    continue;
                }
                double impurity = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double rs = total_sum[k] - left_sum[k];
                    const double rq = total_sq[k] - left_sq[k];
                    impurity += left_sq[k] - left_sum[k] * left_sum[k] / static_cast<double>(nl);
                    impurity += rq - rs * rs / static_cast<double>(nr);
                }
                if (!best.found || impurity < best.impurity - 1e-12 * (1.0 + std::abs(best.impurity))) {
                    double threshold = here + (next - here) / 2.0;
                    if (!(threshold < next)) {
                        threshold = here;
                    }
                    best = {f, threshold, impurity, true};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const Matrix& y_;
    TreeParams params_;
    std::vector<Node> nodes_;
};

std::size_t depth_of(const std::vector<Node>& nodes, std::size_t at) {
    if (const auto* split = std::get_if<Split>(&nodes[at])) {
        return 1 + std::max(depth_of(nodes, split->left), depth_of(nodes, split->right));
    }
    return 0;
}

nlohmann::json node_to_json(const RegressionTree& tree, std::size_t at, std::span<const OptionSchema> options) {
    const auto& node = tree.nodes()[at];
    if (const auto* leaf = std::get_if<Leaf>(&node)) {
        return {{"leaf", leaf->prediction}, {"n", leaf->n_samples}};
    }
    const auto& split = std::get<Split>(node);
    nlohmann::json j{{"option", split.option}, {"threshold", split.threshold}};
    if (split.option < options.size()) {
        j["name"] = options[split.option].name;
    }
    j["left"] = node_to_json(tree, split.left, options);
    j["right"] = node_to_json(tree, split.right, options);
    return j;
}

std::size_t node_from_json(const nlohmann::json& j, std::vector<Node>& nodes) {
    const std::size_t self = nodes.size();
    if (j.contains("leaf")) {
        nodes.emplace_back(Leaf{j.at("leaf").get<std::vector<double>>(), j.at("n").get<std::size_t>()});
        return self;
    }
    nodes.emplace_back(Split{j.at("option").get<std::size_t>(), j.at("threshold").get<double>(), 0, 0});
    const std::size_t l = node_from_json(j.at("left"), nodes);
    const std::size_t r = node_from_json(j.at("right"), nodes);
    auto& split = std::get<Split>(nodes[self]);
    split.left = l;
    split.right = r;
    return self;
}

} // namespace

RegressionTree::RegressionTree(std::vector<Node> nodes, std::size_t n_features, std::size_t output_arity,
                               TreeParams params)
    : nodes_(std::move(nodes)), n_features_(n_features), output_arity_(output_arity), params_(params) {
    for (const auto& node : nodes_) {
        if (const auto* leaf = std::get_if<Leaf>(&node)) {
            if (leaf->prediction.size() != output_arity_) {
                throw std::invalid_argument("RegressionTree: leaf arity mismatch");
            }
        } else {
            const auto& split = std::get<Split>(node);
            if (split.option >= n_features_ || split.left >= nodes_.size() || split.right >= nodes_.size()) {
                throw std::invalid_argument("RegressionTree: malformed split node");
            }
        }
    }
}

std::size_t RegressionTree::depth() const {
    return nodes_.empty() ? 0 : depth_of(nodes_, 0);
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return std::holds_alternative<Leaf>(n); }));
}

std::size_t RegressionTree::leaf_index(std::span<const double> config) const {
    if (nodes_.empty()) {
        throw std::logic_error("RegressionTree: predict on an unfitted tree");
    }
    if (config.size() != n_features_) {
        throw std::invalid_argument(
            fmt::format("RegressionTree: expected {} option values, got {}", n_features_, config.size()));
    }
    std::size_t at = 0;
    while (const auto* split = std::get_if<Split>(&nodes_[at])) {
        at = config[split->option] <= split->threshold ? split->left : split->right;
    }
    return at;
}

std::span<const double> RegressionTree::predict(std::span<const double> config) const {
    return std::get<Leaf>(nodes_[leaf_index(config)]).prediction;
}

RegressionTree fit(const Matrix& features, const Matrix& targets, const TreeParams& params) {
    if (features.rows() == 0) {
        throw std::invalid_argument("cart::fit: no training rows");
    }
    if (features.rows() != targets.rows()) {
        throw std::invalid_argument("cart::fit: feature and target row counts differ");
    }
    if (targets.cols() == 0) {
        throw std::invalid_argument("cart::fit: targets need at least one output");
    }
    if (params.min_leaf == 0) {
        throw std::invalid_argument("cart::fit: min_leaf must be positive");
    }
    Builder builder(features, targets, params);
    return RegressionTree(builder.build(), features.cols(), targets.cols(), params);
}

Matrix predict_batch_serial(const RegressionTree& tree, const Matrix& features, std::span<const std::size_t> ids) {
    Matrix out(ids.size(), tree.output_arity());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto p = tree.predict(features.row(ids[i]));
        std::copy(p.begin(), p.end(), out.row(i).begin());
    }
    return out;
}

Matrix predict_batch(const RegressionTree& tree, const Matrix& features, std::span<const std::size_t> ids) {
    Matrix out(ids.size(), tree.output_arity());
    const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(static) if (ids.size() >= kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto p = tree.predict(features.row(ids[static_cast<std::size_t>(i)]));
        std::copy(p.begin(), p.end(), out.row(static_cast<std::size_t>(i)).begin());
    }
    return out;
}

Bound bound_of(const Condition& condition) {
    switch (condition.op) {
    case Comparator::less_equal:
        return Bound::upper;
    case Comparator::greater:
        return Bound::lower;
    case Comparator::equal:
        break;
    }
    return condition.value >= 0.5 ? Bound::lower : Bound::upper;
}

std::vector<Rule> extract_rules(const RegressionTree& tree, std::size_t top_k, std::span<const OptionSchema> options) {
    struct PathLeaf {
        std::size_t leaf;
        std::vector<std::pair<std::size_t, bool>> path; // (split node, went left)
    };
    std::vector<PathLeaf> leaves;
    if (tree.empty()) {
        return {};
    }
    std::vector<PathLeaf> stack{{0, {}}};
    while (!stack.empty()) {
        PathLeaf cur = std::move(stack.back());
        stack.pop_back();
        if (const auto* split = std::get_if<Split>(&tree.nodes()[cur.leaf])) {
            PathLeaf right{split->right, cur.path};
            right.path.emplace_back(cur.leaf, false);
            PathLeaf left{split->left, std::move(cur.path)};
            left.path.emplace_back(cur.leaf, true);
            stack.push_back(std::move(right));
            stack.push_back(std::move(left));
        } else {
            leaves.push_back(std::move(cur));
        }
    }

    auto score = [&](const PathLeaf& p) {
        const auto& pred = std::get<Leaf>(tree.nodes()[p.leaf]).prediction;
        return std::accumulate(pred.begin(), pred.end(), 0.0) / static_cast<double>(pred.size());
    };
    std::stable_sort(leaves.begin(), leaves.end(),
                     [&](const PathLeaf& a, const PathLeaf& b) { return score(a) < score(b); });
    leaves.resize(std::min(top_k, leaves.size()));

    std::vector<Rule> rules;
    for (const auto& entry : leaves) {
        // Per option: tightest upper (min of <=) and lower (max of >) bound.
        std::map<std::size_t, std::pair<std::optional<double>, std::optional<double>>> bounds;
        for (const auto& [node, went_left] : entry.path) {
            const auto& split = std::get<Split>(tree.nodes()[node]);
            auto& [upper, lower] = bounds[split.option];
            if (went_left) {
                upper = upper ? std::min(*upper, split.threshold) : split.threshold;
            } else {
                lower = lower ? std::max(*lower, split.threshold) : split.threshold;
            }
        }
        Rule rule;
        const auto& leaf = std::get<Leaf>(tree.nodes()[entry.leaf]);
        rule.prediction = leaf.prediction;
        rule.n_samples = leaf.n_samples;
        for (const auto& [option, bound] : bounds) {
            const auto& [upper, lower] = bound;
            const std::string name = option < options.size() ? options[option].name : fmt::format("x{}", option);
            const bool binary = option < options.size() && options[option].kind == OptionKind::binary;
            if (lower) {
                rule.conditions.push_back(binary ? Condition{name, option, Comparator::equal, 1.0}
                                                 : Condition{name, option, Comparator::greater, *lower});
            }
            if (upper) {
                rule.conditions.push_back(binary ? Condition{name, option, Comparator::equal, 0.0}
                                                 : Condition{name, option, Comparator::less_equal, *upper});
            }
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::string to_string(const Condition& condition) {
    switch (condition.op) {
    case Comparator::less_equal:
        return fmt::format("{} <= {}", condition.option, condition.value);
    case Comparator::greater:
        return fmt::format("{} > {}", condition.option, condition.value);
    case Comparator::equal:
        break;
    }
    return fmt::format("{} = {}", condition.option, condition.value >= 0.5 ? "True" : "False");
}

std::string to_string(const Rule& rule) {
    std::vector<std::string> parts;
    for (const auto& c : rule.conditions) {
        parts.push_back(to_string(c));
    }
    const std::string lhs = parts.empty() ? std::string("(always)") : fmt::format("{}", fmt::join(parts, " and "));
    return fmt::format("{} => [{}] (n={})", lhs, fmt::join(rule.prediction, ", "), rule.n_samples);
}

nlohmann::json to_json(const RegressionTree& tree, std::span<const OptionSchema> options) {
    nlohmann::json j{{"n_features", tree.n_features()},
                     {"output_arity", tree.output_arity()},
                     {"params",
                      {{"max_depth", tree.params().max_depth},
                       {"min_split", tree.params().min_split},
                       {"min_leaf", tree.params().min_leaf}}}};
    j["root"] = tree.empty() ? nlohmann::json() : node_to_json(tree, 0, options);
    return j;
}

RegressionTree tree_from_json(const nlohmann::json& json) {
    TreeParams params;
    const auto& p = json.at("params");
    params.max_depth = p.at("max_depth").get<int>();
    params.min_split = p.at("min_split").get<std::size_t>();
    params.min_leaf = p.at("min_leaf").get<std::size_t>();
    std::vector<Node> nodes;
    if (!json.at("root").is_null()) {
        node_from_json(json.at("root"), nodes);
    }
    return RegressionTree(std::move(nodes), json.at("n_features").get<std::size_t>(),
                          json.at("output_arity").get<std::size_t>(), params);
}

} // namespace veer::cart
