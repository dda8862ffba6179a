#pragma once

#include "veer/cart.hpp"
#include "veer/dataspace.hpp"
#include "veer/optimize.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace veer::analysis {

/// Multi-vector Kendall tau. A row pair is concordant when the same row is
/// strictly smaller in every vector; pairs tied in every vector are left out;
/// everything else is discordant.
struct TauReport {
    /// (P - Q) / (P + Q); empty when every pair is tied.
    std::optional<double> tau;
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    /// All row pairs, n(n-1)/2, tied ones included.
    std::uint64_t n_pairs = 0;
};

using ScoreVectors = std::vector<std::vector<double>>;

/// O(n log n) for two vectors, all pairs otherwise.
TauReport kendall_tau(const ScoreVectors& vectors);
/// All-pairs kernels, O(m n^2).
TauReport kendall_tau_all_pairs(const ScoreVectors& vectors);
TauReport kendall_tau_all_pairs_serial(const ScoreVectors& vectors);

/// Tau over the variant's model outputs on the holdout rows. Single-output
/// models are compared against themselves and always report tau = 1, also
/// when every prediction ties.
TauReport model_disagreement(const OptimizerState& state, const ConfigSpace& space,
                             std::span<const std::size_t> holdout);

struct RuleConflict {
    std::string option;
    cart::Condition condition_a;
    cart::Condition condition_b;
    std::pair<std::string, std::string> objectives;
};

/// Same option pushed in opposite directions: a binary option asserted true on
/// one side and false on the other, or a lower bound against an upper bound
/// (overlapping ranges still conflict). Each distinct pair is reported once.
std::vector<RuleConflict> detect_conflicts(std::span<const cart::Rule> rules_a, std::span<const cart::Rule> rules_b,
                                           std::pair<std::string, std::string> objectives = {"a", "b"});

/// Aligned two-column table, one conflict per line.
std::string render_conflicts(std::span<const RuleConflict> conflicts);

/// P(x > y) - P(x < y) over all cross pairs.
double cliffs_delta(std::span<const double> a, std::span<const double> b);

double median(std::span<const double> values);

struct SKGroup {
    std::string treatment;
    std::size_t rank = 0;
    double median = 0.0;
    std::vector<double> samples;
};

inline constexpr double kSmallEffect = 0.147;

/// Recursive median-ordered bisection. Each cut maximises the between-group
/// spread of means and is kept only when |Cliff's delta| across it reaches
/// `delta_threshold`. Dense ranks, rank 0 holds the lowest medians. Results
/// come back in median order.
std::vector<SKGroup> scott_knott(const std::map<std::string, std::vector<double>>& treatments,
                                 double delta_threshold = kSmallEffect);

} // namespace veer::analysis
