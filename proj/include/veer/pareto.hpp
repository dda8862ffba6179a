#pragma once

#include "veer/execution.hpp"
#include "veer/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace veer::pareto {

// All objective vectors here are in minimize form.

enum class DominanceKind { binary, continuous };

struct RankedPoint {
    std::size_t row_id = 0;
    std::size_t rank = 0;
    double key = 0.0;

    friend bool operator==(const RankedPoint&, const RankedPoint&) = default;
};

/// Dominance tests performed by a sorting kernel.
struct SortStats {
    std::uint64_t comparisons = 0;
};

/// a <= b everywhere and a < b somewhere.
bool binary_dominates(std::span<const double> a, std::span<const double> b);

/// Mean over objectives of -exp(b_j - a_j). Inputs must be normalized to [0,1].
double cdom_loss(std::span<const double> a, std::span<const double> b);

/// cdom_loss(a, b) < cdom_loss(b, a).
bool continuous_dominates(std::span<const double> a, std::span<const double> b);

bool dominates(DominanceKind kind, std::span<const double> a, std::span<const double> b);

/// Successive non-dominated fronts. `values` row i belongs to `ids[i]`; the
/// returned fronts hold ids, each front sorted ascending.
///
/// Fast non-dominated sorting (dominator counts plus dominated lists, O(MN^2)).
/// Continuous dominance is not transitive in general; if peeling stalls on a
/// cycle, every remaining point goes into one last front.
using Fronts = std::vector<std::vector<std::size_t>>;
Fronts nd_sort(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind,
               SortStats* stats = nullptr);
Fronts nd_sort_serial(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind,
                      SortStats* stats = nullptr);

/// Front 0 only, without building dominated lists. Same result as
/// nd_sort(...).front() in O(N) memory.
std::vector<std::size_t> first_front(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind,
                                     SortStats* stats = nullptr);
std::vector<std::size_t> first_front_serial(std::span<const std::size_t> ids, const Matrix& values,
                                            DominanceKind kind, SortStats* stats = nullptr);
inline std::vector<std::size_t> first_front(std::span<const std::size_t> ids, const Matrix& values,
                                            DominanceKind kind, SortStats* stats, Execution exec) {
    return exec == Execution::parallel ? first_front(ids, values, kind, stats)
                                       : first_front_serial(ids, values, kind, stats);
}

/// Scalar ZIGZAG key: mean_j exp(w_j * p_j), the (negated) continuous-domination
/// loss of the heaven point (origin) against p. Smaller is closer to heaven.
/// Empty weights mean all ones.
double zigzag_key(std::span<const double> normalized, std::span<const double> weights = {});

/// Collapses the objective space into dense ranks (0 is best).
/// continuous: ascending zigzag_key, exact key ties share a rank.
/// binary: the nd_sort front index.
std::vector<RankedPoint> zigzag_rank(std::span<const std::size_t> ids, const Matrix& normalized,
                                     DominanceKind kind = DominanceKind::continuous,
                                     std::span<const double> weights = {});

/// Mean Euclidean distance from each solution point to its nearest front point.
double generational_distance(const Matrix& solution, const Matrix& front);
double generational_distance_serial(const Matrix& solution, const Matrix& front);

} // namespace veer::pareto
