#include "veer/pareto.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace veer::pareto {

namespace {

void check_arity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument(fmt::format("objective arity mismatch ({} vs {})", a.size(), b.size()));
    }
}

void check_normalized(std::span<const double> v) {
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw std::invalid_argument(fmt::format("continuous domination needs values in [0,1], got {}", x));
        }
    }
}

void check_points(std::span<const std::size_t> ids, const Matrix& values) {
    if (ids.empty()) {
        throw std::invalid_argument("non-dominated sorting of an empty point set");
    }
    if (ids.size() != values.rows()) {
        throw std::invalid_argument("ids and values disagree on the number of points");
    }
    if (values.cols() == 0) {
        throw std::invalid_argument("points have no objectives");
    }
}

void check_points(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind) {
    check_points(ids, values);
    if (kind == DominanceKind::continuous) {
        check_normalized(values.data());
    }
}

// Unchecked kernels; callers validate arity and range once per point set.
bool binary_dominates_raw(std::span<const double> a, std::span<const double> b) {
    bool strict = false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] > b[j]) {
            return false;
        }
        strict = strict || a[j] < b[j];
    }
    return strict;
}

double cdom_loss_raw(std::span<const double> a, std::span<const double> b) {
    double loss = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        loss -= std::exp(b[j] - a[j]);
    }
    return loss / static_cast<double>(a.size());
}

bool dominates_raw(DominanceKind kind, std::span<const double> a, std::span<const double> b) {
    if (kind == DominanceKind::binary) {
        return binary_dominates_raw(a, b);
    }
    return cdom_loss_raw(a, b) < cdom_loss_raw(b, a);
}

Fronts peel(std::span<const std::size_t> ids, std::vector<std::vector<std::size_t>>& dominated,
            std::vector<std::size_t>& dominator_count) {
    const std::size_t n = ids.size();
    Fronts fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (dominator_count[i] == 0) {
            current.push_back(i);
        }
    }
    std::vector<char> placed(n, 0);
    std::size_t n_placed = 0;
    while (n_placed < n) {
        if (current.empty()) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!placed[i]) {
                    current.push_back(i);
                }
            }
        }
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            placed[p] = 1;
        }
        for (std::size_t p : current) {
            for (std::size_t q : dominated[p]) {
                if (!placed[q] && --dominator_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        n_placed += current.size();
        std::vector<std::size_t> front;
        front.reserve(current.size());
        for (std::size_t p : current) {
            front.push_back(ids[p]);
        }
        std::sort(front.begin(), front.end());
        fronts.push_back(std::move(front));
        current = std::move(next);
    }
    return fronts;
}

} // namespace

bool binary_dominates(std::span<const double> a, std::span<const double> b) {
    check_arity(a, b);
    return binary_dominates_raw(a, b);
}

double cdom_loss(std::span<const double> a, std::span<const double> b) {
    check_arity(a, b);
    check_normalized(a);
    check_normalized(b);
    return cdom_loss_raw(a, b);
}

bool continuous_dominates(std::span<const double> a, std::span<const double> b) {
    return cdom_loss(a, b) < cdom_loss(b, a);
}

bool dominates(DominanceKind kind, std::span<const double> a, std::span<const double> b) {
    return kind == DominanceKind::binary ? binary_dominates(a, b) : continuous_dominates(a, b);
}

Fronts nd_sort_serial(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind, SortStats* stats) {
    check_points(ids, values, kind);
    const std::size_t n = ids.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::uint64_t comparisons = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++comparisons;
            if (dominates_raw(kind, values.row(i), values.row(j))) {
                dominated[i].push_back(j);
                ++count[j];
                continue;
            }
            ++comparisons;
            if (dominates_raw(kind, values.row(j), values.row(i))) {
                dominated[j].push_back(i);
                ++count[i];
            }
        }
    }
    if (stats) {
        stats->comparisons += comparisons;
    }
    return peel(ids, dominated, count);
}

Fronts nd_sort(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind, SortStats* stats) {
    check_points(ids, values, kind);
    const std::size_t n = ids.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::uint64_t comparisons = 0;
    const auto sn = static_cast<std::ptrdiff_t>(n);
    // Each thread owns dominated[i]; no shared writes inside the loop.
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : comparisons) if (n >= kParallelThreshold / 8)
    for (std::ptrdiff_t si = 0; si < sn; ++si) {
        const auto i = static_cast<std::size_t>(si);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            ++comparisons;
            if (dominates_raw(kind, values.row(i), values.row(j))) {
                dominated[i].push_back(j);
            }
        }
    }
    std::vector<std::size_t> count(n, 0);
    for (const auto& list : dominated) {
        for (std::size_t q : list) {
            ++count[q];
        }
    }
    if (stats) {
        stats->comparisons += comparisons;
    }
    return peel(ids, dominated, count);
}

std::vector<std::size_t> first_front_serial(std::span<const std::size_t> ids, const Matrix& values,
                                            DominanceKind kind, SortStats* stats) {
    check_points(ids, values, kind);
    const std::size_t n = ids.size();
    std::vector<std::size_t> front;
    std::uint64_t comparisons = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool beaten = false;
        for (std::size_t j = 0; j < n && !beaten; ++j) {
            if (j != i) {
                ++comparisons;
                beaten = dominates_raw(kind, values.row(j), values.row(i));
            }
        }
        if (!beaten) {
            front.push_back(ids[i]);
        }
    }
    if (stats) {
        stats->comparisons += comparisons;
    }
    std::sort(front.begin(), front.end());
    return front;
}

std::vector<std::size_t> first_front(std::span<const std::size_t> ids, const Matrix& values, DominanceKind kind,
                                     SortStats* stats) {
    check_points(ids, values, kind);
    const std::size_t n = ids.size();
    std::vector<char> keep(n, 0);
    std::uint64_t comparisons = 0;
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : comparisons) if (n >= kParallelThreshold)
    for (std::ptrdiff_t si = 0; si < sn; ++si) {
        const auto i = static_cast<std::size_t>(si);
        bool beaten = false;
        for (std::size_t j = 0; j < n && !beaten; ++j) {
            if (j != i) {
                ++comparisons;
                beaten = dominates_raw(kind, values.row(j), values.row(i));
            }
        }
        keep[i] = beaten ? 0 : 1;
    }
    if (stats) {
        stats->comparisons += comparisons;
    }
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) {
            front.push_back(ids[i]);
        }
    }
    std::sort(front.begin(), front.end());
    return front;
}

double zigzag_key(std::span<const double> normalized, std::span<const double> weights) {
    if (normalized.empty()) {
        throw std::invalid_argument("zigzag_key: empty objective vector");
    }
    if (!weights.empty() && weights.size() != normalized.size()) {
        throw std::invalid_argument("zigzag_key: weight arity mismatch");
    }
    check_normalized(normalized);
    double key = 0.0;
    for (std::size_t j = 0; j < normalized.size(); ++j) {
        const double w = weights.empty() ? 1.0 : weights[j];
        key += std::exp(w * normalized[j]);
    }
    return key / static_cast<double>(normalized.size());
}

std::vector<RankedPoint> zigzag_rank(std::span<const std::size_t> ids, const Matrix& normalized, DominanceKind kind,
                                     std::span<const double> weights) {
    check_points(ids, normalized);
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("zigzag_rank: weights must be positive");
        }
    }
    const std::size_t n = ids.size();
    std::vector<RankedPoint> ranked(n);

    if (kind == DominanceKind::binary) {
        std::vector<std::size_t> position(n);
        std::iota(position.begin(), position.end(), std::size_t{0});
        std::sort(position.begin(), position.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
        const Fronts fronts = nd_sort(ids, normalized, DominanceKind::binary);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            for (std::size_t id : fronts[f]) {
                const auto it = std::lower_bound(position.begin(), position.end(), id,
                                                 [&](std::size_t p, std::size_t v) { return ids[p] < v; });
                ranked[*it] = {id, f, static_cast<double>(f)};
            }
        }
        return ranked;
    }

    std::vector<double> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = zigzag_key(normalized.row(i), weights);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : ids[a] < ids[b];
    });
    std::size_t rank = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        if (pos > 0 && keys[i] != keys[order[pos - 1]]) {
            ++rank;
        }
        ranked[i] = {ids[i], rank, keys[i]};
    }
    return ranked;
}

namespace {

double nearest(std::span<const double> point, const Matrix& front) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < front.rows(); ++t) {
        const auto f = front.row(t);
        double d2 = 0.0;
        for (std::size_t k = 0; k < point.size(); ++k) {
            const double d = point[k] - f[k];
            d2 += d * d;
        }
        best = std::min(best, d2);
    }
    return std::sqrt(best);
}

void check_gd(const Matrix& solution, const Matrix& front) {
    if (solution.empty() || front.empty()) {
        throw std::invalid_argument("generational_distance: empty solution or front");
    }
    if (solution.cols() != front.cols()) {
        throw std::invalid_argument("generational_distance: objective arity mismatch");
    }
}

} // namespace

double generational_distance_serial(const Matrix& solution, const Matrix& front) {
    check_gd(solution, front);
    double total = 0.0;
    for (std::size_t s = 0; s < solution.rows(); ++s) {
        total += nearest(solution.row(s), front);
    }
    return total / static_cast<double>(solution.rows());
}

double generational_distance(const Matrix& solution, const Matrix& front) {
    check_gd(solution, front);
    const std::size_t n = solution.rows();
    std::vector<double> dist(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n * front.rows() >= kParallelThreshold * 64)
    for (std::ptrdiff_t s = 0; s < sn; ++s) {
        dist[static_cast<std::size_t>(s)] = nearest(solution.row(static_cast<std::size_t>(s)), front);
    }
    // Summed in index order so the result matches the serial kernel bit for bit.
    double total = 0.0;
    for (double d : dist) {
        total += d;
    }
    return total / static_cast<double>(n);
}

} // namespace veer::pareto
