#include "veer/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace veer::analysis {

namespace {

std::size_t check_vectors(const ScoreVectors& vectors) {
    if (vectors.size() < 2) {
        throw std::invalid_argument("kendall_tau needs at least two score vectors");
    }
    const std::size_t n = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != n) {
            throw std::invalid_argument("kendall_tau: score vectors differ in length");
        }
    }
    if (n < 2) {
        throw std::invalid_argument("kendall_tau needs at least two rows");
    }
    return n;
}

TauReport finish(std::uint64_t concordant, std::uint64_t discordant, std::size_t n) {
    TauReport report;
    report.concordant = concordant;
    report.discordant = discordant;
    report.n_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (concordant + discordant > 0) {
        report.tau = (static_cast<double>(concordant) - static_cast<double>(discordant)) /
                     static_cast<double>(concordant + discordant);
    }
    return report;
}

enum class PairKind { concordant, discordant, tied };

PairKind classify(const ScoreVectors& vectors, std::size_t i, std::size_t j) {
    int direction = 0;
    bool all_tied = true;
    bool concordant = true;
    for (const auto& v : vectors) {
        const int s = (v[i] < v[j]) ? -1 : (v[j] < v[i] ? 1 : 0);
        if (s != 0) {
            all_tied = false;
        }
        if (s == 0 || (direction != 0 && s != direction)) {
            concordant = false;
        }
        if (direction == 0) {
            direction = s;
        }
    }
    if (all_tied) {
        return PairKind::tied;
    }
    return concordant ? PairKind::concordant : PairKind::discordant;
}

std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

/// Strict inversions of `values`, sorting it in place.
std::uint64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch, std::size_t lo,
                               std::size_t hi) {
    if (hi - lo < 2) {
        return 0;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = count_inversions(values, scratch, lo, mid) + count_inversions(values, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (values[j] < values[i]) {
            swaps += mid - i;
            scratch[k++] = values[j++];
        } else {
            scratch[k++] = values[i++];
        }
    }
    while (i < mid) {
        scratch[k++] = values[i++];
    }
    while (j < hi) {
        scratch[k++] = values[j++];
    }
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              values.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

/// Knight's algorithm for two vectors.
TauReport kendall_tau_two(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::tie(x[a], y[a]) < std::tie(x[b], y[b]); });

    std::uint64_t ties_x = 0, ties_xy = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[order[j]] == x[order[i]]) {
            ++j;
        }
        ties_x += tie_pairs(j - i);
        for (std::size_t a = i; a < j;) {
            std::size_t b = a;
            while (b < j && y[order[b]] == y[order[a]]) {
                ++b;
            }
            ties_xy += tie_pairs(b - a);
            a = b;
        }
        i = j;
    }

    std::vector<double> ys(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y[order[i]];
    }
    const std::uint64_t swaps = count_inversions(ys, scratch, 0, n);

    std::uint64_t ties_y = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && ys[j] == ys[i]) {
            ++j;
        }
        ties_y += tie_pairs(j - i);
        i = j;
    }

    const std::uint64_t all = tie_pairs(n);
    const std::uint64_t concordant = all - ties_x - ties_y + ties_xy - swaps;
    return finish(concordant, all - ties_xy - concordant, n);
}

} // namespace

TauReport kendall_tau_all_pairs_serial(const ScoreVectors& vectors) {
    const std::size_t n = check_vectors(vectors);
    std::uint64_t concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            switch (classify(vectors, i, j)) {
            case PairKind::concordant:
                ++concordant;
                break;
            case PairKind::discordant:
                ++discordant;
                break;
            case PairKind::tied:
                break;
            }
        }
    }
    return finish(concordant, discordant, n);
}

TauReport kendall_tau_all_pairs(const ScoreVectors& vectors) {
    const std::size_t n = check_vectors(vectors);
    std::uint64_t concordant = 0, discordant = 0;
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : concordant, discordant)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
            const PairKind kind = classify(vectors, static_cast<std::size_t>(i), j);
            concordant += kind == PairKind::concordant;
            discordant += kind == PairKind::discordant;
        }
    }
    return finish(concordant, discordant, n);
}

TauReport kendall_tau(const ScoreVectors& vectors) {
    check_vectors(vectors);
    if (vectors.size() == 2) {
        return kendall_tau_two(vectors[0], vectors[1]);
    }
    return kendall_tau_all_pairs(vectors);
}

TauReport model_disagreement(const OptimizerState& state, const ConfigSpace& space,
                             std::span<const std::size_t> holdout) {
    const Matrix outputs = predict_outputs(state, space, holdout);
    ScoreVectors vectors;
    for (std::size_t k = 0; k < outputs.cols(); ++k) {
        vectors.push_back(outputs.column(k));
    }
    if (vectors.size() > 1) {
        return kendall_tau(vectors);
    }
    vectors.push_back(vectors.front());
    TauReport report = kendall_tau(vectors);
    // A single output cannot disagree with itself, even when it is constant.
    report.tau = 1.0;
    return report;
}

std::vector<RuleConflict> detect_conflicts(std::span<const cart::Rule> rules_a, std::span<const cart::Rule> rules_b,
                                           std::pair<std::string, std::string> objectives) {
    std::vector<RuleConflict> out;
    auto seen = [&](const cart::Condition& a, const cart::Condition& b) {
        return std::any_of(out.begin(), out.end(), [&](const RuleConflict& c) {
            return c.condition_a == a && c.condition_b == b;
        });
    };
    for (const auto& ra : rules_a) {
        for (const auto& a : ra.conditions) {
            for (const auto& rb : rules_b) {
                for (const auto& b : rb.conditions) {
                    if (a.option != b.option || cart::bound_of(a) == cart::bound_of(b) || seen(a, b)) {
                        continue;
                    }
                    out.push_back({a.option, a, b, objectives});
                }
            }
        }
    }
    return out;
}

std::string render_conflicts(std::span<const RuleConflict> conflicts) {
    if (conflicts.empty()) {
        return "no conflicting rules\n";
    }
    const auto& [name_a, name_b] = conflicts.front().objectives;
    std::size_t width = name_a.size();
    for (const auto& c : conflicts) {
        width = std::max(width, cart::to_string(c.condition_a).size());
    }
    std::string text = fmt::format("{:<{}}   {}\n", name_a, width, name_b);
    text += fmt::format("{:-<{}}   {:-<{}}\n", "", width, "", std::max<std::size_t>(name_b.size(), 8));
    for (const auto& c : conflicts) {
        text += fmt::format("{:<{}}   {}\n", cart::to_string(c.condition_a), width, cart::to_string(c.condition_b));
    }
    return text;
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("cliffs_delta needs two non-empty samples");
    }
    std::vector<double> sorted(b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());
    std::int64_t score = 0;
    for (double x : a) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        score += below - above;
    }
    return static_cast<double>(score) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double median(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

namespace {

struct Treatment {
    std::string name;
    double median = 0.0;
    const std::vector<double>* samples = nullptr;
};

std::vector<double> pooled(std::span<const Treatment> ts) {
    std::vector<double> out;
    for (const auto& t : ts) {
        out.insert(out.end(), t.samples->begin(), t.samples->end());
    }
    return out;
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

/// Cut point in (0, size) maximising E(delta), or 0 when no cut helps.
std::size_t best_cut(std::span<const Treatment> ts) {
    const std::vector<double> all = pooled(ts);
    const double mu = mean(all);
    const double n = static_cast<double>(all.size());
    double best = 0.0;
    std::size_t cut = 0;
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const std::vector<double> left = pooled(ts.first(k));
        const std::vector<double> right = pooled(ts.subspan(k));
        const double ml = mean(left), mr = mean(right);
        const double e = static_cast<double>(left.size()) / n * (ml - mu) * (ml - mu) +
                         static_cast<double>(right.size()) / n * (mr - mu) * (mr - mu);
        if (e > best) {
            best = e;
            cut = k;
        }
    }
    return cut;
}

void divide(std::span<const Treatment> ts, double threshold, std::vector<std::size_t>& sizes) {
    const std::size_t cut = ts.size() > 1 ? best_cut(ts) : 0;
    if (cut > 0) {
        const std::vector<double> left = pooled(ts.first(cut));
        const std::vector<double> right = pooled(ts.subspan(cut));
        if (std::abs(cliffs_delta(left, right)) >= threshold) {
            divide(ts.first(cut), threshold, sizes);
            divide(ts.subspan(cut), threshold, sizes);
            return;
        }
    }
    sizes.push_back(ts.size());
}

} // namespace

std::vector<SKGroup> scott_knott(const std::map<std::string, std::vector<double>>& treatments,
                                 double delta_threshold) {
    if (treatments.empty()) {
        throw std::invalid_argument("scott_knott needs at least one treatment");
    }
    std::vector<Treatment> ts;
    for (const auto& [name, samples] : treatments) {
        if (samples.size() < 2) {
            throw std::invalid_argument(fmt::format("scott_knott: treatment '{}' has fewer than two samples", name));
        }
        ts.push_back({name, median(samples), &samples});
    }
    std::stable_sort(ts.begin(), ts.end(), [](const Treatment& a, const Treatment& b) { return a.median < b.median; });

    std::vector<std::size_t> sizes;
    divide(ts, delta_threshold, sizes);

    std::vector<SKGroup> out;
    std::size_t pos = 0;
    for (std::size_t rank = 0; rank < sizes.size(); ++rank) {
        for (std::size_t i = 0; i < sizes[rank]; ++i, ++pos) {
            out.push_back({ts[pos].name, rank, ts[pos].median, *ts[pos].samples});
        }
    }
    return out;
}

} // namespace veer::analysis
