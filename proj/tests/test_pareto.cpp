#include "veer/dataspace.hpp"
#include "veer/pareto.hpp"
#include "veer/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace veer;
using namespace veer::pareto;

namespace {

using V = std::vector<double>;

Matrix points(std::vector<V> rows) {
    Matrix m;
    for (const auto& r : rows) {
        m.append_row(r);
    }
    return m;
}

std::vector<std::size_t> iota_ids(std::size_t n, std::size_t offset = 0) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), offset);
    return ids;
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t m, bool lattice) {
    Matrix pts(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            pts(i, k) = lattice ? double(rng.below(6)) / 5.0 : rng.uniform();
        }
    }
    return pts;
}

} // namespace

TEST_CASE("binary dominance examples") {
    CHECK(binary_dominates(V{1, 1}, V{2, 2}));
    CHECK_FALSE(binary_dominates(V{1, 1}, V{1, 1}));
    CHECK_FALSE(binary_dominates(V{1, 3}, V{3, 1}));
    CHECK_FALSE(binary_dominates(V{3, 1}, V{1, 3}));
    CHECK_THROWS_AS(binary_dominates(V{1}, V{1, 2}), std::invalid_argument);
}

TEST_CASE("continuous-domination loss examples") {
    const double e = std::numbers::e;
    CHECK(cdom_loss(V{0, 0}, V{1, 1}) == doctest::Approx(-e).epsilon(1e-12));
    CHECK(cdom_loss(V{1, 1}, V{0, 0}) == doctest::Approx(-1 / e).epsilon(1e-12));
    CHECK(continuous_dominates(V{0, 0}, V{1, 1}));
    CHECK_FALSE(continuous_dominates(V{1, 1}, V{0, 0}));

    CHECK(cdom_loss(V{0.3, 0.7}, V{0.3, 0.7}) == cdom_loss(V{0.3, 0.7}, V{0.3, 0.7}));
    CHECK_FALSE(continuous_dominates(V{0.3, 0.7}, V{0.3, 0.7}));

    CHECK(cdom_loss(V{0, 1}, V{1, 0}) == doctest::Approx(-(e + 1 / e) / 2).epsilon(1e-12));
    CHECK(cdom_loss(V{0, 1}, V{1, 0}) == cdom_loss(V{1, 0}, V{0, 1}));
    CHECK_FALSE(continuous_dominates(V{0, 1}, V{1, 0}));
    CHECK_FALSE(continuous_dominates(V{1, 0}, V{0, 1}));

    CHECK_THROWS_AS(cdom_loss(V{0, 1.5}, V{0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(cdom_loss(V{-0.1, 0}, V{0, 0}), std::invalid_argument);
}

TEST_CASE("binary dominance is antisymmetric and transitive") {
    Rng rng(1);
    for (int trial = 0; trial < 5000; ++trial) {
        const Matrix p = random_points(rng, 3, 2 + rng.below(2), true);
        CHECK_FALSE((binary_dominates(p.row(0), p.row(1)) && binary_dominates(p.row(1), p.row(0))));
        if (binary_dominates(p.row(0), p.row(1)) && binary_dominates(p.row(1), p.row(2))) {
            CHECK(binary_dominates(p.row(0), p.row(2)));
        }
    }
}

TEST_CASE("continuous dominance is complete on distinct keys and antisymmetric") {
    Rng rng(2);
    for (int trial = 0; trial < 5000; ++trial) {
        const Matrix p = random_points(rng, 2, 2 + rng.below(3), trial % 2 == 0);
        const bool ab = continuous_dominates(p.row(0), p.row(1));
        const bool ba = continuous_dominates(p.row(1), p.row(0));
        CHECK_FALSE((ab && ba));
        if (cdom_loss(p.row(0), p.row(1)) != cdom_loss(p.row(1), p.row(0))) {
            CHECK((ab || ba));
        }
    }
}

TEST_CASE("nd_sort examples") {
    const auto chain = nd_sort(iota_ids(3), points({{0, 0}, {1, 1}, {2, 2}}), DominanceKind::binary);
    CHECK(chain == Fronts{{0}, {1}, {2}});
    const auto pair = nd_sort(iota_ids(2), points({{0, 1}, {1, 0}}), DominanceKind::binary);
    CHECK(pair == Fronts{{0, 1}});
    const auto ids = std::vector<std::size_t>{40, 10, 30};
    CHECK(nd_sort(ids, points({{2, 2}, {0, 0}, {1, 1}}), DominanceKind::binary) == Fronts{{10}, {30}, {40}});
    CHECK_THROWS_AS(nd_sort({}, Matrix(), DominanceKind::binary), std::invalid_argument);
    CHECK_THROWS_AS(nd_sort(iota_ids(1), points({{2, 2}}), DominanceKind::continuous), std::invalid_argument);
}

TEST_CASE("nd_sort matches the brute-force peel, serial and parallel") {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.below(120);
        const Matrix pts = random_points(rng, n, 2 + rng.below(2), trial % 2 == 0);
        const auto ids = iota_ids(n);
        const Fronts expected = oracle::fronts(pts);
        CHECK(nd_sort(ids, pts, DominanceKind::binary) == expected);
        CHECK(nd_sort_serial(ids, pts, DominanceKind::binary) == expected);
        CHECK(first_front(ids, pts, DominanceKind::binary) == expected.front());
        CHECK(first_front_serial(ids, pts, DominanceKind::binary) == expected.front());
        CHECK(nd_sort(ids, pts, DominanceKind::continuous) == nd_sort_serial(ids, pts, DominanceKind::continuous));
        CHECK(first_front(ids, pts, DominanceKind::continuous) ==
              nd_sort(ids, pts, DominanceKind::continuous).front());
    }
}

TEST_CASE("large sets go through the parallel kernels unchanged") {
    Rng rng(4);
    const Matrix pts = random_points(rng, 3000, 2, true);
    const auto ids = iota_ids(3000);
    SortStats s1, s2;
    CHECK(nd_sort(ids, pts, DominanceKind::binary, &s1) == nd_sort_serial(ids, pts, DominanceKind::binary, &s2));
    CHECK(first_front(ids, pts, DominanceKind::binary) == first_front_serial(ids, pts, DominanceKind::binary));
    CHECK(s1.comparisons > 0);
}

TEST_CASE("zigzag_rank examples") {
    const auto two = zigzag_rank(iota_ids(2), points({{0, 0}, {1, 1}}));
    CHECK(two[0].rank == 0);
    CHECK(two[1].rank == 1);
    const auto sym = zigzag_rank(iota_ids(2), points({{0, 1}, {1, 0}}));
    CHECK(sym[0].rank == 0);
    CHECK(sym[1].rank == 0);
    CHECK(sym[0].key == sym[1].key);

    Matrix front(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        front(i, 0) = double(i) / 4;
        front(i, 1) = 1 - double(i) / 4;
    }
    for (const auto& p : zigzag_rank(iota_ids(5), front, DominanceKind::binary)) {
        CHECK(p.rank == 0);
    }
    CHECK_THROWS_AS(zigzag_rank({}, Matrix(), DominanceKind::continuous), std::invalid_argument);
    CHECK_THROWS_AS(zigzag_rank(iota_ids(2), points({{0, 0}, {1, 1}}), DominanceKind::continuous, V{1, 0}),
                    std::invalid_argument);
}

TEST_CASE("zigzag key is the loss of the heaven point, negated") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix p = random_points(rng, 1, 3, false);
        CHECK(zigzag_key(p.row(0)) == doctest::Approx(-cdom_loss(V{0, 0, 0}, p.row(0))).epsilon(1e-14));
    }
}

TEST_CASE("zigzag ranks: dense, order-isomorphic to keys, dominance-preserving") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(60);
        const Matrix pts = random_points(rng, n, 2 + rng.below(2), trial % 2 == 0);
        const auto ids = iota_ids(n, 100);
        const auto cont = zigzag_rank(ids, pts);
        const auto bin = zigzag_rank(ids, pts, DominanceKind::binary);
        std::set<std::size_t> ranks;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(cont[i].row_id == ids[i]);
            CHECK(bin[i].row_id == ids[i]);
            ranks.insert(cont[i].rank);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK((cont[i].rank < cont[j].rank) == (cont[i].key < cont[j].key));
                if (oracle::dominates(pts.row(i), pts.row(j))) {
                    CHECK(bin[i].rank < bin[j].rank);
                    CHECK(cont[i].rank < cont[j].rank);
                }
            }
        }
        CHECK(*ranks.rbegin() == ranks.size() - 1);
    }
}

TEST_CASE("zigzag ranks survive increasing affine maps of the raw objectives") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(40);
        const Matrix raw = random_points(rng, n, 2, trial % 2 == 0);
        Matrix mapped = raw;
        for (std::size_t k = 0; k < 2; ++k) {
            const double a = rng.uniform(0.5, 20), b = rng.uniform(-50, 50);
            for (std::size_t i = 0; i < n; ++i) {
                mapped(i, k) = a * raw(i, k) + b;
            }
        }
        const auto ids = iota_ids(n);
        const auto r1 = zigzag_rank(ids, MinMax::over(raw).apply(raw));
        const auto r2 = zigzag_rank(ids, MinMax::over(mapped).apply(mapped));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                // Rounding in the normalization may split or merge exact ties, never reverse an order.
                if (r1[i].rank < r1[j].rank && std::abs(r1[i].key - r1[j].key) > 1e-9) {
                    CHECK(r2[i].rank < r2[j].rank);
                }
            }
        }
    }
}

TEST_CASE("weights steer the key") {
    // Objective 0 weighted twice: the point good on objective 0 wins.
    const auto r = zigzag_rank(iota_ids(2), points({{0.2, 0.8}, {0.8, 0.2}}), DominanceKind::continuous, V{2, 1});
    CHECK(r[0].rank == 0);
    CHECK(r[1].rank == 1);
}

TEST_CASE("generational distance examples") {
    CHECK(generational_distance(points({{0, 1}, {1, 0}}), points({{0, 1}, {0.5, 0.5}, {1, 0}})) == 0.0);
    CHECK(generational_distance(points({{0.5, 0.5}}), points({{0, 0}})) == doctest::Approx(0.7071).epsilon(1e-4));
    CHECK(generational_distance(points({{0, 1}, {1, 0}}), points({{0, 0}})) == 1.0);
    CHECK_THROWS_AS(generational_distance(Matrix(), points({{0, 0}})), std::invalid_argument);
    CHECK_THROWS_AS(generational_distance(points({{0, 0}}), Matrix()), std::invalid_argument);
}

TEST_CASE("generational distance: zero iff every point lies on the front; kernels agree") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix front = random_points(rng, 1 + rng.below(30), 2, true);
        Matrix sol;
        bool all_on = true;
        for (std::size_t i = 0; i < 1 + rng.below(10); ++i) {
            if (rng.below(3) == 0) {
                sol.append_row(random_points(rng, 1, 2, true).row(0));
                bool on = false;
                for (std::size_t t = 0; t < front.rows(); ++t) {
                    on = on || (front(t, 0) == sol(sol.rows() - 1, 0) && front(t, 1) == sol(sol.rows() - 1, 1));
                }
                all_on = all_on && on;
            } else {
                sol.append_row(front.row(rng.below(front.rows())));
            }
        }
        const double gd = generational_distance(sol, front);
        CHECK((gd == 0.0) == all_on);
        CHECK(gd == generational_distance_serial(sol, front));
    }
    const Matrix big_sol = random_points(rng, 3000, 2, false);
    const Matrix big_front = random_points(rng, 2000, 2, false);
    CHECK(generational_distance(big_sol, big_front) == generational_distance_serial(big_sol, big_front));
}
