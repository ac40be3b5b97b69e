#include "gmor/rect_overlap_rmq.hpp"
#include "gmor/synthetic.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gmor;
using Catch::Approx;

TEST_CASE("segment tree updates, pinned cases", "[rect]") {
    SegmentTreeMax tree(8);
    CHECK(tree.root_max() == 0.0);
    {
        const auto [v, idx] = tree.argmax();
        CHECK(v == 0.0);
        CHECK(idx == 1);
    }
    tree.update(4, 8, 1.0);
    CHECK(tree.root_max() == 1.0);
    {
        const auto [v, idx] = tree.argmax();
        CHECK(v == 1.0);
        CHECK(idx == 4);
    }
    tree.update(1, 4, 1.0);
    CHECK(tree.root_max() == 2.0);  // index 4 stacked
    tree.update(4, 8, -1.0);
    CHECK(tree.root_max() == 1.0);

    CHECK_THROWS_AS(tree.update(0, 3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tree.update(2, 9, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tree.update(5, 4, 1.0), std::invalid_argument);
}

TEST_CASE("segment tree equals a leaf array under random updates", "[rect][oracle]") {
    detail::Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 31);
        SegmentTreeMax tree(n);
        std::vector<double> leaves(static_cast<std::size_t>(n), 0.0);
        const int updates = 3 + static_cast<int>(rng.uniform01() * 40);
        for (int u = 0; u < updates; ++u) {
            int a = 1 + static_cast<int>(rng.uniform01() * n);
            int b = 1 + static_cast<int>(rng.uniform01() * n);
            if (a > b) std::swap(a, b);
            a = std::min(a, n);
            b = std::min(b, n);
            const double w = std::floor(rng.uniform(-4, 5));
            tree.update(a, b, w);
            for (int i = a; i <= b; ++i) leaves[static_cast<std::size_t>(i - 1)] += w;

            double best = leaves[0];
            int best_idx = 1;
            for (int i = 1; i < n; ++i)
                if (leaves[static_cast<std::size_t>(i)] > best) {
                    best = leaves[static_cast<std::size_t>(i)];
                    best_idx = i + 1;
                }
            CHECK(tree.root_max() == best);
            const auto [v, idx] = tree.argmax();
            CHECK(v == best);
            CHECK(idx == best_idx);
        }
    }
}

TEST_CASE("max rect overlap, pinned cases", "[rect]") {
    SECTION("single rectangle") {
        const auto r = max_rect_overlap({{0, 0, 1, 1, 1}});
        CHECK(r.weight == 1.0);
        CHECK(oracle::rect_coverage_at({{0, 0, 1, 1, 1}}, r.x, r.y) == 1.0);
    }
    SECTION("weighted overlap of two rectangles") {
        const std::vector<WeightedRect> rects{{0, 0, 2, 2, 1}, {1, 1, 3, 3, 2}, {5, 5, 6, 6, 1}};
        const auto r = max_rect_overlap(rects);
        CHECK(r.weight == 3.0);
        CHECK(r.x >= 1.0);
        CHECK(r.x <= 2.0);
        CHECK(r.y >= 1.0);
        CHECK(r.y <= 2.0);
    }
    SECTION("disjoint squares") {
        const auto r = max_rect_overlap({{0, 0, 1, 1, 1}, {5, 0, 6, 1, 1}});
        CHECK(r.weight == 1.0);
    }
    SECTION("touching closed rectangles count as overlapping") {
        const auto r = max_rect_overlap({{0, 0, 1, 1, 1}, {1, 1, 2, 2, 1}});
        CHECK(r.weight == 2.0);
        CHECK(r.x == 1.0);
        CHECK(r.y == 1.0);
    }
    SECTION("empty input rejected") { CHECK_THROWS_AS(max_rect_overlap({}), std::invalid_argument); }
}

TEST_CASE("max rect overlap equals brute force on integer grids", "[rect][oracle]") {
    detail::Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 49);
        std::vector<WeightedRect> rects;
        rects.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double x0 = std::floor(rng.uniform(0, 8)), x1 = std::floor(rng.uniform(0, 8));
            const double y0 = std::floor(rng.uniform(0, 8)), y1 = std::floor(rng.uniform(0, 8));
            const double w = 0.5 * (1.0 + std::floor(rng.uniform(0, 6)));
            rects.push_back({std::min(x0, x1), std::min(y0, y1), std::max(x0, x1),
                             std::max(y0, y1), w});
        }
        const auto fast = max_rect_overlap(rects);
        const double brute = oracle::rect_overlap_brute(rects);
        REQUIRE(fast.weight == brute);  // exact equality
        // the returned point recounts to the same weight
        CHECK(oracle::rect_coverage_at(rects, fast.x, fast.y) == fast.weight);
    }
}

TEST_CASE("max rect overlap properties", "[rect]") {
    detail::Rng rng(88);

    SECTION("pairwise-intersecting families reach the total weight") {
        // Helly for axis-aligned boxes: pairwise intersection implies a
        // common point, so W must equal the sum of all weights.
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 2 + static_cast<int>(rng.uniform01() * 15);
            std::vector<WeightedRect> rects;
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                // all rectangles contain a band around the origin
                const double x0 = rng.uniform(-3, -0.1), x1 = rng.uniform(0.1, 3);
                const double y0 = rng.uniform(-3, -0.1), y1 = rng.uniform(0.1, 3);
                const double w = rng.uniform(0.1, 2.0);
                rects.push_back({x0, y0, x1, y1, w});
                total += w;
            }
            CHECK(max_rect_overlap(rects).weight == Approx(total).margin(1e-12));
        }
    }

    SECTION("adding a rectangle never decreases the maximum") {
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 1 + static_cast<int>(rng.uniform01() * 20);
            std::vector<WeightedRect> rects;
            for (int i = 0; i < n; ++i) {
                const double x0 = rng.uniform(-4, 4), y0 = rng.uniform(-4, 4);
                rects.push_back({x0, y0, x0 + rng.uniform(0, 3), y0 + rng.uniform(0, 3),
                                 rng.uniform(0.1, 1.5)});
            }
            const double before = max_rect_overlap(rects).weight;
            rects.push_back({-1, -1, 1, 1, 0.7});
            CHECK(max_rect_overlap(rects).weight >= before - 1e-12);
        }
    }
}
