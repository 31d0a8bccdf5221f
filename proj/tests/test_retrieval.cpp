#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "sceneparse/retrieval.hpp"

using namespace sceneparse;
using test_helpers::index_from_points;
using test_helpers::point2;

namespace {

// 3-image fixture with exactly traceable votes. Image 0 holds a nearest
// match (distance 1) for every query; image 1 two far points; image 2 one.
struct HandFixture {
    TrainingIndex index;
    std::vector<Eigen::VectorXd> queries;

    HandFixture() {
        std::vector<Eigen::VectorXd> pts = {
            point2(0, 1),  point2(4, 1),  point2(0, 5), point2(4, 5),  // image 0
            point2(10, 10), point2(11, 10),                            // image 1
            point2(20, 20),                                            // image 2
        };
        std::vector<int> image_of = {0, 0, 0, 0, 1, 1, 2};
        std::vector<int> labels = {0, 0, 1, 1, 0, 1, 0};
        index = index_from_points(pts, image_of, labels, 3, 2);
        queries = {point2(0, 0), point2(4, 0), point2(0, 4), point2(4, 4)};
    }
};

}  // namespace

TEST_CASE("knn returns a stored column first with zero distance") {
    std::vector<Eigen::VectorXd> pts = {point2(1, 2), point2(3, 4), point2(5, 6)};
    auto index = index_from_points(pts, {0, 0, 1}, {0, 1, 0}, 2, 2);
    auto nn = knn_superpixels(point2(3, 4), index, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].index == 1);
    CHECK(nn[0].distance == doctest::Approx(0.0));
    CHECK(nn[1].distance >= nn[0].distance);
}

TEST_CASE("knn with k larger than the index returns every column") {
    std::vector<Eigen::VectorXd> pts = {point2(0, 0), point2(1, 0)};
    auto index = index_from_points(pts, {0, 1}, {0, 0}, 2, 1);
    CHECK(knn_superpixels(point2(0, 0), index, 100).size() == 2);
}

TEST_CASE("knn matches an exhaustive-scan oracle on random points") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> image_of, labels;
    for (int i = 0; i < 50; ++i) {
        pts.push_back(point2(u(rng), u(rng)));
        image_of.push_back(i % 5);
        labels.push_back(i % 3);
    }
    auto index = index_from_points(pts, image_of, labels, 5, 3);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd q = point2(u(rng), u(rng));
        auto nn = knn_superpixels(q, index, 5);

        std::vector<std::pair<double, int>> oracle;
        for (int i = 0; i < 50; ++i) oracle.emplace_back((pts[i] - q).norm(), i);
        std::sort(oracle.begin(), oracle.end());

        REQUIRE(nn.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(nn[i].index == oracle[static_cast<size_t>(i)].second);
            CHECK(nn[i].distance == doctest::Approx(oracle[static_cast<size_t>(i)].first));
        }
    }
}

TEST_CASE("knn distance ordering is invariant to positive feature scaling") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> image_of(30, 0), labels(30, 0);
    for (int i = 0; i < 30; ++i) pts.push_back(point2(u(rng), u(rng)));
    auto index = index_from_points(pts, image_of, labels, 1, 1);

    std::vector<Eigen::VectorXd> scaled;
    for (const auto& p : pts) scaled.push_back(3.7 * p);
    auto scaled_index = index_from_points(scaled, image_of, labels, 1, 1);

    Eigen::VectorXd q = point2(u(rng), u(rng));
    auto a = knn_superpixels(q, index, 10);
    auto b = knn_superpixels(3.7 * q, scaled_index, 10);
    for (int i = 0; i < 10; ++i) CHECK(a[static_cast<size_t>(i)].index == b[static_cast<size_t>(i)].index);
}

TEST_CASE("knn filters exclude images") {
    std::vector<Eigen::VectorXd> pts = {point2(0, 0), point2(1, 0), point2(2, 0)};
    auto index = index_from_points(pts, {0, 1, 2}, {0, 0, 0}, 3, 1);

    KnnFilter filter;
    filter.exclude_image = 0;
    auto nn = knn_superpixels(point2(0, 0), index, 3, filter);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].index == 1);

    std::vector<char> allowed = {0, 0, 1};
    KnnFilter only_last;
    only_last.allowed_images = &allowed;
    nn = knn_superpixels(point2(0, 0), index, 3, only_last);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0].index == 2);
}

TEST_CASE("single training image dominates any tau") {
    std::vector<Eigen::VectorXd> pts = {point2(0, 0), point2(5, 5)};
    auto index = index_from_points(pts, {0, 0}, {0, 1}, 1, 2);
    auto set = build_retrieval_set({point2(1, 1)}, index, 10, 1.0);
    CHECK(set.image_ids == std::vector<int>{0});
    CHECK(set.k_r == 1);
}

TEST_CASE("hand-traced fixture: scores, ranking, and tau cutoff") {
    HandFixture fx;
    auto set = build_retrieval_set(fx.queries, fx.index, 100, 0.3);

    // Image 0: every query matches a unique super-pixel at distance 1, so the
    // raw vote is 4; normalized by min(4, 4) = 4 -> 1.0.
    // Image 1: queries at (0,0) and (4,0) keep their nearest unmatched point
    // there; normalized by min(4, 2) = 2.
    // Image 2: single point at (20,20); normalized by min(4, 1) = 1.
    const double v1 = (1.0 / std::sqrt(200.0) + 1.0 / std::sqrt(149.0)) / 2.0;
    const double v2 = 1.0 / std::sqrt(800.0);

    REQUIRE(set.image_ids.size() == 3);
    CHECK(set.image_ids == std::vector<int>{0, 1, 2});
    CHECK(set.scores[0] == doctest::Approx(1.0));
    CHECK(set.scores[1] == doctest::Approx(v1));
    CHECK(set.scores[2] == doctest::Approx(v2));

    // 1.0 / (1.0 + v1 + v2) > 0.3, so one image suffices.
    CHECK(set.k_r == 1);
    CHECK(set.top_images() == std::vector<int>{0});

    auto wide = build_retrieval_set(fx.queries, fx.index, 100, 0.95);
    CHECK(wide.k_r == 2);
}

TEST_CASE("tau cutoff is minimal") {
    HandFixture fx;
    for (double tau : {0.1, 0.3, 0.5, 0.8, 0.95, 1.0}) {
        auto set = build_retrieval_set(fx.queries, fx.index, 100, tau);
        double total = 0.0, prefix = 0.0;
        for (double s : set.scores) total += s;
        for (int i = 0; i < set.k_r; ++i) prefix += set.scores[static_cast<size_t>(i)];
        CHECK(prefix / total >= tau);
        if (set.k_r > 1) {
            double shorter = prefix - set.scores[static_cast<size_t>(set.k_r - 1)];
            CHECK(shorter / total < tau);
        }
    }
}

TEST_CASE("each training super-pixel votes at most once") {
    // Two identical queries against a single-point image: the point is
    // matched by the first query and removed from the pool, so the raw vote
    // equals one reciprocal distance, not two.
    std::vector<Eigen::VectorXd> pts = {point2(0, 3), point2(50, 50), point2(51, 50)};
    auto index = index_from_points(pts, {0, 1, 1}, {0, 0, 1}, 2, 2);
    auto set = build_retrieval_set({point2(0, 0), point2(0, 0)}, index, 10, 1.0);

    REQUIRE(set.image_ids[0] == 0);
    // raw vote 1/3 from one match, normalized by min(n_q=2, n_t=1) = 1.
    CHECK(set.scores[0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("per query, only the nearest super-pixel per image survives") {
    // Image 0 has two points near the query; only the closer one may vote.
    std::vector<Eigen::VectorXd> pts = {point2(0, 1), point2(0, 2), point2(9, 9)};
    auto index = index_from_points(pts, {0, 0, 1}, {0, 0, 0}, 2, 1);
    auto set = build_retrieval_set({point2(0, 0)}, index, 10, 1.0);

    REQUIRE(set.image_ids[0] == 0);
    // Single vote 1/1, normalized by min(1, 2) = 1.
    CHECK(set.scores[0] == doctest::Approx(1.0));
}

TEST_CASE("copy-of-query image ranks first against distant distractors") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::VectorXd> queries;
    for (int i = 0; i < 4; ++i) queries.push_back(point2(u(rng), u(rng)));

    std::vector<Eigen::VectorXd> pts;
    std::vector<int> image_of;
    for (const auto& q : queries) {
        pts.push_back(q);  // image 0 = exact copies
        image_of.push_back(0);
    }
    for (int i = 0; i < 4; ++i) {
        pts.push_back(point2(100 + u(rng), 100 + u(rng)));
        image_of.push_back(1);
        pts.push_back(point2(-100 + u(rng), -100 + u(rng)));
        image_of.push_back(2);
    }
    std::vector<int> labels(pts.size(), 0);
    auto index = index_from_points(pts, image_of, labels, 3, 1);

    auto set = build_retrieval_set(queries, index, 100, 0.3);
    CHECK(set.image_ids[0] == 0);
    CHECK(set.scores[0] > set.scores[1]);
}

TEST_CASE("zero-distance votes are clamped, not infinite") {
    std::vector<Eigen::VectorXd> pts = {point2(2, 2)};
    auto index = index_from_points(pts, {0}, {0}, 1, 1);
    auto set = build_retrieval_set({point2(2, 2)}, index, 5, 0.3);
    CHECK(std::isfinite(set.scores[0]));
    CHECK(set.scores[0] > 0.0);
}

TEST_CASE("scores are non-increasing") {
    HandFixture fx;
    auto set = build_retrieval_set(fx.queries, fx.index, 100, 0.3);
    for (size_t i = 1; i < set.scores.size(); ++i) CHECK(set.scores[i] <= set.scores[i - 1]);
}

TEST_CASE("empty effective index raises degenerate retrieval") {
    std::vector<Eigen::VectorXd> pts = {point2(0, 0)};
    auto index = index_from_points(pts, {0}, {0}, 1, 1);
    KnnFilter filter;
    filter.exclude_image = 0;
    CHECK_THROWS_AS(build_retrieval_set({point2(1, 1)}, index, 5, 0.3, filter),
                    DegenerateRetrieval);
}

TEST_CASE("allowed mask flags the retained images") {
    HandFixture fx;
    auto set = build_retrieval_set(fx.queries, fx.index, 100, 0.95);
    auto mask = set.allowed_mask(3);
    REQUIRE(mask.size() == 3);
    CHECK(mask[0] == 1);
    CHECK(mask[1] == 1);
    CHECK(mask[2] == 0);
}
