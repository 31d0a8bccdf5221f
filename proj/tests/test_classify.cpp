#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "sceneparse/classify.hpp"

using namespace sceneparse;
using test_helpers::index_from_points;
using test_helpers::point2;

namespace {

// Index whose global counts we can set freely; geometry is irrelevant for
// ratio tests, so points are spread on a line.
TrainingIndex counts_index(const std::vector<int>& labels, int label_count) {
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> image_of(labels.size(), 0);
    for (size_t i = 0; i < labels.size(); ++i) pts.push_back(point2(static_cast<double>(i), 0));
    return index_from_points(pts, image_of, labels, 1, label_count);
}

std::vector<Neighbor> first_neighbors(const std::vector<int>& indices) {
    std::vector<Neighbor> out;
    for (size_t i = 0; i < indices.size(); ++i)
        out.push_back({indices[i], static_cast<double>(i + 1)});
    return out;
}

}  // namespace

TEST_CASE("symmetric counts give ratio 1 at epsilon 0") {
    // Global pool: 10 of label a(0), 10 of label b(1). Two neighbors, one each.
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(0);
    for (int i = 0; i < 10; ++i) labels.push_back(1);
    auto index = counts_index(labels, 2);
    auto nn = first_neighbors({0, 10});
    CHECK(likelihood_ratio(count_neighbor_labels(nn, 2, index), 0, 2, index, 0.0) ==
          doctest::Approx(1.0));
}

TEST_CASE("skewed counts: three of a rare label against one common") {
    // D = {a:10, b:30}, NN = {a,a,a,b} -> L(a) = (3/10)/(1/30) = 9.
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(0);
    for (int i = 0; i < 30; ++i) labels.push_back(1);
    auto index = counts_index(labels, 2);
    auto nn = first_neighbors({0, 1, 2, 10});
    auto counts = count_neighbor_labels(nn, 4, index);
    CHECK(likelihood_ratio(counts, 0, 4, index, 0.0) == doctest::Approx(9.0));
    CHECK(likelihood_ratio(counts, 1, 4, index, 0.0) == doctest::Approx(1.0 / 9.0));
    CHECK(classify_superpixel(nn, 4, index, 0.0) == 0);
}

TEST_CASE("additive smoothing rescues an all-one-label neighborhood") {
    // D = {a:10, b:10}, NN = {a,a,a}: epsilon 1 gives ((3+1)/(10+1))/((0+1)/(10+1)) = 4.
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(0);
    for (int i = 0; i < 10; ++i) labels.push_back(1);
    auto index = counts_index(labels, 2);
    auto counts = count_neighbor_labels(first_neighbors({0, 1, 2}), 3, index);
    CHECK(likelihood_ratio(counts, 0, 3, index, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("out-of-range label is rejected") {
    auto index = counts_index({0, 1}, 2);
    auto counts = count_neighbor_labels(first_neighbors({0}), 1, index);
    CHECK_THROWS_AS(likelihood_ratio(counts, 5, 1, index), InvalidInput);
    CHECK_THROWS_AS(likelihood_ratio(counts, -1, 1, index), InvalidInput);
}

TEST_CASE("k=1 reduces to nearest-neighbor classification") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i < 4 ? i : pick(rng));
    auto index = counts_index(labels, 4);
    for (int trial = 0; trial < 20; ++trial) {
        int nearest = std::uniform_int_distribution<int>(0, 39)(rng);
        auto nn = first_neighbors({nearest, (nearest + 7) % 40, (nearest + 13) % 40});
        // epsilon 0: the single neighbor drives its own ratio to infinity,
        // so k = 1 is exactly nearest-neighbor regardless of global counts.
        CHECK(classify_superpixel(nn, 1, index, 0.0) == index.labels[nearest]);
    }
}

TEST_CASE("unanimous neighborhoods return the shared label") {
    std::vector<int> labels = {2, 2, 2, 0, 1};
    auto index = counts_index(labels, 3);
    CHECK(classify_superpixel(first_neighbors({0, 1, 2}), 3, index) == 2);
}

TEST_CASE("empty neighbor list raises NoNeighbors") {
    auto index = counts_index({0, 1}, 2);
    CHECK_THROWS_AS(classify_superpixel({}, 1, index), NoNeighbors);
}

TEST_CASE("argmax is invariant to scaling the global counts") {
    std::mt19937 rng(19);
    std::uniform_int_distribution<int> pick(0, 2);
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(i < 3 ? i : pick(rng));
    auto index = counts_index(labels, 3);
    auto scaled = index;
    for (auto& c : scaled.global_label_counts) c *= 7;

    for (int trial = 0; trial < 15; ++trial) {
        std::vector<int> picks;
        for (int i = 0; i < 5; ++i) picks.push_back(std::uniform_int_distribution<int>(0, 29)(rng));
        auto nn = first_neighbors(picks);
        CHECK(classify_superpixel(nn, 5, index, 0.0) == classify_superpixel(nn, 5, scaled, 0.0));
    }
}

TEST_CASE("count_neighbor_labels truncates at k") {
    std::vector<int> labels = {0, 1, 1, 2};
    auto index = counts_index(labels, 3);
    auto counts = count_neighbor_labels(first_neighbors({0, 1, 2, 3}), 2, index);
    CHECK(counts == std::vector<int>{1, 1, 0});
}

TEST_CASE("adaptive k follows the retrieval set's accuracy rows") {
    AccuracyTable table;
    table.A = Eigen::MatrixXd::Zero(3, 50);
    table.valid = {1, 1, 1};
    table.A(0, 11) = 0.9;  // image 0 peaks at k = 12 (column index k-1)
    table.A(1, 5) = 0.8;   // image 1 peaks at k = 6
    table.A(2, 5) = 0.7;

    RetrievalSet one;
    one.image_ids = {0};
    one.scores = {1.0};
    one.k_r = 1;
    CHECK(select_adaptive_k(one, table) == 12);

    RetrievalSet two;
    two.image_ids = {1, 2};
    two.scores = {1.0, 0.5};
    two.k_r = 2;
    CHECK(select_adaptive_k(two, table) == 6);
}

TEST_CASE("adaptive k ties resolve to the smallest k and range is bounded") {
    AccuracyTable table;
    table.A = Eigen::MatrixXd::Constant(2, 50, 0.5);  // flat rows: all k tie
    table.valid = {1, 1};
    RetrievalSet rset;
    rset.image_ids = {0, 1};
    rset.scores = {1.0, 1.0};
    rset.k_r = 2;
    int k = select_adaptive_k(rset, table);
    CHECK(k == 1);
    CHECK(k >= 1);
    CHECK(k <= 50);
}

TEST_CASE("adaptive k exhaustive-scan oracle on random tables") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        AccuracyTable table;
        int n = 6;
        table.A = Eigen::MatrixXd::Zero(n, 50);
        table.valid.assign(n, 1);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 50; ++k) table.A(i, k) = u(rng);

        RetrievalSet rset;
        rset.image_ids = {0, 2, 4};
        rset.scores = {1.0, 0.8, 0.6};
        rset.k_r = 1 + trial % 3;

        int best_k = 1;
        double best = -1.0;
        for (int k = 1; k <= 50; ++k) {
            double s = 0.0;
            for (int i = 0; i < rset.k_r; ++i) s += table.A(rset.image_ids[i], k - 1);
            if (s > best) {
                best = s;
                best_k = k;
            }
        }
        CHECK(select_adaptive_k(rset, table) == best_k);
    }
}

TEST_CASE("all-invalid rows fall back to the default k") {
    AccuracyTable table;
    table.A = Eigen::MatrixXd::Zero(2, 50);
    table.valid = {0, 0};
    RetrievalSet rset;
    rset.image_ids = {0, 1};
    rset.scores = {1.0, 0.5};
    rset.k_r = 2;
    CHECK(select_adaptive_k(rset, table, 20) == 20);
}

TEST_CASE("likelihood field entries are positive and finite") {
    std::vector<int> labels = {0, 0, 1, 2};
    auto index = counts_index(labels, 3);
    std::vector<std::vector<Neighbor>> per_sp = {first_neighbors({0, 2}), first_neighbors({3}),
                                                 {}};
    auto field = build_likelihood_field(per_sp, 2, index);
    CHECK(field.k_star == 2);
    CHECK(field.likelihoods.rows() == 3);
    CHECK(field.likelihoods.cols() == 3);
    CHECK((field.likelihoods.array() > 0.0).all());
    CHECK(field.likelihoods.allFinite());
}

TEST_CASE("accuracy table on a separable two-image fixture") {
    using test_helpers::map_from_grid;
    // Two 4x2 training images, each split into two 2x2 super-pixels with
    // clearly separated reduced features per label.
    auto build_image = [&](double offset) {
        TrainingImageData data;
        std::vector<int> ids = {0, 0, 1, 1, 0, 0, 1, 1};
        data.map = map_from_grid(4, 2, ids);
        data.mask = LabelMask(4, 2);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 4; ++x) data.mask.at(x, y) = x < 2 ? 0 : 1;
        data.reduced = {point2(0 + offset, 0), point2(10 + offset, 0)};
        return data;
    };
    std::vector<TrainingImageData> images = {build_image(0.0), build_image(0.3)};

    std::vector<Eigen::VectorXd> pts = {point2(0, 0), point2(10, 0), point2(0.3, 0),
                                        point2(10.3, 0)};
    auto index = index_from_points(pts, {0, 0, 1, 1}, {0, 1, 0, 1}, 2, 2);

    AccuracyTableOptions options;
    options.k_max = 3;
    options.k_m = 10;
    auto table = build_accuracy_table(images, index, options);

    REQUIRE(table.A.rows() == 2);
    REQUIRE(table.k_max() == 3);
    CHECK(table.valid[0] == 1);
    CHECK(table.valid[1] == 1);
    // Nearest cross-image neighbor always carries the right label.
    CHECK(table.A(0, 0) == doctest::Approx(1.0));
    CHECK(table.A(1, 0) == doctest::Approx(1.0));
    CHECK((table.A.array() >= 0.0).all());
    CHECK((table.A.array() <= 1.0).all());
}
