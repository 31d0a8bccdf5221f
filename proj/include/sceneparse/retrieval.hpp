#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "sceneparse/image.hpp"

namespace sceneparse {

struct DegenerateRetrieval : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reduced features and labels for every labeled training super-pixel.
struct TrainingIndex {
    Eigen::MatrixXd T;                          // (N_c - 1) x M, one column per super-pixel
    std::vector<int> image_of;                  // column -> training image index
    std::vector<int> labels;                    // column -> label id
    std::vector<int> per_image_counts;          // labeled super-pixels per image
    std::vector<long long> global_label_counts; // n(l, D)
    int image_count = 0;
    int label_count = 0;

    int size() const { return static_cast<int>(image_of.size()); }
    long long total_labeled() const;
    void validate() const;
};

struct Neighbor {
    int index;        // column in T
    double distance;  // euclidean
};

/// Restricts a kNN query. `exclude_image` removes one training image
/// (leave-one-out); `allowed_images`, when non-null, keeps only flagged images.
struct KnnFilter {
    int exclude_image = -1;
    const std::vector<char>* allowed_images = nullptr;
};

/// Exact nearest neighbors by linear scan, ascending distance, ties by index.
std::vector<Neighbor> knn_superpixels(const Eigen::VectorXd& query, const TrainingIndex& index,
                                      int k_m, const KnnFilter& filter = {});

struct RetrievalSet {
    std::vector<int> image_ids;   // descending score
    std::vector<double> scores;   // normalized v, same order
    int k_r = 0;
    double tau = 0.0;
    int k_m = 0;

    std::vector<int> top_images() const {
        return {image_ids.begin(), image_ids.begin() + k_r};
    }
    std::vector<char> allowed_mask(int image_count) const;
};

/// Greedy unique super-pixel matching: each training super-pixel votes its
/// reciprocal distance for its image at most once across all queries; per
/// query and per training image only the nearest unmatched neighbor survives.
/// Scores are normalized by min(n_q, n_t) and cut at the smallest prefix
/// holding at least `tau` of the total mass.
RetrievalSet build_retrieval_set(const std::vector<Eigen::VectorXd>& queries,
                                 const TrainingIndex& index, int k_m, double tau,
                                 const KnnFilter& filter = {});

}  // namespace sceneparse
