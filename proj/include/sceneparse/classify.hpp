#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sceneparse/features.hpp"
#include "sceneparse/retrieval.hpp"
#include "sceneparse/segmentation.hpp"

namespace sceneparse {

struct NoNeighbors : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Leave-one-out per-pixel accuracy of each training image for k = 1..k_max.
struct AccuracyTable {
    Eigen::MatrixXd A;        // image_count x k_max, entries in [0,1]
    std::vector<char> valid;  // rows of images with labeled pixels and votes

    int k_max() const { return static_cast<int>(A.cols()); }
};

/// Labels of the first k neighbors, counted per label id.
std::vector<int> count_neighbor_labels(const std::vector<Neighbor>& neighbors, int k,
                                       const TrainingIndex& index);

/// Eq-style likelihood ratio for one label; `epsilon` is additive smoothing
/// on all four counts (0 recovers the raw ratio when no count is zero).
double likelihood_ratio(const std::vector<int>& neighbor_counts, int label, int k,
                        const TrainingIndex& index, double epsilon = 1.0);

/// argmax over labels of the likelihood ratio; ties broken by larger raw
/// neighbor count, then smaller label id. Throws NoNeighbors on empty input.
int classify_superpixel(const std::vector<Neighbor>& neighbors, int k, const TrainingIndex& index,
                        double epsilon = 1.0);

/// Per-super-pixel chosen k and positive likelihood ratio per label.
struct LabelLikelihoodField {
    int k_star = 0;
    Eigen::MatrixXd likelihoods;  // n_superpixels x label_count
};

LabelLikelihoodField build_likelihood_field(
    const std::vector<std::vector<Neighbor>>& neighbors_per_superpixel, int k_star,
    const TrainingIndex& index, double epsilon = 1.0);

/// Everything needed to replay one training image as a leave-one-out query.
struct TrainingImageData {
    SuperPixelMap map;
    LabelMask mask;
    std::vector<Eigen::VectorXd> reduced;  // per super-pixel, segment order
};

struct AccuracyTableOptions {
    int k_m = 1000;
    double tau = 0.3;
    double epsilon = 1.0;
    int k_max = 50;
    int max_images = -1;  // cap on leave-one-out rows; -1 = all
    std::function<void(int, int)> progress;
};

/// A[t][k]: parse image t against the other N_I - 1 images with fixed k and
/// score per-pixel accuracy of the initial (pre-smoothing) labels.
AccuracyTable build_accuracy_table(const std::vector<TrainingImageData>& images,
                                   const TrainingIndex& index,
                                   const AccuracyTableOptions& options = {});

/// Eq-7 transfer: k* = argmax_k sum of A over the retrieval set's top k_r
/// rows; ties take the smallest k. All rows invalid -> `fallback_k`.
int select_adaptive_k(const RetrievalSet& rset, const AccuracyTable& table, int fallback_k = 20);

}  // namespace sceneparse
