#include "sceneparse/classify.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <numeric>

#include "sceneparse/parallel.hpp"

namespace sceneparse {

std::vector<int> count_neighbor_labels(const std::vector<Neighbor>& neighbors, int k,
                                       const TrainingIndex& index) {
    std::vector<int> counts(index.label_count, 0);
    int limit = std::min<int>(k, static_cast<int>(neighbors.size()));
    for (int i = 0; i < limit; ++i) ++counts[index.labels[neighbors[i].index]];
    return counts;
}

double likelihood_ratio(const std::vector<int>& neighbor_counts, int label, int k,
                        const TrainingIndex& index, double epsilon) {
    if (label < 0 || label >= index.label_count)
        throw InvalidInput("likelihood_ratio: label out of range");
    if (k < 1) throw InvalidInput("likelihood_ratio: k must be >= 1");

    const double n_l_nn = neighbor_counts[label];
    const double n_l_d = static_cast<double>(index.global_label_counts[label]);
    const double total_nn = std::min<double>(
        k, std::accumulate(neighbor_counts.begin(), neighbor_counts.end(), 0));
    const double total_d = static_cast<double>(index.total_labeled());
    const double n_rest_nn = total_nn - n_l_nn;
    const double n_rest_d = total_d - n_l_d;

    const double num = (n_l_nn + epsilon) / (n_l_d + epsilon);
    const double den = (n_rest_nn + epsilon) / (n_rest_d + epsilon);
    return num / den;
}

namespace {

// Shared argmax with the tie rules: ratio, then raw count, then smaller id.
int argmax_label(const std::vector<int>& counts, int k, const TrainingIndex& index,
                 double epsilon) {
    int best = 0;
    double best_ratio = -1.0;
    for (int l = 0; l < index.label_count; ++l) {
        double ratio = likelihood_ratio(counts, l, k, index, epsilon);
        bool better = ratio > best_ratio ||
                      (ratio == best_ratio && counts[l] > counts[best]) ||
                      (ratio == best_ratio && counts[l] == counts[best] && l < best);
        if (better) {
            best = l;
            best_ratio = ratio;
        }
    }
    return best;
}

}  // namespace

int classify_superpixel(const std::vector<Neighbor>& neighbors, int k, const TrainingIndex& index,
                        double epsilon) {
    if (neighbors.empty()) throw NoNeighbors("classify_superpixel: empty neighbor list");
    auto counts = count_neighbor_labels(neighbors, k, index);
    return argmax_label(counts, k, index, epsilon);
}

LabelLikelihoodField build_likelihood_field(
    const std::vector<std::vector<Neighbor>>& neighbors_per_superpixel, int k_star,
    const TrainingIndex& index, double epsilon) {
    LabelLikelihoodField field;
    field.k_star = k_star;
    field.likelihoods.resize(static_cast<Eigen::Index>(neighbors_per_superpixel.size()),
                             index.label_count);
    for (size_t i = 0; i < neighbors_per_superpixel.size(); ++i) {
        const auto& neighbors = neighbors_per_superpixel[i];
        if (neighbors.empty()) {
            // No neighbors: fall back to the global label prior.
            double total = static_cast<double>(index.total_labeled());
            for (int l = 0; l < index.label_count; ++l)
                field.likelihoods(i, l) =
                    (static_cast<double>(index.global_label_counts[l]) + epsilon) / (total + epsilon);
        } else {
            auto counts = count_neighbor_labels(neighbors, k_star, index);
            for (int l = 0; l < index.label_count; ++l)
                field.likelihoods(i, l) = likelihood_ratio(counts, l, k_star, index, epsilon);
        }
    }
    return field;
}

AccuracyTable build_accuracy_table(const std::vector<TrainingImageData>& images,
                                   const TrainingIndex& index,
                                   const AccuracyTableOptions& options) {
    const int n_images = static_cast<int>(images.size());
    AccuracyTable table;
    table.A = Eigen::MatrixXd::Zero(n_images, options.k_max);
    table.valid.assign(n_images, 0);

    int row_count = n_images;
    if (options.max_images >= 0 && options.max_images < n_images) row_count = options.max_images;

    std::mutex progress_mutex;
    std::atomic<int> done{0};

    parallel_for(row_count, [&](int t) {
        const TrainingImageData& img = images[t];
        long long labeled_pixels = 0;
        for (uint8_t v : img.mask.data())
            if (v != kVoidLabel) ++labeled_pixels;
        if (labeled_pixels == 0 || img.reduced.empty()) return;

        KnnFilter loo{t, nullptr};
        RetrievalSet rset;
        try {
            rset = build_retrieval_set(img.reduced, index, options.k_m, options.tau, loo);
        } catch (const DegenerateRetrieval&) {
            return;  // row stays invalid
        }
        auto allowed = rset.allowed_mask(index.image_count);
        KnnFilter filter{t, &allowed};

        // One kNN query per super-pixel, then an incremental sweep over k.
        std::vector<long long> correct(options.k_max, 0);
        for (const Segment& seg : img.map.segments) {
            auto neighbors = knn_superpixels(img.reduced[seg.id], index, options.k_max, filter);
            if (neighbors.empty()) continue;
            std::vector<int> counts(index.label_count, 0);
            for (int k = 1; k <= options.k_max; ++k) {
                if (k <= static_cast<int>(neighbors.size()))
                    ++counts[index.labels[neighbors[k - 1].index]];
                int pred = argmax_label(counts, k, index, options.epsilon);
                long long hits = 0;
                for (int p : seg.pixels)
                    if (img.mask.data()[p] == pred) ++hits;
                correct[k - 1] += hits;
            }
        }
        for (int k = 1; k <= options.k_max; ++k)
            table.A(t, k - 1) = static_cast<double>(correct[k - 1]) / labeled_pixels;
        table.valid[t] = 1;

        if (options.progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            options.progress(++done, row_count);
        }
    });
    return table;
}

int select_adaptive_k(const RetrievalSet& rset, const AccuracyTable& table, int fallback_k) {
    if (rset.k_r < 1) throw InvalidInput("select_adaptive_k: empty retrieval set");
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(table.k_max());
    bool any_valid = false;
    for (int u = 0; u < rset.k_r; ++u) {
        int t = rset.image_ids[u];
        if (t < 0 || t >= static_cast<int>(table.valid.size()) || !table.valid[t]) continue;
        sums += table.A.row(t).transpose();
        any_valid = true;
    }
    if (!any_valid) {
        std::fprintf(stderr, "select_adaptive_k: no valid accuracy rows in retrieval set, "
                             "falling back to k=%d\n", fallback_k);
        return fallback_k;
    }
    int best_k = 1;
    for (int k = 2; k <= table.k_max(); ++k)
        if (sums[k - 1] > sums[best_k - 1]) best_k = k;  // ties keep the smaller k
    return best_k;
}

}  // namespace sceneparse
