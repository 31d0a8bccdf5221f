#include "sceneparse/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace sceneparse {

namespace {
constexpr double kDistanceClamp = 1e-9;  // 1/delta stays finite for exact duplicates
}

long long TrainingIndex::total_labeled() const {
    return std::accumulate(global_label_counts.begin(), global_label_counts.end(), 0LL);
}

void TrainingIndex::validate() const {
    if (T.cols() != size() || static_cast<int>(labels.size()) != size())
        throw InvalidInput("TrainingIndex: column/label count mismatch");
    long long total = std::accumulate(per_image_counts.begin(), per_image_counts.end(), 0LL);
    if (total != size()) throw InvalidInput("TrainingIndex: per-image counts do not sum to size");
    if (static_cast<int>(per_image_counts.size()) != image_count)
        throw InvalidInput("TrainingIndex: image count mismatch");
    for (int l : labels)
        if (l < 0 || l >= label_count) throw InvalidInput("TrainingIndex: label out of range");
    for (int img : image_of)
        if (img < 0 || img >= image_count) throw InvalidInput("TrainingIndex: image id out of range");
}

std::vector<Neighbor> knn_superpixels(const Eigen::VectorXd& query, const TrainingIndex& index,
                                      int k_m, const KnnFilter& filter) {
    if (k_m < 1) throw InvalidInput("knn_superpixels: k_m must be >= 1");
    if (index.size() == 0) throw std::runtime_error("knn_superpixels: empty index");

    std::vector<Neighbor> all;
    all.reserve(index.size());
    for (int i = 0; i < index.size(); ++i) {
        int img = index.image_of[i];
        if (img == filter.exclude_image) continue;
        if (filter.allowed_images && !(*filter.allowed_images)[img]) continue;
        all.push_back({i, (index.T.col(i) - query).norm()});
    }
    auto cmp = [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.index < b.index;
    };
    size_t keep = std::min<size_t>(k_m, all.size());
    std::partial_sort(all.begin(), all.begin() + keep, all.end(), cmp);
    all.resize(keep);
    return all;
}

std::vector<char> RetrievalSet::allowed_mask(int image_count) const {
    std::vector<char> mask(image_count, 0);
    for (int i = 0; i < k_r; ++i) mask[image_ids[i]] = 1;
    return mask;
}

RetrievalSet build_retrieval_set(const std::vector<Eigen::VectorXd>& queries,
                                 const TrainingIndex& index, int k_m, double tau,
                                 const KnnFilter& filter) {
    if (queries.empty()) throw InvalidInput("build_retrieval_set: no queries");
    if (tau <= 0.0 || tau > 1.0) throw InvalidInput("build_retrieval_set: tau out of (0,1]");
    index.validate();

    const int n_q = static_cast<int>(queries.size());
    std::vector<double> votes(index.image_count, 0.0);
    std::vector<char> matched(index.size(), 0);  // the unique index set S

    for (const Eigen::VectorXd& q : queries) {
        auto neighbors = knn_superpixels(q, index, k_m, filter);

        // eta_i \ S, then keep the nearest survivor per training image.
        std::vector<char> image_seen(index.image_count, 0);
        std::vector<Neighbor> survivors;
        for (const Neighbor& nb : neighbors) {
            if (matched[nb.index]) continue;
            int img = index.image_of[nb.index];
            if (image_seen[img]) continue;  // earlier == nearer; ties keep the earlier
            image_seen[img] = 1;
            survivors.push_back(nb);
        }
        for (const Neighbor& nb : survivors) {
            votes[index.image_of[nb.index]] += 1.0 / std::max(nb.distance, kDistanceClamp);
            matched[nb.index] = 1;
        }
    }

    // NormalizeAndSort: v_j / min(n_q, n_t^j), descending, ties by image id.
    std::vector<int> order;
    for (int j = 0; j < index.image_count; ++j) {
        if (votes[j] > 0.0) {
            votes[j] /= std::min(n_q, index.per_image_counts[j]);
            order.push_back(j);
        }
    }
    if (order.empty()) throw DegenerateRetrieval("build_retrieval_set: no votes accumulated");
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (votes[a] != votes[b]) return votes[a] > votes[b];
        return a < b;
    });

    RetrievalSet rset;
    rset.tau = tau;
    rset.k_m = k_m;
    double total = 0.0;
    for (int j : order) {
        rset.image_ids.push_back(j);
        rset.scores.push_back(votes[j]);
        total += votes[j];
    }
    double cum = 0.0;
    for (size_t u = 0; u < rset.scores.size(); ++u) {
        cum += rset.scores[u];
        if (cum / total >= tau) {
            rset.k_r = static_cast<int>(u) + 1;
            break;
        }
    }
    return rset;
}

}  // namespace sceneparse
