#pragma once

#include <vector>

#include "sceneparse/image.hpp"

namespace sceneparse {

struct UndefinedMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseReport {
    double per_pixel = 0.0;
    double per_category = 0.0;
    std::vector<double> category_rates;           // -1 for labels absent from gt
    std::vector<std::vector<long long>> confusion;  // [gt][pred]
    long long void_pixels = 0;
    long long labeled_pixels = 0;
};

/// Fraction of correctly labeled non-void pixels over all images.
double per_pixel_rate(const std::vector<LabelMask>& predictions,
                      const std::vector<LabelMask>& ground_truth);

/// Mean per-label rate over labels with ground-truth support.
double per_category_rate(const std::vector<LabelMask>& predictions,
                         const std::vector<LabelMask>& ground_truth, int label_count);

ParseReport compute_report(const std::vector<LabelMask>& predictions,
                           const std::vector<LabelMask>& ground_truth, int label_count);

/// NDCG@k_r with binary relevance and natural logs; 0 when nothing relevant.
double ndcg(const std::vector<int>& relevance, int k_r);

}  // namespace sceneparse
