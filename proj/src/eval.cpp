#include "sceneparse/eval.hpp"

#include <algorithm>
#include <cmath>

namespace sceneparse {

ParseReport compute_report(const std::vector<LabelMask>& predictions,
                           const std::vector<LabelMask>& ground_truth, int label_count) {
    if (predictions.size() != ground_truth.size())
        throw InvalidInput("compute_report: prediction/ground-truth count mismatch");

    ParseReport report;
    report.confusion.assign(label_count, std::vector<long long>(label_count, 0));
    std::vector<long long> gt_counts(label_count, 0), correct(label_count, 0);

    for (size_t i = 0; i < predictions.size(); ++i) {
        const LabelMask& pred = predictions[i];
        const LabelMask& gt = ground_truth[i];
        if (pred.width() != gt.width() || pred.height() != gt.height())
            throw InvalidInput("compute_report: mask dimension mismatch");
        for (size_t p = 0; p < gt.data().size(); ++p) {
            int g = gt.data()[p];
            if (g == kVoidLabel) {
                ++report.void_pixels;
                continue;
            }
            if (g >= label_count) throw InvalidInput("compute_report: gt label out of range");
            int q = pred.data()[p];
            ++gt_counts[g];
            ++report.labeled_pixels;
            if (q >= 0 && q < label_count) ++report.confusion[g][q];
            if (q == g) ++correct[g];
        }
    }
    if (report.labeled_pixels == 0)
        throw UndefinedMetric("compute_report: zero non-void ground-truth pixels");

    long long total_correct = 0;
    double category_sum = 0.0;
    int present = 0;
    report.category_rates.assign(label_count, -1.0);
    for (int l = 0; l < label_count; ++l) {
        total_correct += correct[l];
        if (gt_counts[l] > 0) {
            report.category_rates[l] = static_cast<double>(correct[l]) / gt_counts[l];
            category_sum += report.category_rates[l];
            ++present;
        }
    }
    report.per_pixel = static_cast<double>(total_correct) / report.labeled_pixels;
    report.per_category = present > 0 ? category_sum / present : 0.0;
    return report;
}

double per_pixel_rate(const std::vector<LabelMask>& predictions,
                      const std::vector<LabelMask>& ground_truth) {
    int max_label = 0;
    for (const auto& gt : ground_truth)
        for (uint8_t v : gt.data())
            if (v != kVoidLabel) max_label = std::max<int>(max_label, v);
    return compute_report(predictions, ground_truth, max_label + 1).per_pixel;
}

double per_category_rate(const std::vector<LabelMask>& predictions,
                         const std::vector<LabelMask>& ground_truth, int label_count) {
    return compute_report(predictions, ground_truth, label_count).per_category;
}

double ndcg(const std::vector<int>& relevance, int k_r) {
    if (k_r < 1) throw InvalidInput("ndcg: k_r must be >= 1");
    if (k_r > static_cast<int>(relevance.size()))
        throw InvalidInput("ndcg: k_r exceeds list length");

    long long relevant_total = std::count(relevance.begin(), relevance.end(), 1);
    if (relevant_total == 0) return 0.0;

    double dcg = 0.0;
    for (int i = 1; i <= k_r; ++i)
        dcg += (std::pow(2.0, relevance[i - 1]) - 1.0) / std::log(i + 1.0);

    double ideal = 0.0;
    long long ideal_hits = std::min<long long>(relevant_total, k_r);
    for (int i = 1; i <= ideal_hits; ++i) ideal += 1.0 / std::log(i + 1.0);
    return dcg / ideal;
}

}  // namespace sceneparse
