#pragma once

#include <random>
#include <vector>

#include "sceneparse/image.hpp"
#include "sceneparse/retrieval.hpp"
#include "sceneparse/segmentation.hpp"

namespace test_helpers {

/// Builds a SuperPixelMap directly from a per-pixel id grid (row-major).
inline sceneparse::SuperPixelMap map_from_grid(int width, int height,
                                               const std::vector<int>& ids) {
    sceneparse::SuperPixelMap map;
    map.width = width;
    map.height = height;
    map.segment_id = ids;
    int count = 0;
    for (int id : ids) count = std::max(count, id + 1);
    map.segments.resize(count);
    for (int i = 0; i < count; ++i) {
        map.segments[i].id = i;
        map.segments[i].min_x = width;
        map.segments[i].min_y = height;
        map.segments[i].max_x = -1;
        map.segments[i].max_y = -1;
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            auto& seg = map.segments[ids[y * width + x]];
            seg.pixels.push_back(y * width + x);
            seg.min_x = std::min(seg.min_x, x);
            seg.min_y = std::min(seg.min_y, y);
            seg.max_x = std::max(seg.max_x, x);
            seg.max_y = std::max(seg.max_y, y);
        }
    return map;
}

/// Index over explicit 2-D (or n-D) points; every point labeled and assigned
/// to a training image.
inline sceneparse::TrainingIndex index_from_points(
    const std::vector<Eigen::VectorXd>& points, const std::vector<int>& image_of,
    const std::vector<int>& labels, int image_count, int label_count) {
    sceneparse::TrainingIndex index;
    index.T.resize(points.front().size(), static_cast<Eigen::Index>(points.size()));
    for (size_t i = 0; i < points.size(); ++i) index.T.col(i) = points[i];
    index.image_of = image_of;
    index.labels = labels;
    index.image_count = image_count;
    index.label_count = label_count;
    index.per_image_counts.assign(image_count, 0);
    index.global_label_counts.assign(label_count, 0);
    for (int img : image_of) ++index.per_image_counts[img];
    for (int l : labels) ++index.global_label_counts[l];
    index.validate();
    return index;
}

inline Eigen::VectorXd point2(double x, double y) {
    Eigen::VectorXd v(2);
    v << x, y;
    return v;
}

}  // namespace test_helpers
