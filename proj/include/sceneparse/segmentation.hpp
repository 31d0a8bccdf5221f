#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sceneparse/image.hpp"

namespace sceneparse {

struct SegmentParams {
    double scale = 100.0;   // merge threshold constant
    double sigma = 0.8;     // gaussian pre-smoothing
    int min_size = 50;      // smallest allowed segment area
};

struct Segment {
    int id = 0;
    std::vector<int> pixels;  // flat row-major pixel indices
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    int area() const { return static_cast<int>(pixels.size()); }
};

/// Partition of an image into 4-connected super-pixels with contiguous ids.
struct SuperPixelMap {
    int width = 0;
    int height = 0;
    std::vector<int> segment_id;    // per pixel, row-major
    std::vector<Segment> segments;  // indexed by id

    int at(int x, int y) const { return segment_id[static_cast<size_t>(y) * width + x]; }
    int count() const { return static_cast<int>(segments.size()); }
};

/// Graph-based oversegmentation: merge pixels whose connecting edge weight is
/// below an adaptively growing per-component threshold, then force min_size.
SuperPixelMap oversegment(const Image& image, const SegmentParams& params = {});

/// Unordered pairs (a,b), a<b, of segments sharing a 4-adjacent pixel pair.
std::vector<std::pair<int, int>> adjacency(const SuperPixelMap& map);

/// Debug view: every segment painted a distinct deterministic color.
Image colorize_segments(const SuperPixelMap& map);

}  // namespace sceneparse
