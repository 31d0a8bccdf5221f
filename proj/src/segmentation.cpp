#include "sceneparse/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace sceneparse {

namespace {

struct DisjointSet {
    std::vector<int> parent;
    std::vector<int> rank;
    std::vector<int> size;

    explicit DisjointSet(int n) : parent(n), rank(n, 0), size(n, 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    int join(int a, int b) {
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        if (rank[a] == rank[b]) ++rank[a];
        return a;
    }
};

struct Edge {
    float weight;
    int a, b;
};

// Separable gaussian blur per channel; sigma == 0 keeps the image as-is.
std::vector<float> smooth_channel(const Image& img, int c, double sigma) {
    const int w = img.width(), h = img.height();
    std::vector<float> plane(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) plane[static_cast<size_t>(y) * w + x] = img.at(x, y, c);
    if (sigma <= 0.0) return plane;

    const int radius = std::max(1, static_cast<int>(std::ceil(sigma * 3.0)));
    std::vector<float> kernel(radius + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        kernel[i] = static_cast<float>(std::exp(-0.5 * (i / sigma) * (i / sigma)));
        sum += (i == 0 ? 1.0 : 2.0) * kernel[i];
    }
    for (auto& k : kernel) k = static_cast<float>(k / sum);

    std::vector<float> tmp(plane.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = kernel[0] * plane[static_cast<size_t>(y) * w + x];
            for (int i = 1; i <= radius; ++i) {
                int xl = std::max(x - i, 0), xr = std::min(x + i, w - 1);
                acc += kernel[i] * (plane[static_cast<size_t>(y) * w + xl] +
                                    plane[static_cast<size_t>(y) * w + xr]);
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = kernel[0] * tmp[static_cast<size_t>(y) * w + x];
            for (int i = 1; i <= radius; ++i) {
                int yu = std::max(y - i, 0), yd = std::min(y + i, h - 1);
                acc += kernel[i] * (tmp[static_cast<size_t>(yu) * w + x] +
                                    tmp[static_cast<size_t>(yd) * w + x]);
            }
            plane[static_cast<size_t>(y) * w + x] = acc;
        }
    }
    return plane;
}

}  // namespace

SuperPixelMap oversegment(const Image& image, const SegmentParams& params) {
    const int w = image.width(), h = image.height();
    if (w < 1 || h < 1) throw InvalidInput("oversegment: empty image");
    const int n = w * h;
    if (params.min_size < 1 || params.min_size > n)
        throw InvalidInput("oversegment: min_size out of range");
    if (params.scale <= 0.0) throw InvalidInput("oversegment: scale must be positive");

    std::vector<float> r = smooth_channel(image, 0, params.sigma);
    std::vector<float> g = smooth_channel(image, 1, params.sigma);
    std::vector<float> b = smooth_channel(image, 2, params.sigma);

    auto color_dist = [&](int p, int q) {
        float dr = r[p] - r[q], dg = g[p] - g[q], db = b[p] - b[q];
        return std::sqrt(dr * dr + dg * dg + db * db);
    };

    // 4-connected pixel grid keeps every resulting component 4-connected.
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(2) * n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int p = y * w + x;
            if (x + 1 < w) edges.push_back({color_dist(p, p + 1), p, p + 1});
            if (y + 1 < h) edges.push_back({color_dist(p, p + w), p, p + w});
        }
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });

    DisjointSet ds(n);
    std::vector<float> threshold(n, static_cast<float>(params.scale));
    for (const Edge& e : edges) {
        int ra = ds.find(e.a), rb = ds.find(e.b);
        if (ra == rb) continue;
        if (e.weight <= threshold[ra] && e.weight <= threshold[rb]) {
            int root = ds.join(ra, rb);
            threshold[root] = e.weight + static_cast<float>(params.scale) / ds.size[root];
        }
    }

    // Merge undersized components along the cheapest edges first.
    for (const Edge& e : edges) {
        int ra = ds.find(e.a), rb = ds.find(e.b);
        if (ra != rb && (ds.size[ra] < params.min_size || ds.size[rb] < params.min_size))
            ds.join(ra, rb);
    }

    // Relabel to contiguous ids in first-pixel scan order for determinism.
    SuperPixelMap map;
    map.width = w;
    map.height = h;
    map.segment_id.assign(n, -1);
    std::vector<int> root_to_id(n, -1);
    int next_id = 0;
    for (int p = 0; p < n; ++p) {
        int root = ds.find(p);
        if (root_to_id[root] < 0) root_to_id[root] = next_id++;
        map.segment_id[p] = root_to_id[root];
    }

    map.segments.resize(next_id);
    for (int i = 0; i < next_id; ++i) {
        map.segments[i].id = i;
        map.segments[i].min_x = w;
        map.segments[i].min_y = h;
        map.segments[i].max_x = -1;
        map.segments[i].max_y = -1;
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            Segment& s = map.segments[map.at(x, y)];
            s.pixels.push_back(y * w + x);
            s.min_x = std::min(s.min_x, x);
            s.min_y = std::min(s.min_y, y);
            s.max_x = std::max(s.max_x, x);
            s.max_y = std::max(s.max_y, y);
        }
    }
    return map;
}

std::vector<std::pair<int, int>> adjacency(const SuperPixelMap& map) {
    std::set<std::pair<int, int>> pairs;
    const int w = map.width, h = map.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int a = map.at(x, y);
            if (x + 1 < w) {
                int b = map.at(x + 1, y);
                if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
            }
            if (y + 1 < h) {
                int b = map.at(x, y + 1);
                if (a != b) pairs.emplace(std::min(a, b), std::max(a, b));
            }
        }
    }
    return {pairs.begin(), pairs.end()};
}

Image colorize_segments(const SuperPixelMap& map) {
    Image out(map.width, map.height);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            uint32_t id = static_cast<uint32_t>(map.at(x, y));
            uint32_t hash = id * 2654435761u;
            out.at(x, y, 0) = static_cast<uint8_t>(hash >> 16);
            out.at(x, y, 1) = static_cast<uint8_t>(hash >> 8);
            out.at(x, y, 2) = static_cast<uint8_t>(hash);
        }
    }
    return out;
}

}  // namespace sceneparse
