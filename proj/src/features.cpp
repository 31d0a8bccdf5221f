#include "sceneparse/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace sceneparse {

namespace {

constexpr double kPi = std::numbers::pi;

struct GradientField {
    std::vector<float> orientation;  // [0, pi)
    std::vector<float> magnitude;
    int width = 0, height = 0;
};

GradientField compute_gradients(const Image& img) {
    GradientField g;
    g.width = img.width();
    g.height = img.height();
    g.orientation.resize(img.pixel_count());
    g.magnitude.resize(img.pixel_count());
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            int xl = std::max(x - 1, 0), xr = std::min(x + 1, g.width - 1);
            int yu = std::max(y - 1, 0), yd = std::min(y + 1, g.height - 1);
            double gx = (img.luminance(xr, y) - img.luminance(xl, y)) * 0.5;
            double gy = (img.luminance(x, yd) - img.luminance(x, yu)) * 0.5;
            double theta = std::atan2(gy, gx);
            if (theta < 0) theta += kPi;
            if (theta >= kPi) theta -= kPi;
            size_t p = static_cast<size_t>(y) * g.width + x;
            g.orientation[p] = static_cast<float>(theta);
            g.magnitude[p] = static_cast<float>(std::hypot(gx, gy));
        }
    }
    return g;
}

void l1_normalize(Eigen::Ref<Eigen::VectorXd> v) {
    double s = v.sum();
    if (s > 0) v /= s;
}

// Oriented-gradient histogram over the given flat pixel indices.
Eigen::VectorXd gradient_histogram(const GradientField& g, const std::vector<int>& pixels,
                                   int orient_bins, int mag_bins) {
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(orient_bins) * mag_bins);
    const double mag_scale = mag_bins / 128.0;  // central diffs stay below 128
    for (int p : pixels) {
        int ob = std::min(static_cast<int>(g.orientation[p] / kPi * orient_bins), orient_bins - 1);
        int mb = std::min(static_cast<int>(g.magnitude[p] * mag_scale), mag_bins - 1);
        hist[static_cast<Eigen::Index>(ob) * mag_bins + mb] += 1.0;
    }
    l1_normalize(hist);
    return hist;
}

// Pixels within chebyshev-chamfer distance <= radius of the segment, via a
// two-pass distance transform over the expanded bounding box.
std::vector<int> dilated_pixels(const Segment& seg, int radius, int width, int height) {
    int x0 = std::max(seg.min_x - radius, 0);
    int y0 = std::max(seg.min_y - radius, 0);
    int x1 = std::min(seg.max_x + radius, width - 1);
    int y1 = std::min(seg.max_y + radius, height - 1);
    int cw = x1 - x0 + 1, ch = y1 - y0 + 1;
    const int inf = radius + cw + ch;
    std::vector<int> dist(static_cast<size_t>(cw) * ch, inf);
    for (int p : seg.pixels) {
        int x = p % width - x0, y = p / width - y0;
        dist[static_cast<size_t>(y) * cw + x] = 0;
    }
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
            int& d = dist[static_cast<size_t>(y) * cw + x];
            if (x > 0) d = std::min(d, dist[static_cast<size_t>(y) * cw + x - 1] + 1);
            if (y > 0) d = std::min(d, dist[static_cast<size_t>(y - 1) * cw + x] + 1);
        }
    for (int y = ch - 1; y >= 0; --y)
        for (int x = cw - 1; x >= 0; --x) {
            int& d = dist[static_cast<size_t>(y) * cw + x];
            if (x + 1 < cw) d = std::min(d, dist[static_cast<size_t>(y) * cw + x + 1] + 1);
            if (y + 1 < ch) d = std::min(d, dist[static_cast<size_t>(y + 1) * cw + x] + 1);
        }
    std::vector<int> out;
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            if (dist[static_cast<size_t>(y) * cw + x] <= radius)
                out.push_back((y + y0) * width + (x + x0));
    return out;
}

// Coverage fraction of the segment per cell of a grid over [x0,x1]x[y0,y1].
Eigen::VectorXd mask_grid(const Segment& seg, int grid, int x0, int y0, int x1, int y1,
                          int img_width) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid);
    double bw = x1 - x0 + 1.0, bh = y1 - y0 + 1.0;
    std::vector<double> cell_area(static_cast<size_t>(grid) * grid, 0.0);
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
            double cw = bw / grid, chh = bh / grid;
            cell_area[static_cast<size_t>(gy) * grid + gx] = std::max(cw * chh, 1e-12);
        }
    for (int p : seg.pixels) {
        int x = p % img_width, y = p / img_width;
        if (x < x0 || x > x1 || y < y0 || y > y1) continue;
        int gx = std::min(static_cast<int>((x - x0) / bw * grid), grid - 1);
        int gy = std::min(static_cast<int>((y - y0) / bh * grid), grid - 1);
        out[static_cast<Eigen::Index>(gy) * grid + gx] += 1.0;
    }
    for (int i = 0; i < grid * grid; ++i) out[i] = std::min(out[i] / cell_area[i], 1.0);
    return out;
}

// Box-averaged RGB thumbnail of the bounding box; optionally zero outside the mask.
Eigen::VectorXd thumbnail(const Image& img, const Segment& seg, int grid, bool masked,
                          const std::vector<char>& membership) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid * 3);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid);
    double bw = seg.max_x - seg.min_x + 1.0, bh = seg.max_y - seg.min_y + 1.0;
    for (int y = seg.min_y; y <= seg.max_y; ++y) {
        for (int x = seg.min_x; x <= seg.max_x; ++x) {
            size_t p = static_cast<size_t>(y) * img.width() + x;
            if (masked && !membership[p]) continue;
            int gx = std::min(static_cast<int>((x - seg.min_x) / bw * grid), grid - 1);
            int gy = std::min(static_cast<int>((y - seg.min_y) / bh * grid), grid - 1);
            Eigen::Index cell = static_cast<Eigen::Index>(gy) * grid + gx;
            for (int c = 0; c < 3; ++c) out[cell * 3 + c] += img.at(x, y, c) / 255.0;
            counts[cell] += 1.0;
        }
    }
    for (Eigen::Index cell = 0; cell < counts.size(); ++cell)
        if (counts[cell] > 0)
            for (int c = 0; c < 3; ++c) out[cell * 3 + c] /= counts[cell];
    return out;
}

Eigen::VectorXd color_histogram(const Image& img, const std::vector<int>& pixels, int bins) {
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins) * 3);
    const int w = img.width();
    for (int p : pixels) {
        int x = p % w, y = p / w;
        for (int c = 0; c < 3; ++c) {
            int b = std::min(img.at(x, y, c) * bins / 256, bins - 1);
            hist[static_cast<Eigen::Index>(c) * bins + b] += 1.0;
        }
    }
    l1_normalize(hist);
    return hist;
}

// Whole-image scene layout: orientation energy per spatial cell.
Eigen::VectorXd gist_descriptor(const Image& img, const GradientField& g, int grid,
                                int orient_bins) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid * orient_bins);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            size_t p = static_cast<size_t>(y) * img.width() + x;
            int gx = std::min(x * grid / img.width(), grid - 1);
            int gy = std::min(y * grid / img.height(), grid - 1);
            int ob = std::min(static_cast<int>(g.orientation[p] / kPi * orient_bins),
                              orient_bins - 1);
            out[(static_cast<Eigen::Index>(gy) * grid + gx) * orient_bins + ob] += g.magnitude[p];
        }
    }
    l1_normalize(out);
    return out;
}

std::vector<int> half_region(const Segment& seg, int img_width, char side) {
    double cx = (seg.min_x + seg.max_x) / 2.0, cy = (seg.min_y + seg.max_y) / 2.0;
    std::vector<int> out;
    for (int p : seg.pixels) {
        int x = p % img_width, y = p / img_width;
        bool keep = (side == 't') ? y <= cy : (side == 'b') ? y >= cy
                                  : (side == 'l') ? x <= cx : x >= cx;
        if (keep) out.push_back(p);
    }
    return out;
}

}  // namespace

const char* to_string(Channel c) {
    switch (c) {
        case Channel::CenteredMask: return "centered_mask";
        case Channel::BoundingBox: return "bounding_box";
        case Channel::Area: return "area";
        case Channel::AbsoluteMask: return "absolute_mask";
        case Channel::TopHeight: return "top_height";
        case Channel::TextonHist: return "texton_hist";
        case Channel::DilatedTextonHist: return "dilated_texton_hist";
        case Channel::SiftHist: return "sift_hist";
        case Channel::DilatedSiftHist: return "dilated_sift_hist";
        case Channel::SiftHistBottom: return "sift_hist_bottom";
        case Channel::SiftHistTop: return "sift_hist_top";
        case Channel::SiftHistRight: return "sift_hist_right";
        case Channel::SiftHistLeft: return "sift_hist_left";
        case Channel::MeanColor: return "mean_color";
        case Channel::ColorStd: return "color_std";
        case Channel::ColorHist: return "color_hist";
        case Channel::DilatedColorHist: return "dilated_color_hist";
        case Channel::ColorThumbnail: return "color_thumbnail";
        case Channel::MaskedColorThumbnail: return "masked_color_thumbnail";
        case Channel::Gist: return "gist";
    }
    return "unknown";
}

Channel channel_from_string(const std::string& name) {
    static const Channel all[] = {
        Channel::CenteredMask, Channel::BoundingBox, Channel::Area, Channel::AbsoluteMask,
        Channel::TopHeight, Channel::TextonHist, Channel::DilatedTextonHist, Channel::SiftHist,
        Channel::DilatedSiftHist, Channel::SiftHistBottom, Channel::SiftHistTop,
        Channel::SiftHistRight, Channel::SiftHistLeft, Channel::MeanColor, Channel::ColorStd,
        Channel::ColorHist, Channel::DilatedColorHist, Channel::ColorThumbnail,
        Channel::MaskedColorThumbnail, Channel::Gist};
    for (Channel c : all)
        if (name == to_string(c)) return c;
    throw InvalidInput("unknown feature channel: " + name);
}

FeatureRegistry FeatureRegistry::defaults() {
    FeatureRegistry r;
    r.enabled = {Channel::CenteredMask, Channel::BoundingBox, Channel::Area,
                 Channel::TopHeight,    Channel::MeanColor,   Channel::ColorStd,
                 Channel::ColorHist,    Channel::TextonHist,  Channel::ColorThumbnail};
    return r;
}

FeatureRegistry FeatureRegistry::full_table() {
    FeatureRegistry r;
    r.enabled = {Channel::CenteredMask,   Channel::BoundingBox,
                 Channel::Area,           Channel::AbsoluteMask,
                 Channel::TopHeight,      Channel::TextonHist,
                 Channel::DilatedTextonHist, Channel::SiftHist,
                 Channel::DilatedSiftHist, Channel::SiftHistBottom,
                 Channel::SiftHistTop,    Channel::SiftHistRight,
                 Channel::SiftHistLeft,   Channel::MeanColor,
                 Channel::ColorStd,       Channel::ColorHist,
                 Channel::DilatedColorHist, Channel::ColorThumbnail,
                 Channel::MaskedColorThumbnail, Channel::Gist};
    return r;
}

int FeatureRegistry::channel_dim(Channel c) const {
    switch (c) {
        case Channel::CenteredMask:
        case Channel::AbsoluteMask: return mask_size * mask_size;
        case Channel::BoundingBox: return 2;
        case Channel::Area:
        case Channel::TopHeight: return 1;
        case Channel::TextonHist:
        case Channel::DilatedTextonHist:
        case Channel::SiftHist:
        case Channel::DilatedSiftHist:
        case Channel::SiftHistBottom:
        case Channel::SiftHistTop:
        case Channel::SiftHistRight:
        case Channel::SiftHistLeft: return tex_orient_bins * tex_mag_bins;
        case Channel::MeanColor:
        case Channel::ColorStd: return 3;
        case Channel::ColorHist:
        case Channel::DilatedColorHist: return 3 * color_hist_bins;
        case Channel::ColorThumbnail:
        case Channel::MaskedColorThumbnail: return 3 * thumb_size * thumb_size;
        case Channel::Gist: return gist_grid * gist_grid * gist_orient_bins;
    }
    throw InvalidInput("unknown channel");
}

std::vector<ChannelEntry> FeatureRegistry::layout() const {
    if (enabled.empty()) throw InvalidInput("FeatureRegistry: no channels enabled");
    std::vector<ChannelEntry> entries;
    int offset = 0;
    for (Channel c : enabled) {
        int dim = channel_dim(c);
        entries.push_back({c, to_string(c), offset, dim});
        offset += dim;
    }
    return entries;
}

int FeatureRegistry::total_dim() const {
    int total = 0;
    for (Channel c : enabled) total += channel_dim(c);
    return total;
}

std::vector<FeatureVector> extract(const Image& image, const SuperPixelMap& map,
                                   const FeatureRegistry& registry) {
    if (map.width != image.width() || map.height != image.height())
        throw InvalidInput("extract: map does not belong to image");
    const auto entries = registry.layout();
    const int dim = registry.total_dim();
    const int w = image.width(), h = image.height();

    bool need_grad = false, need_gist = false;
    for (const auto& e : entries) {
        switch (e.channel) {
            case Channel::TextonHist:
            case Channel::DilatedTextonHist:
            case Channel::SiftHist:
            case Channel::DilatedSiftHist:
            case Channel::SiftHistBottom:
            case Channel::SiftHistTop:
            case Channel::SiftHistRight:
            case Channel::SiftHistLeft: need_grad = true; break;
            case Channel::Gist: need_gist = true; break;
            default: break;
        }
    }
    GradientField grad;
    if (need_grad || need_gist) grad = compute_gradients(image);
    Eigen::VectorXd gist;
    if (need_gist) gist = gist_descriptor(image, grad, registry.gist_grid, registry.gist_orient_bins);

    std::vector<FeatureVector> out;
    out.reserve(map.segments.size());
    std::vector<char> membership(image.pixel_count(), 0);

    for (const Segment& seg : map.segments) {
        if (seg.pixels.empty()) throw std::logic_error("extract: empty segment");
        for (int p : seg.pixels) membership[p] = 1;

        std::vector<int> dilated;
        auto need_dilated = [&]() -> const std::vector<int>& {
            if (dilated.empty()) dilated = dilated_pixels(seg, registry.dilation_radius, w, h);
            return dilated;
        };

        FeatureVector v = FeatureVector::Zero(dim);
        for (const auto& e : entries) {
            auto block = v.segment(e.offset, e.length);
            switch (e.channel) {
                case Channel::CenteredMask:
                    block = mask_grid(seg, registry.mask_size, seg.min_x, seg.min_y, seg.max_x,
                                      seg.max_y, w);
                    break;
                case Channel::AbsoluteMask:
                    block = mask_grid(seg, registry.mask_size, 0, 0, w - 1, h - 1, w);
                    break;
                case Channel::BoundingBox:
                    block[0] = (seg.max_x - seg.min_x + 1.0) / w;
                    block[1] = (seg.max_y - seg.min_y + 1.0) / h;
                    break;
                case Channel::Area:
                    block[0] = static_cast<double>(seg.area()) / (static_cast<double>(w) * h);
                    break;
                case Channel::TopHeight:
                    block[0] = static_cast<double>(seg.min_y) / h;
                    break;
                case Channel::TextonHist:
                case Channel::SiftHist:
                    block = gradient_histogram(grad, seg.pixels, registry.tex_orient_bins,
                                               registry.tex_mag_bins);
                    break;
                case Channel::DilatedTextonHist:
                case Channel::DilatedSiftHist:
                    block = gradient_histogram(grad, need_dilated(), registry.tex_orient_bins,
                                               registry.tex_mag_bins);
                    break;
                case Channel::SiftHistTop:
                    block = gradient_histogram(grad, half_region(seg, w, 't'),
                                               registry.tex_orient_bins, registry.tex_mag_bins);
                    break;
                case Channel::SiftHistBottom:
                    block = gradient_histogram(grad, half_region(seg, w, 'b'),
                                               registry.tex_orient_bins, registry.tex_mag_bins);
                    break;
                case Channel::SiftHistLeft:
                    block = gradient_histogram(grad, half_region(seg, w, 'l'),
                                               registry.tex_orient_bins, registry.tex_mag_bins);
                    break;
                case Channel::SiftHistRight:
                    block = gradient_histogram(grad, half_region(seg, w, 'r'),
                                               registry.tex_orient_bins, registry.tex_mag_bins);
                    break;
                case Channel::MeanColor:
                case Channel::ColorStd: {
                    Eigen::Vector3d mean = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
                    for (int p : seg.pixels) {
                        int x = p % w, y = p / w;
                        for (int c = 0; c < 3; ++c) {
                            double val = image.at(x, y, c) / 255.0;
                            mean[c] += val;
                            sq[c] += val * val;
                        }
                    }
                    mean /= seg.area();
                    sq /= seg.area();
                    if (e.channel == Channel::MeanColor)
                        block = mean;
                    else
                        block = (sq - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
                    break;
                }
                case Channel::ColorHist:
                    block = color_histogram(image, seg.pixels, registry.color_hist_bins);
                    break;
                case Channel::DilatedColorHist:
                    block = color_histogram(image, need_dilated(), registry.color_hist_bins);
                    break;
                case Channel::ColorThumbnail:
                    block = thumbnail(image, seg, registry.thumb_size, false, membership);
                    break;
                case Channel::MaskedColorThumbnail:
                    block = thumbnail(image, seg, registry.thumb_size, true, membership);
                    break;
                case Channel::Gist:
                    block = gist;
                    break;
            }
        }
        out.push_back(std::move(v));
        for (int p : seg.pixels) membership[p] = 0;
    }
    return out;
}

std::optional<int> assign_training_label(const Segment& segment, const LabelMask& ground_truth) {
    std::map<int, int> counts;
    for (int p : segment.pixels) {
        int label = ground_truth.data()[p];
        if (label != kVoidLabel) ++counts[label];
    }
    int best = -1, best_count = 0;
    for (const auto& [label, count] : counts) {
        if (count > best_count) {  // smallest id wins exact ties
            best = label;
            best_count = count;
        }
    }
    if (best >= 0 && 2 * best_count >= segment.area()) return best;
    return std::nullopt;
}

}  // namespace sceneparse
