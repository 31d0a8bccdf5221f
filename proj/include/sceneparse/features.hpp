#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sceneparse/image.hpp"
#include "sceneparse/segmentation.hpp"

namespace sceneparse {

// Super-pixel descriptor channels. Histogram-style channels use a small
// oriented-gradient filter bank; the sift/texton entries are stand-ins
// computed from the same bank over different support regions.
enum class Channel {
    CenteredMask,
    BoundingBox,
    Area,
    AbsoluteMask,
    TopHeight,
    TextonHist,
    DilatedTextonHist,
    SiftHist,
    DilatedSiftHist,
    SiftHistBottom,
    SiftHistTop,
    SiftHistRight,
    SiftHistLeft,
    MeanColor,
    ColorStd,
    ColorHist,
    DilatedColorHist,
    ColorThumbnail,
    MaskedColorThumbnail,
    Gist,
};

const char* to_string(Channel c);
Channel channel_from_string(const std::string& name);

struct ChannelEntry {
    Channel channel;
    std::string name;
    int offset = 0;
    int length = 0;
};

/// Enabled descriptor channels plus their extraction parameters. The layout
/// (offsets, total dimension) is a pure function of this struct.
struct FeatureRegistry {
    std::vector<Channel> enabled;

    int mask_size = 8;          // centered/absolute mask grid
    int thumb_size = 8;         // thumbnail grid
    int color_hist_bins = 11;   // per RGB plane
    int dilation_radius = 10;   // pixels, for Dilated* channels
    int tex_orient_bins = 10;   // gradient orientation bins
    int tex_mag_bins = 10;      // gradient magnitude bins
    int gist_grid = 4;          // gist spatial grid
    int gist_orient_bins = 20;  // gist orientation bins per cell

    static FeatureRegistry defaults();
    static FeatureRegistry full_table();

    int channel_dim(Channel c) const;
    std::vector<ChannelEntry> layout() const;
    int total_dim() const;
};

using FeatureVector = Eigen::VectorXd;

/// One descriptor per super-pixel, in segment-id order.
std::vector<FeatureVector> extract(const Image& image, const SuperPixelMap& map,
                                   const FeatureRegistry& registry);

/// Label whose ground-truth overlap with the segment is >= 0.5 of the segment
/// area; void pixels never win. nullopt when no label reaches the bar.
std::optional<int> assign_training_label(const Segment& segment, const LabelMask& ground_truth);

}  // namespace sceneparse
