#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sceneparse {

// Label id reserved for unlabeled / void pixels in ground-truth masks.
inline constexpr int kVoidLabel = 255;

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8-bit RGB raster image, row-major, interleaved channels.
class Image {
public:
    Image() = default;
    Image(int width, int height)
        : width_(width), height_(height), rgb_(static_cast<size_t>(width) * height * 3, 0) {
        if (width < 1 || height < 1) throw InvalidInput("Image: empty dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    uint8_t& at(int x, int y, int c) { return rgb_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }
    uint8_t at(int x, int y, int c) const { return rgb_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }

    const std::vector<uint8_t>& data() const { return rgb_; }
    std::vector<uint8_t>& data() { return rgb_; }

    /// Rec.601 luma in [0,255].
    double luminance(int x, int y) const {
        return 0.299 * at(x, y, 0) + 0.587 * at(x, y, 1) + 0.114 * at(x, y, 2);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> rgb_;
};

/// Single-channel 8-bit mask; pixel value = label id, 255 = void.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(int width, int height, uint8_t fill = kVoidLabel)
        : width_(width), height_(height), values_(static_cast<size_t>(width) * height, fill) {
        if (width < 1 || height < 1) throw InvalidInput("LabelMask: empty dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    uint8_t& at(int x, int y) { return values_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }

    const std::vector<uint8_t>& data() const { return values_; }
    std::vector<uint8_t>& data() { return values_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> values_;
};

Image load_image(const std::string& path);   // PNG or PPM by extension
void save_png(const Image& img, const std::string& path);
void save_ppm(const Image& img, const std::string& path);

LabelMask load_mask(const std::string& path);  // 8-bit grayscale PNG
void save_mask(const LabelMask& mask, const std::string& path);

}  // namespace sceneparse
