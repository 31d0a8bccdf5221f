#include "sceneparse/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace sceneparse {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Decodes any PNG into 8-bit channels; `want_channels` is 3 (RGB) or 1 (gray).
std::vector<uint8_t> read_png(const std::string& path, int want_channels, int& width, int& height) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png decode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (want_channels == 3) {
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
    } else {
        if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
            color_type == PNG_COLOR_TYPE_PALETTE)
            png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    const size_t stride = png_get_rowbytes(png, info);
    std::vector<uint8_t> out(stride * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = out.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (stride != static_cast<size_t>(width) * want_channels)
        throw IoError("unexpected png layout: " + path);
    return out;
}

void write_png(const std::string& path, const uint8_t* data, int width, int height, int channels) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png encode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t stride = static_cast<size_t>(width) * channels;
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(data + stride * y);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6" && magic != "P3") throw IoError("not a PPM file: " + path);

    auto next_token = [&in]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated PPM header");
    };
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval != 255) throw IoError("unsupported PPM format: " + path);

    Image img(w, h);
    if (magic == "P6") {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.data().size()));
        if (!in) throw IoError("truncated PPM data: " + path);
    } else {
        for (auto& v : img.data()) {
            int x;
            if (!(in >> x)) throw IoError("truncated PPM data: " + path);
            v = static_cast<uint8_t>(x);
        }
    }
    return img;
}

}  // namespace

Image load_image(const std::string& path) {
    if (ends_with(path, ".ppm")) return load_ppm(path);
    int w = 0, h = 0;
    auto bytes = read_png(path, 3, w, h);
    Image img(w, h);
    img.data() = std::move(bytes);
    return img;
}

void save_png(const Image& img, const std::string& path) {
    write_png(path, img.data().data(), img.width(), img.height(), 3);
}

void save_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.data().size()));
}

LabelMask load_mask(const std::string& path) {
    int w = 0, h = 0;
    auto bytes = read_png(path, 1, w, h);
    LabelMask mask(w, h);
    mask.data() = std::move(bytes);
    return mask;
}

void save_mask(const LabelMask& mask, const std::string& path) {
    write_png(path, mask.data().data(), mask.width(), mask.height(), 1);
}

}  // namespace sceneparse
