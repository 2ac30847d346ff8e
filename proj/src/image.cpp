#include "sitedelta/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "sitedelta/error.hpp"

namespace sitedelta::img {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

bool is_png_file(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) return false;
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8) return false;
    return png_sig_cmp(sig, 0, 8) == 0;
}

Image read_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw LoadError("cannot open PNG file: " + path);
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw LoadError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw LoadError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw LoadError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError("corrupt PNG file: " + path);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 width = png_get_image_width(png, info);
    png_uint_32 height = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    // normalize everything to 8-bit RGB
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    Image image(static_cast<int>(width), static_cast<int>(height));
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = image.at(0, static_cast<int>(y));
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const Image& image, const std::string& path) {
    if (image.width <= 0 || image.height <= 0) throw ValueError("cannot write empty image");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw LoadError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw LoadError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw LoadError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw LoadError("PNG write failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image resize_bilinear(const Image& src, int width, int height) {
    if (width <= 0 || height <= 0) throw ValueError("resize target must be positive");
    if (src.width == width && src.height == height) return src;
    Image dst(width, height);
    const double sx_scale = static_cast<double>(src.width) / width;
    const double sy_scale = static_cast<double>(src.height) / height;
    for (int y = 0; y < height; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
        int y0 = static_cast<int>(sy);
        int y1 = std::min(y0 + 1, src.height - 1);
        double fy = sy - y0;
        for (int x = 0; x < width; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
            int x0 = static_cast<int>(sx);
            int x1 = std::min(x0 + 1, src.width - 1);
            double fx = sx - x0;
            const auto* p00 = src.at(x0, y0);
            const auto* p10 = src.at(x1, y0);
            const auto* p01 = src.at(x0, y1);
            const auto* p11 = src.at(x1, y1);
            auto* out = dst.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double top = p00[c] + (p10[c] - p00[c]) * fx;
                double bot = p01[c] + (p11[c] - p01[c]) * fx;
                double v = top + (bot - top) * fy;
                out[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return dst;
}

std::vector<float> to_grayscale(const Image& image) {
    std::vector<float> gray(static_cast<std::size_t>(image.width) * image.height);
    const std::uint8_t* p = image.pixels.data();
    for (std::size_t i = 0; i < gray.size(); ++i, p += 3) {
        gray[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
    return gray;
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double maxc = std::max({r, g, b});
    const double minc = std::min({r, g, b});
    const double delta = maxc - minc;
    Hsv out{0.0, 0.0, maxc};
    if (maxc > 0.0) out.s = delta / maxc;
    if (delta > 0.0) {
        double h;
        if (maxc == r) {
            h = 60.0 * std::fmod((g - b) / delta, 6.0);
        } else if (maxc == g) {
            h = 60.0 * ((b - r) / delta + 2.0);
        } else {
            h = 60.0 * ((r - g) / delta + 4.0);
        }
        if (h < 0.0) h += 360.0;
        out.h = h >= 360.0 ? 0.0 : h;
    }
    return out;
}

}  // namespace sitedelta::img
