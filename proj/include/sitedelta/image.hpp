#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sitedelta::img {

/// 8-bit RGB raster, row-major, tightly packed.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // 3 * width * height

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = at(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

Image read_png(const std::string& path);
void write_png(const Image& image, const std::string& path);

/// True if the file starts with the 8-byte PNG signature.
bool is_png_file(const std::string& path);

/// Bilinear resample with half-pixel centre alignment. Identity when the
/// size already matches.
Image resize_bilinear(const Image& src, int width, int height);

/// Rec. 601 luminance in [0,255].
std::vector<float> to_grayscale(const Image& image);

struct Hsv {
    double h;  // [0, 360)
    double s;  // [0, 1]
    double v;  // [0, 1]
};

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace sitedelta::img
