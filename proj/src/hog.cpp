#include "sitedelta/hog.hpp"

#include <algorithm>
#include <cmath>

#include "sitedelta/error.hpp"

namespace sitedelta::hog {

namespace {

constexpr double kEps = 1e-4;        // added to block energies before rsqrt
constexpr double kTruncation = 0.2;  // normalized histogram clamp
const double kEnergyScale = 1.0 / std::sqrt(18.0);

}  // namespace

CellGrid cell_hog_grid(const std::vector<float>& gray, int width, int height) {
    if (width < 2 * kCellSize || height < 2 * kCellSize)
        throw ValueError("HOG tile must be at least 16x16 pixels");
    if (gray.size() != static_cast<std::size_t>(width) * height)
        throw ValueError("grayscale buffer does not match tile dimensions");

    const int rows = height / kCellSize;
    const int cols = width / kCellSize;

    // 18-bin signed orientation histogram per cell
    std::vector<double> hist(static_cast<std::size_t>(rows) * cols * kSignedBins, 0.0);
    auto hist_at = [&](int r, int c) {
        return hist.data() + (static_cast<std::size_t>(r) * cols + c) * kSignedBins;
    };

    const int usable_w = cols * kCellSize;
    const int usable_h = rows * kCellSize;
    for (int y = 0; y < usable_h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, height - 1);
        for (int x = 0; x < usable_w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, width - 1);
            const double gx = 0.5 * (gray[static_cast<std::size_t>(y) * width + xp] -
                                     gray[static_cast<std::size_t>(y) * width + xm]);
            const double gy = 0.5 * (gray[static_cast<std::size_t>(yp) * width + x] -
                                     gray[static_cast<std::size_t>(ym) * width + x]);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * (180.0 / 3.14159265358979323846);
            if (angle < 0.0) angle += 360.0;
            // linear split between the two nearest signed bins (20 deg wide)
            double pos = angle / 20.0;
            int b0 = static_cast<int>(pos) % kSignedBins;
            int b1 = (b0 + 1) % kSignedBins;
            double frac = pos - std::floor(pos);
            double* h = hist_at(y / kCellSize, x / kCellSize);
            h[b0] += mag * (1.0 - frac);
            h[b1] += mag * frac;
        }
    }

    // cell energy over the 9 contrast-insensitive sums
    std::vector<double> energy(static_cast<std::size_t>(rows) * cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double* h = hist_at(r, c);
            double e = 0.0;
            for (int o = 0; o < kUnsignedBins; ++o) {
                double u = h[o] + h[o + kUnsignedBins];
                e += u * u;
            }
            energy[static_cast<std::size_t>(r) * cols + c] = e;
        }
    }
    auto energy_at = [&](int r, int c) {
        r = std::clamp(r, 0, rows - 1);
        c = std::clamp(c, 0, cols - 1);
        return energy[static_cast<std::size_t>(r) * cols + c];
    };

    CellGrid grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.data.assign(static_cast<std::size_t>(rows) * cols * kCellDim, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double* h = hist_at(r, c);
            // the four 2x2 blocks containing this cell (indices clamped at borders)
            const double n[4] = {
                1.0 / std::sqrt(energy_at(r, c) + energy_at(r - 1, c) + energy_at(r, c - 1) +
                                energy_at(r - 1, c - 1) + kEps),
                1.0 / std::sqrt(energy_at(r, c) + energy_at(r - 1, c) + energy_at(r, c + 1) +
                                energy_at(r - 1, c + 1) + kEps),
                1.0 / std::sqrt(energy_at(r, c) + energy_at(r + 1, c) + energy_at(r, c - 1) +
                                energy_at(r + 1, c - 1) + kEps),
                1.0 / std::sqrt(energy_at(r, c) + energy_at(r + 1, c) + energy_at(r, c + 1) +
                                energy_at(r + 1, c + 1) + kEps),
            };
            double* out = grid.data.data() + (static_cast<std::size_t>(r) * cols + c) * kCellDim;
            double texture[4] = {0.0, 0.0, 0.0, 0.0};
            for (int o = 0; o < kSignedBins; ++o) {
                double sum = 0.0;
                for (int k = 0; k < 4; ++k) {
                    double v = std::min(h[o] * n[k], kTruncation);
                    sum += v;
                    texture[k] += v;
                }
                out[o] = 0.5 * sum;
            }
            for (int o = 0; o < kUnsignedBins; ++o) {
                double u = h[o] + h[o + kUnsignedBins];
                double sum = 0.0;
                for (int k = 0; k < 4; ++k) sum += std::min(u * n[k], kTruncation);
                out[kSignedBins + o] = 0.5 * sum;
            }
            for (int k = 0; k < 4; ++k)
                out[kSignedBins + kUnsignedBins + k] = kEnergyScale * texture[k];
        }
    }
    return grid;
}

std::vector<std::vector<double>> stack_visual_words(const CellGrid& grid) {
    std::vector<std::vector<double>> words;
    if (grid.rows < 2 || grid.cols < 2) return words;
    words.reserve(static_cast<std::size_t>(grid.rows - 1) * (grid.cols - 1));
    for (int r = 0; r + 1 < grid.rows; ++r) {
        for (int c = 0; c + 1 < grid.cols; ++c) {
            std::vector<double> word;
            word.reserve(kWordDim);
            for (int dr = 0; dr < 2; ++dr) {
                for (int dc = 0; dc < 2; ++dc) {
                    const double* cell = grid.cell(r + dr, c + dc);
                    word.insert(word.end(), cell, cell + kCellDim);
                }
            }
            words.push_back(std::move(word));
        }
    }
    return words;
}

}  // namespace sitedelta::hog
