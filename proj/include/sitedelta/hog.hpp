#pragma once

#include <vector>

namespace sitedelta::hog {

constexpr int kCellSize = 8;
constexpr int kSignedBins = 18;
constexpr int kUnsignedBins = 9;
constexpr int kCellDim = 31;  // 18 signed + 9 unsigned + 4 normalization energies
constexpr int kWordDim = 4 * kCellDim;

/// Grid of per-cell descriptors, row-major, each kCellDim values.
struct CellGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows * cols * kCellDim

    const double* cell(int r, int c) const {
        return data.data() + (static_cast<std::size_t>(r) * cols + c) * kCellDim;
    }
};

/// Computes the 31-value descriptor for every full 8x8 cell of a grayscale
/// tile. Gradients are centred differences on luminance; gradient magnitude
/// is split linearly between the two nearest of 18 signed orientation bins;
/// each of the four 2x2-cell block energies normalizes the histogram with
/// truncation at 0.2. Trailing pixels beyond the last full cell are dropped.
CellGrid cell_hog_grid(const std::vector<float>& gray, int width, int height);

/// Concatenates each overlapping 2x2 cell block (stride 1, row-major) into a
/// 124-dimensional word. Grids smaller than 2x2 yield no words.
std::vector<std::vector<double>> stack_visual_words(const CellGrid& grid);

}  // namespace sitedelta::hog
