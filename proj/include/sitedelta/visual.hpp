#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sitedelta/hog.hpp"
#include "sitedelta/image.hpp"

namespace sitedelta::visual {

constexpr int kTileCount = 21;    // (1x1) + (2x2) + (4x4)
constexpr int kColorBins = 288;   // 8 x 12 x 3 HSV
constexpr int kDefaultVocabularySize = 300;
constexpr int kDefaultCanvasWidth = 1024;
constexpr int kDefaultCanvasHeight = 768;

/// k-means centroids over 124-dim stacked HOG words.
struct Vocabulary {
    int k = 0;
    std::uint64_t seed = 0;
    std::string source;
    std::vector<double> centroids;  // k rows x kWordDim, row-major

    const double* centroid(int i) const {
        return centroids.data() + static_cast<std::size_t>(i) * hog::kWordDim;
    }
};

/// Stacked per-tile histograms: 21 BoVW blocks (k bins each) followed by
/// 21 color blocks (288 bins each); tiles ordered whole, then quarters
/// row-major, then sixteenths row-major.
struct VisualDescriptor {
    int vocabulary_size = 0;
    std::vector<double> values;

    int dimension() const { return static_cast<int>(values.size()); }
};

/// Expected stacked dimension for a vocabulary of size k.
inline int descriptor_dimension(int k) { return kTileCount * (k + kColorBins); }

/// Whole image, 4 quarters, 16 sixteenths. Grid boundaries at
/// floor(i*W/n) so the tiles partition the image exactly. Requires >= 32x32.
std::vector<img::Image> tile_image(const img::Image& image);

struct KMeansResult {
    std::vector<double> centroids;  // k x dim row-major
    std::vector<double> objective_history;
    int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding; deterministic for a fixed seed.
/// Stops when the largest centroid movement drops below `tol` or after
/// `max_iter` rounds; empty clusters re-seed from the farthest point.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    double tol = 1e-6, int max_iter = 300);

Vocabulary build_vocabulary(const std::vector<std::vector<double>>& words, int k,
                            std::uint64_t seed, const std::string& source = "");

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

/// Nearest-centroid counts normalized to sum 1; all-zero for no words.
std::vector<double> bovw_histogram(const std::vector<std::vector<double>>& words,
                                   const Vocabulary& vocab);

/// 288-bin HSV histogram: bin = floor(H/45)*36 + min(floor(S*12),11)*3 +
/// min(floor(V*3),2), normalized to sum 1.
std::vector<double> color_histogram(const img::Image& tile);

struct DescribeParams {
    int canvas_width = kDefaultCanvasWidth;
    int canvas_height = kDefaultCanvasHeight;
};

VisualDescriptor describe_snapshot(const img::Image& image, const Vocabulary& vocab,
                                   const DescribeParams& params = DescribeParams());

/// All 124-dim words of every tile of the resized image (vocabulary input).
std::vector<std::vector<double>> snapshot_words(const img::Image& image,
                                                const DescribeParams& params = DescribeParams());

/// Coordinatewise minimum; throws on dimension mismatch.
VisualDescriptor visual_delta(const VisualDescriptor& p, const VisualDescriptor& p0);

}  // namespace sitedelta::visual
