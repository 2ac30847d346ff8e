#include "sitedelta/visual.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "sitedelta/error.hpp"
#include "sitedelta/rng.hpp"

namespace sitedelta::visual {

namespace {

double sq_dist(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

img::Image crop(const img::Image& src, int x0, int y0, int x1, int y1) {
    img::Image out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y) {
        const auto* row = src.at(x0, y);
        std::copy(row, row + static_cast<std::size_t>(x1 - x0) * 3, out.at(0, y - y0));
    }
    return out;
}

}  // namespace

std::vector<img::Image> tile_image(const img::Image& image) {
    if (image.width < 32 || image.height < 32)
        throw ValueError("image too small to tile: need at least 32x32");
    std::vector<img::Image> tiles;
    tiles.reserve(kTileCount);
    for (int n : {1, 2, 4}) {
        for (int j = 0; j < n; ++j) {      // rows
            for (int i = 0; i < n; ++i) {  // columns
                int x0 = i * image.width / n;
                int x1 = (i + 1) * image.width / n;
                int y0 = j * image.height / n;
                int y1 = (j + 1) * image.height / n;
                tiles.push_back(crop(image, x0, y0, x1, y1));
            }
        }
    }
    return tiles;
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                    double tol, int max_iter) {
    if (k <= 0) throw ValueError("k must be positive");
    const std::size_t n = points.size();
    if (n == 0) throw ValueError("k-means needs at least one point");
    const int dim = static_cast<int>(points[0].size());

    // distinct-point count gate
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() < static_cast<std::size_t>(k)) {
        std::ostringstream msg;
        msg << "k-means: only " << distinct.size() << " distinct points for k=" << k
            << "; use k <= " << distinct.size();
        throw ValueError(msg.str());
    }

    Rng rng(seed);
    std::vector<double> centroids(static_cast<std::size_t>(k) * dim);
    auto centroid = [&](int i) { return centroids.data() + static_cast<std::size_t>(i) * dim; };

    // k-means++ seeding
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    {
        std::size_t first = static_cast<std::size_t>(rng.below(n));
        std::copy(points[first].begin(), points[first].end(), centroid(0));
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d2[i] = std::min(d2[i], sq_dist(points[i].data(), centroid(c - 1), dim));
                total += d2[i];
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                double target = rng.next_double() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                    pick = i;
                }
            } else {
                pick = static_cast<std::size_t>(rng.below(n));
            }
            std::copy(points[pick].begin(), points[pick].end(), centroid(c));
        }
    }

    KMeansResult result;
    std::vector<int> assignment(n, 0);
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step (ties to the lowest centroid index)
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d = sq_dist(points[i].data(), centroid(c), dim);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
            objective += best;
        }
        result.objective_history.push_back(objective);
        result.iterations = iter + 1;

        // update step
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0u);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(assignment[i]) * dim;
            const double* p = points[i].data();
            for (int d = 0; d < dim; ++d) s[d] += p[d];
            ++counts[assignment[i]];
        }
        double max_move = 0.0;
        std::set<std::size_t> reused;
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed from the point farthest from its centroid
                double far_d = -1.0;
                std::size_t far_i = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reused.count(i)) continue;
                    double d = sq_dist(points[i].data(), centroid(assignment[i]), dim);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                reused.insert(far_i);
                std::copy(points[far_i].begin(), points[far_i].end(), centroid(c));
                max_move = std::numeric_limits<double>::max();
                continue;
            }
            const double* s = sums.data() + static_cast<std::size_t>(c) * dim;
            double move = 0.0;
            double* ctr = centroid(c);
            for (int d = 0; d < dim; ++d) {
                double nd = s[d] / static_cast<double>(counts[c]);
                double diff = nd - ctr[d];
                move += diff * diff;
                ctr[d] = nd;
            }
            max_move = std::max(max_move, std::sqrt(move));
        }
        if (max_move < tol) break;
    }
    result.centroids = std::move(centroids);
    return result;
}

Vocabulary build_vocabulary(const std::vector<std::vector<double>>& words, int k,
                            std::uint64_t seed, const std::string& source) {
    for (const auto& w : words)
        if (w.size() != hog::kWordDim) throw ValueError("vocabulary words must be 124-dim");
    Vocabulary vocab;
    vocab.k = k;
    vocab.seed = seed;
    vocab.source = source;
    vocab.centroids = kmeans(words, k, seed).centroids;
    return vocab;
}

// Vocabulary file, version 1 (see README): a "sitedelta-vocab 1" magic line,
// a "k dim seed source" header line, then k lines of 124 %.17g values.
void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write vocabulary file: " + path);
    out << "sitedelta-vocab 1\n";
    out << vocab.k << ' ' << hog::kWordDim << ' ' << vocab.seed << ' '
        << (vocab.source.empty() ? "-" : vocab.source) << '\n';
    char buf[32];
    for (int i = 0; i < vocab.k; ++i) {
        const double* row = vocab.centroid(i);
        for (int d = 0; d < hog::kWordDim; ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", row[d]);
            out << buf << (d + 1 == hog::kWordDim ? '\n' : ' ');
        }
    }
    if (!out) throw LoadError("short write on vocabulary file: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open vocabulary file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "sitedelta-vocab" || version != 1)
        throw SchemaError("unsupported vocabulary file: " + path);
    Vocabulary vocab;
    int dim = 0;
    in >> vocab.k >> dim >> vocab.seed >> vocab.source;
    if (vocab.k <= 0 || dim != hog::kWordDim)
        throw SchemaError("malformed vocabulary header in " + path);
    if (vocab.source == "-") vocab.source.clear();
    vocab.centroids.resize(static_cast<std::size_t>(vocab.k) * hog::kWordDim);
    for (auto& v : vocab.centroids)
        if (!(in >> v)) throw SchemaError("truncated vocabulary file: " + path);
    return vocab;
}

std::vector<double> bovw_histogram(const std::vector<std::vector<double>>& words,
                                   const Vocabulary& vocab) {
    std::vector<double> hist(vocab.k, 0.0);
    if (words.empty()) return hist;
    for (const auto& w : words) {
        if (w.size() != hog::kWordDim) throw ValueError("BoVW word must be 124-dim");
        double best = std::numeric_limits<double>::max();
        int best_c = 0;
        for (int c = 0; c < vocab.k; ++c) {
            double d = sq_dist(w.data(), vocab.centroid(c), hog::kWordDim);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        hist[best_c] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(words.size());
    for (auto& v : hist) v *= inv;
    return hist;
}

std::vector<double> color_histogram(const img::Image& tile) {
    if (tile.width <= 0 || tile.height <= 0) throw ValueError("empty tile");
    std::vector<double> hist(kColorBins, 0.0);
    const std::uint8_t* p = tile.pixels.data();
    const std::size_t npx = static_cast<std::size_t>(tile.width) * tile.height;
    for (std::size_t i = 0; i < npx; ++i, p += 3) {
        img::Hsv hsv = img::rgb_to_hsv(p[0], p[1], p[2]);
        int hb = std::min(static_cast<int>(hsv.h / 45.0), 7);
        int sb = std::min(static_cast<int>(hsv.s * 12.0), 11);
        int vb = std::min(static_cast<int>(hsv.v * 3.0), 2);
        hist[hb * 36 + sb * 3 + vb] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(npx);
    for (auto& v : hist) v *= inv;
    return hist;
}

std::vector<std::vector<double>> snapshot_words(const img::Image& image,
                                                const DescribeParams& params) {
    img::Image canvas = resize_bilinear(image, params.canvas_width, params.canvas_height);
    std::vector<std::vector<double>> all;
    for (const auto& tile : tile_image(canvas)) {
        auto gray = img::to_grayscale(tile);
        auto grid = hog::cell_hog_grid(gray, tile.width, tile.height);
        auto words = hog::stack_visual_words(grid);
        for (auto& w : words) all.push_back(std::move(w));
    }
    return all;
}

VisualDescriptor describe_snapshot(const img::Image& image, const Vocabulary& vocab,
                                   const DescribeParams& params) {
    if (image.width < 32 || image.height < 32)
        throw ValueError("snapshot too small: need at least 32x32");
    if (params.canvas_width < 64 || params.canvas_height < 64)
        throw ValueError("canonical snapshot size must be at least 64x64");
    img::Image canvas = resize_bilinear(image, params.canvas_width, params.canvas_height);
    const auto tiles = tile_image(canvas);

    VisualDescriptor desc;
    desc.vocabulary_size = vocab.k;
    desc.values.reserve(descriptor_dimension(vocab.k));
    for (const auto& tile : tiles) {
        auto gray = img::to_grayscale(tile);
        auto grid = hog::cell_hog_grid(gray, tile.width, tile.height);
        auto hist = bovw_histogram(hog::stack_visual_words(grid), vocab);
        desc.values.insert(desc.values.end(), hist.begin(), hist.end());
    }
    for (const auto& tile : tiles) {
        auto hist = color_histogram(tile);
        desc.values.insert(desc.values.end(), hist.begin(), hist.end());
    }
    return desc;
}

VisualDescriptor visual_delta(const VisualDescriptor& p, const VisualDescriptor& p0) {
    if (p.values.size() != p0.values.size())
        throw ValueError("visual descriptors have mismatched dimensions");
    VisualDescriptor out;
    out.vocabulary_size = p.vocabulary_size;
    out.values.resize(p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out.values[i] = std::min(p.values[i], p0.values[i]);
    return out;
}

}  // namespace sitedelta::visual
