#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "sitedelta/error.hpp"
#include "sitedelta/rng.hpp"
#include "sitedelta/visual.hpp"

using namespace sitedelta;

namespace {

std::vector<std::vector<double>> random_words(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> words(n, std::vector<double>(hog::kWordDim));
    for (auto& w : words)
        for (auto& v : w) v = rng.next_double();
    return words;
}

img::Image constant_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    img::Image im(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) im.set(x, y, r, g, b);
    return im;
}

}  // namespace

TEST_SUITE("visual") {

TEST_CASE("tiling yields exactly 21 tiles partitioning the image") {
    img::Image im(64, 64);
    auto tiles = visual::tile_image(im);
    REQUIRE(tiles.size() == 21);
    CHECK(tiles[0].width == 64);
    for (int i = 1; i <= 4; ++i) {
        CHECK(tiles[i].width == 32);
        CHECK(tiles[i].height == 32);
    }
    for (int i = 5; i < 21; ++i) {
        CHECK(tiles[i].width == 16);
        CHECK(tiles[i].height == 16);
    }
}

TEST_CASE("odd sizes split by the floor rule") {
    img::Image im(65, 65);
    auto tiles = visual::tile_image(im);
    CHECK(tiles[1].width == 32);   // floor(65/2) - 0
    CHECK(tiles[2].width == 33);   // 65 - 32
    CHECK(tiles[1].height == 32);
    CHECK(tiles[3].height == 33);
    int quarter_area = 0;
    for (int i = 1; i <= 4; ++i) quarter_area += tiles[i].width * tiles[i].height;
    CHECK(quarter_area == 65 * 65);
}

TEST_CASE("images below 32x32 cannot be tiled") {
    img::Image im(31, 40);
    CHECK_THROWS_AS(visual::tile_image(im), Error);
}

TEST_CASE("kmeans with k equal to the distinct points returns them") {
    auto words = random_words(5, 2);
    auto result = visual::kmeans(words, 5, 77);
    // every point is its own centroid (in some order) with zero objective
    CHECK(result.objective_history.back() == doctest::Approx(0.0));
    for (const auto& w : words) {
        double best = std::numeric_limits<double>::max();
        for (int c = 0; c < 5; ++c) {
            double d = 0.0;
            for (int k = 0; k < hog::kWordDim; ++k) {
                double diff = w[k] - result.centroids[c * hog::kWordDim + k];
                d += diff * diff;
            }
            best = std::min(best, d);
        }
        CHECK(best == doctest::Approx(0.0));
    }
}

TEST_CASE("kmeans finds the means of two separated blobs") {
    // two 2-point blobs embedded in 124-dim space
    std::vector<std::vector<double>> words(4, std::vector<double>(hog::kWordDim, 0.0));
    words[0][0] = 0.0;
    words[1][0] = 0.2;
    words[2][0] = 10.0;
    words[3][0] = 10.4;
    auto result = visual::kmeans(words, 2, 5);
    std::vector<double> firsts = {result.centroids[0], result.centroids[hog::kWordDim]};
    std::sort(firsts.begin(), firsts.end());
    CHECK(firsts[0] == doctest::Approx(0.1));   // mean of {0.0, 0.2}
    CHECK(firsts[1] == doctest::Approx(10.2));  // mean of {10.0, 10.4}
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
    auto words = random_words(300, 8);
    auto a = visual::kmeans(words, 10, 42);
    auto b = visual::kmeans(words, 10, 42);
    CHECK(a.centroids == b.centroids);
    auto c = visual::kmeans(words, 10, 43);
    CHECK(c.centroids != a.centroids);
}

TEST_CASE("kmeans objective never increases") {
    auto words = random_words(400, 21);
    auto result = visual::kmeans(words, 7, 3);
    for (std::size_t i = 1; i < result.objective_history.size(); ++i)
        CHECK(result.objective_history[i] <= result.objective_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans refuses k larger than the distinct point count") {
    std::vector<std::vector<double>> words(10, std::vector<double>(hog::kWordDim, 1.0));
    words[1][0] = 2.0;  // 2 distinct points
    CHECK_THROWS_WITH_AS(visual::kmeans(words, 3, 1) /* 3 > 2 distinct */,
                         doctest::Contains("use k <= 2"), Error);
}

TEST_CASE("vocabulary save/load round trip") {
    auto words = random_words(40, 31);
    auto vocab = visual::build_vocabulary(words, 6, 9, "unit-test");
    auto dir = std::filesystem::temp_directory_path() / "sitedelta-visual-tests";
    std::filesystem::create_directories(dir);
    auto path = (dir / "vocab.txt").string();
    visual::save_vocabulary(vocab, path);
    auto back = visual::load_vocabulary(path);
    CHECK(back.k == vocab.k);
    CHECK(back.seed == vocab.seed);
    CHECK(back.source == vocab.source);
    CHECK(back.centroids == vocab.centroids);  // %.17g round-trips doubles
}

TEST_CASE("bovw assigns exact matches and normalizes") {
    auto words = random_words(20, 13);
    auto vocab = visual::build_vocabulary(words, 20, 1);
    // single word equal to centroid 17
    std::vector<double> w17(vocab.centroid(17), vocab.centroid(17) + hog::kWordDim);
    auto hist = visual::bovw_histogram({w17}, vocab);
    CHECK(hist[17] == 1.0);
    for (int i = 0; i < 20; ++i)
        if (i != 17) CHECK(hist[i] == 0.0);
}

TEST_CASE("bovw of an empty word list is the zero histogram") {
    auto vocab = visual::build_vocabulary(random_words(8, 3), 4, 1);
    auto hist = visual::bovw_histogram({}, vocab);
    for (double v : hist) CHECK(v == 0.0);
}

TEST_CASE("bovw piles repeated nearest words into one bin") {
    auto vocab = visual::build_vocabulary(random_words(12, 17), 12, 1);
    std::vector<std::vector<double>> near;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> w(vocab.centroid(3), vocab.centroid(3) + hog::kWordDim);
        w[0] += 1e-6 * i;
        near.push_back(w);
    }
    auto hist = visual::bovw_histogram(near, vocab);
    CHECK(hist[3] == 1.0);
}

TEST_CASE("bovw matches a brute-force nearest-centroid scan") {
    auto vocab = visual::build_vocabulary(random_words(50, 23), 9, 4);
    auto queries = random_words(200, 29);
    auto hist = visual::bovw_histogram(queries, vocab);
    std::vector<double> expected(9, 0.0);
    for (const auto& q : queries) {
        int best_c = 0;
        double best = std::numeric_limits<double>::max();
        for (int c = 0; c < 9; ++c) {
            double d = 0.0;
            for (int k = 0; k < hog::kWordDim; ++k) {
                double diff = q[k] - vocab.centroid(c)[k];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        expected[best_c] += 1.0;
    }
    for (auto& v : expected) v /= queries.size();
    for (int c = 0; c < 9; ++c) CHECK(hist[c] == doctest::Approx(expected[c]));
}

TEST_CASE("color histogram of black and pure red") {
    auto black = visual::color_histogram(constant_image(8, 8, 0, 0, 0));
    CHECK(black[0] == 1.0);
    auto red = visual::color_histogram(constant_image(8, 8, 255, 0, 0));
    // h=0 -> bin 0, s=1 -> bin 11, v=1 -> bin 2: flat index 0*36 + 11*3 + 2
    CHECK(red[35] == 1.0);
}

TEST_CASE("color histograms sum to one") {
    Rng rng(12);
    img::Image im(33, 17);
    for (auto& b : im.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    auto hist = visual::color_histogram(im);
    double sum = 0.0;
    for (double v : hist) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("descriptor has the advertised stacked dimension") {
    auto vocab = visual::build_vocabulary(random_words(400, 37), 300, 2);
    img::Image im = constant_image(128, 96, 30, 60, 90);
    auto desc = visual::describe_snapshot(im, vocab, {256, 192});
    CHECK(desc.dimension() == 12348);  // 21 * (300 + 288)
    CHECK(desc.dimension() == visual::descriptor_dimension(300));
}

TEST_CASE("constant-color snapshots: zero hog blocks, single color bin per tile") {
    auto vocab = visual::build_vocabulary(random_words(30, 41), 5, 2);
    img::Image im = constant_image(64, 64, 200, 200, 200);
    auto desc = visual::describe_snapshot(im, vocab, {64, 64});
    REQUIRE(desc.dimension() == visual::descriptor_dimension(5));
    // constant tiles make all-zero words; those words land in SOME nearest
    // centroid, so the BoVW block is a one-hot histogram, identical per tile
    for (int t = 0; t < 21; ++t) {
        const double* block = desc.values.data() + t * 5;
        double sum = 0.0;
        for (int b = 0; b < 5; ++b) sum += block[b];
        CHECK(sum == doctest::Approx(1.0));
    }
    const double* color0 = desc.values.data() + 21 * 5;
    for (int t = 0; t < 21; ++t) {
        const double* block = color0 + t * visual::kColorBins;
        int nonzero = 0;
        for (int b = 0; b < visual::kColorBins; ++b)
            if (block[b] != 0.0) ++nonzero;
        CHECK(nonzero == 1);
    }
}

TEST_CASE("describe_snapshot is deterministic") {
    auto vocab = visual::build_vocabulary(random_words(60, 43), 8, 2);
    Rng rng(77);
    img::Image im(96, 72);
    for (auto& b : im.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    auto a = visual::describe_snapshot(im, vocab, {96, 72});
    auto b2 = visual::describe_snapshot(im, vocab, {96, 72});
    CHECK(a.values == b2.values);
}

TEST_CASE("per-block normalization: every block sums to 1 or is all zero") {
    auto vocab = visual::build_vocabulary(random_words(80, 47), 6, 2);
    Rng rng(31);
    img::Image im(80, 64);
    for (auto& b : im.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    auto desc = visual::describe_snapshot(im, vocab, {128, 96});
    const int k = 6;
    for (int t = 0; t < 21; ++t) {
        double sum = 0.0;
        for (int b = 0; b < k; ++b) sum += desc.values[t * k + b];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    const std::size_t color0 = 21 * k;
    for (int t = 0; t < 21; ++t) {
        double sum = 0.0;
        for (int b = 0; b < visual::kColorBins; ++b)
            sum += desc.values[color0 + t * visual::kColorBins + b];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (double v : desc.values) CHECK(v >= 0.0);
}

TEST_CASE("visual delta is the coordinatewise minimum") {
    visual::VisualDescriptor p, q;
    p.values = {0.2, 0.8};
    q.values = {0.5, 0.5};
    auto d = visual::visual_delta(p, q);
    CHECK(d.values == std::vector<double>{0.2, 0.5});

    CHECK(visual::visual_delta(p, p).values == p.values);  // idempotent
    visual::VisualDescriptor zero;
    zero.values = {0.0, 0.0};
    CHECK(visual::visual_delta(p, zero).values == zero.values);  // absorbing zero

    visual::VisualDescriptor mismatched;
    mismatched.values = {1.0};
    CHECK_THROWS_AS(visual::visual_delta(p, mismatched), Error);
}

TEST_CASE("visual delta: symmetry, min bound, histogram-intersection sums") {
    auto vocab = visual::build_vocabulary(random_words(90, 53), 7, 2);
    Rng rng(61);
    img::Image a(72, 64), b(72, 64);
    for (auto& v : a.pixels) v = static_cast<std::uint8_t>(rng.below(256));
    for (auto& v : b.pixels) v = static_cast<std::uint8_t>(rng.below(256));
    auto pa = visual::describe_snapshot(a, vocab, {128, 96});
    auto pb = visual::describe_snapshot(b, vocab, {128, 96});
    auto d = visual::visual_delta(pa, pb);
    auto d2 = visual::visual_delta(pb, pa);
    CHECK(d.values == d2.values);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        CHECK(d.values[i] <= pa.values[i]);
        CHECK(d.values[i] <= pb.values[i]);
    }
    // per-block sums of the delta equal the histogram-intersection kernel
    const int k = 7;
    for (int t = 0; t < 21; ++t) {
        double block_sum = 0.0, kernel = 0.0;
        for (int bin = 0; bin < k; ++bin) {
            block_sum += d.values[t * k + bin];
            kernel += std::min(pa.values[t * k + bin], pb.values[t * k + bin]);
        }
        CHECK(block_sum == doctest::Approx(kernel));
        CHECK(block_sum <= 1.0 + 1e-12);
    }
    // identical snapshots: per-block sum equals the block sum of p itself
    auto self = visual::visual_delta(pa, pa);
    for (int t = 0; t < 21; ++t) {
        double sum = 0.0;
        for (int bin = 0; bin < k; ++bin) sum += self.values[t * k + bin];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

}  // TEST_SUITE
