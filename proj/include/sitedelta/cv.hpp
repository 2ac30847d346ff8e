#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sitedelta::eval {

/// Fold index per sample. With group ids, whole groups land in one fold;
/// otherwise folds are stratified by class. Deterministic for a fixed seed.
std::vector<int> make_folds(const std::vector<int>& labels, int folds, std::uint64_t seed,
                            const std::vector<std::string>& group_ids = {});

struct GridPoint {
    double c = 1.0;
    double gamma = 0.0;  // unused for linear models
};

struct GridSearchResult {
    GridPoint best;
    double best_mean_auc = 0.0;
    int candidates_evaluated = 0;
};

/// Scores each sample with a model trained on the other folds; the trainer
/// returns out-of-fold scores for the requested indices.
using FoldTrainer = std::function<std::vector<double>(
    const std::vector<std::size_t>& train_idx, const std::vector<std::size_t>& test_idx,
    const GridPoint& params)>;

/// Picks the grid point with the highest mean fold ROC-AUC; ties break to
/// the smallest C, then the smallest gamma. Folds are fixed once per call.
GridSearchResult grid_search_cv(const std::vector<int>& labels, const FoldTrainer& trainer,
                                const std::vector<double>& c_grid,
                                const std::vector<double>& gamma_grid,  // empty for linear
                                int folds, std::uint64_t seed,
                                const std::vector<std::string>& group_ids = {});

}  // namespace sitedelta::eval
