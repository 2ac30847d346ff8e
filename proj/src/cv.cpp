#include "sitedelta/cv.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sitedelta/error.hpp"
#include "sitedelta/rng.hpp"
#include "sitedelta/roc.hpp"

namespace sitedelta::eval {

std::vector<int> make_folds(const std::vector<int>& labels, int folds, std::uint64_t seed,
                            const std::vector<std::string>& group_ids) {
    if (folds < 2) throw ValueError("need at least 2 folds");
    if (labels.empty()) throw ValueError("no samples to fold");
    std::vector<int> fold_of(labels.size(), -1);
    Rng rng(seed);

    if (!group_ids.empty()) {
        if (group_ids.size() != labels.size()) throw ValueError("group ids size mismatch");
        // sorted group list first so the assignment is independent of input order
        std::set<std::string> unique(group_ids.begin(), group_ids.end());
        std::vector<std::string> groups(unique.begin(), unique.end());
        if (groups.size() < static_cast<std::size_t>(folds))
            throw ValueError("fewer groups than folds");
        rng.shuffle(groups);
        std::map<std::string, int> fold_of_group;
        for (std::size_t i = 0; i < groups.size(); ++i)
            fold_of_group[groups[i]] = static_cast<int>(i % folds);
        for (std::size_t i = 0; i < labels.size(); ++i)
            fold_of[i] = fold_of_group[group_ids[i]];
    } else {
        // stratified: deal each class round-robin after a seeded shuffle
        for (int cls : {1, -1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == cls) idx.push_back(i);
            rng.shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); ++i)
                fold_of[idx[i]] = static_cast<int>(i % folds);
        }
    }

    // every fold must be non-degenerate: non-empty with both classes outside it
    for (int f = 0; f < folds; ++f) {
        bool any = false, pos_out = false, neg_out = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (fold_of[i] == f) any = true;
            else if (labels[i] == 1) pos_out = true;
            else neg_out = true;
        }
        if (!any || !pos_out || !neg_out) throw ValueError("degenerate cross-validation fold");
    }
    return fold_of;
}

GridSearchResult grid_search_cv(const std::vector<int>& labels, const FoldTrainer& trainer,
                                const std::vector<double>& c_grid,
                                const std::vector<double>& gamma_grid, int folds,
                                std::uint64_t seed, const std::vector<std::string>& group_ids) {
    if (c_grid.empty()) throw ValueError("empty C grid");
    const std::vector<int> fold_of = make_folds(labels, folds, seed, group_ids);

    std::vector<std::vector<std::size_t>> train_sets(folds), test_sets(folds);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            if (fold_of[i] == f) test_sets[f].push_back(i);
            else train_sets[f].push_back(i);
        }
    }

    // sorted, deduplicated grid keeps tie-breaking well-defined
    std::vector<double> cs(c_grid);
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    std::vector<double> gammas(gamma_grid);
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    if (gammas.empty()) gammas.push_back(0.0);

    GridSearchResult result;
    result.best_mean_auc = -1.0;
    for (double c : cs) {
        for (double gamma : gammas) {
            GridPoint point{c, gamma};
            double mean_auc = 0.0;
            for (int f = 0; f < folds; ++f) {
                std::vector<double> scores = trainer(train_sets[f], test_sets[f], point);
                if (scores.size() != test_sets[f].size())
                    throw ValueError("fold trainer returned wrong score count");
                std::vector<int> fold_labels;
                fold_labels.reserve(test_sets[f].size());
                for (std::size_t i : test_sets[f]) fold_labels.push_back(labels[i]);
                mean_auc += auc(compute_roc(scores, fold_labels));
            }
            mean_auc /= folds;
            ++result.candidates_evaluated;
            if (mean_auc > result.best_mean_auc) {  // strict: first (smallest) wins ties
                result.best_mean_auc = mean_auc;
                result.best = point;
            }
        }
    }
    return result;
}

}  // namespace sitedelta::eval
