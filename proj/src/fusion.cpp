#include "sitedelta/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "sitedelta/error.hpp"
#include "sitedelta/rng.hpp"

namespace sitedelta::fusion {

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::Max: return "max";
        case Scheme::Trained: return "trained";
        case Scheme::Adversarial: return "adversarial";
    }
    return "max";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "max") return Scheme::Max;
    if (name == "trained") return Scheme::Trained;
    if (name == "adversarial") return Scheme::Adversarial;
    throw ValueError("unknown fusion scheme: " + name);
}

double fuse_max(const ScorePair& s) { return std::max(s.s1, s.s2); }

std::vector<ScorePair> augment_adversarial(const std::vector<ScorePair>& scores,
                                           const AdversarialConfig& config, std::uint64_t seed,
                                           std::vector<std::size_t>* source_indices) {
    if (config.fraction < 0.0 || config.fraction > 1.0)
        throw ValueError("adversarial fraction must lie in [0,1]");
    if (source_indices) source_indices->clear();
    std::vector<std::size_t> phish_idx;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i].label == 1) phish_idx.push_back(i);

    const std::size_t base = config.fraction_of_phish_only ? phish_idx.size() : scores.size();
    const auto count =
        static_cast<std::size_t>(std::llround(config.fraction * static_cast<double>(base)));

    std::vector<ScorePair> out = scores;
    if (count == 0) return out;
    if (phish_idx.empty())
        throw ValueError("adversarial augmentation needs at least one phishing pair");

    Rng rng(seed);
    out.reserve(scores.size() + count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src_index = phish_idx[rng.below(phish_idx.size())];
        const ScorePair& src = scores[src_index];
        ScorePair attack;
        attack.s2 = src.s2;  // the snapshot score is not altered by this attacker
        attack.s1 = config.distribution == AttackScoreDistribution::Uniform
                        ? rng.next_double()
                        : rng.beta(config.beta_alpha, config.beta_beta);
        attack.label = 1;
        out.push_back(attack);
        if (source_indices) source_indices->push_back(src_index);
    }
    return out;
}

double FusionModel::score(const ScorePair& s) const {
    if (scheme == Scheme::Max) return fuse_max(s);
    return learn::score_rbf(combiner, {s.s1, s.s2});
}

FusionModel train_fusion(const std::vector<ScorePair>& scores, Scheme scheme,
                         const FusionGrid& grid, std::uint64_t seed,
                         const AdversarialConfig& adversarial,
                         const std::vector<std::string>& group_ids) {
    FusionModel model;
    model.scheme = scheme;
    if (scheme == Scheme::Max) return model;

    std::vector<ScorePair> training = scores;
    std::vector<std::string> groups = group_ids;
    if (scheme == Scheme::Adversarial) {
        std::vector<std::size_t> sources;
        training = augment_adversarial(scores, adversarial, seed, &sources);
        if (!groups.empty()) {
            // an attack pair inherits its source pair's family so grouped CV
            // folds keep it next to the s2 it was copied from
            for (std::size_t src : sources) groups.push_back(group_ids[src]);
        }
    }

    std::vector<std::array<double, 2>> points;
    std::vector<int> labels;
    points.reserve(training.size());
    for (const auto& p : training) {
        if (p.label != 1 && p.label != -1)
            throw ValueError("fusion training requires labeled score pairs");
        points.push_back({p.s1, p.s2});
        labels.push_back(p.label);
    }

    auto trainer = [&](const std::vector<std::size_t>& train_idx,
                       const std::vector<std::size_t>& test_idx,
                       const eval::GridPoint& params) {
        std::vector<std::array<double, 2>> sub_points;
        std::vector<int> sub_labels;
        sub_points.reserve(train_idx.size());
        for (std::size_t i : train_idx) {
            sub_points.push_back(points[i]);
            sub_labels.push_back(labels[i]);
        }
        auto m = learn::train_rbf_svm(sub_points, sub_labels, params.c, params.gamma);
        std::vector<double> out;
        out.reserve(test_idx.size());
        for (std::size_t i : test_idx) out.push_back(learn::score_rbf(m, points[i]));
        return out;
    };

    auto search = eval::grid_search_cv(labels, trainer, grid.c_grid, grid.gamma_grid, grid.folds,
                                       seed, groups);
    model.selected = search.best;
    model.combiner =
        learn::train_rbf_svm(points, labels, search.best.c, search.best.gamma);
    model.trained_on = training.size();
    return model;
}

}  // namespace sitedelta::fusion
