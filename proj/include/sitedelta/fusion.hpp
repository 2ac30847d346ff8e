#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sitedelta/cv.hpp"
#include "sitedelta/svm.hpp"

namespace sitedelta::fusion {

/// One page's pair of channel scores; both lie in [0,1] when feeding a
/// trained combiner.
struct ScorePair {
    double s1 = 0.0;  // HTML channel
    double s2 = 0.0;  // visual channel
    int label = 0;    // -1 / +1; 0 when unlabeled
};

enum class Scheme { Max, Trained, Adversarial };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

double fuse_max(const ScorePair& s);

enum class AttackScoreDistribution { Uniform, Beta };

struct AdversarialConfig {
    double fraction = 0.3;
    /// Fraction base: the whole score set (the default reading) or just the
    /// phishing subset.
    bool fraction_of_phish_only = false;
    AttackScoreDistribution distribution = AttackScoreDistribution::Uniform;
    double beta_alpha = 2.0;
    double beta_beta = 5.0;
};

/// Appends round(fraction * n) simulated-attack pairs: each keeps a randomly
/// drawn phishing pair's s2 and replaces s1 with a fresh draw in [0,1],
/// labeled +1. Never mutates the existing pairs. When `source_indices` is
/// given it receives, per appended pair, the index of the pair it was
/// derived from.
std::vector<ScorePair> augment_adversarial(const std::vector<ScorePair>& scores,
                                           const AdversarialConfig& config, std::uint64_t seed,
                                           std::vector<std::size_t>* source_indices = nullptr);

struct FusionModel {
    Scheme scheme = Scheme::Max;
    learn::RbfCombinerModel combiner;  // unused for Max
    std::size_t trained_on = 0;        // pairs seen by the combiner (0 for Max)
    eval::GridPoint selected;          // tuned (C, gamma) for trained schemes

    double score(const ScorePair& s) const;
};

struct FusionGrid {
    std::vector<double> c_grid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma_grid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    int folds = 5;
};

/// Max needs no fitting; trained fits an RBF combiner with (C, gamma) chosen
/// by cross-validated grid search; adversarial augments the score set first.
/// Optional group ids put whole families into single CV folds.
FusionModel train_fusion(const std::vector<ScorePair>& scores, Scheme scheme,
                         const FusionGrid& grid, std::uint64_t seed,
                         const AdversarialConfig& adversarial = AdversarialConfig(),
                         const std::vector<std::string>& group_ids = {});

}  // namespace sitedelta::fusion
