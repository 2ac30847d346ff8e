#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sitedelta/corpus.hpp"
#include "sitedelta/cv.hpp"
#include "sitedelta/evasion.hpp"
#include "sitedelta/fusion.hpp"
#include "sitedelta/html_delta.hpp"
#include "sitedelta/image.hpp"
#include "sitedelta/roc.hpp"
#include "sitedelta/svm.hpp"
#include "sitedelta/visual.hpp"

namespace sitedelta::pipeline {

struct VisualParams {
    int canvas_width = visual::kDefaultCanvasWidth;
    int canvas_height = visual::kDefaultCanvasHeight;
    int vocabulary_size = visual::kDefaultVocabularySize;
    std::size_t max_vocabulary_words = 100000;  // reservoir cap for k-means input
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int repetitions = 20;
    double train_fraction = 0.6;
    int cv_folds = 5;
    std::vector<double> linear_c_grid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> rbf_c_grid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> rbf_gamma_grid{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
    fusion::AdversarialConfig adversarial;  // fraction defaults to 0.3
    std::vector<double> fp_targets{0.01};
    VisualParams visual;
    int attack_budget_max = 11;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// Lazy, memoized page features. Nothing is read from disk until asked for,
/// so fitting on a training split never touches test-family files.
class FeatureStore {
public:
    FeatureStore(std::vector<corpus::FamilyRecord> families, html::Config html_config);

    const std::vector<corpus::FamilyRecord>& families() const { return families_; }
    const corpus::FamilyRecord& family(const std::string& family_id) const;
    const html::Config& html_config() const { return html_config_; }

    /// Delta features of a member page against its family homepage.
    const html::HtmlDeltaVector& delta1(const std::string& family_id,
                                        const std::string& page_id);
    const img::Image& snapshot(const std::string& path);

private:
    const html::ParsedPage& parsed(const std::string& path, const std::string& url);

    std::vector<corpus::FamilyRecord> families_;
    std::map<std::string, std::size_t> family_index_;
    html::Config html_config_;
    std::map<std::string, html::ParsedPage> parsed_cache_;       // by html path
    std::map<std::string, html::HtmlDeltaVector> delta1_cache_;  // by family/page
    std::map<std::string, img::Image> image_cache_;              // by png path
};

/// One out-of-fold score pair from stacked generalization.
struct StackedScore {
    std::string family_id;
    std::string page_id;
    int label = 0;
    int fold = 0;
    double s1_raw = 0.0;
    double s2_raw = 0.0;
    double s1 = 0.0;  // min-max normalized
    double s2 = 0.0;
};

struct StackedResult {
    std::vector<StackedScore> scores;
    std::vector<std::vector<std::string>> fold_train_families;
    std::vector<std::vector<std::string>> fold_valid_families;
    std::vector<eval::GridPoint> fold_html_params;
    std::vector<eval::GridPoint> fold_visual_params;
    learn::MinMaxNormalizer s1_norm;
    learn::MinMaxNormalizer s2_norm;
};

/// Everything fitted from one repetition's training families.
struct RepetitionArtifacts {
    learn::PercentileScaler html_scaler;
    learn::PercentileScaler visual_scaler;
    visual::Vocabulary vocabulary;
    learn::LinearSvmModel html_model;
    learn::LinearSvmModel visual_model;
    eval::GridPoint html_params;
    eval::GridPoint visual_params;
    StackedResult stacked;
    fusion::FusionModel fusion_max;
    fusion::FusionModel fusion_trained;
    fusion::FusionModel fusion_adversarial;

    nlohmann::json to_json() const;
};

RepetitionArtifacts fit_repetition(FeatureStore& store,
                                   const std::vector<std::string>& train_family_ids,
                                   const ExperimentConfig& config, std::uint64_t rep_seed);

inline const std::vector<std::string>& scheme_names() {
    static const std::vector<std::string> names = {"html", "visual", "max", "trained",
                                                   "adversarial"};
    return names;
}

struct TestScore {
    std::string family_id;
    std::string page_id;
    int label = 0;
    double s1_raw = 0.0;
    double s2_raw = 0.0;
    double s1 = 0.0;  // normalized, clipped to [0,1]
    double s2 = 0.0;
    std::vector<double> scaled_delta1;  // model-space HTML features (attack input)
    std::map<std::string, double> fused;  // per scheme
};

struct AttackCurve {
    std::string scheme;
    double threshold = 0.0;                // fixed clean operating point
    std::vector<double> detection_rates;   // index = budget 0..max
};

struct RepetitionEvaluation {
    std::vector<TestScore> test_scores;
    std::map<std::string, eval::RocCurve> roc;   // per scheme
    std::map<std::string, double> auc;           // per scheme
    // per scheme, one operating point per configured fp target
    std::map<std::string, std::vector<eval::OperatingPoint>> operating_points;
    std::vector<AttackCurve> attacks;            // html/max/trained/adversarial
    double seconds = 0.0;
};

RepetitionEvaluation evaluate_repetition(FeatureStore& store,
                                         const RepetitionArtifacts& artifacts,
                                         const std::vector<std::string>& test_family_ids,
                                         const ExperimentConfig& config);

struct ExperimentReport {
    ExperimentConfig config;
    corpus::SplitPlan splits;
    std::vector<RepetitionArtifacts> artifacts;    // one per repetition
    std::vector<RepetitionEvaluation> evaluations;
    double total_seconds = 0.0;

    nlohmann::json to_json() const;
};

ExperimentReport run_experiment(FeatureStore& store, const ExperimentConfig& config);

/// Writes report.json, roc.csv and attack.csv under out_dir. The CSVs carry
/// no timing and are byte-identical across reruns with the same inputs.
void write_report(const ExperimentReport& report, const std::string& out_dir);

// ---- deployable model bundle ------------------------------------------------

struct ModelBundle {
    ExperimentConfig config;
    RepetitionArtifacts artifacts;
    /// Per-scheme decision thresholds pinned on the out-of-fold training
    /// scores at fp_target, so "shifted score >= 0 means phish" holds at a
    /// calibrated operating point for every scheme.
    std::map<std::string, double> thresholds;
    double fp_target = 0.01;
};

/// Trains a bundle on every family in the store (no held-out split).
ModelBundle train_bundle(FeatureStore& store, const ExperimentConfig& config);

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

struct PageVerdict {
    double s1_raw = 0.0;
    double s2_raw = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double fused = 0.0;      // shifted so >= 0 means phish
    bool phish = false;
};

/// Scores one page pair with a trained bundle. `scheme` is one of
/// html/visual/max/trained/adversarial; `threshold_override`, when finite,
/// replaces the scheme's stored decision threshold.
PageVerdict score_page(const ModelBundle& bundle, const std::string& page_html_path,
                       const std::string& page_png_path, const std::string& page_url,
                       const std::string& homepage_html_path,
                       const std::string& homepage_png_path, const std::string& homepage_url,
                       const std::string& scheme, double threshold_override,
                       const html::Config& html_config);

}  // namespace sitedelta::pipeline
