#include "sitedelta/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sitedelta/error.hpp"
#include "sitedelta/model_io.hpp"
#include "sitedelta/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sitedelta::pipeline {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (!j.is_object()) throw SchemaError("config must be a JSON object");
    c.seed = j.value("seed", c.seed);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    if (j.contains("linear_c_grid")) c.linear_c_grid = j["linear_c_grid"].get<std::vector<double>>();
    if (j.contains("rbf_c_grid")) c.rbf_c_grid = j["rbf_c_grid"].get<std::vector<double>>();
    if (j.contains("rbf_gamma_grid"))
        c.rbf_gamma_grid = j["rbf_gamma_grid"].get<std::vector<double>>();
    c.adversarial.fraction = j.value("fusion_fraction", c.adversarial.fraction);
    c.adversarial.fraction_of_phish_only =
        j.value("fraction_of_phish_only", c.adversarial.fraction_of_phish_only);
    if (j.contains("attack_distribution")) {
        std::string d = j["attack_distribution"].get<std::string>();
        if (d == "uniform") c.adversarial.distribution = fusion::AttackScoreDistribution::Uniform;
        else if (d == "beta") c.adversarial.distribution = fusion::AttackScoreDistribution::Beta;
        else throw SchemaError("attack_distribution must be \"uniform\" or \"beta\"");
    }
    c.adversarial.beta_alpha = j.value("beta_alpha", c.adversarial.beta_alpha);
    c.adversarial.beta_beta = j.value("beta_beta", c.adversarial.beta_beta);
    if (j.contains("fp_targets")) c.fp_targets = j["fp_targets"].get<std::vector<double>>();
    c.visual.canvas_width = j.value("snapshot_width", c.visual.canvas_width);
    c.visual.canvas_height = j.value("snapshot_height", c.visual.canvas_height);
    c.visual.vocabulary_size = j.value("vocabulary_size", c.visual.vocabulary_size);
    c.visual.max_vocabulary_words =
        j.value("max_vocabulary_words", c.visual.max_vocabulary_words);
    c.attack_budget_max = j.value("attack_budget_max", c.attack_budget_max);

    if (c.repetitions < 1) throw SchemaError("repetitions must be >= 1");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw SchemaError("train_fraction must lie in (0,1)");
    if (c.cv_folds < 2) throw SchemaError("cv_folds must be >= 2");
    if (c.fp_targets.empty()) throw SchemaError("fp_targets must not be empty");
    if (c.visual.canvas_width < 64 || c.visual.canvas_height < 64)
        throw SchemaError("snapshot size must be at least 64x64");
    if (c.visual.vocabulary_size < 2) throw SchemaError("vocabulary_size must be >= 2");
    if (c.attack_budget_max < 0 ||
        c.attack_budget_max > static_cast<int>(html::HtmlDeltaVector::kDim))
        throw SchemaError("attack_budget_max must lie in 0..11");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["repetitions"] = c.repetitions;
    j["train_fraction"] = c.train_fraction;
    j["cv_folds"] = c.cv_folds;
    j["linear_c_grid"] = c.linear_c_grid;
    j["rbf_c_grid"] = c.rbf_c_grid;
    j["rbf_gamma_grid"] = c.rbf_gamma_grid;
    j["fusion_fraction"] = c.adversarial.fraction;
    j["fraction_of_phish_only"] = c.adversarial.fraction_of_phish_only;
    j["attack_distribution"] =
        c.adversarial.distribution == fusion::AttackScoreDistribution::Uniform ? "uniform"
                                                                               : "beta";
    j["beta_alpha"] = c.adversarial.beta_alpha;
    j["beta_beta"] = c.adversarial.beta_beta;
    j["fp_targets"] = c.fp_targets;
    j["snapshot_width"] = c.visual.canvas_width;
    j["snapshot_height"] = c.visual.canvas_height;
    j["vocabulary_size"] = c.visual.vocabulary_size;
    j["max_vocabulary_words"] = c.visual.max_vocabulary_words;
    j["attack_budget_max"] = c.attack_budget_max;
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_json(model_io::load_json(path));
}

// ---------------------------------------------------------------------------
// feature store
// ---------------------------------------------------------------------------

FeatureStore::FeatureStore(std::vector<corpus::FamilyRecord> families, html::Config html_config)
    : families_(std::move(families)), html_config_(html_config) {
    for (std::size_t i = 0; i < families_.size(); ++i)
        family_index_[families_[i].family_id] = i;
}

const corpus::FamilyRecord& FeatureStore::family(const std::string& family_id) const {
    auto it = family_index_.find(family_id);
    if (it == family_index_.end()) throw ValueError("unknown family id: " + family_id);
    return families_[it->second];
}

const html::ParsedPage& FeatureStore::parsed(const std::string& path, const std::string& url) {
    auto it = parsed_cache_.find(path);
    if (it != parsed_cache_.end()) return it->second;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open HTML file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parsed_cache_.emplace(path, html::parse_page(buf.str(), url, html_config_))
        .first->second;
}

const html::HtmlDeltaVector& FeatureStore::delta1(const std::string& family_id,
                                                  const std::string& page_id) {
    const std::string key = family_id + "\x1f" + page_id;
    auto it = delta1_cache_.find(key);
    if (it != delta1_cache_.end()) return it->second;
    const auto& fam = family(family_id);
    const corpus::PageArtifact* page = nullptr;
    for (const auto& p : fam.pages)
        if (p.page_id == page_id) page = &p;
    if (!page) throw ValueError("unknown page " + page_id + " in family " + family_id);
    const auto& home = parsed(fam.homepage.html_path, fam.homepage.url);
    const auto& doc = parsed(page->html_path, page->url);
    return delta1_cache_
        .emplace(key, html::extract_html_delta(doc, home, html_config_, fam.homepage_aliases))
        .first->second;
}

const img::Image& FeatureStore::snapshot(const std::string& path) {
    auto it = image_cache_.find(path);
    if (it != image_cache_.end()) return it->second;
    return image_cache_.emplace(path, img::read_png(path)).first->second;
}

// ---------------------------------------------------------------------------
// fitting one repetition
// ---------------------------------------------------------------------------

namespace {

struct MemberIndex {
    std::vector<std::string> family_of;  // per member row
    std::vector<std::string> page_of;
    std::vector<int> labels;  // +1 phish, -1 legit
};

MemberIndex collect_members(FeatureStore& store, const std::vector<std::string>& family_ids) {
    MemberIndex idx;
    for (const auto& fid : family_ids) {
        const auto& fam = store.family(fid);
        for (const auto& page : fam.pages) {
            idx.family_of.push_back(fid);
            idx.page_of.push_back(page.page_id);
            idx.labels.push_back(page.label == corpus::Label::Phish ? 1 : -1);
        }
    }
    return idx;
}

eval::FoldTrainer gram_fold_trainer(const learn::Matrix& rows,
                                    const std::vector<std::vector<double>>& gram,
                                    const std::vector<int>& labels,
                                    const std::vector<std::size_t>& global_of) {
    return [&rows, &gram, &labels, &global_of](const std::vector<std::size_t>& train_idx,
                                               const std::vector<std::size_t>& test_idx,
                                               const eval::GridPoint& params) {
        std::vector<std::size_t> subset;
        std::vector<int> sub_labels;
        subset.reserve(train_idx.size());
        for (std::size_t i : train_idx) {
            subset.push_back(global_of[i]);
            sub_labels.push_back(labels[i]);
        }
        auto model = learn::train_linear_svm_gram(rows, gram, subset, sub_labels, params.c);
        std::vector<double> scores;
        scores.reserve(test_idx.size());
        for (std::size_t i : test_idx)
            scores.push_back(learn::score_linear(model, rows[global_of[i]]));
        return scores;
    };
}

std::vector<std::size_t> identity_index(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

RepetitionArtifacts fit_repetition(FeatureStore& store,
                                   const std::vector<std::string>& train_family_ids,
                                   const ExperimentConfig& config, std::uint64_t rep_seed) {
    Rng seeds(rep_seed);
    const std::uint64_t reservoir_seed = seeds.next_u64();
    const std::uint64_t kmeans_seed = seeds.next_u64();
    const std::uint64_t html_cv_seed = seeds.next_u64();
    const std::uint64_t visual_cv_seed = seeds.next_u64();
    const std::uint64_t stacked_seed = seeds.next_u64();

    RepetitionArtifacts art;
    MemberIndex members = collect_members(store, train_family_ids);
    const std::size_t n = members.labels.size();
    if (n < 2) throw ValueError("training split has fewer than 2 member pages");

    // HTML channel: raw delta rows, percentile scaling fitted on them
    learn::Matrix html_raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto values = store.delta1(members.family_of[i], members.page_of[i]).values();
        html_raw[i].assign(values.begin(), values.end());
    }
    art.html_scaler = learn::PercentileScaler::fit(html_raw);
    learn::Matrix html_rows = art.html_scaler.transform(html_raw);

    // visual vocabulary: reservoir-capped words from the training images only
    const visual::DescribeParams dparams{config.visual.canvas_width,
                                         config.visual.canvas_height};
    {
        Rng reservoir_rng(reservoir_seed);
        std::vector<std::vector<double>> reservoir;
        const std::size_t cap = config.visual.max_vocabulary_words;
        std::size_t seen = 0;
        for (const auto& fid : train_family_ids) {
            const auto& fam = store.family(fid);
            std::vector<const corpus::PageArtifact*> artifacts{&fam.homepage};
            for (const auto& p : fam.pages) artifacts.push_back(&p);
            for (const auto* page : artifacts) {
                auto words = visual::snapshot_words(store.snapshot(page->snapshot_path), dparams);
                for (auto& w : words) {
                    ++seen;
                    if (reservoir.size() < cap) {
                        reservoir.push_back(std::move(w));
                    } else {
                        std::uint64_t j = reservoir_rng.below(seen);
                        if (j < cap) reservoir[j] = std::move(w);
                    }
                }
            }
        }
        art.vocabulary = visual::build_vocabulary(reservoir, config.visual.vocabulary_size,
                                                  kmeans_seed, "training-split");
    }

    // visual channel rows: delta2 = min(p, p0), percentile-scaled
    learn::Matrix visual_raw(n);
    {
        std::map<std::string, visual::VisualDescriptor> descriptors;  // by png path
        auto describe = [&](const std::string& path) -> const visual::VisualDescriptor& {
            auto it = descriptors.find(path);
            if (it != descriptors.end()) return it->second;
            return descriptors
                .emplace(path,
                         visual::describe_snapshot(store.snapshot(path), art.vocabulary, dparams))
                .first->second;
        };
        std::size_t row = 0;
        for (const auto& fid : train_family_ids) {
            const auto& fam = store.family(fid);
            const auto& home = describe(fam.homepage.snapshot_path);
            for (const auto& page : fam.pages) {
                (void)page;
                const auto& p = describe(page.snapshot_path);
                visual_raw[row++] = visual::visual_delta(p, home).values;
            }
        }
    }
    art.visual_scaler = learn::PercentileScaler::fit(visual_raw);
    learn::Matrix visual_rows = art.visual_scaler.transform(visual_raw);
    visual_raw.clear();
    visual_raw.shrink_to_fit();

    const auto html_gram = learn::linear_gram(html_rows);
    const auto visual_gram = learn::linear_gram(visual_rows);
    const auto all_idx = identity_index(n);

    // tune + train the final base classifiers on the whole training split
    {
        auto trainer = gram_fold_trainer(html_rows, html_gram, members.labels, all_idx);
        auto search = eval::grid_search_cv(members.labels, trainer, config.linear_c_grid, {},
                                           config.cv_folds, html_cv_seed, members.family_of);
        art.html_params = search.best;
        art.html_model = learn::train_linear_svm_gram(html_rows, html_gram, all_idx,
                                                      members.labels, search.best.c);
    }
    {
        auto trainer = gram_fold_trainer(visual_rows, visual_gram, members.labels, all_idx);
        auto search = eval::grid_search_cv(members.labels, trainer, config.linear_c_grid, {},
                                           config.cv_folds, visual_cv_seed, members.family_of);
        art.visual_params = search.best;
        art.visual_model = learn::train_linear_svm_gram(visual_rows, visual_gram, all_idx,
                                                        members.labels, search.best.c);
    }

    // stacked generalization: out-of-fold scores for every training page
    {
        const auto fold_of =
            eval::make_folds(members.labels, config.cv_folds, stacked_seed, members.family_of);
        art.stacked.fold_train_families.resize(config.cv_folds);
        art.stacked.fold_valid_families.resize(config.cv_folds);

        for (int f = 0; f < config.cv_folds; ++f) {
            const std::uint64_t inner_html_seed = seeds.next_u64();
            const std::uint64_t inner_visual_seed = seeds.next_u64();

            std::vector<std::size_t> train_rows, valid_rows;
            for (std::size_t i = 0; i < n; ++i)
                (fold_of[i] == f ? valid_rows : train_rows).push_back(i);

            std::set<std::string> train_fams, valid_fams;
            for (std::size_t i : train_rows) train_fams.insert(members.family_of[i]);
            for (std::size_t i : valid_rows) valid_fams.insert(members.family_of[i]);
            art.stacked.fold_train_families[f].assign(train_fams.begin(), train_fams.end());
            art.stacked.fold_valid_families[f].assign(valid_fams.begin(), valid_fams.end());

            std::vector<int> sub_labels;
            std::vector<std::string> sub_groups;
            for (std::size_t i : train_rows) {
                sub_labels.push_back(members.labels[i]);
                sub_groups.push_back(members.family_of[i]);
            }

            auto html_trainer = gram_fold_trainer(html_rows, html_gram, sub_labels, train_rows);
            auto html_search =
                eval::grid_search_cv(sub_labels, html_trainer, config.linear_c_grid, {},
                                     config.cv_folds, inner_html_seed, sub_groups);
            auto html_model = learn::train_linear_svm_gram(html_rows, html_gram, train_rows,
                                                           sub_labels, html_search.best.c);
            art.stacked.fold_html_params.push_back(html_search.best);

            auto visual_trainer =
                gram_fold_trainer(visual_rows, visual_gram, sub_labels, train_rows);
            auto visual_search =
                eval::grid_search_cv(sub_labels, visual_trainer, config.linear_c_grid, {},
                                     config.cv_folds, inner_visual_seed, sub_groups);
            auto visual_model = learn::train_linear_svm_gram(visual_rows, visual_gram, train_rows,
                                                             sub_labels, visual_search.best.c);
            art.stacked.fold_visual_params.push_back(visual_search.best);

            for (std::size_t i : valid_rows) {
                StackedScore s;
                s.family_id = members.family_of[i];
                s.page_id = members.page_of[i];
                s.label = members.labels[i];
                s.fold = f;
                s.s1_raw = learn::score_linear(html_model, html_rows[i]);
                s.s2_raw = learn::score_linear(visual_model, visual_rows[i]);
                art.stacked.scores.push_back(std::move(s));
            }
        }

        std::vector<double> s1_all, s2_all;
        for (const auto& s : art.stacked.scores) {
            s1_all.push_back(s.s1_raw);
            s2_all.push_back(s.s2_raw);
        }
        art.stacked.s1_norm = learn::MinMaxNormalizer::fit(s1_all);
        art.stacked.s2_norm = learn::MinMaxNormalizer::fit(s2_all);
        for (auto& s : art.stacked.scores) {
            s.s1 = art.stacked.s1_norm.transform(s.s1_raw);
            s.s2 = art.stacked.s2_norm.transform(s.s2_raw);
        }
    }

    // fusion combiners on the normalized stacked score set
    {
        const std::uint64_t trained_seed = seeds.next_u64();
        const std::uint64_t adversarial_seed = seeds.next_u64();
        std::vector<fusion::ScorePair> pairs;
        std::vector<std::string> groups;
        for (const auto& s : art.stacked.scores) {
            pairs.push_back({s.s1, s.s2, s.label});
            groups.push_back(s.family_id);
        }
        fusion::FusionGrid grid;
        grid.c_grid = config.rbf_c_grid;
        grid.gamma_grid = config.rbf_gamma_grid;
        grid.folds = config.cv_folds;
        art.fusion_max = fusion::train_fusion(pairs, fusion::Scheme::Max, grid, trained_seed);
        art.fusion_trained = fusion::train_fusion(pairs, fusion::Scheme::Trained, grid,
                                                  trained_seed, config.adversarial, groups);
        art.fusion_adversarial =
            fusion::train_fusion(pairs, fusion::Scheme::Adversarial, grid, adversarial_seed,
                                 config.adversarial, groups);
    }
    return art;
}

// ---------------------------------------------------------------------------
// evaluating one repetition
// ---------------------------------------------------------------------------

RepetitionEvaluation evaluate_repetition(FeatureStore& store,
                                         const RepetitionArtifacts& artifacts,
                                         const std::vector<std::string>& test_family_ids,
                                         const ExperimentConfig& config) {
    RepetitionEvaluation ev;
    const visual::DescribeParams dparams{config.visual.canvas_width,
                                         config.visual.canvas_height};

    std::map<std::string, visual::VisualDescriptor> descriptors;
    auto describe = [&](const std::string& path) -> const visual::VisualDescriptor& {
        auto it = descriptors.find(path);
        if (it != descriptors.end()) return it->second;
        return descriptors
            .emplace(path, visual::describe_snapshot(store.snapshot(path), artifacts.vocabulary,
                                                     dparams))
            .first->second;
    };

    for (const auto& fid : test_family_ids) {
        const auto& fam = store.family(fid);
        const auto& home_desc = describe(fam.homepage.snapshot_path);
        for (const auto& page : fam.pages) {
            TestScore ts;
            ts.family_id = fid;
            ts.page_id = page.page_id;
            ts.label = page.label == corpus::Label::Phish ? 1 : -1;

            auto raw1 = store.delta1(fid, page.page_id).values();
            ts.scaled_delta1 =
                artifacts.html_scaler.transform(std::vector<double>(raw1.begin(), raw1.end()));
            ts.s1_raw = learn::score_linear(artifacts.html_model, ts.scaled_delta1);

            const auto& p = describe(page.snapshot_path);
            auto d2 = visual::visual_delta(p, home_desc).values;
            ts.s2_raw = learn::score_linear(artifacts.visual_model,
                                            artifacts.visual_scaler.transform(d2));

            ts.s1 = artifacts.stacked.s1_norm.transform(ts.s1_raw);
            ts.s2 = artifacts.stacked.s2_norm.transform(ts.s2_raw);

            fusion::ScorePair pair{ts.s1, ts.s2, ts.label};
            ts.fused["html"] = ts.s1_raw;
            ts.fused["visual"] = ts.s2_raw;
            ts.fused["max"] = artifacts.fusion_max.score(pair);
            ts.fused["trained"] = artifacts.fusion_trained.score(pair);
            ts.fused["adversarial"] = artifacts.fusion_adversarial.score(pair);
            ev.test_scores.push_back(std::move(ts));
        }
    }

    std::vector<int> labels;
    for (const auto& ts : ev.test_scores) labels.push_back(ts.label);
    for (const auto& scheme : scheme_names()) {
        std::vector<double> scores;
        for (const auto& ts : ev.test_scores) scores.push_back(ts.fused.at(scheme));
        ev.roc[scheme] = eval::compute_roc(scores, labels);
        ev.auc[scheme] = eval::auc(ev.roc[scheme]);
        for (double target : config.fp_targets)
            ev.operating_points[scheme].push_back(eval::dr_at_fp(ev.roc[scheme], target));
    }

    // worst-case HTML evasion sweep at the first fp target's threshold
    std::vector<const TestScore*> phish;
    for (const auto& ts : ev.test_scores)
        if (ts.label == 1) phish.push_back(&ts);
    if (!phish.empty()) {
        for (const auto& scheme : std::vector<std::string>{"html", "max", "trained",
                                                           "adversarial"}) {
            AttackCurve curve;
            curve.scheme = scheme;
            curve.threshold = ev.operating_points[scheme][0].threshold;
            for (int budget = 0; budget <= config.attack_budget_max; ++budget) {
                std::size_t detected = 0;
                for (const TestScore* ts : phish) {
                    double s1_raw = ts->s1_raw;
                    if (budget > 0) {
                        std::array<double, html::HtmlDeltaVector::kDim> v{};
                        std::copy(ts->scaled_delta1.begin(), ts->scaled_delta1.end(), v.begin());
                        auto attacked = evasion::optimal_html_attack(
                            artifacts.html_model, html::HtmlDeltaVector::from_values(v),
                            evasion::AttackBudget{budget});
                        auto av = attacked.vector.values();
                        s1_raw = learn::score_linear(artifacts.html_model,
                                                     {av.begin(), av.end()});
                    }
                    double detection_score;
                    if (scheme == "html") {
                        detection_score = s1_raw;
                    } else {
                        fusion::ScorePair pair{artifacts.stacked.s1_norm.transform(s1_raw),
                                               ts->s2, 1};
                        if (scheme == "max") detection_score = artifacts.fusion_max.score(pair);
                        else if (scheme == "trained")
                            detection_score = artifacts.fusion_trained.score(pair);
                        else detection_score = artifacts.fusion_adversarial.score(pair);
                    }
                    if (detection_score >= curve.threshold) ++detected;
                }
                curve.detection_rates.push_back(static_cast<double>(detected) /
                                                static_cast<double>(phish.size()));
            }
            ev.attacks.push_back(std::move(curve));
        }
    }
    return ev;
}

// ---------------------------------------------------------------------------
// whole experiment
// ---------------------------------------------------------------------------

ExperimentReport run_experiment(FeatureStore& store, const ExperimentConfig& config) {
    ExperimentReport report;
    report.config = config;
    report.splits = corpus::make_splits(store.families(), config.train_fraction,
                                        config.repetitions, config.seed);
    Rng rep_seeder(config.seed ^ 0xA076'1D64'78BD'642FULL);
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& rep : report.splits.repetitions) {
        const std::uint64_t rep_seed = rep_seeder.next_u64();
        const auto r0 = std::chrono::steady_clock::now();
        RepetitionArtifacts art = fit_repetition(store, rep.train_family_ids, config, rep_seed);
        RepetitionEvaluation ev =
            evaluate_repetition(store, art, rep.test_family_ids, config);
        ev.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count();
        report.artifacts.push_back(std::move(art));
        report.evaluations.push_back(std::move(ev));
    }
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

json RepetitionArtifacts::to_json() const {
    json j;
    j["html_scaler"] = model_io::to_json(html_scaler);
    j["visual_scaler_low_high_dim"] = visual_scaler.low().size();
    j["html_model"] = model_io::to_json(html_model);
    j["html_c"] = html_params.c;
    j["visual_c"] = visual_params.c;
    j["visual_model_bias"] = visual_model.bias;
    j["visual_model_dim"] = visual_model.weights.size();
    j["vocabulary_k"] = vocabulary.k;
    j["vocabulary_seed"] = vocabulary.seed;
    j["s1_normalizer"] = model_io::to_json(stacked.s1_norm);
    j["s2_normalizer"] = model_io::to_json(stacked.s2_norm);
    j["fusion_trained"] = {{"c", fusion_trained.selected.c},
                           {"gamma", fusion_trained.selected.gamma},
                           {"trained_on", fusion_trained.trained_on}};
    j["fusion_adversarial"] = {{"c", fusion_adversarial.selected.c},
                               {"gamma", fusion_adversarial.selected.gamma},
                               {"trained_on", fusion_adversarial.trained_on}};
    json folds = json::array();
    for (std::size_t f = 0; f < stacked.fold_html_params.size(); ++f) {
        folds.push_back({{"html_c", stacked.fold_html_params[f].c},
                         {"visual_c", stacked.fold_visual_params[f].c},
                         {"valid_families", stacked.fold_valid_families[f]}});
    }
    j["stacked_folds"] = folds;
    j["stacked_pairs"] = stacked.scores.size();
    return j;
}

namespace {

json operating_point_json(const eval::OperatingPoint& op, double target) {
    return {{"fp_target", target},
            {"detection_rate", op.detection_rate},
            {"threshold", op.threshold},
            {"fpr", op.fpr}};
}

}  // namespace

json ExperimentReport::to_json() const {
    json j;
    j["config"] = config_to_json(config);
    j["metadata"] = {{"roc_averaging", "vertical, fixed FP grid with step 0.01"},
                     {"total_seconds", total_seconds}};

    json reps = json::array();
    for (std::size_t r = 0; r < evaluations.size(); ++r) {
        json rep;
        rep["train_families"] = splits.repetitions[r].train_family_ids;
        rep["test_families"] = splits.repetitions[r].test_family_ids;
        rep["artifacts"] = artifacts[r].to_json();
        rep["seconds"] = evaluations[r].seconds;
        json schemes;
        for (const auto& scheme : scheme_names()) {
            json s;
            s["auc"] = evaluations[r].auc.at(scheme);
            json ops = json::array();
            const auto& points = evaluations[r].operating_points.at(scheme);
            for (std::size_t t = 0; t < points.size(); ++t)
                ops.push_back(operating_point_json(points[t], config.fp_targets[t]));
            s["dr_at_fp"] = ops;
            schemes[scheme] = s;
        }
        rep["schemes"] = schemes;
        json attacks = json::array();
        for (const auto& curve : evaluations[r].attacks) {
            attacks.push_back({{"scheme", curve.scheme},
                               {"threshold", curve.threshold},
                               {"detection_rates", curve.detection_rates}});
        }
        rep["attack"] = attacks;
        reps.push_back(std::move(rep));
    }
    j["repetitions"] = reps;

    // averages: vertical ROC on a fixed FP grid, mean DR@FP, mean attack curves
    json averages;
    for (const auto& scheme : scheme_names()) {
        json s;
        double mean_auc = 0.0;
        for (const auto& ev : evaluations) mean_auc += ev.auc.at(scheme);
        s["mean_auc"] = evaluations.empty() ? 0.0 : mean_auc / evaluations.size();
        json ops = json::array();
        for (std::size_t t = 0; t < config.fp_targets.size(); ++t) {
            double mean_dr = 0.0, min_dr = 1.0, max_dr = 0.0;
            for (const auto& ev : evaluations) {
                double dr = ev.operating_points.at(scheme)[t].detection_rate;
                mean_dr += dr;
                min_dr = std::min(min_dr, dr);
                max_dr = std::max(max_dr, dr);
            }
            if (!evaluations.empty()) mean_dr /= evaluations.size();
            ops.push_back({{"fp_target", config.fp_targets[t]},
                           {"mean_detection_rate", mean_dr},
                           {"min_detection_rate", min_dr},
                           {"max_detection_rate", max_dr}});
        }
        s["dr_at_fp"] = ops;
        json grid_fprs = json::array(), grid_tprs = json::array();
        for (int g = 0; g <= 100; ++g) {
            double fp = g / 100.0;
            double mean_tpr = 0.0;
            for (const auto& ev : evaluations) mean_tpr += eval::tpr_at_fpr(ev.roc.at(scheme), fp);
            if (!evaluations.empty()) mean_tpr /= evaluations.size();
            grid_fprs.push_back(fp);
            grid_tprs.push_back(mean_tpr);
        }
        s["roc_fpr_grid"] = grid_fprs;
        s["roc_mean_tpr"] = grid_tprs;
        averages[scheme] = s;
    }
    {
        json attack_avg = json::array();
        for (const auto& scheme : std::vector<std::string>{"html", "max", "trained",
                                                           "adversarial"}) {
            std::vector<double> sums;
            std::size_t count = 0;
            for (const auto& ev : evaluations) {
                for (const auto& curve : ev.attacks) {
                    if (curve.scheme != scheme) continue;
                    if (sums.size() < curve.detection_rates.size())
                        sums.resize(curve.detection_rates.size(), 0.0);
                    for (std::size_t b = 0; b < curve.detection_rates.size(); ++b)
                        sums[b] += curve.detection_rates[b];
                    ++count;
                }
            }
            if (count > 0)
                for (auto& v : sums) v /= static_cast<double>(count);
            attack_avg.push_back({{"scheme", scheme}, {"mean_detection_rates", sums}});
        }
        averages["attack"] = attack_avg;
    }
    j["averages"] = averages;
    return j;
}

namespace {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw LoadError("cannot create output directory: " + out_dir);

    model_io::save_json(report.to_json(), (fs::path(out_dir) / "report.json").string());

    std::ofstream roc_csv(fs::path(out_dir) / "roc.csv");
    roc_csv << "repetition,scheme,fpr,tpr,threshold\n";
    for (std::size_t r = 0; r < report.evaluations.size(); ++r) {
        for (const auto& scheme : scheme_names()) {
            for (const auto& p : report.evaluations[r].roc.at(scheme).points) {
                roc_csv << r << ',' << scheme << ',' << fmt_double(p.fpr) << ','
                        << fmt_double(p.tpr) << ',' << fmt_double(p.threshold) << '\n';
            }
        }
    }
    if (!roc_csv) throw LoadError("failed writing roc.csv");

    std::ofstream attack_csv(fs::path(out_dir) / "attack.csv");
    attack_csv << "repetition,budget,scheme,detection_rate,threshold\n";
    for (std::size_t r = 0; r < report.evaluations.size(); ++r) {
        for (const auto& curve : report.evaluations[r].attacks) {
            for (std::size_t b = 0; b < curve.detection_rates.size(); ++b) {
                attack_csv << r << ',' << b << ',' << curve.scheme << ','
                           << fmt_double(curve.detection_rates[b]) << ','
                           << fmt_double(curve.threshold) << '\n';
            }
        }
    }
    if (!attack_csv) throw LoadError("failed writing attack.csv");
}

// ---------------------------------------------------------------------------
// model bundle
// ---------------------------------------------------------------------------

ModelBundle train_bundle(FeatureStore& store, const ExperimentConfig& config) {
    std::vector<std::string> ids;
    for (const auto& fam : store.families()) ids.push_back(fam.family_id);
    std::sort(ids.begin(), ids.end());

    ModelBundle bundle;
    bundle.config = config;
    Rng rep_seeder(config.seed ^ 0xA076'1D64'78BD'642FULL);
    bundle.artifacts = fit_repetition(store, ids, config, rep_seeder.next_u64());
    bundle.fp_target = config.fp_targets[0];

    // pin a decision threshold per scheme on the out-of-fold training scores
    std::vector<int> labels;
    for (const auto& s : bundle.artifacts.stacked.scores) labels.push_back(s.label);
    for (const auto& scheme : scheme_names()) {
        std::vector<double> scores;
        for (const auto& s : bundle.artifacts.stacked.scores) {
            fusion::ScorePair pair{s.s1, s.s2, s.label};
            if (scheme == "html") scores.push_back(s.s1_raw);
            else if (scheme == "visual") scores.push_back(s.s2_raw);
            else if (scheme == "max") scores.push_back(bundle.artifacts.fusion_max.score(pair));
            else if (scheme == "trained")
                scores.push_back(bundle.artifacts.fusion_trained.score(pair));
            else scores.push_back(bundle.artifacts.fusion_adversarial.score(pair));
        }
        bundle.thresholds[scheme] =
            eval::dr_at_fp(eval::compute_roc(scores, labels), bundle.fp_target).threshold;
    }
    return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw LoadError("cannot create bundle directory: " + dir);
    const fs::path root(dir);
    visual::save_vocabulary(bundle.artifacts.vocabulary, (root / "vocabulary.txt").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.html_scaler),
                        (root / "html_scaler.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.visual_scaler),
                        (root / "visual_scaler.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.html_model),
                        (root / "html_model.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.visual_model),
                        (root / "visual_model.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.stacked.s1_norm),
                        (root / "s1_normalizer.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.stacked.s2_norm),
                        (root / "s2_normalizer.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.fusion_max),
                        (root / "fusion_max.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.fusion_trained),
                        (root / "fusion_trained.json").string());
    model_io::save_json(model_io::to_json(bundle.artifacts.fusion_adversarial),
                        (root / "fusion_adversarial.json").string());

    json manifest;
    manifest["format"] = "sitedelta-bundle";
    manifest["version"] = 1;
    manifest["fp_target"] = bundle.fp_target;
    manifest["thresholds"] = bundle.thresholds;
    manifest["config"] = config_to_json(bundle.config);
    manifest["components"] = {
        {"vocabulary", "vocabulary.txt"},
        {"html_scaler", "html_scaler.json"},
        {"visual_scaler", "visual_scaler.json"},
        {"html_model", "html_model.json"},
        {"visual_model", "visual_model.json"},
        {"s1_normalizer", "s1_normalizer.json"},
        {"s2_normalizer", "s2_normalizer.json"},
        {"fusion_max", "fusion_max.json"},
        {"fusion_trained", "fusion_trained.json"},
        {"fusion_adversarial", "fusion_adversarial.json"},
    };
    model_io::save_json(manifest, (root / "bundle.json").string());
}

ModelBundle load_bundle(const std::string& dir) {
    const fs::path root(dir);
    json manifest = model_io::load_json((root / "bundle.json").string());
    if (manifest.value("format", "") != "sitedelta-bundle" || manifest.value("version", 0) != 1)
        throw SchemaError("not a sitedelta bundle: " + dir);

    auto component = [&](const char* name) -> std::string {
        if (!manifest["components"].contains(name))
            throw SchemaError("bundle manifest lacks component \"" + std::string(name) + "\"");
        fs::path p = root / manifest["components"][name].get<std::string>();
        if (!fs::is_regular_file(p))
            throw LoadError("bundle component missing: " + p.string());
        return p.string();
    };

    ModelBundle bundle;
    bundle.fp_target = manifest.value("fp_target", 0.01);
    if (manifest.contains("thresholds"))
        bundle.thresholds = manifest["thresholds"].get<std::map<std::string, double>>();
    for (const auto& scheme : scheme_names())
        if (!bundle.thresholds.count(scheme))
            throw SchemaError("bundle lacks a threshold for scheme " + scheme);
    bundle.config = config_from_json(manifest.at("config"));
    bundle.artifacts.vocabulary = visual::load_vocabulary(component("vocabulary"));
    bundle.artifacts.html_scaler =
        model_io::scaler_from_json(model_io::load_json(component("html_scaler")));
    bundle.artifacts.visual_scaler =
        model_io::scaler_from_json(model_io::load_json(component("visual_scaler")));
    bundle.artifacts.html_model =
        model_io::linear_from_json(model_io::load_json(component("html_model")));
    bundle.artifacts.visual_model =
        model_io::linear_from_json(model_io::load_json(component("visual_model")));
    bundle.artifacts.stacked.s1_norm =
        model_io::normalizer_from_json(model_io::load_json(component("s1_normalizer")));
    bundle.artifacts.stacked.s2_norm =
        model_io::normalizer_from_json(model_io::load_json(component("s2_normalizer")));
    bundle.artifacts.fusion_max =
        model_io::fusion_from_json(model_io::load_json(component("fusion_max")));
    bundle.artifacts.fusion_trained =
        model_io::fusion_from_json(model_io::load_json(component("fusion_trained")));
    bundle.artifacts.fusion_adversarial =
        model_io::fusion_from_json(model_io::load_json(component("fusion_adversarial")));
    return bundle;
}

PageVerdict score_page(const ModelBundle& bundle, const std::string& page_html_path,
                       const std::string& page_png_path, const std::string& page_url,
                       const std::string& homepage_html_path,
                       const std::string& homepage_png_path, const std::string& homepage_url,
                       const std::string& scheme, double threshold_override,
                       const html::Config& html_config) {
    auto read_file = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError("cannot open HTML file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    auto page = html::parse_page(read_file(page_html_path), page_url, html_config);
    auto home = html::parse_page(read_file(homepage_html_path), homepage_url, html_config);
    auto raw1 = html::extract_html_delta(page, home, html_config).values();

    const visual::DescribeParams dparams{bundle.config.visual.canvas_width,
                                         bundle.config.visual.canvas_height};
    auto p = visual::describe_snapshot(img::read_png(page_png_path),
                                       bundle.artifacts.vocabulary, dparams);
    auto p0 = visual::describe_snapshot(img::read_png(homepage_png_path),
                                        bundle.artifacts.vocabulary, dparams);
    auto d2 = visual::visual_delta(p, p0).values;

    PageVerdict verdict;
    verdict.s1_raw = learn::score_linear(
        bundle.artifacts.html_model,
        bundle.artifacts.html_scaler.transform(std::vector<double>(raw1.begin(), raw1.end())));
    verdict.s2_raw = learn::score_linear(bundle.artifacts.visual_model,
                                         bundle.artifacts.visual_scaler.transform(d2));
    verdict.s1 = bundle.artifacts.stacked.s1_norm.transform(verdict.s1_raw);
    verdict.s2 = bundle.artifacts.stacked.s2_norm.transform(verdict.s2_raw);

    fusion::ScorePair pair{verdict.s1, verdict.s2, 0};
    double score;
    if (scheme == "html") score = verdict.s1_raw;
    else if (scheme == "visual") score = verdict.s2_raw;
    else if (scheme == "max") score = bundle.artifacts.fusion_max.score(pair);
    else if (scheme == "trained") score = bundle.artifacts.fusion_trained.score(pair);
    else if (scheme == "adversarial") score = bundle.artifacts.fusion_adversarial.score(pair);
    else throw ValueError("unknown scoring scheme: " + scheme);

    double threshold = bundle.thresholds.at(scheme);
    if (std::isfinite(threshold_override)) threshold = threshold_override;
    verdict.fused = score - threshold;
    verdict.phish = verdict.fused >= 0.0;
    return verdict;
}

}  // namespace sitedelta::pipeline
