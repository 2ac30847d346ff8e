#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "sitedelta/corpus.hpp"
#include "sitedelta/error.hpp"
#include "sitedelta/image.hpp"
#include "sitedelta/model_io.hpp"
#include "sitedelta/pipeline.hpp"

using namespace sitedelta;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / "sitedelta-pipeline-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

pipeline::ExperimentConfig tiny_config() {
    pipeline::ExperimentConfig config;
    config.seed = 5;
    config.repetitions = 2;
    config.train_fraction = 0.6;
    config.cv_folds = 3;
    config.fp_targets = {0.05};
    config.visual.canvas_width = 64;
    config.visual.canvas_height = 64;
    config.visual.vocabulary_size = 8;
    config.visual.max_vocabulary_words = 5000;
    return config;
}

struct TinyCorpus {
    std::string manifest;
    std::vector<corpus::FamilyRecord> families;
};

TinyCorpus tiny_corpus(const char* name, int families = 12, int pages = 3,
                       std::uint64_t seed = 5) {
    auto dir = fresh_dir(name);
    TinyCorpus out;
    out.manifest = corpus::generate_synthetic_corpus(families, pages, seed, dir.string());
    out.families = corpus::load_corpus(out.manifest);
    return out;
}

// full serialization of everything fitted, for bit-identity comparisons
std::string artifacts_fingerprint(const pipeline::RepetitionArtifacts& art) {
    nlohmann::json j;
    j["html_scaler"] = model_io::to_json(art.html_scaler);
    j["visual_scaler"] = model_io::to_json(art.visual_scaler);
    j["html_model"] = model_io::to_json(art.html_model);
    j["visual_model"] = model_io::to_json(art.visual_model);
    j["vocab_centroids"] = art.vocabulary.centroids;
    j["s1_norm"] = model_io::to_json(art.stacked.s1_norm);
    j["s2_norm"] = model_io::to_json(art.stacked.s2_norm);
    j["fusion_trained"] = model_io::to_json(art.fusion_trained);
    j["fusion_adversarial"] = model_io::to_json(art.fusion_adversarial);
    return j.dump();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("stacked generalization covers every training page exactly once") {
    auto corpus_data = tiny_corpus("stacked");
    pipeline::FeatureStore store(corpus_data.families, html::Config());
    auto config = tiny_config();
    auto splits = corpus::make_splits(corpus_data.families, 0.6, 1, config.seed);
    const auto& train_ids = splits.repetitions[0].train_family_ids;
    auto art = pipeline::fit_repetition(store, train_ids, config, 42);

    std::set<std::string> expected;
    std::size_t expected_count = 0;
    for (const auto& fid : train_ids) {
        for (const auto& page : store.family(fid).pages) {
            expected.insert(fid + "/" + page.page_id);
            ++expected_count;
        }
    }
    std::set<std::string> seen;
    for (const auto& s : art.stacked.scores) seen.insert(s.family_id + "/" + s.page_id);
    CHECK(art.stacked.scores.size() == expected_count);  // exactly one pair per page
    CHECK(seen == expected);

    // leakage guard: a fold's validation families never feed its models
    for (std::size_t f = 0; f < art.stacked.fold_valid_families.size(); ++f) {
        std::set<std::string> train_fams(art.stacked.fold_train_families[f].begin(),
                                         art.stacked.fold_train_families[f].end());
        for (const auto& fam : art.stacked.fold_valid_families[f])
            CHECK(train_fams.count(fam) == 0);
    }
    for (const auto& s : art.stacked.scores) {
        std::set<std::string> train_fams(art.stacked.fold_train_families[s.fold].begin(),
                                         art.stacked.fold_train_families[s.fold].end());
        CHECK(train_fams.count(s.family_id) == 0);
    }

    // min-max contract: the collected normalized scores span [0,1] exactly
    double s1_min = 1e9, s1_max = -1e9, s2_min = 1e9, s2_max = -1e9;
    for (const auto& s : art.stacked.scores) {
        s1_min = std::min(s1_min, s.s1);
        s1_max = std::max(s1_max, s.s1);
        s2_min = std::min(s2_min, s.s2);
        s2_max = std::max(s2_max, s.s2);
    }
    CHECK(s1_min == 0.0);
    CHECK(s1_max == 1.0);
    CHECK(s2_min == 0.0);
    CHECK(s2_max == 1.0);
}

TEST_CASE("learned html weights on the synthetic corpus: url and title negative") {
    auto corpus_data = tiny_corpus("weights", 14, 4, 7);
    pipeline::FeatureStore store(corpus_data.families, html::Config());
    auto config = tiny_config();
    std::vector<std::string> all_ids;
    for (const auto& f : corpus_data.families) all_ids.push_back(f.family_id);
    std::sort(all_ids.begin(), all_ids.end());
    auto art = pipeline::fit_repetition(store, all_ids, config, 11);
    // feature order: url ... title at index 9 (see HtmlDeltaVector)
    CHECK(art.html_model.weights[0] < 0.0);
    CHECK(art.html_model.weights[9] < 0.0);
}

TEST_CASE("fitting never reads test-family files (poisoning probe)") {
    auto corpus_data = tiny_corpus("poison");
    auto config = tiny_config();
    auto splits = corpus::make_splits(corpus_data.families, 0.6, 1, 9);
    const auto& train_ids = splits.repetitions[0].train_family_ids;
    const auto& test_ids = splits.repetitions[0].test_family_ids;
    REQUIRE(!test_ids.empty());

    pipeline::FeatureStore store_a(corpus_data.families, html::Config());
    auto art_a = pipeline::fit_repetition(store_a, train_ids, config, 77);

    // poison every test family's files
    std::set<std::string> test_set(test_ids.begin(), test_ids.end());
    for (const auto& fam : corpus_data.families) {
        if (!test_set.count(fam.family_id)) continue;
        std::vector<const corpus::PageArtifact*> artifacts{&fam.homepage};
        for (const auto& p : fam.pages) artifacts.push_back(&p);
        for (const auto* page : artifacts) {
            std::ofstream html_out(page->html_path, std::ios::binary);
            html_out << "<html>poisoned</html>";
            img::Image garbage(40, 40);
            for (auto& b : garbage.pixels) b = 255;
            img::write_png(garbage, page->snapshot_path);
        }
    }

    pipeline::FeatureStore store_b(corpus_data.families, html::Config());
    auto art_b = pipeline::fit_repetition(store_b, train_ids, config, 77);
    CHECK(artifacts_fingerprint(art_a) == artifacts_fingerprint(art_b));
}

TEST_CASE("experiments are deterministic and structurally complete") {
    auto corpus_data = tiny_corpus("experiment");
    auto config = tiny_config();

    pipeline::FeatureStore store_a(corpus_data.families, html::Config());
    auto report_a = pipeline::run_experiment(store_a, config);
    REQUIRE(report_a.evaluations.size() == 2);
    REQUIRE(report_a.artifacts.size() == 2);

    pipeline::FeatureStore store_b(corpus_data.families, html::Config());
    auto report_b = pipeline::run_experiment(store_b, config);

    auto strip_timing = [](nlohmann::json j) {
        j["metadata"].erase("total_seconds");
        for (auto& rep : j["repetitions"]) rep.erase("seconds");
        return j;
    };
    CHECK(strip_timing(report_a.to_json()) == strip_timing(report_b.to_json()));

    for (const auto& ev : report_a.evaluations) {
        // every scheme got a ROC, an AUC, and an operating point per target
        for (const auto& scheme : pipeline::scheme_names()) {
            CHECK(ev.roc.count(scheme) == 1);
            CHECK(ev.auc.at(scheme) >= 0.0);
            CHECK(ev.auc.at(scheme) <= 1.0);
            CHECK(ev.operating_points.at(scheme).size() == config.fp_targets.size());
        }
        // attack sweep: 4 schemes, budgets 0..11, budget 0 equals the clean DR
        REQUIRE(ev.attacks.size() == 4);
        for (const auto& curve : ev.attacks) {
            REQUIRE(curve.detection_rates.size() == 12);
            auto op = ev.operating_points.at(curve.scheme)[0];
            CHECK(curve.detection_rates[0] == doctest::Approx(op.detection_rate));
        }
        // the max rule dominates both normalized channels pointwise
        for (const auto& ts : ev.test_scores) {
            CHECK(ts.fused.at("max") >= ts.s1);
            CHECK(ts.fused.at("max") >= ts.s2);
        }
        // s2 is never touched by the HTML attack machinery: max-fused
        // detection under attack can never drop below the snapshot channel
        const auto& max_curve = *std::find_if(ev.attacks.begin(), ev.attacks.end(),
                                              [](const auto& c) { return c.scheme == "max"; });
        std::size_t phish_total = 0, s2_detected = 0;
        for (const auto& ts : ev.test_scores) {
            if (ts.label != 1) continue;
            ++phish_total;
            if (ts.s2 >= max_curve.threshold) ++s2_detected;
        }
        REQUIRE(phish_total > 0);
        double s2_only = static_cast<double>(s2_detected) / phish_total;
        for (double dr : max_curve.detection_rates) CHECK(dr >= s2_only);
    }
}

TEST_CASE("report files are written and byte-stable") {
    auto corpus_data = tiny_corpus("report");
    auto config = tiny_config();
    config.repetitions = 1;
    pipeline::FeatureStore store(corpus_data.families, html::Config());
    auto report = pipeline::run_experiment(store, config);

    auto out_a = fresh_dir("report-out-a");
    auto out_b = fresh_dir("report-out-b");
    pipeline::write_report(report, out_a.string());
    pipeline::write_report(report, out_b.string());
    for (const char* name : {"report.json", "roc.csv", "attack.csv"})
        CHECK(fs::is_regular_file(out_a / name));
    for (const char* name : {"roc.csv", "attack.csv"}) {
        std::ifstream a(out_a / name), b(out_b / name);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK(!sa.empty());
    }
}

TEST_CASE("bundle round trip and verdicts") {
    auto corpus_data = tiny_corpus("bundle", 12, 3, 21);
    auto config = tiny_config();
    pipeline::FeatureStore store(corpus_data.families, html::Config());
    auto bundle = pipeline::train_bundle(store, config);

    auto dir = fresh_dir("bundle-out");
    pipeline::save_bundle(bundle, dir.string());
    auto loaded = pipeline::load_bundle(dir.string());
    CHECK(loaded.thresholds == bundle.thresholds);
    CHECK(loaded.artifacts.html_model.weights == bundle.artifacts.html_model.weights);
    CHECK(loaded.artifacts.vocabulary.centroids == bundle.artifacts.vocabulary.centroids);

    const std::vector<std::string> schemes{"max", "trained", "adversarial", "html", "visual"};
    // a homepage scored against itself is legit under every scheme
    const auto& fam = store.family(corpus_data.families[0].family_id);
    for (const auto& scheme : schemes) {
        auto verdict = pipeline::score_page(
            loaded, fam.homepage.html_path, fam.homepage.snapshot_path, fam.homepage.url,
            fam.homepage.html_path, fam.homepage.snapshot_path, fam.homepage.url, scheme,
            std::numeric_limits<double>::quiet_NaN(), html::Config());
        CHECK_FALSE(verdict.phish);
    }
    // and the family's phishing page is flagged
    const corpus::PageArtifact* phish = nullptr;
    for (const auto& p : fam.pages)
        if (p.label == corpus::Label::Phish) phish = &p;
    REQUIRE(phish);
    for (const auto& scheme : schemes) {
        auto verdict = pipeline::score_page(
            loaded, phish->html_path, phish->snapshot_path, phish->url, fam.homepage.html_path,
            fam.homepage.snapshot_path, fam.homepage.url, scheme,
            std::numeric_limits<double>::quiet_NaN(), html::Config());
        CHECK(verdict.phish);
    }

    // a missing component is reported by name
    fs::remove(dir / "visual_model.json");
    CHECK_THROWS_WITH_AS(pipeline::load_bundle(dir.string()),
                         doctest::Contains("visual_model"), Error);
}

}  // TEST_SUITE
