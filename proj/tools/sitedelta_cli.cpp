// sitedelta command-line front end: corpus generation, feature extraction,
// training, scoring, protocol evaluation, and the HTML evasion sweep.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "sitedelta/corpus.hpp"
#include "sitedelta/error.hpp"
#include "sitedelta/model_io.hpp"
#include "sitedelta/pipeline.hpp"
#include "sitedelta/rng.hpp"

namespace fs = std::filesystem;
using namespace sitedelta;

namespace {

struct CommonHtmlFlags {
    std::string suffix_list;
    std::string stopword_dir;
};

html::Config make_html_config(const CommonHtmlFlags& flags) {
    html::Config config;
    if (!flags.stopword_dir.empty()) {
        static text::StopwordTable custom;  // keep alive for the process
        custom = text::StopwordTable::load_dir(flags.stopword_dir);
        config.stopwords = &custom;
    }
    if (!flags.suffix_list.empty()) config.suffixes = url::SuffixList::load_file(flags.suffix_list);
    return config;
}

pipeline::ExperimentConfig load_config_or_default(const std::string& path, std::uint64_t seed,
                                                  bool seed_set) {
    pipeline::ExperimentConfig config =
        path.empty() ? pipeline::ExperimentConfig() : pipeline::load_config(path);
    if (seed_set) config.seed = seed;
    return config;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int run(int argc, char** argv) {
    CLI::App app{"delta-based phishing page detection against a site's homepage"};
    app.require_subcommand(1);

    CommonHtmlFlags html_flags;
    app.add_option("--suffix-list", html_flags.suffix_list,
                   "public-suffix list file (one suffix per line)");
    app.add_option("--stopwords-dir", html_flags.stopword_dir,
                   "stop-word directory (one file per language code)");

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "write a synthetic labeled corpus");
    int gen_families = 50, gen_pages = 4;
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    gen->add_option("--families", gen_families, "number of families")->check(CLI::Range(2, 100000));
    gen->add_option("--pages", gen_pages, "member pages per family")->check(CLI::Range(2, 1000));
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    // build-vocab
    auto* vocab_cmd = app.add_subcommand("build-vocab", "k-means visual vocabulary from a corpus");
    std::string vocab_corpus, vocab_out;
    int vocab_k = visual::kDefaultVocabularySize;
    std::uint64_t vocab_seed = 1;
    std::size_t vocab_max_words = 100000;
    int vocab_w = visual::kDefaultCanvasWidth, vocab_h = visual::kDefaultCanvasHeight;
    vocab_cmd->add_option("--corpus", vocab_corpus, "manifest.json path")->required();
    vocab_cmd->add_option("--out", vocab_out, "vocabulary file to write")->required();
    vocab_cmd->add_option("--k", vocab_k, "vocabulary size");
    vocab_cmd->add_option("--seed", vocab_seed, "k-means seed");
    vocab_cmd->add_option("--max-words", vocab_max_words, "word-sample cap");
    vocab_cmd->add_option("--width", vocab_w, "canonical snapshot width");
    vocab_cmd->add_option("--height", vocab_h, "canonical snapshot height");

    // extract
    auto* extract = app.add_subcommand("extract", "write per-page delta features as CSV");
    std::string ex_corpus, ex_out, ex_vocab;
    int ex_w = visual::kDefaultCanvasWidth, ex_h = visual::kDefaultCanvasHeight;
    extract->add_option("--corpus", ex_corpus, "manifest.json path")->required();
    extract->add_option("--out", ex_out, "output directory")->required();
    extract->add_option("--vocab", ex_vocab, "vocabulary file (adds visual_delta.csv)");
    extract->add_option("--width", ex_w, "canonical snapshot width");
    extract->add_option("--height", ex_h, "canonical snapshot height");

    // train
    auto* train = app.add_subcommand("train", "train a model bundle on a whole corpus");
    std::string tr_corpus, tr_config, tr_out;
    std::uint64_t tr_seed = 0;
    train->add_option("--corpus", tr_corpus, "manifest.json path")->required();
    train->add_option("--config", tr_config, "experiment config JSON");
    train->add_option("--out", tr_out, "bundle directory to write")->required();
    train->add_option("--seed", tr_seed, "override config seed");

    // score
    auto* score = app.add_subcommand("score", "score one page against its homepage");
    std::string sc_bundle, sc_html, sc_png, sc_url, sc_home_html, sc_home_png, sc_home_url;
    std::string sc_scheme = "max";
    double sc_threshold = std::numeric_limits<double>::quiet_NaN();
    score->add_option("--bundle", sc_bundle, "trained bundle directory")->required();
    score->add_option("--page-html", sc_html, "candidate page HTML file")->required();
    score->add_option("--page-png", sc_png, "candidate page snapshot PNG")->required();
    score->add_option("--page-url", sc_url, "candidate page URL")->required();
    score->add_option("--homepage-html", sc_home_html, "homepage HTML file")->required();
    score->add_option("--homepage-png", sc_home_png, "homepage snapshot PNG")->required();
    score->add_option("--homepage-url", sc_home_url, "homepage URL")->required();
    score->add_option("--scheme", sc_scheme, "scoring scheme")
        ->check(CLI::IsMember({"max", "trained", "adversarial", "html", "visual"}));
    score->add_option("--threshold", sc_threshold, "override the decision threshold");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run the full split/train/test protocol");
    std::string ev_corpus, ev_config, ev_out;
    std::uint64_t ev_seed = 0;
    evaluate->add_option("--corpus", ev_corpus, "manifest.json path")->required();
    evaluate->add_option("--config", ev_config, "experiment config JSON");
    evaluate->add_option("--out", ev_out, "report directory")->required();
    evaluate->add_option("--seed", ev_seed, "override config seed");

    // attack
    auto* attack = app.add_subcommand("attack", "evasion sweep of a bundle over a corpus");
    std::string at_bundle, at_corpus, at_out;
    double at_fp_target = 0.01;
    int at_budget = 11;
    attack->add_option("--bundle", at_bundle, "trained bundle directory")->required();
    attack->add_option("--corpus", at_corpus, "manifest.json path")->required();
    attack->add_option("--out", at_out, "attack.csv path to write")->required();
    attack->add_option("--fp-target", at_fp_target, "operating false-positive rate");
    attack->add_option("--budget", at_budget, "maximum features modified")
        ->check(CLI::Range(0, 11));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors exit 2
    }
    const html::Config html_config = make_html_config(html_flags);
    const bool tr_seed_set = train->count("--seed") > 0;
    const bool ev_seed_set = evaluate->count("--seed") > 0;

    if (gen->parsed()) {
        std::string manifest =
            corpus::generate_synthetic_corpus(gen_families, gen_pages, gen_seed, gen_out);
        std::cout << manifest << '\n';
        return 0;
    }

    if (vocab_cmd->parsed()) {
        auto families = corpus::load_corpus(vocab_corpus);
        pipeline::FeatureStore store(std::move(families), html_config);
        visual::DescribeParams params{vocab_w, vocab_h};
        Rng rng(vocab_seed);
        std::vector<std::vector<double>> reservoir;
        std::size_t seen = 0;
        for (const auto& fam : store.families()) {
            std::vector<const corpus::PageArtifact*> artifacts{&fam.homepage};
            for (const auto& p : fam.pages) artifacts.push_back(&p);
            for (const auto* page : artifacts) {
                auto words = visual::snapshot_words(store.snapshot(page->snapshot_path), params);
                for (auto& w : words) {
                    ++seen;
                    if (reservoir.size() < vocab_max_words) {
                        reservoir.push_back(std::move(w));
                    } else if (std::uint64_t j = rng.below(seen); j < vocab_max_words) {
                        reservoir[j] = std::move(w);
                    }
                }
            }
        }
        auto vocab = visual::build_vocabulary(reservoir, vocab_k, vocab_seed, vocab_corpus);
        visual::save_vocabulary(vocab, vocab_out);
        std::cout << "vocabulary: k=" << vocab.k << " from " << seen << " words -> " << vocab_out
                  << '\n';
        return 0;
    }

    if (extract->parsed()) {
        auto families = corpus::load_corpus(ex_corpus);
        pipeline::FeatureStore store(std::move(families), html_config);
        fs::create_directories(ex_out);
        {
            std::ofstream csv(fs::path(ex_out) / "html_delta.csv");
            csv << "family_id,page_id,label";
            for (const char* name : html::HtmlDeltaVector::feature_names()) csv << ',' << name;
            csv << '\n';
            for (const auto& fam : store.families()) {
                for (const auto& page : fam.pages) {
                    csv << fam.family_id << ',' << page.page_id << ','
                        << corpus::label_name(page.label);
                    for (double v : store.delta1(fam.family_id, page.page_id).values())
                        csv << ',' << v;
                    csv << '\n';
                }
            }
        }
        if (!ex_vocab.empty()) {
            auto vocab = visual::load_vocabulary(ex_vocab);
            visual::DescribeParams params{ex_w, ex_h};
            std::ofstream csv(fs::path(ex_out) / "visual_delta.csv");
            csv << "family_id,page_id,label,values...\n";
            for (const auto& fam : store.families()) {
                auto home =
                    visual::describe_snapshot(store.snapshot(fam.homepage.snapshot_path), vocab,
                                              params);
                for (const auto& page : fam.pages) {
                    auto p = visual::describe_snapshot(store.snapshot(page.snapshot_path), vocab,
                                                       params);
                    auto d2 = visual::visual_delta(p, home);
                    csv << fam.family_id << ',' << page.page_id << ','
                        << corpus::label_name(page.label);
                    for (double v : d2.values) csv << ',' << v;
                    csv << '\n';
                }
            }
        }
        std::cout << "features written to " << ex_out << '\n';
        return 0;
    }

    if (train->parsed()) {
        auto config = load_config_or_default(tr_config, tr_seed, tr_seed_set);
        auto families = corpus::load_corpus(tr_corpus);
        pipeline::FeatureStore store(std::move(families), html_config);
        auto bundle = pipeline::train_bundle(store, config);
        pipeline::save_bundle(bundle, tr_out);
        std::cout << "bundle written to " << tr_out << " (html C=" << bundle.artifacts.html_params.c
                  << ", visual C=" << bundle.artifacts.visual_params.c
                  << ", max threshold=" << fmt(bundle.thresholds.at("max")) << ")\n";
        return 0;
    }

    if (score->parsed()) {
        auto bundle = pipeline::load_bundle(sc_bundle);
        for (const std::string& path : {sc_html, sc_png, sc_home_html, sc_home_png}) {
            if (!fs::is_regular_file(path)) throw LoadError("missing input file: " + path);
        }
        auto verdict = pipeline::score_page(bundle, sc_html, sc_png, sc_url, sc_home_html,
                                            sc_home_png, sc_home_url, sc_scheme, sc_threshold,
                                            html_config);
        std::cout << "s1=" << fmt(verdict.s1) << " s2=" << fmt(verdict.s2)
                  << " g=" << fmt(verdict.fused) << " verdict="
                  << (verdict.phish ? "phish" : "legit") << '\n';
        return verdict.phish ? 1 : 0;
    }

    if (evaluate->parsed()) {
        auto config = load_config_or_default(ev_config, ev_seed, ev_seed_set);
        auto families = corpus::load_corpus(ev_corpus);
        pipeline::FeatureStore store(std::move(families), html_config);
        auto report = pipeline::run_experiment(store, config);
        pipeline::write_report(report, ev_out);
        for (const auto& scheme : pipeline::scheme_names()) {
            double mean_dr = 0.0;
            for (const auto& ev : report.evaluations)
                mean_dr += ev.operating_points.at(scheme)[0].detection_rate;
            if (!report.evaluations.empty()) mean_dr /= report.evaluations.size();
            std::cout << scheme << ": mean DR@FP<=" << config.fp_targets[0] << " = "
                      << fmt(mean_dr) << '\n';
        }
        std::cout << "report written to " << ev_out << '\n';
        return 0;
    }

    if (attack->parsed()) {
        auto bundle = pipeline::load_bundle(at_bundle);
        auto families = corpus::load_corpus(at_corpus);
        pipeline::FeatureStore store(std::move(families), html_config);
        auto config = bundle.config;
        config.fp_targets = {at_fp_target};
        config.attack_budget_max = at_budget;
        std::vector<std::string> ids;
        for (const auto& fam : store.families()) ids.push_back(fam.family_id);
        std::sort(ids.begin(), ids.end());
        auto ev = pipeline::evaluate_repetition(store, bundle.artifacts, ids, config);
        std::ofstream csv(at_out);
        if (!csv) throw LoadError("cannot write: " + at_out);
        csv << "repetition,budget,scheme,detection_rate,threshold\n";
        for (const auto& curve : ev.attacks) {
            for (std::size_t b = 0; b < curve.detection_rates.size(); ++b) {
                char buf[120];
                std::snprintf(buf, sizeof buf, "0,%zu,%s,%.10g,%.10g\n", b,
                              curve.scheme.c_str(), curve.detection_rates[b], curve.threshold);
                csv << buf;
            }
        }
        std::cout << "attack sweep written to " << at_out << '\n';
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error&) {
        return 2;  // CLI11_PARSE already printed the message
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
