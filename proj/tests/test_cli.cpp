#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace std;
namespace fs = std::filesystem;

#ifndef SITEDELTA_CLI_PATH
#error "SITEDELTA_CLI_PATH must be defined by the build"
#endif

namespace {

const char* kCli = SITEDELTA_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "sitedelta-cli-tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    std::string cmd = std::string(kCli) + " " + args + " >" +
                      (work_dir() / "stdout.txt").string() + " 2>" +
                      (work_dir() / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string last_stdout() {
    std::ifstream in(work_dir() / "stdout.txt");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end-to-end: gen-corpus, train, score, evaluate, attack") {
    const fs::path dir = work_dir();
    const std::string corpus = (dir / "corpus").string();
    const std::string manifest = corpus + "/manifest.json";

    REQUIRE(run("gen-corpus --families 12 --pages 3 --seed 5 --out " + corpus) == 0);
    REQUIRE(fs::is_regular_file(manifest));

    // config shared by train/evaluate keeps the visual pipeline small
    const std::string config_path = (dir / "config.json").string();
    {
        std::ofstream cfg(config_path);
        cfg << R"({"seed": 5, "repetitions": 1, "cv_folds": 3, "fp_targets": [0.05],
                   "snapshot_width": 64, "snapshot_height": 64, "vocabulary_size": 8,
                   "max_vocabulary_words": 4000})";
    }

    const std::string bundle = (dir / "bundle").string();
    REQUIRE(run("train --corpus " + manifest + " --config " + config_path + " --out " + bundle) ==
            0);
    REQUIRE(fs::is_regular_file(bundle + "/bundle.json"));

    // scoring the homepage against itself: exit 0 and a legit verdict
    const std::string home_html = corpus + "/fam0/home.html";
    const std::string home_png = corpus + "/fam0/home.png";
    const std::string home_url = "https://www.brand0-site.com/";
    int legit_code = run("score --bundle " + bundle + " --page-html " + home_html +
                         " --page-png " + home_png + " --page-url " + home_url +
                         " --homepage-html " + home_html + " --homepage-png " + home_png +
                         " --homepage-url " + home_url);
    CHECK(legit_code == 0);
    CHECK(last_stdout().find("verdict=legit") != std::string::npos);

    // the family's phishing page: exit 1 and a phish verdict
    const std::string phish_html = corpus + "/fam0/fam0-phish.html";
    const std::string phish_png = corpus + "/fam0/fam0-phish.png";
    int phish_code = run("score --bundle " + bundle + " --page-html " + phish_html +
                         " --page-png " + phish_png +
                         " --page-url https://www.brand0-site.com/x/login.php"
                         " --homepage-html " + home_html + " --homepage-png " + home_png +
                         " --homepage-url " + home_url);
    CHECK(phish_code == 1);
    CHECK(last_stdout().find("verdict=phish") != std::string::npos);

    // a missing snapshot path is a usage/runtime error: exit 2 naming the path
    int err_code = run("score --bundle " + bundle + " --page-html " + phish_html +
                       " --page-png " + corpus + "/fam0/nope.png" +
                       " --page-url https://www.brand0-site.com/x/login.php"
                       " --homepage-html " + home_html + " --homepage-png " + home_png +
                       " --homepage-url " + home_url);
    CHECK(err_code == 2);
    CHECK(slurp(work_dir() / "stderr.txt").find("nope.png") != std::string::npos);

    // evaluate writes the report files; a rerun is byte-identical on the CSVs
    const std::string out_a = (dir / "report-a").string();
    const std::string out_b = (dir / "report-b").string();
    REQUIRE(run("evaluate --corpus " + manifest + " --config " + config_path + " --out " +
                out_a) == 0);
    for (const char* name : {"report.json", "roc.csv", "attack.csv"})
        CHECK(fs::is_regular_file(fs::path(out_a) / name));
    REQUIRE(run("evaluate --corpus " + manifest + " --config " + config_path + " --out " +
                out_b) == 0);
    CHECK(slurp(fs::path(out_a) / "roc.csv") == slurp(fs::path(out_b) / "roc.csv"));
    CHECK(slurp(fs::path(out_a) / "attack.csv") == slurp(fs::path(out_b) / "attack.csv"));

    // standalone attack sweep against the trained bundle
    const std::string attack_csv = (dir / "attack-cli.csv").string();
    REQUIRE(run("attack --bundle " + bundle + " --corpus " + manifest + " --fp-target 0.05" +
                " --out " + attack_csv) == 0);
    auto attack_text = slurp(attack_csv);
    CHECK(attack_text.find("repetition,budget,scheme,detection_rate,threshold") == 0);
    CHECK(attack_text.find("max") != std::string::npos);

    // vocabulary + extraction utilities round out the surface
    const std::string vocab_file = (dir / "vocab.txt").string();
    REQUIRE(run("build-vocab --corpus " + manifest + " --out " + vocab_file +
                " --k 8 --seed 3 --width 64 --height 64 --max-words 4000") == 0);
    const std::string features = (dir / "features").string();
    REQUIRE(run("extract --corpus " + manifest + " --out " + features + " --vocab " +
                vocab_file + " --width 64 --height 64") == 0);
    auto csv = slurp(fs::path(features) / "html_delta.csv");
    CHECK(csv.find("family_id,page_id,label,url,two_ld") == 0);
    CHECK(fs::is_regular_file(fs::path(features) / "visual_delta.csv"));

    // bad usage exits 2
    CHECK(run("score --bundle " + bundle) == 2);
    CHECK(run("no-such-command") == 2);
}

}  // TEST_SUITE
