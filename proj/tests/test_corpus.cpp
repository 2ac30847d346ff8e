#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "sitedelta/corpus.hpp"
#include "sitedelta/error.hpp"
#include "sitedelta/html_delta.hpp"
#include "sitedelta/image.hpp"

using namespace sitedelta;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / "sitedelta-corpus-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

void write_tiny_png(const fs::path& p) {
    img::Image im(32, 32);
    img::write_png(im, p.string());
}

// minimal hand-built corpus with `families` families of one legit + one phish
std::string tiny_manifest(const fs::path& dir, int families) {
    std::string manifest = "{\"version\":1,\"note\":\"extra keys are ignored\",\"families\":[";
    for (int f = 0; f < families; ++f) {
        std::string fam = "f" + std::to_string(f);
        fs::create_directories(dir / fam);
        write_text(dir / fam / "home.html", "<a href=\"/\">home</a>");
        write_text(dir / fam / "legit.html", "<a href=\"/\">home</a>");
        write_text(dir / fam / "phish.html", "<a href=\"/kit\">x</a>");
        write_tiny_png(dir / fam / "home.png");
        write_tiny_png(dir / fam / "legit.png");
        write_tiny_png(dir / fam / "phish.png");
        if (f) manifest += ",";
        std::string base = "https://site" + std::to_string(f) + ".com";
        manifest += "{\"id\":\"" + fam + "\",\"homepage\":{\"html\":\"" + fam +
                    "/home.html\",\"png\":\"" + fam + "/home.png\",\"url\":\"" + base +
                    "/\"},\"pages\":[";
        manifest += "{\"id\":\"" + fam + "-l\",\"html\":\"" + fam + "/legit.html\",\"png\":\"" +
                    fam + "/legit.png\",\"url\":\"" + base + "/p/\",\"label\":\"legit\"},";
        manifest += "{\"id\":\"" + fam + "-p\",\"html\":\"" + fam + "/phish.html\",\"png\":\"" +
                    fam + "/phish.png\",\"url\":\"" + base + "/k/\",\"label\":\"phish\"}]}";
    }
    manifest += "]}";
    auto path = dir / "manifest.json";
    write_text(path, manifest);
    return path.string();
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("loading preserves family and page counts") {
    auto dir = fresh_dir("counts");
    auto families = corpus::load_corpus(tiny_manifest(dir, 2));
    REQUIRE(families.size() == 2);
    std::size_t pages = 0;
    for (const auto& f : families) {
        CHECK(f.homepage.label == corpus::Label::Homepage);
        pages += f.pages.size();
    }
    CHECK(pages == 4);
}

TEST_CASE("empty family list loads as an empty corpus") {
    auto dir = fresh_dir("empty");
    write_text(dir / "manifest.json", "{\"version\":1,\"families\":[]}");
    CHECK(corpus::load_corpus((dir / "manifest.json").string()).empty());
}

TEST_CASE("missing snapshot file fails naming the path") {
    auto dir = fresh_dir("missing");
    auto manifest = tiny_manifest(dir, 1);
    fs::remove(dir / "f0" / "phish.png");
    CHECK_THROWS_WITH_AS(corpus::load_corpus(manifest), doctest::Contains("phish.png"), Error);
}

TEST_CASE("non-png snapshots are rejected") {
    auto dir = fresh_dir("notpng");
    auto manifest = tiny_manifest(dir, 1);
    write_text(dir / "f0" / "legit.png", "actually text");
    CHECK_THROWS_WITH_AS(corpus::load_corpus(manifest), doctest::Contains("legit.png"), Error);
}

TEST_CASE("duplicate family ids are a schema error") {
    auto dir = fresh_dir("dup");
    tiny_manifest(dir, 1);
    std::ifstream in(dir / "manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto fam_start = text.find("{\"id\":\"f0\"");
    std::string fam = text.substr(fam_start, text.size() - fam_start - 2);  // strip "]}"
    write_text(dir / "manifest.json",
               "{\"version\":1,\"families\":[" + fam + "," + fam + "]}");
    CHECK_THROWS_WITH_AS(corpus::load_corpus((dir / "manifest.json").string()),
                         doctest::Contains("duplicate family id"), Error);
}

TEST_CASE("unknown labels are a schema error") {
    auto dir = fresh_dir("label");
    auto manifest = tiny_manifest(dir, 1);
    std::ifstream in(manifest);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto pos = text.find("\"legit\"");
    text.replace(pos, 7, "\"benign\"");
    write_text(dir / "manifest.json", text);
    CHECK_THROWS_WITH_AS(corpus::load_corpus(manifest), doctest::Contains("benign"), Error);
}

TEST_CASE("splits assign round(fraction * n) families to train") {
    auto dir = fresh_dir("splits");
    auto families = corpus::load_corpus(tiny_manifest(dir, 10));
    auto plan = corpus::make_splits(families, 0.6, 20, 7);
    REQUIRE(plan.repetitions.size() == 20);
    for (const auto& rep : plan.repetitions) {
        CHECK(rep.train_family_ids.size() == 6);
        CHECK(rep.test_family_ids.size() == 4);
        std::set<std::string> all(rep.train_family_ids.begin(), rep.train_family_ids.end());
        for (const auto& id : rep.test_family_ids) CHECK(all.insert(id).second);
        CHECK(all.size() == families.size());  // disjoint union is everything
    }
}

TEST_CASE("same seed gives identical split plans") {
    auto dir = fresh_dir("splitseed");
    auto families = corpus::load_corpus(tiny_manifest(dir, 7));
    auto a = corpus::make_splits(families, 0.6, 5, 99);
    auto b = corpus::make_splits(families, 0.6, 5, 99);
    for (std::size_t r = 0; r < a.repetitions.size(); ++r) {
        CHECK(a.repetitions[r].train_family_ids == b.repetitions[r].train_family_ids);
        CHECK(a.repetitions[r].test_family_ids == b.repetitions[r].test_family_ids);
    }
    auto c = corpus::make_splits(families, 0.6, 5, 100);
    bool any_differ = false;
    for (std::size_t r = 0; r < a.repetitions.size(); ++r)
        if (a.repetitions[r].train_family_ids != c.repetitions[r].train_family_ids)
            any_differ = true;
    CHECK(any_differ);
}

TEST_CASE("two families at fraction one half force a 1/1 split") {
    auto dir = fresh_dir("two");
    auto families = corpus::load_corpus(tiny_manifest(dir, 2));
    auto plan = corpus::make_splits(families, 0.5, 8, 3);
    for (const auto& rep : plan.repetitions) {
        CHECK(rep.train_family_ids.size() == 1);
        CHECK(rep.test_family_ids.size() == 1);
    }
    CHECK_THROWS_AS(corpus::make_splits({families[0]}, 0.5, 1, 3), Error);
}

TEST_CASE("generator writes the advertised counts deterministically") {
    auto dir = fresh_dir("gen");
    auto manifest = corpus::generate_synthetic_corpus(6, 4, 7, (dir / "c").string());
    auto families = corpus::load_corpus(manifest);
    REQUIRE(families.size() == 6);
    std::size_t members = 0, phish = 0;
    for (const auto& f : families) {
        members += f.pages.size();
        for (const auto& p : f.pages)
            if (p.label == corpus::Label::Phish) ++phish;
    }
    CHECK(members == 24);
    CHECK(phish == 6);  // exactly one per family

    auto manifest2 = corpus::generate_synthetic_corpus(6, 4, 7, (dir / "c2").string());
    std::ifstream a(manifest), b(manifest2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa.size() > 0);
    // manifests only differ in their relative paths' roots, which are equal here
    CHECK(sa == sb);
}

TEST_CASE("generated families separate phish from legit by construction") {
    auto dir = fresh_dir("gensep");
    auto manifest = corpus::generate_synthetic_corpus(8, 4, 11, (dir / "c").string());
    auto families = corpus::load_corpus(manifest);
    html::Config config;
    for (const auto& fam : families) {
        std::ifstream hin(fam.homepage.html_path);
        std::string home_html((std::istreambuf_iterator<char>(hin)),
                              std::istreambuf_iterator<char>());
        auto home = html::parse_page(home_html, fam.homepage.url, config);
        for (const auto& page : fam.pages) {
            std::ifstream pin(page.html_path);
            std::string page_html((std::istreambuf_iterator<char>(pin)),
                                  std::istreambuf_iterator<char>());
            auto parsed = html::parse_page(page_html, page.url, config);
            auto delta = html::extract_html_delta(parsed, home, config);
            if (page.label == corpus::Label::Phish) {
                CHECK(delta.url == 0.0);  // disjoint hyperlink sets by construction
                CHECK(delta.title == 0.0);
                CHECK(delta.language == 0.0);
                CHECK(delta.x_links == 0.0);
            } else {
                CHECK(delta.url >= 0.5);  // shared navigation by construction
                CHECK(delta.url > 0.0);
                CHECK(delta.x_links == 1.0);
                CHECK(delta.language == 1.0);
            }
        }
    }
}

}  // TEST_SUITE
