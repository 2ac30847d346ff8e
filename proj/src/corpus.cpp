#include "sitedelta/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sitedelta/error.hpp"
#include "sitedelta/image.hpp"
#include "sitedelta/rng.hpp"
#include "sitedelta/url.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sitedelta::corpus {

std::string label_name(Label label) {
    switch (label) {
        case Label::Phish: return "phish";
        case Label::Legit: return "legit";
        case Label::Homepage: return "homepage";
    }
    return "legit";
}

namespace {

Label member_label_from_string(const std::string& s, const std::string& context) {
    if (s == "phish") return Label::Phish;
    if (s == "legit") return Label::Legit;
    throw SchemaError("unknown label \"" + s + "\" in " + context);
}

std::string require_string(const json& node, const char* key, const std::string& context) {
    if (!node.contains(key) || !node[key].is_string())
        throw SchemaError("missing or non-string \"" + std::string(key) + "\" in " + context);
    return node[key].get<std::string>();
}

void check_artifact_files(const PageArtifact& page) {
    if (!fs::is_regular_file(page.html_path))
        throw LoadError("missing HTML file: " + page.html_path);
    if (!fs::is_regular_file(page.snapshot_path))
        throw LoadError("missing snapshot file: " + page.snapshot_path);
    if (!img::is_png_file(page.snapshot_path))
        throw LoadError("snapshot is not a PNG file: " + page.snapshot_path);
}

void check_url(const std::string& u, const std::string& context) {
    auto parts = url::parse(u);
    if (!parts.is_absolute() || url::host_of(parts).empty())
        throw SchemaError("URL is not absolute with a host (" + u + ") in " + context);
}

PageArtifact parse_artifact(const json& node, const fs::path& root, const std::string& id,
                            Label label, const std::string& context) {
    PageArtifact page;
    page.page_id = id;
    page.label = label;
    page.html_path = (root / require_string(node, "html", context)).string();
    page.snapshot_path = (root / require_string(node, "png", context)).string();
    page.url = require_string(node, "url", context);
    check_url(page.url, context);
    check_artifact_files(page);
    return page;
}

}  // namespace

std::vector<FamilyRecord> load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw LoadError("cannot open manifest: " + manifest_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("manifest is not valid JSON (" + manifest_path + "): " + e.what());
    }
    if (!doc.is_object()) throw SchemaError("manifest root must be an object");
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != 1)
        throw SchemaError("manifest version must be 1");
    if (!doc.contains("families") || !doc["families"].is_array())
        throw SchemaError("manifest needs a \"families\" array");

    const fs::path root = fs::path(manifest_path).parent_path();
    std::vector<FamilyRecord> families;
    std::set<std::string> seen_ids;
    for (const auto& fam_node : doc["families"]) {
        FamilyRecord family;
        family.family_id = require_string(fam_node, "id", "family entry");
        if (!seen_ids.insert(family.family_id).second)
            throw SchemaError("duplicate family id: " + family.family_id);
        const std::string context = "family " + family.family_id;
        if (!fam_node.contains("homepage"))
            throw SchemaError("missing homepage in " + context);
        family.homepage = parse_artifact(fam_node["homepage"], root,
                                         family.family_id + "/homepage", Label::Homepage,
                                         context);
        if (fam_node["homepage"].contains("aliases")) {
            for (const auto& alias : fam_node["homepage"]["aliases"])
                if (alias.is_string()) family.homepage_aliases.push_back(alias.get<std::string>());
        }
        if (!fam_node.contains("pages") || !fam_node["pages"].is_array() ||
            fam_node["pages"].empty())
            throw SchemaError("family must list at least one page: " + family.family_id);

        const std::string home_domain = url::registrable_domain(family.homepage.url);
        std::set<std::string> seen_pages;
        for (const auto& page_node : fam_node["pages"]) {
            std::string pid = require_string(page_node, "id", context);
            if (!seen_pages.insert(pid).second)
                throw SchemaError("duplicate page id \"" + pid + "\" in " + context);
            Label label = member_label_from_string(
                require_string(page_node, "label", context + " page " + pid),
                context + " page " + pid);
            PageArtifact page =
                parse_artifact(page_node, root, pid, label, context + " page " + pid);
            if (url::registrable_domain(page.url) != home_domain) {
                std::cerr << "warning: page " << pid << " in family " << family.family_id
                          << " is hosted on a different registrable domain ("
                          << url::registrable_domain(page.url) << " vs " << home_domain
                          << ")\n";
            }
            family.pages.push_back(std::move(page));
        }
        families.push_back(std::move(family));
    }
    return families;
}

SplitPlan make_splits(const std::vector<FamilyRecord>& families, double train_fraction,
                      int repetitions, std::uint64_t seed) {
    if (families.size() < 2) throw ValueError("need at least 2 families to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValueError("train fraction must lie strictly between 0 and 1");
    if (repetitions < 1) throw ValueError("need at least one repetition");

    std::vector<std::string> ids;
    ids.reserve(families.size());
    for (const auto& f : families) ids.push_back(f.family_id);
    std::sort(ids.begin(), ids.end());  // load-order independence

    const auto n = static_cast<long>(ids.size());
    long n_train = std::lround(train_fraction * static_cast<double>(n));
    n_train = std::clamp(n_train, 1L, n - 1);  // both sides stay non-empty

    SplitPlan plan;
    plan.seed = seed;
    Rng rng(seed);
    for (int r = 0; r < repetitions; ++r) {
        std::vector<std::string> order = ids;
        rng.shuffle(order);
        SplitPlan::Repetition rep;
        rep.train_family_ids.assign(order.begin(), order.begin() + n_train);
        rep.test_family_ids.assign(order.begin() + n_train, order.end());
        std::sort(rep.train_family_ids.begin(), rep.train_family_ids.end());
        std::sort(rep.test_family_ids.begin(), rep.test_family_ids.end());
        plan.repetitions.push_back(std::move(rep));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// synthetic corpus
// ---------------------------------------------------------------------------

namespace {


// short filler sentences stuffed with each language's stop-words so the
// stop-word counting detector has something to count
const char* kLangFiller[5] = {
    "the site and the team are here for you with all of this and that from the start",
    "le site et la page pour vous avec les nouvelles du jour dans une liste des liens",
    "die seite und das team sind mit den neuen angeboten für sie auf dem weg",
    "el sitio y la lista de las noticias para usted con los enlaces del equipo en esta web",
    "il sito e la squadra sono con le notizie per voi su questa pagina del giorno",
};

const char* kPhishTargets[4] = {"safepay", "bluebank", "mailhub", "cloudlock"};

struct TemplateColors {
    std::uint8_t bg[3];
    std::uint8_t header[3];
    std::uint8_t box[3];
    std::uint8_t accent[3];
};

void fill_rect(img::Image& image, int x0, int y0, int x1, int y1, const std::uint8_t c[3]) {
    x0 = std::clamp(x0, 0, image.width);
    x1 = std::clamp(x1, 0, image.width);
    y0 = std::clamp(y0, 0, image.height);
    y1 = std::clamp(y1, 0, image.height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) image.set(x, y, c[0], c[1], c[2]);
}

// thin dark rows standing in for text lines
void draw_text_lines(img::Image& image, int x0, int x1, int y0, int count, int step,
                     const std::uint8_t c[3]) {
    for (int i = 0; i < count; ++i) fill_rect(image, x0, y0 + i * step, x1, y0 + i * step + 2, c);
}

img::Image render_site_template(const TemplateColors& colors, int rect_shift, Rng& noise_rng,
                                int noise_pixels) {
    const int w = 256, h = 192;
    img::Image image(w, h);
    fill_rect(image, 0, 0, w, h, colors.bg);
    fill_rect(image, 0, 0, w, 28, colors.header);                       // header band
    fill_rect(image, 8, 6, 58, 22, colors.accent);                      // logo block
    fill_rect(image, 12 + rect_shift, 40, 122 + rect_shift, 120, colors.box);   // content card
    fill_rect(image, 134 + rect_shift, 40, 244 + rect_shift, 120, colors.box);  // second card
    const std::uint8_t text[3] = {40, 40, 40};
    draw_text_lines(image, 18 + rect_shift, 116 + rect_shift, 50, 8, 8, text);
    draw_text_lines(image, 140 + rect_shift, 238 + rect_shift, 50, 8, 8, text);
    fill_rect(image, 0, h - 20, w, h, colors.header);  // footer band
    for (int i = 0; i < noise_pixels; ++i) {
        int x = static_cast<int>(noise_rng.below(w));
        int y = static_cast<int>(noise_rng.below(h));
        auto* p = image.at(x, y);
        int delta = static_cast<int>(noise_rng.below(13)) - 6;
        for (int c = 0; c < 3; ++c)
            p[c] = static_cast<std::uint8_t>(std::clamp(p[c] + delta, 0, 255));
    }
    return image;
}

img::Image render_phish_template(const TemplateColors& colors, Rng& noise_rng) {
    const int w = 256, h = 192;
    img::Image image(w, h);
    const std::uint8_t white[3] = {245, 245, 245};
    fill_rect(image, 0, 0, w, h, white);
    fill_rect(image, 78, 20, 178, 44, colors.accent);  // brand logo blob
    fill_rect(image, 58, 56, 198, 160, colors.box);    // login card
    const std::uint8_t field[3] = {255, 255, 255};
    fill_rect(image, 70, 76, 186, 92, field);   // username field
    fill_rect(image, 70, 102, 186, 118, field); // password field
    fill_rect(image, 70, 130, 186, 148, colors.header);  // submit button
    for (int i = 0; i < 60; ++i) {
        int x = static_cast<int>(noise_rng.below(w));
        int y = static_cast<int>(noise_rng.below(h));
        auto* p = image.at(x, y);
        int delta = static_cast<int>(noise_rng.below(9)) - 4;
        for (int c = 0; c < 3; ++c)
            p[c] = static_cast<std::uint8_t>(std::clamp(p[c] + delta, 0, 255));
    }
    return image;
}

std::string brand_of(int family) { return "brand" + std::to_string(family); }

std::string site_of(int family) {
    return "https://www." + brand_of(family) + "-site.com";
}

std::vector<std::string> homepage_links(int family) {
    const std::string base = site_of(family);
    return {base + "/",          base + "/about/",   base + "/products/",
            base + "/news/",     base + "/contact/", base + "/team/",
            base + "/blog/",     base + "/faq/"};
}

std::string html_page(const std::string& title, const std::vector<std::string>& links,
                      const std::vector<std::string>& stylesheets,
                      const std::string& style_block,
                      const std::vector<std::string>& images, const std::string& body_text,
                      const std::string& copyright_line) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html>\n<head>\n<title>" << title << "</title>\n";
    for (const auto& href : stylesheets)
        out << "<link rel=\"stylesheet\" href=\"" << href << "\">\n";
    if (!style_block.empty()) out << "<style>" << style_block << "</style>\n";
    out << "</head>\n<body>\n<ul>\n";
    for (const auto& href : links) out << "<li><a href=\"" << href << "\">link</a></li>\n";
    out << "</ul>\n";
    for (const auto& src : images) out << "<img src=\"" << src << "\">\n";
    out << "<p>" << body_text << "</p>\n";
    if (!copyright_line.empty()) out << "<p>" << copyright_line << "</p>\n";
    out << "</body>\n</html>\n";
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write file: " + path.string());
    out << content;
    if (!out) throw LoadError("short write: " + path.string());
}

}  // namespace

std::string generate_synthetic_corpus(int n_families, int pages_per_family, std::uint64_t seed,
                                      const std::string& out_dir) {
    if (n_families < 2) throw ValueError("need at least 2 families");
    if (pages_per_family < 2) throw ValueError("need at least 2 pages per family");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw LoadError("cannot create output directory: " + out_dir);

    json manifest;
    manifest["version"] = 1;
    manifest["families"] = json::array();

    Rng rng(seed);
    for (int f = 0; f < n_families; ++f) {
        const std::string fam_id = "fam" + std::to_string(f);
        const fs::path fam_dir = fs::path(out_dir) / fam_id;
        fs::create_directories(fam_dir);

        const int lang = f % 5;
        const int phish_lang = (f + 1) % 5;
        const std::string base = site_of(f);
        const auto home_links = homepage_links(f);
        const std::vector<std::string> home_css = {base + "/css/main.css",
                                                   base + "/css/theme.css"};
        const std::string home_style =
            "body{background:#e" + std::to_string(f % 10) + "e;}h1{margin:0;}";
        const std::vector<std::string> home_imgs = {base + "/img/logo.png",
                                                    base + "/img/banner.png",
                                                    base + "/img/footer.png"};
        const std::string brand = brand_of(f);
        const std::string home_title = brand + " official portal";
        const std::string copyright_line =
            "© 2016 " + brand + " inc all rights reserved";

        TemplateColors colors;
        auto pick = [&](std::uint8_t lo, std::uint8_t hi) {
            return static_cast<std::uint8_t>(lo + rng.below(hi - lo));
        };
        colors.bg[0] = pick(200, 240); colors.bg[1] = pick(200, 240); colors.bg[2] = pick(200, 240);
        colors.header[0] = pick(20, 90); colors.header[1] = pick(20, 90); colors.header[2] = pick(90, 200);
        colors.box[0] = pick(150, 200); colors.box[1] = pick(150, 200); colors.box[2] = pick(150, 200);
        colors.accent[0] = pick(90, 250); colors.accent[1] = pick(40, 160); colors.accent[2] = pick(20, 120);

        json fam_node;
        fam_node["id"] = fam_id;

        // homepage
        {
            std::string html = html_page(home_title, home_links, home_css, home_style, home_imgs,
                                         kLangFiller[lang], copyright_line);
            write_file(fam_dir / "home.html", html);
            Rng noise(seed ^ (0x9e3779b97f4a7c15ULL * (f + 1)));
            img::write_png(render_site_template(colors, 0, noise, 120),
                           (fam_dir / "home.png").string());
            fam_node["homepage"] = {{"html", fam_id + "/home.html"},
                                    {"png", fam_id + "/home.png"},
                                    {"url", base + "/"}};
        }

        fam_node["pages"] = json::array();
        const int n_legit = pages_per_family - 1;
        for (int p = 0; p < n_legit; ++p) {
            const bool bare = rng.next_double() < 0.18;
            // always keep the homepage link plus most of the navigation
            std::vector<std::string> links;
            links.push_back(home_links[0]);
            for (std::size_t i = 1; i < home_links.size(); ++i)
                if (rng.next_double() < 0.78) links.push_back(home_links[i]);
            if (!bare) links.push_back(base + "/page" + std::to_string(p) + "/extra/");

            std::string title = bare ? brand + " print view"
                                     : brand + " official portal page" + std::to_string(p);
            std::vector<std::string> css = bare ? std::vector<std::string>{} : home_css;
            std::string style = bare ? std::string() : home_style;
            std::vector<std::string> imgs;
            if (!bare) {
                imgs.push_back(home_imgs[0]);
                imgs.push_back(home_imgs[1]);
                if (rng.next_double() < 0.6) imgs.push_back(home_imgs[2]);
            }
            std::string html = html_page(title, links, css, style, imgs, kLangFiller[lang],
                                         bare ? std::string() : copyright_line);
            const std::string page_id = fam_id + "-legit" + std::to_string(p);
            write_file(fam_dir / (page_id + ".html"), html);
            Rng noise(seed ^ (0xbf58476d1ce4e5b9ULL * (f * 100 + p + 2)));
            int shift = static_cast<int>(noise.below(5)) - 2;
            img::write_png(render_site_template(colors, shift, noise, 240),
                           (fam_dir / (page_id + ".png")).string());
            fam_node["pages"].push_back({{"id", page_id},
                                         {"html", fam_id + "/" + page_id + ".html"},
                                         {"png", fam_id + "/" + page_id + ".png"},
                                         {"url", base + "/page" + std::to_string(p) + "/"},
                                         {"label", "legit"}});
        }

        // exactly one phishing page, structurally disjoint from the homepage
        {
            const std::string target = kPhishTargets[f % 4];
            std::ostringstream kit;
            kit << "kit" << std::hex << (seed * 2654435761ULL + f * 40503ULL) % 0xfffff;
            std::vector<std::string> links = {base + "/" + kit.str() + "/login.php",
                                              base + "/" + kit.str() + "/verify.php",
                                              base + "/" + kit.str() + "/submit.php"};
            std::vector<std::string> css = {"https://cdn-" + target +
                                            ".example.net/kit/style.css"};
            std::string style = ".login{border:1px solid #" + std::to_string(100 + f % 100) +
                                ";}input{width:100%;}";
            std::vector<std::string> imgs = {"https://cdn-" + target +
                                             ".example.net/kit/logo.png"};
            std::string title = target + " secure login verification";
            std::string html = html_page(title, links, css, style, imgs,
                                         kLangFiller[phish_lang], std::string());
            const std::string page_id = fam_id + "-phish";
            write_file(fam_dir / (page_id + ".html"), html);
            Rng noise(seed ^ (0x94d049bb133111ebULL * (f + 3)));
            img::write_png(render_phish_template(colors, noise),
                           (fam_dir / (page_id + ".png")).string());
            fam_node["pages"].push_back({{"id", page_id},
                                         {"html", fam_id + "/" + page_id + ".html"},
                                         {"png", fam_id + "/" + page_id + ".png"},
                                         {"url", base + "/" + kit.str() + "/login.php"},
                                         {"label", "phish"}});
        }
        manifest["families"].push_back(std::move(fam_node));
    }

    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    write_file(manifest_path, manifest.dump(2) + "\n");
    return manifest_path.string();
}

}  // namespace sitedelta::corpus
