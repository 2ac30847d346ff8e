#include "sitedelta/html_delta.hpp"

#include <algorithm>
#include <cctype>

namespace sitedelta::html {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Attribute {
    std::string name;   // lowercased
    std::string value;  // entity-decoded
};

struct Tag {
    std::string name;  // lowercased
    bool closing = false;
    std::vector<Attribute> attributes;

    const std::string* attr(const std::string& name) const {
        for (const auto& a : attributes)
            if (a.name == name) return &a.value;
        return nullptr;
    }
};

// Minimal forgiving markup scanner. It never fails: anything that does not
// look like a tag is treated as text.
class Scanner {
public:
    explicit Scanner(const std::string& input) : s_(input) {}

    // Emits (tag, text-before-tag) pairs via the two callbacks.
    template <typename OnText, typename OnTag>
    void run(OnText&& on_text, OnTag&& on_tag) {
        std::string text;
        std::size_t i = 0;
        while (i < s_.size()) {
            if (s_[i] != '<') {
                text += s_[i++];
                continue;
            }
            if (s_.compare(i, 4, "<!--") == 0) {
                auto end = s_.find("-->", i + 4);
                i = end == std::string::npos ? s_.size() : end + 3;
                continue;
            }
            if (i + 1 < s_.size() && (s_[i + 1] == '!' || s_[i + 1] == '?')) {
                auto end = s_.find('>', i);
                i = end == std::string::npos ? s_.size() : end + 1;
                continue;
            }
            if (i + 1 >= s_.size() ||
                (std::isalpha(static_cast<unsigned char>(s_[i + 1])) == 0 && s_[i + 1] != '/')) {
                text += s_[i++];  // stray '<'
                continue;
            }
            on_text(text);
            text.clear();
            Tag tag = parse_tag(i);
            // raw-text elements: grab the body up to the matching close tag
            if (!tag.closing && (tag.name == "script" || tag.name == "style" ||
                                 tag.name == "title" || tag.name == "textarea")) {
                std::string body = raw_text_until_close(i, tag.name);
                on_tag(tag, body);
            } else {
                on_tag(tag, std::string());
            }
        }
        on_text(text);
    }

private:
    Tag parse_tag(std::size_t& i) {
        Tag tag;
        ++i;  // '<'
        if (i < s_.size() && s_[i] == '/') {
            tag.closing = true;
            ++i;
        }
        std::string name;
        while (i < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i])) != 0 ||
                                 s_[i] == '-' || s_[i] == ':')) {
            name += s_[i++];
        }
        tag.name = lowercase(name);
        // attributes
        while (i < s_.size() && s_[i] != '>') {
            if (std::isspace(static_cast<unsigned char>(s_[i])) != 0 || s_[i] == '/') {
                ++i;
                continue;
            }
            std::string aname;
            while (i < s_.size() && s_[i] != '=' && s_[i] != '>' && s_[i] != '/' &&
                   std::isspace(static_cast<unsigned char>(s_[i])) == 0) {
                aname += s_[i++];
            }
            while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i])) != 0) ++i;
            std::string avalue;
            if (i < s_.size() && s_[i] == '=') {
                ++i;
                while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i])) != 0) ++i;
                if (i < s_.size() && (s_[i] == '"' || s_[i] == '\'')) {
                    char quote = s_[i++];
                    while (i < s_.size() && s_[i] != quote) avalue += s_[i++];
                    if (i < s_.size()) ++i;
                } else {
                    while (i < s_.size() && s_[i] != '>' &&
                           std::isspace(static_cast<unsigned char>(s_[i])) == 0) {
                        avalue += s_[i++];
                    }
                }
            }
            if (!aname.empty()) {
                tag.attributes.push_back({lowercase(aname), text::decode_entities(avalue)});
            }
        }
        if (i < s_.size()) ++i;  // '>'
        return tag;
    }

    std::string raw_text_until_close(std::size_t& i, const std::string& name) {
        std::string close = "</" + name;
        std::size_t pos = i;
        while (pos < s_.size()) {
            auto cand = s_.find('<', pos);
            if (cand == std::string::npos) break;
            if (cand + close.size() <= s_.size() &&
                lowercase(s_.substr(cand, close.size())) == close) {
                std::string body = s_.substr(i, cand - i);
                auto end = s_.find('>', cand);
                i = end == std::string::npos ? s_.size() : end + 1;
                return body;
            }
            pos = cand + 1;
        }
        std::string body = s_.substr(i);
        i = s_.size();
        return body;
    }

    const std::string& s_;
};

bool rel_contains_stylesheet(const std::string& rel) {
    std::string low = lowercase(rel);
    std::size_t start = 0;
    while (start <= low.size()) {
        auto sp = low.find(' ', start);
        std::string word = low.substr(start, sp == std::string::npos ? std::string::npos
                                                                     : sp - start);
        if (word == "stylesheet") return true;
        if (sp == std::string::npos) break;
        start = sp + 1;
    }
    return false;
}

// href values that cannot name a page: empty or fragment-only
bool usable_href(const std::string& href) {
    if (href.empty()) return false;
    return href[0] != '#';
}

void insert_resolved(std::set<std::string>& out, const std::string& page_url,
                     const std::string& ref) {
    auto abs = url::resolve(page_url, ref);
    if (abs) out.insert(*abs);
}

std::set<std::string> domains_of(const std::set<std::string>& urls,
                                 const url::SuffixList& suffixes) {
    std::set<std::string> out;
    for (const auto& u : urls) {
        auto dom = url::try_registrable_domain(u, suffixes);
        if (dom) out.insert(*dom);
    }
    return out;
}

}  // namespace

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

ParsedPage parse_page(const std::string& html_bytes, const std::string& page_url,
                      const Config& config) {
    ParsedPage page;
    page.page_url = page_url;

    std::string text_content;
    std::string title_text;
    bool have_title = false;

    Scanner scanner(html_bytes);
    scanner.run(
        [&](const std::string& text) {
            if (!text.empty()) {
                text_content += text;
                text_content += ' ';
            }
        },
        [&](const Tag& tag, const std::string& raw_body) {
            if (tag.closing) return;
            if (tag.name == "a") {
                if (const auto* href = tag.attr("href"); href && usable_href(*href))
                    insert_resolved(page.hyperlink_urls, page_url, *href);
            } else if (tag.name == "style") {
                page.style_blocks.insert(raw_body);
            } else if (tag.name == "link") {
                const auto* rel = tag.attr("rel");
                const auto* href = tag.attr("href");
                if (rel && href && rel_contains_stylesheet(*rel) && usable_href(*href))
                    insert_resolved(page.stylesheet_urls, page_url, *href);
            } else if (tag.name == "img") {
                if (const auto* src = tag.attr("src"); src && !src->empty())
                    insert_resolved(page.image_urls, page_url, *src);
            } else if (tag.name == "title") {
                if (!have_title) {
                    title_text = raw_body;
                    have_title = true;
                }
                text_content += text::decode_entities(raw_body);
                text_content += ' ';
            }
        });

    const auto tokens = text::tokenize(text::decode_entities(text_content));
    page.language = text::detect_language(tokens, *config.stopwords);

    // title words, minus the detected language's stop-words
    for (const auto& tok : text::tokenize(text::decode_entities(title_text))) {
        if (page.language != "unknown" && config.stopwords->is_stopword(page.language, tok))
            continue;
        page.title_words.insert(tok);
    }

    // copyright tokens: markers plus a +-window neighborhood, stop-words dropped
    std::vector<std::size_t> marker_positions;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "\xC2\xA9" || tokens[i] == "copyright") {
            marker_positions.push_back(i);
        } else if (tokens[i] == "all" && i + 2 < tokens.size() && tokens[i + 1] == "rights" &&
                   tokens[i + 2] == "reserved") {
            marker_positions.push_back(i);
            marker_positions.push_back(i + 1);
            marker_positions.push_back(i + 2);
        }
    }
    const std::size_t window = static_cast<std::size_t>(std::max(config.copyright_window, 0));
    for (std::size_t pos : marker_positions) {
        std::size_t lo = pos >= window ? pos - window : 0;
        std::size_t hi = std::min(pos + window, tokens.size() == 0 ? 0 : tokens.size() - 1);
        for (std::size_t i = lo; i <= hi && i < tokens.size(); ++i) {
            if (config.stopwords->is_stopword_any(tokens[i])) continue;
            page.copyright_tokens.insert(tokens[i]);
        }
    }
    return page;
}

const std::array<const char*, HtmlDeltaVector::kDim>& HtmlDeltaVector::feature_names() {
    static const std::array<const char*, kDim> names = {
        "url", "two_ld", "ss", "ss_url", "ss_2ld", "i_url",
        "i_2ld", "copyright", "x_links", "title", "language"};
    return names;
}

std::array<double, HtmlDeltaVector::kDim> HtmlDeltaVector::values() const {
    return {url, two_ld, ss, ss_url, ss_2ld, i_url, i_2ld, copyright, x_links, title, language};
}

HtmlDeltaVector HtmlDeltaVector::from_values(const std::array<double, kDim>& v) {
    HtmlDeltaVector d;
    d.url = v[0];
    d.two_ld = v[1];
    d.ss = v[2];
    d.ss_url = v[3];
    d.ss_2ld = v[4];
    d.i_url = v[5];
    d.i_2ld = v[6];
    d.copyright = v[7];
    d.x_links = v[8];
    d.title = v[9];
    d.language = v[10];
    return d;
}

HtmlDeltaVector extract_html_delta(const ParsedPage& page, const ParsedPage& homepage,
                                   const Config& config,
                                   const std::vector<std::string>& homepage_aliases) {
    HtmlDeltaVector d;
    d.url = jaccard(page.hyperlink_urls, homepage.hyperlink_urls);
    d.two_ld = jaccard(domains_of(page.hyperlink_urls, config.suffixes),
                       domains_of(homepage.hyperlink_urls, config.suffixes));
    d.ss = jaccard(page.style_blocks, homepage.style_blocks);
    d.ss_url = jaccard(page.stylesheet_urls, homepage.stylesheet_urls);
    d.ss_2ld = jaccard(domains_of(page.stylesheet_urls, config.suffixes),
                       domains_of(homepage.stylesheet_urls, config.suffixes));
    d.i_url = jaccard(page.image_urls, homepage.image_urls);
    d.i_2ld = jaccard(domains_of(page.image_urls, config.suffixes),
                      domains_of(homepage.image_urls, config.suffixes));
    d.copyright = jaccard(page.copyright_tokens, homepage.copyright_tokens);

    d.x_links = page.hyperlink_urls.count(homepage.page_url) > 0 ? 1.0 : 0.0;
    if (d.x_links == 0.0) {
        for (const auto& alias : homepage_aliases) {
            if (page.hyperlink_urls.count(alias) > 0) {
                d.x_links = 1.0;
                break;
            }
        }
    }

    d.title = jaccard(page.title_words, homepage.title_words);
    d.language = page.language == homepage.language ? 1.0 : 0.0;
    return d;
}

}  // namespace sitedelta::html
