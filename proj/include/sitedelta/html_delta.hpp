#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "sitedelta/text.hpp"
#include "sitedelta/url.hpp"

namespace sitedelta::html {

/// Extraction knobs shared by parse_page and extract_html_delta.
struct Config {
    const text::StopwordTable* stopwords = &text::StopwordTable::embedded();
    url::SuffixList suffixes;       // empty -> naive two-label registrable domains
    int copyright_window = 5;       // tokens kept around a copyright marker
};

/// Everything extract_html_delta needs from one document.
struct ParsedPage {
    std::set<std::string> hyperlink_urls;
    std::set<std::string> style_blocks;
    std::set<std::string> stylesheet_urls;
    std::set<std::string> image_urls;
    std::set<std::string> title_words;
    std::set<std::string> copyright_tokens;
    std::string language = "unknown";
    std::string page_url;
};

/// The 11 per-page comparison features, each in [0,1].
struct HtmlDeltaVector {
    double url = 0;        // hyperlink-set Jaccard
    double two_ld = 0;     // hyperlink registrable-domain Jaccard
    double ss = 0;         // inline <style> body Jaccard
    double ss_url = 0;     // external stylesheet URL Jaccard
    double ss_2ld = 0;     // stylesheet registrable-domain Jaccard
    double i_url = 0;      // image URL Jaccard
    double i_2ld = 0;      // image registrable-domain Jaccard
    double copyright = 0;  // copyright-token Jaccard
    double x_links = 0;    // 1 iff the homepage (or an alias) is hyperlinked
    double title = 0;      // title-word Jaccard
    double language = 0;   // 1 iff detected languages match

    static constexpr std::size_t kDim = 11;
    static const std::array<const char*, kDim>& feature_names();

    std::array<double, kDim> values() const;
    static HtmlDeltaVector from_values(const std::array<double, kDim>& v);
};

/// |a n b| / |a u b|, with the empty/empty pair defined as 1.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Lenient extraction: never throws on malformed markup or bad bytes.
ParsedPage parse_page(const std::string& html_bytes, const std::string& page_url,
                      const Config& config = Config());

HtmlDeltaVector extract_html_delta(const ParsedPage& page, const ParsedPage& homepage,
                                   const Config& config = Config(),
                                   const std::vector<std::string>& homepage_aliases = {});

}  // namespace sitedelta::html
