#pragma once

#include <optional>
#include <set>
#include <string>

namespace sitedelta::url {

/// Decomposed URL per RFC 3986. Components keep their original spelling;
/// nothing is case-folded or re-encoded.
struct Parts {
    std::string scheme;              // empty for relative references
    bool has_authority = false;
    std::string authority;           // userinfo@host:port, verbatim
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    bool is_absolute() const { return !scheme.empty(); }
    std::string str() const;
};

Parts parse(const std::string& url);

/// Host portion of the authority (userinfo and port stripped, brackets kept
/// off IPv6 literals), lowercased for comparison purposes.
std::string host_of(const Parts& parts);

/// Resolves a (possibly relative) reference against an absolute base,
/// RFC 3986 section 5. Returns nullopt when the base is not absolute.
std::optional<std::string> resolve(const std::string& base, const std::string& reference);

/// Optional public-suffix list: one suffix per line, '#' comments allowed.
class SuffixList {
public:
    SuffixList() = default;
    static SuffixList load_file(const std::string& path);
    static SuffixList from_lines(const std::set<std::string>& suffixes);

    bool empty() const { return suffixes_.empty(); }
    bool contains(const std::string& suffix) const { return suffixes_.count(suffix) > 0; }

private:
    std::set<std::string> suffixes_;
};

/// Registrable domain of an absolute URL: the last two DNS labels, or
/// suffix + one label when a public-suffix list is supplied. IP-address
/// hosts come back verbatim. Throws Error when the URL has no host.
std::string registrable_domain(const std::string& absolute_url,
                               const SuffixList& suffixes = SuffixList());

/// Same, but returns nullopt instead of throwing (for hostless URLs such
/// as mailto: links inside hyperlink sets).
std::optional<std::string> try_registrable_domain(const std::string& absolute_url,
                                                  const SuffixList& suffixes = SuffixList());

bool is_ip_host(const std::string& host);

}  // namespace sitedelta::url
