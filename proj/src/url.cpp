#include "sitedelta/url.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "sitedelta/error.hpp"

namespace sitedelta::url {

namespace {

bool is_scheme_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_scheme_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '+' || c == '-' || c == '.';
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// RFC 3986 section 5.2.4
std::string remove_dot_segments(const std::string& path) {
    std::string input = path;
    std::string output;
    while (!input.empty()) {
        if (input.rfind("../", 0) == 0) {
            input.erase(0, 3);
        } else if (input.rfind("./", 0) == 0) {
            input.erase(0, 2);
        } else if (input.rfind("/./", 0) == 0) {
            input.replace(0, 3, "/");
        } else if (input == "/.") {
            input = "/";
        } else if (input.rfind("/../", 0) == 0) {
            input.replace(0, 4, "/");
            auto pos = output.find_last_of('/');
            output.erase(pos == std::string::npos ? 0 : pos);
        } else if (input == "/..") {
            input = "/";
            auto pos = output.find_last_of('/');
            output.erase(pos == std::string::npos ? 0 : pos);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            std::size_t start = input[0] == '/' ? 1 : 0;
            std::size_t next = input.find('/', start);
            output += input.substr(0, next == std::string::npos ? input.size() : next);
            input.erase(0, next == std::string::npos ? input.size() : next);
        }
    }
    return output;
}

// RFC 3986 section 5.3
std::string merge_paths(const Parts& base, const std::string& ref_path) {
    if (base.has_authority && base.path.empty()) return "/" + ref_path;
    auto pos = base.path.find_last_of('/');
    if (pos == std::string::npos) return ref_path;
    return base.path.substr(0, pos + 1) + ref_path;
}

}  // namespace

Parts parse(const std::string& s) {
    Parts p;
    std::size_t i = 0;
    // scheme
    if (!s.empty() && is_scheme_start(s[0])) {
        std::size_t j = 1;
        while (j < s.size() && is_scheme_char(s[j])) ++j;
        if (j < s.size() && s[j] == ':') {
            p.scheme = s.substr(0, j);
            i = j + 1;
        }
    }
    // authority
    if (s.compare(i, 2, "//") == 0) {
        p.has_authority = true;
        std::size_t j = i + 2;
        while (j < s.size() && s[j] != '/' && s[j] != '?' && s[j] != '#') ++j;
        p.authority = s.substr(i + 2, j - (i + 2));
        i = j;
    }
    // path
    {
        std::size_t j = i;
        while (j < s.size() && s[j] != '?' && s[j] != '#') ++j;
        p.path = s.substr(i, j - i);
        i = j;
    }
    if (i < s.size() && s[i] == '?') {
        std::size_t j = i + 1;
        while (j < s.size() && s[j] != '#') ++j;
        p.query = s.substr(i + 1, j - (i + 1));
        i = j;
    }
    if (i < s.size() && s[i] == '#') {
        p.fragment = s.substr(i + 1);
    }
    return p;
}

std::string Parts::str() const {
    std::string out;
    if (!scheme.empty()) {
        out += scheme;
        out += ':';
    }
    if (has_authority) {
        out += "//";
        out += authority;
    }
    out += path;
    if (query) {
        out += '?';
        out += *query;
    }
    if (fragment) {
        out += '#';
        out += *fragment;
    }
    return out;
}

std::string host_of(const Parts& parts) {
    std::string host = parts.authority;
    auto at = host.find('@');
    if (at != std::string::npos) host.erase(0, at + 1);
    if (!host.empty() && host[0] == '[') {
        auto close = host.find(']');
        return lowercase(close == std::string::npos ? host.substr(1) : host.substr(1, close - 1));
    }
    auto colon = host.find(':');
    if (colon != std::string::npos) host.erase(colon);
    return lowercase(host);
}

std::optional<std::string> resolve(const std::string& base, const std::string& reference) {
    Parts b = parse(base);
    if (!b.is_absolute()) return std::nullopt;
    Parts r = parse(reference);
    Parts t;
    if (r.is_absolute()) {
        t = r;
        t.path = remove_dot_segments(t.path);
        return t.str();
    }
    t.scheme = b.scheme;
    if (r.has_authority) {
        t.has_authority = true;
        t.authority = r.authority;
        t.path = remove_dot_segments(r.path);
        t.query = r.query;
    } else {
        t.has_authority = b.has_authority;
        t.authority = b.authority;
        if (r.path.empty()) {
            t.path = b.path;
            t.query = r.query ? r.query : b.query;
        } else {
            t.path = r.path[0] == '/' ? remove_dot_segments(r.path)
                                      : remove_dot_segments(merge_paths(b, r.path));
            t.query = r.query;
        }
    }
    t.fragment = r.fragment;
    return t.str();
}

SuffixList SuffixList::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open public-suffix list: " + path);
    SuffixList list;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        list.suffixes_.insert(lowercase(line));
    }
    return list;
}

SuffixList SuffixList::from_lines(const std::set<std::string>& suffixes) {
    SuffixList list;
    for (const auto& s : suffixes) list.suffixes_.insert(lowercase(s));
    return list;
}

bool is_ip_host(const std::string& host) {
    if (host.find(':') != std::string::npos) return true;  // IPv6 literal
    int labels = 0;
    std::size_t start = 0;
    while (start <= host.size()) {
        auto dot = host.find('.', start);
        std::string label = host.substr(start, dot == std::string::npos ? std::string::npos
                                                                        : dot - start);
        if (label.empty() || label.size() > 3) return false;
        for (char c : label)
            if (std::isdigit(static_cast<unsigned char>(c)) == 0) return false;
        if (std::stoi(label) > 255) return false;
        ++labels;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return labels == 4;
}

std::optional<std::string> try_registrable_domain(const std::string& absolute_url,
                                                  const SuffixList& suffixes) {
    Parts p = parse(absolute_url);
    std::string host = host_of(p);
    if (host.empty()) return std::nullopt;
    if (is_ip_host(host)) return host;

    std::vector<std::string> labels;
    std::size_t start = 0;
    while (start <= host.size()) {
        auto dot = host.find('.', start);
        labels.push_back(host.substr(start, dot == std::string::npos ? std::string::npos
                                                                     : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (!suffixes.empty()) {
        // longest matching suffix + one label
        for (std::size_t take = labels.size(); take >= 1; --take) {
            std::string candidate;
            for (std::size_t i = labels.size() - take; i < labels.size(); ++i) {
                if (!candidate.empty()) candidate += '.';
                candidate += labels[i];
            }
            if (suffixes.contains(candidate)) {
                if (take == labels.size()) return candidate;  // host is itself a suffix
                return labels[labels.size() - take - 1] + "." + candidate;
            }
        }
        // fall through to the naive rule when nothing matches
    }
    if (labels.size() <= 2) return host;
    return labels[labels.size() - 2] + "." + labels[labels.size() - 1];
}

std::string registrable_domain(const std::string& absolute_url, const SuffixList& suffixes) {
    auto dom = try_registrable_domain(absolute_url, suffixes);
    if (!dom) throw ValueError("URL has no host: " + absolute_url);
    return *dom;
}

}  // namespace sitedelta::url
