#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace sitedelta::text {

/// Decodes the common HTML character references (named subset + numeric)
/// into UTF-8. Unknown references pass through verbatim.
std::string decode_entities(const std::string& s);

/// Splits UTF-8 text into lowercase tokens. ASCII alphanumeric runs form
/// tokens (lowercased); non-ASCII letter runs are kept as-is; CJK ideographs
/// become one token per character; the copyright sign is always its own
/// token. Everything else separates.
std::vector<std::string> tokenize(const std::string& utf8_text);

class StopwordTable {
public:
    /// Built-in lists for en, fr, de, es, it, pt, nl, ru, zh.
    static const StopwordTable& embedded();

    /// One file per language code in `dir`, one word per line. Replaces the
    /// embedded table entirely.
    static StopwordTable load_dir(const std::string& dir);

    static StopwordTable from_lists(std::map<std::string, std::set<std::string>> lists);

    bool is_stopword(const std::string& lang, const std::string& token) const;
    /// True if the token is a stop-word in any configured language.
    bool is_stopword_any(const std::string& token) const;
    const std::map<std::string, std::set<std::string>>& lists() const { return lists_; }

private:
    std::map<std::string, std::set<std::string>> lists_;
    std::set<std::string> all_;
};

/// Stop-word counting language detector: the language whose stop-words occur
/// most often wins; ties break to the lexicographically smallest code;
/// "unknown" when nothing matches.
std::string detect_language(const std::vector<std::string>& tokens,
                            const StopwordTable& table = StopwordTable::embedded());

}  // namespace sitedelta::text
