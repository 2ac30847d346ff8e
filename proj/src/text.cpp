#include "sitedelta/text.hpp"

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "sitedelta/error.hpp"

namespace sitedelta::text {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Decodes one UTF-8 codepoint at s[i]; malformed bytes decode as U+FFFD and
// advance by one so scanning always terminates.
std::uint32_t decode_cp(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra;
    std::uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
        extra = 1;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        extra = 2;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        extra = 3;
        cp = c & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + extra >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += extra + 1;
    return cp;
}

bool is_cjk(std::uint32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x3040 && cp <= 0x30FF);
}

// Letters outside ASCII: a pragmatic test; covers Latin supplements,
// Greek, Cyrillic, and general alphabetic planes without ICU.
bool is_nonascii_letter(std::uint32_t cp) {
    if (cp < 0x80) return false;
    if (is_cjk(cp)) return false;
    if (cp == 0xA9 || cp == 0xAE) return false;  // (c) / (r) signs stay symbols
    if (cp >= 0xA0 && cp <= 0xBF) return false;  // punctuation/symbol block
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
    return cp >= 0xC0;
}

const std::map<std::string, std::uint32_t>& named_entities() {
    static const std::map<std::string, std::uint32_t> table = {
        {"amp", '&'},   {"lt", '<'},     {"gt", '>'},    {"quot", '"'},
        {"apos", '\''}, {"copy", 0xA9},  {"reg", 0xAE},  {"nbsp", 0xA0},
        {"trade", 0x2122}, {"mdash", 0x2014}, {"ndash", 0x2013}, {"hellip", 0x2026},
        {"laquo", 0xAB}, {"raquo", 0xBB}, {"eacute", 0xE9}, {"egrave", 0xE8},
        {"agrave", 0xE0}, {"uuml", 0xFC}, {"ouml", 0xF6}, {"auml", 0xE4},
        {"szlig", 0xDF}, {"ccedil", 0xE7}, {"ntilde", 0xF1}, {"aacute", 0xE1},
        {"iacute", 0xED}, {"oacute", 0xF3}, {"uacute", 0xFA},
    };
    return table;
}

}  // namespace

std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string::npos || semi - i > 12) {
            out += s[i++];
            continue;
        }
        std::string body = s.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t k = 2; k < body.size() && ok; ++k) {
                    char c = body[k];
                    if (std::isxdigit(static_cast<unsigned char>(c)) == 0) ok = false;
                    else cp = cp * 16 + static_cast<std::uint32_t>(
                                 std::isdigit(static_cast<unsigned char>(c))
                                     ? c - '0'
                                     : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                }
            } else {
                for (std::size_t k = 1; k < body.size() && ok; ++k) {
                    if (std::isdigit(static_cast<unsigned char>(body[k])) == 0) ok = false;
                    else cp = cp * 10 + static_cast<std::uint32_t>(body[k] - '0');
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) {
                append_utf8(out, cp);
                i = semi + 1;
                continue;
            }
        } else {
            auto it = named_entities().find(body);
            if (it != named_entities().end()) {
                append_utf8(out, it->second);
                i = semi + 1;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& utf8_text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < utf8_text.size()) {
        std::size_t start = i;
        std::uint32_t cp = decode_cp(utf8_text, i);
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
                current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else {
                flush();
            }
        } else if (cp == 0xA9) {  // copyright sign is a token of its own
            flush();
            tokens.push_back("\xC2\xA9");
        } else if (is_cjk(cp)) {
            flush();
            tokens.push_back(utf8_text.substr(start, i - start));
        } else if (is_nonascii_letter(cp)) {
            current += utf8_text.substr(start, i - start);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

StopwordTable StopwordTable::from_lists(std::map<std::string, std::set<std::string>> lists) {
    StopwordTable t;
    t.lists_ = std::move(lists);
    for (const auto& [lang, words] : t.lists_) {
        (void)lang;
        t.all_.insert(words.begin(), words.end());
    }
    return t;
}

StopwordTable StopwordTable::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw LoadError("stop-word directory not found: " + dir);
    std::map<std::string, std::set<std::string>> lists;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string lang = entry.path().stem().string();
        std::ifstream in(entry.path());
        std::set<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (!line.empty()) words.insert(line);
        }
        if (!words.empty()) lists[lang] = std::move(words);
    }
    if (lists.empty()) throw LoadError("stop-word directory has no usable lists: " + dir);
    return from_lists(std::move(lists));
}

const StopwordTable& StopwordTable::embedded() {
    static const StopwordTable table = from_lists({
        {"en", {"the", "be", "to", "of", "and", "a", "in", "that", "have", "i", "it",
                "for", "not", "on", "with", "he", "as", "you", "do", "at", "this",
                "but", "his", "by", "from", "we", "say", "her", "she", "or", "an",
                "will", "my", "all", "would", "there", "their", "is", "are", "was"}},
        {"fr", {"le", "la", "les", "de", "des", "du", "un", "une", "et", "en", "que",
                "qui", "dans", "pour", "pas", "sur", "est", "au", "aux", "avec", "ne",
                "se", "ce", "cette", "il", "elle", "nous", "vous", "ils", "mais",
                "ou", "si", "son", "sa", "ses", "plus", "par", "tout", "sont"}},
        {"de", {"der", "die", "das", "und", "in", "den", "von", "zu", "mit", "sich",
                "des", "auf", "ist", "im", "dem", "nicht", "ein", "eine", "als",
                "auch", "es", "an", "werden", "aus", "er", "hat", "dass", "sie",
                "nach", "wird", "bei", "einer", "um", "am", "sind", "noch", "wie"}},
        {"es", {"el", "la", "los", "las", "de", "del", "y", "en", "que", "un", "una",
                "por", "con", "no", "para", "es", "al", "lo", "como", "pero", "sus",
                "le", "ya", "o", "este", "porque", "esta", "entre", "cuando", "muy",
                "sin", "sobre", "me", "hasta", "donde", "quien", "desde", "todos"}},
        {"it", {"il", "lo", "la", "i", "gli", "le", "di", "del", "che", "e", "in",
                "un", "una", "per", "con", "non", "sono", "da", "su", "al", "si",
                "dei", "come", "ma", "se", "anche", "delle", "nel", "questo",
                "questa", "tra", "alla", "o", "ha", "sua", "della", "degli"}},
        {"pt", {"o", "os", "as", "de", "do", "da", "dos", "das", "e", "em", "que",
                "um", "uma", "para", "com", "por", "no", "na", "se", "mais", "como",
                "mas", "foi", "ao", "ele", "ela", "seu", "sua", "ou", "quando",
                "muito", "nos", "tambem", "pelo", "pela", "isso", "ser", "tem"}},
        {"nl", {"de", "het", "een", "van", "en", "in", "is", "dat", "op", "te",
                "zijn", "met", "die", "voor", "niet", "aan", "er", "om", "maar",
                "dan", "zij", "hij", "ook", "als", "bij", "naar", "uit", "door",
                "over", "ze", "zo", "wordt", "wel", "geen", "of", "worden"}},
        {"ru", {"и", "в", "не", "на", "я",
                "что", "он", "с", "как",
                "это", "по", "но", "она",
                "к", "у", "его", "из", "за",
                "то", "все", "а", "так",
                "же", "от", "они", "мы",
                "или", "бы", "был",
                "для", "о", "вы", "до",
                "вот"}},
        {"zh", {"的", "了", "是", "在", "我", "有", "和",
                "就", "不", "人", "都", "一", "上", "也",
                "很", "到", "说", "要", "去", "你", "会",
                "着", "没", "看", "好"}},
    });
    return table;
}

bool StopwordTable::is_stopword(const std::string& lang, const std::string& token) const {
    auto it = lists_.find(lang);
    return it != lists_.end() && it->second.count(token) > 0;
}

bool StopwordTable::is_stopword_any(const std::string& token) const {
    return all_.count(token) > 0;
}

std::string detect_language(const std::vector<std::string>& tokens, const StopwordTable& table) {
    std::string best = "unknown";
    std::size_t best_count = 0;
    for (const auto& [lang, words] : table.lists()) {
        std::size_t count = 0;
        for (const auto& tok : tokens)
            if (words.count(tok) > 0) ++count;
        // ties break to the lexicographically smallest code; the map is
        // already in code order, so strict > keeps the first maximum
        if (count > best_count) {
            best_count = count;
            best = lang;
        }
    }
    return best_count == 0 ? "unknown" : best;
}

}  // namespace sitedelta::text
