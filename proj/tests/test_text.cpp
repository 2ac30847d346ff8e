#include <doctest.h>

#include "sitedelta/text.hpp"

using namespace sitedelta;

TEST_SUITE("text") {

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
    auto t = text::tokenize("Hello, World!  page-2 <b>x</b>");
    CHECK(t == std::vector<std::string>{"hello", "world", "page", "2", "b", "x", "b"});
}

TEST_CASE("tokenizer keeps utf-8 words and splits cjk per character") {
    auto t = text::tokenize("café über");
    CHECK(t == std::vector<std::string>{"café", "über"});
    auto zh = text::tokenize("的了abc");
    CHECK(zh == std::vector<std::string>{"的", "了", "abc"});
}

TEST_CASE("copyright sign is always its own token") {
    auto t = text::tokenize("©2016 example");
    CHECK(t == std::vector<std::string>{"©", "2016", "example"});
}

TEST_CASE("malformed utf-8 never breaks tokenization") {
    std::string bad = "ok \xff\xfe\x80 done";
    auto t = text::tokenize(bad);
    CHECK(t.front() == "ok");
    CHECK(t.back() == "done");
}

TEST_CASE("entity decoding") {
    CHECK(text::decode_entities("a &amp; b") == "a & b");
    CHECK(text::decode_entities("&copy; 2016") == "© 2016");
    CHECK(text::decode_entities("&#169;") == "©");
    CHECK(text::decode_entities("&#x41;") == "A");
    CHECK(text::decode_entities("&bogus; &") == "&bogus; &");
}

TEST_CASE("language detection by stop-word counts") {
    CHECK(text::detect_language({"the", "and", "of", "is"}) == "en");
    CHECK(text::detect_language({}) == "unknown");
    CHECK(text::detect_language({"qwzx", "brand7"}) == "unknown");
}

TEST_CASE("language ties break lexicographically") {
    // one English hit, one German hit -> "de" < "en"
    CHECK(text::detect_language({"the", "der"}) == "de");
}

TEST_CASE("custom stopword tables") {
    auto table = text::StopwordTable::from_lists({{"xx", {"foo"}}, {"yy", {"bar"}}});
    CHECK(text::detect_language({"foo"}, table) == "xx");
    CHECK(table.is_stopword_any("bar"));
    CHECK_FALSE(table.is_stopword_any("baz"));
}

}  // TEST_SUITE
