#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "wfc/tokenize.hpp"
#include "wfc/workflow.hpp"

using namespace wfc;
using Texts = std::vector<std::string>;

TEST_CASE("action reference stays one token") {
    CHECK(tokenize_texts("uses: actions/checkout@v2") == Texts{"uses", ":", "actions/checkout@v2"});
}

TEST_CASE("empty input gives an empty stream") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   ").empty());
}

TEST_CASE("run commands split into words and options") {
    CHECK(tokenize_texts("run: gradle build --stacktrace") == Texts{"run", ":", "gradle", "build", "--stacktrace"});
}

TEST_CASE("structural characters and quotes are separate tokens") {
    CHECK(tokenize_texts(R"({"a": ["b", "c d"]})") ==
          Texts{"{", "\"", "a", "\"", ":", "[", "\"", "b", "\"", ",", "\"", "c", "d", "\"", "]", "}"});
}

TEST_CASE("inside quotes structural characters stay in the word") {
    CHECK(tokenize_texts(R"({"run": "echo a:b {x}, [y]"})") ==
          Texts{"{", "\"", "run", "\"", ":", "\"", "echo", "a:b", "{x},", "[y]", "\"", "}"});
}

TEST_CASE("escaped newlines and quotes inside strings") {
    CHECK(tokenize_texts(R"("npm ci\nnpm test\n")") == Texts{"\"", "npm", "ci", "\\n", "npm", "test", "\\n", "\""});
    CHECK(tokenize_texts(R"("say \"hi\"")") == Texts{"\"", "say", "\\\"hi\\\"", "\""});
}

TEST_CASE("source label is carried") {
    auto stream = tokenize("a b", "repo:path");
    CHECK(stream.source == "repo:path");
    CHECK(stream.texts() == Texts{"a", "b"});
    CHECK_FALSE(stream.tokens[0].category.has_value());
}

TEST_CASE("render_tokens reproduces canonical text") {
    for (const char* name : {"hello_world.yml", "phpunit.yml", "node_ci.yml", "two_jobs.yml"}) {
        CAPTURE(name);
        auto canonical = canonicalize(wfc::test::fixture_doc(name));
        CHECK(render_tokens(tokenize(canonical)) == canonical);
    }
}

TEST_CASE("property: tokenize is pure and tokens never contain whitespace") {
    std::mt19937 rng(99);
    const std::string alphabet = "ab {}[]:,\"\\ \t\nxy";
    for (int i = 0; i < 500; ++i) {
        std::string text;
        std::size_t len = rng() % 40;
        for (std::size_t k = 0; k < len; ++k) text.push_back(alphabet[rng() % alphabet.size()]);
        CAPTURE(text);
        auto a = tokenize_texts(text);
        CHECK(a == tokenize_texts(text));
        for (const auto& tok : a) {
            CHECK_FALSE(tok.empty());
            CHECK(tok.find_first_of(" \t\n") == std::string::npos);
        }
    }
}

TEST_CASE("join_tokens and is_structural") {
    CHECK(join_tokens({"a", "b", "c"}) == "a b c");
    CHECK(join_tokens({}) == "");
    for (const char* s : {"{", "}", "[", "]", ":", ",", "\""}) CHECK(is_structural(s));
    CHECK_FALSE(is_structural("uses"));
    CHECK_FALSE(is_structural("\\n"));
}
