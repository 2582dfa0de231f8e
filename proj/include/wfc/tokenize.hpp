#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfc/category.hpp"

namespace wfc {

struct Token {
    std::string text;
    std::optional<Category> category;

    friend bool operator==(const Token&, const Token&) = default;
};

struct TokenStream {
    std::vector<Token> tokens;
    /// Provenance label of the originating workflow (`repo:path`), may be empty.
    std::string source;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
    std::vector<std::string> texts() const;

    friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

/// Escaped line break inside a quoted string; always its own token.
inline constexpr std::string_view kNewlineToken = "\\n";

/// Whitespace split, with `{ } [ ] : ,` and `"` as separate tokens outside quoted
/// strings. Inside a quoted string only whitespace splits, and the `\n` escape is a
/// token of its own, so run commands and their options become individual tokens.
TokenStream tokenize(std::string_view text, std::string source = {});

/// Convenience for token text only.
std::vector<std::string> tokenize_texts(std::string_view text);

/// Tokens joined by single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

/// Re-renders tokens with canonical spacing (`{"k": "v a", "l": [x]}`). For canonical
/// text whose strings use single spaces, render_tokens(tokenize(t)) == t.
std::string render_tokens(const std::vector<std::string>& tokens);
std::string render_tokens(const TokenStream& stream);

bool is_structural(std::string_view token);

}  // namespace wfc
