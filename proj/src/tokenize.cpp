#include "wfc/tokenize.hpp"

namespace wfc {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_structural_char(char c) {
    return c == '{' || c == '}' || c == '[' || c == ']' || c == ':' || c == ',';
}

}  // namespace

bool is_structural(std::string_view token) {
    return token.size() == 1 && (is_structural_char(token[0]) || token[0] == '"');
}

std::vector<std::string> TokenStream::texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

std::vector<std::string> tokenize_texts(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    bool in_string = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\' && i + 1 < text.size() && !is_space(text[i + 1])) {
                if (text[i + 1] == 'n') {
                    flush();
                    out.emplace_back(kNewlineToken);
                } else {
                    current.push_back(c);
                    current.push_back(text[i + 1]);
                }
                ++i;
            } else if (c == '"') {
                flush();
                out.emplace_back("\"");
                in_string = false;
            } else if (is_space(c)) {
                flush();
            } else {
                current.push_back(c);
            }
            continue;
        }
        if (is_space(c)) {
            flush();
        } else if (c == '"') {
            flush();
            out.emplace_back("\"");
            in_string = true;
        } else if (is_structural_char(c)) {
            flush();
            out.emplace_back(1, c);
        } else {
            current.push_back(c);
        }
    }
    flush();
    return out;
}

TokenStream tokenize(std::string_view text, std::string source) {
    TokenStream stream;
    stream.source = std::move(source);
    for (auto& t : tokenize_texts(text)) stream.tokens.push_back({std::move(t), std::nullopt});
    return stream;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string render_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    bool in_string = false;
    bool string_start = false;
    const std::string* prev = nullptr;
    for (const auto& t : tokens) {
        if (in_string) {
            if (t == "\"") {
                in_string = false;
            } else {
                bool glue = string_start || t == kNewlineToken || (prev && *prev == kNewlineToken);
                if (!glue) out.push_back(' ');
                string_start = false;
            }
            out += t;
            prev = &t;
            continue;
        }
        if (prev) {
            bool after_sep = *prev == ":" || *prev == ",";
            bool both_words = !is_structural(*prev) && !is_structural(t);
            bool closes = t == ":" || t == "," || t == "}" || t == "]";
            if ((after_sep && !closes) || both_words) out.push_back(' ');
        }
        out += t;
        if (t == "\"") {
            in_string = true;
            string_start = true;
        }
        prev = &t;
    }
    return out;
}

std::string render_tokens(const TokenStream& stream) {
    return render_tokens(stream.texts());
}

}  // namespace wfc
