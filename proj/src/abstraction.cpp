#include "wfc/abstraction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include "wfc/error.hpp"

namespace wfc {

namespace {

constexpr const char* kActionVersionPattern = R"(^[A-Za-z0-9_.-]+/[A-Za-z0-9_./-]*@[A-Za-z0-9][A-Za-z0-9._/+-]*$)";
constexpr const char* kUrlSchemePattern = R"(^([A-Za-z][A-Za-z0-9+.-]*://|[Ww][Ww][Ww]\.))";
constexpr const char* kIpv4Pattern = R"(^(\d{1,3}\.){3}\d{1,3}(:\d+)?(/.*)?$)";
constexpr const char* kVersionPattern =
    R"(^([vV]?\d+(\.(\d+|x|X|\*))+|[vV]\d+)([-+][0-9A-Za-z.-]+)?$)";

bool contains_placeholder(std::string_view token) {
    for (auto c : kAllCategories)
        if (token.find(placeholder(c)) != std::string_view::npos) return true;
    return false;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

Abstractor::Abstractor(std::vector<std::string> extensions, std::string extensions_version)
    : extensions_version_(std::move(extensions_version)),
      action_version_(kActionVersionPattern),
      url_scheme_(kUrlSchemePattern),
      ipv4_(kIpv4Pattern),
      version_(kVersionPattern) {
    for (auto& e : extensions) {
        auto ext = lower(e);
        if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
        if (!ext.empty()) extensions_.insert(std::move(ext));
    }
    rules_ = {
        {Category::ActionVersion, std::string("owner/name@ref action reference: ") + kActionVersionPattern, 1},
        {Category::Url,
         std::string("scheme- or www-prefixed: ") + kUrlSchemePattern + " or dotted-quad IP: " + kIpv4Pattern, 2},
        {Category::File,
         "last path component ends with .<ext> for an ext in the extension list (" +
             std::to_string(extensions_.size()) + " entries)",
         3},
        {Category::VersionNumber, std::string("dotted or v-prefixed numeric literal: ") + kVersionPattern, 4},
        {Category::Path, "contains '/' (or starts with ./, ~/, /) and at least one alphanumeric character", 5},
    };
}

Abstractor Abstractor::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read extension list: " + path);
    std::vector<std::string> exts;
    std::string version;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view tag = "# version:";
            if (line.rfind(tag, 0) == 0) {
                version = line.substr(tag.size());
                version.erase(0, version.find_first_not_of(' '));
            }
            continue;
        }
        exts.push_back(line);
    }
    return Abstractor(std::move(exts), std::move(version));
}

std::string Abstractor::default_extensions_path() {
    return std::string(WFC_DATA_DIR) + "/extensions.txt";
}

Abstractor Abstractor::with_default_extensions() {
    return from_file(default_extensions_path());
}

bool Abstractor::has_extension(std::string_view ext) const {
    return extensions_.count(lower(ext)) > 0;
}

bool Abstractor::matches(Category c, std::string_view token) const {
    const std::string s(token);
    switch (c) {
        case Category::ActionVersion:
            return std::regex_match(s, action_version_);
        case Category::Url:
            return std::regex_search(s, url_scheme_) || std::regex_match(s, ipv4_);
        case Category::File: {
            auto slash = token.find_last_of('/');
            auto base = slash == std::string_view::npos ? token : token.substr(slash + 1);
            auto dot = base.find_last_of('.');
            if (dot == std::string_view::npos || dot + 1 >= base.size()) return false;
            return has_extension(base.substr(dot + 1));
        }
        case Category::VersionNumber:
            return std::regex_match(s, version_);
        case Category::Path: {
            bool slashy = token.find('/') != std::string_view::npos || token.rfind("./", 0) == 0 ||
                          token.rfind("~/", 0) == 0;
            bool alnum = std::any_of(token.begin(), token.end(), [](unsigned char ch) { return std::isalnum(ch); });
            return slashy && alnum;
        }
    }
    return false;
}

std::optional<Category> Abstractor::classify(std::string_view token) const {
    if (token.empty() || contains_placeholder(token)) return std::nullopt;
    for (const auto& rule : rules_) {
        if (matches(rule.category, token)) return rule.category;
    }
    return std::nullopt;
}

std::string Abstractor::abstract_token(std::string_view token, Category category) const {
    if (category == Category::ActionVersion) {
        auto at = token.find('@');
        return std::string(token.substr(0, at + 1)) + std::string(placeholder(category));
    }
    return std::string(placeholder(category));
}

TokenStream Abstractor::abstract_stream(const TokenStream& stream) const {
    TokenStream out;
    out.source = stream.source;
    out.tokens.reserve(stream.tokens.size());
    for (const auto& t : stream.tokens) {
        if (auto c = classify(t.text)) {
            out.tokens.push_back({abstract_token(t.text, *c), c});
        } else {
            out.tokens.push_back(t);
        }
    }
    return out;
}

nlohmann::json Abstractor::dump() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rules_) {
        rules.push_back({{"category", category_name(r.category)},
                         {"placeholder", placeholder(r.category)},
                         {"priority", r.priority},
                         {"matcher", r.matcher}});
    }
    std::vector<std::string> exts(extensions_.begin(), extensions_.end());
    std::sort(exts.begin(), exts.end());
    return {{"rules", rules}, {"extensions_version", extensions_version_}, {"extensions", exts}};
}

CoverageReport abstraction_stats(const std::vector<TokenStream>& corpus, const Abstractor& abstractor) {
    if (corpus.empty()) throw EmptyCorpus("abstraction_stats: empty corpus");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& stream : corpus)
        for (const auto& t : stream.tokens) ++counts[t.text];

    CoverageReport report;
    std::size_t abstracted = 0;
    for (const auto& [text, n] : counts) {
        if (n != 1) continue;
        ++report.total_single_occurrence;
        if (auto c = abstractor.classify(text)) {
            ++report.per_category_counts[*c];
            ++abstracted;
        }
    }
    report.abstracted_fraction =
        report.total_single_occurrence == 0
            ? 1.0
            : static_cast<double>(abstracted) / static_cast<double>(report.total_single_occurrence);
    return report;
}

nlohmann::json to_json(const CoverageReport& report) {
    nlohmann::json per = nlohmann::json::object();
    for (auto c : kAllCategories) {
        auto it = report.per_category_counts.find(c);
        per[std::string(category_name(c))] = it == report.per_category_counts.end() ? 0 : it->second;
    }
    return {{"total_single_occurrence", report.total_single_occurrence},
            {"per_category_counts", per},
            {"abstracted_fraction", report.abstracted_fraction}};
}

}  // namespace wfc
