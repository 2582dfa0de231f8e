#pragma once

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "wfc/category.hpp"
#include "wfc/tokenize.hpp"

namespace wfc {

struct AbstractionRule {
    Category category;
    std::string matcher;  // human-readable description of the pattern
    int priority;         // lower runs first
};

struct CoverageReport {
    std::size_t total_single_occurrence = 0;
    std::map<Category, std::size_t> per_category_counts;
    double abstracted_fraction = 1.0;
};

/// The fixed rule set plus the configurable file-extension list. Immutable once
/// built, so one instance can be shared by any number of threads.
class Abstractor {
public:
    explicit Abstractor(std::vector<std::string> extensions, std::string extensions_version = {});

    /// Reads an extension list: one lowercase extension per line, no leading dot.
    /// Blank lines and `#` comments are ignored; `# version: X` names the list version.
    static Abstractor from_file(const std::string& path);
    static Abstractor with_default_extensions();
    static std::string default_extensions_path();

    std::optional<Category> classify(std::string_view token) const;

    /// Placeholder form of a classified token. ActionVersion keeps the action name.
    std::string abstract_token(std::string_view token, Category category) const;

    TokenStream abstract_stream(const TokenStream& stream) const;

    const std::vector<AbstractionRule>& rules() const { return rules_; }
    std::size_t extension_count() const { return extensions_.size(); }
    bool has_extension(std::string_view ext) const;

    nlohmann::json dump() const;

private:
    bool matches(Category c, std::string_view token) const;

    std::unordered_set<std::string> extensions_;
    std::string extensions_version_;
    std::vector<AbstractionRule> rules_;
    std::regex action_version_;
    std::regex url_scheme_;
    std::regex ipv4_;
    std::regex version_;
};

CoverageReport abstraction_stats(const std::vector<TokenStream>& corpus, const Abstractor& abstractor);

nlohmann::json to_json(const CoverageReport& report);

}  // namespace wfc
