#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace wfc {

/// Kinds of context-specific tokens that abstraction replaces with a placeholder.
enum class Category { Url, File, Path, VersionNumber, ActionVersion };

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::Url, Category::File, Category::Path, Category::VersionNumber, Category::ActionVersion};

constexpr std::string_view placeholder(Category c) {
    switch (c) {
        case Category::Url: return "<URL>";
        case Category::File: return "<FILE>";
        case Category::Path: return "<PATH>";
        case Category::VersionNumber: return "<VERSION>";
        case Category::ActionVersion: return "<PLH>";
    }
    return {};
}

constexpr std::string_view category_name(Category c) {
    switch (c) {
        case Category::Url: return "url";
        case Category::File: return "file";
        case Category::Path: return "path";
        case Category::VersionNumber: return "version";
        case Category::ActionVersion: return "action_version";
    }
    return {};
}

constexpr std::optional<Category> category_from_placeholder(std::string_view text) {
    for (auto c : kAllCategories)
        if (placeholder(c) == text) return c;
    return std::nullopt;
}

}  // namespace wfc
