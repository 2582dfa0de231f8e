#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace YAML {
class Node;
}

namespace wfc {

/// Order-preserving YAML value tree. Scalars are kept as their source text;
/// no type coercion happens, so `3.10` stays `3.10`.
struct Node {
    enum class Kind { Null, Scalar, Sequence, Mapping };

    Kind kind = Kind::Null;
    std::string scalar;
    std::vector<Node> items;
    std::vector<std::pair<std::string, Node>> entries;

    static Node null() { return {}; }
    static Node of(std::string text);

    bool is_null() const { return kind == Kind::Null; }
    bool is_scalar() const { return kind == Kind::Scalar; }
    bool is_sequence() const { return kind == Kind::Sequence; }
    bool is_mapping() const { return kind == Kind::Mapping; }

    /// First entry with the given key, or nullptr.
    const Node* find(std::string_view key) const;

    friend bool operator==(const Node&, const Node&) = default;
};

using Mapping = std::vector<std::pair<std::string, Node>>;

Node from_yaml(const YAML::Node& yaml);

/// JSON string literal with the escapes a YAML double-quoted scalar also accepts.
void append_quoted(std::string& out, std::string_view text);

/// Single-line JSON-like rendering: `{"k": "v", "l": ["a", null]}`.
void append_canonical(std::string& out, const Node& node);
std::string to_canonical(const Node& node);

}  // namespace wfc
