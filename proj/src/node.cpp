#include "wfc/node.hpp"

#include <yaml-cpp/yaml.h>

namespace wfc {

Node Node::of(std::string text) {
    Node n;
    n.kind = Kind::Scalar;
    n.scalar = std::move(text);
    return n;
}

const Node* Node::find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return &v;
    }
    return nullptr;
}

namespace {

std::string key_text(const YAML::Node& key) {
    if (key.IsScalar()) return key.Scalar();
    if (key.IsNull()) return "null";
    // Complex keys are rare in workflows; keep their canonical rendering as the key.
    return to_canonical(from_yaml(key));
}

}  // namespace

Node from_yaml(const YAML::Node& yaml) {
    Node n;
    switch (yaml.Type()) {
        case YAML::NodeType::Undefined:
        case YAML::NodeType::Null:
            break;
        case YAML::NodeType::Scalar:
            n.kind = Node::Kind::Scalar;
            n.scalar = yaml.Scalar();
            break;
        case YAML::NodeType::Sequence:
            n.kind = Node::Kind::Sequence;
            for (const auto& item : yaml) n.items.push_back(from_yaml(item));
            break;
        case YAML::NodeType::Map:
            n.kind = Node::Kind::Mapping;
            for (const auto& kv : yaml) n.entries.emplace_back(key_text(kv.first), from_yaml(kv.second));
            break;
    }
    return n;
}

void append_quoted(std::string& out, std::string_view text) {
    static constexpr char hex[] = "0123456789abcdef";
    out.push_back('"');
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20) {
                    out += "\\u00";
                    out.push_back(hex[c >> 4]);
                    out.push_back(hex[c & 0xF]);
                } else {
                    out.push_back(ch);
                }
        }
    }
    out.push_back('"');
}

void append_canonical(std::string& out, const Node& node) {
    switch (node.kind) {
        case Node::Kind::Null:
            out += "null";
            break;
        case Node::Kind::Scalar:
            append_quoted(out, node.scalar);
            break;
        case Node::Kind::Sequence:
            out.push_back('[');
            for (std::size_t i = 0; i < node.items.size(); ++i) {
                if (i) out += ", ";
                append_canonical(out, node.items[i]);
            }
            out.push_back(']');
            break;
        case Node::Kind::Mapping:
            out.push_back('{');
            for (std::size_t i = 0; i < node.entries.size(); ++i) {
                if (i) out += ", ";
                append_quoted(out, node.entries[i].first);
                out += ": ";
                append_canonical(out, node.entries[i].second);
            }
            out.push_back('}');
            break;
    }
}

std::string to_canonical(const Node& node) {
    std::string out;
    append_canonical(out, node);
    return out;
}

}  // namespace wfc
