#include "wfc/workflow.hpp"

#include <algorithm>

#include <yaml-cpp/yaml.h>

namespace wfc {

bool operator==(const Step& a, const Step& b) {
    return a.name == b.name && a.action == b.action && a.with_args == b.with_args && a.fields == b.fields;
}

bool operator==(const Job& a, const Job& b) {
    return a.id == b.id && a.runs_on == b.runs_on && a.container_image == b.container_image &&
           a.steps == b.steps && a.fields == b.fields && a.steps_slot == b.steps_slot;
}

bool operator==(const WorkflowDoc& a, const WorkflowDoc& b) {
    return a.repo_id == b.repo_id && a.path == b.path && a.triggers == b.triggers && a.jobs == b.jobs &&
           a.header == b.header && a.jobs_slot == b.jobs_slot;
}

std::size_t WorkflowDoc::step_count() const {
    std::size_t n = 0;
    for (const auto& job : jobs) n += job.steps.size();
    return n;
}

namespace {

bool has_workflow_extension(std::string_view path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
    };
    return ends_with(".yml") || ends_with(".yaml");
}

std::string scalar_or_canonical(const Node& n) {
    if (n.is_scalar()) return n.scalar;
    if (n.is_null()) return {};
    return to_canonical(n);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::size_t indent_of(const std::string& line) {
    return line.find_first_not_of(' ');
}

// Source lines belonging to a block step: its first line plus every following line
// indented at least as deep as the step's keys (or blank).
std::string raw_block_at(const std::vector<std::string>& lines, const YAML::Mark& mark) {
    if (mark.line < 0 || static_cast<std::size_t>(mark.line) >= lines.size()) return {};
    auto line = static_cast<std::size_t>(mark.line);
    auto column = static_cast<std::size_t>(std::max(mark.column, 0));
    std::string block = lines[line];
    for (std::size_t i = line + 1; i < lines.size(); ++i) {
        auto ind = indent_of(lines[i]);
        if (ind != std::string::npos && ind < column) break;
        block += '\n';
        block += lines[i];
    }
    while (!block.empty() && (block.back() == '\n' || block.back() == ' ')) block.pop_back();
    return block;
}

Step parse_step(const YAML::Node& yaml, const std::vector<std::string>& lines, const std::string& where) {
    Node node = from_yaml(yaml);
    if (!node.is_mapping()) throw NotAWorkflow(where + ": step is not a mapping");
    Step step;
    step.fields = node.entries;
    if (const Node* name = node.find("name"); name && !name->is_null()) step.name = scalar_or_canonical(*name);
    const Node* uses = node.find("uses");
    const Node* run = node.find("run");
    if ((uses != nullptr) == (run != nullptr)) {
        throw NotAWorkflow(where + ": step must have exactly one of `uses` or `run`");
    }
    if (uses) {
        std::string ref = scalar_or_canonical(*uses);
        if (ref.empty()) throw NotAWorkflow(where + ": empty `uses` reference");
        step.action = Uses{std::move(ref)};
    } else {
        step.action = Run{scalar_or_canonical(*run)};
    }
    if (const Node* with = node.find("with"); with && with->is_mapping()) {
        for (const auto& [k, v] : with->entries) step.with_args.emplace_back(k, scalar_or_canonical(v));
    }
    step.raw_block = raw_block_at(lines, yaml.Mark());
    return step;
}

Job parse_job(const std::string& id, const YAML::Node& yaml, const std::vector<std::string>& lines) {
    if (!yaml.IsMap()) throw NotAWorkflow("job `" + id + "` is not a mapping");
    Job job;
    job.id = id;
    for (const auto& kv : yaml) {
        std::string key = kv.first.IsScalar() ? kv.first.Scalar() : to_canonical(from_yaml(kv.first));
        if (key == "steps" && !job.steps_slot) {
            job.steps_slot = job.fields.size();
            if (kv.second.IsSequence()) {
                std::size_t index = 0;
                for (const auto& item : kv.second) {
                    job.steps.push_back(
                        parse_step(item, lines, "job `" + id + "` step " + std::to_string(++index)));
                }
            } else if (!kv.second.IsNull()) {
                throw NotAWorkflow("job `" + id + "`: `steps` is not a list");
            }
            continue;
        }
        job.fields.emplace_back(std::move(key), from_yaml(kv.second));
    }
    for (const auto& [k, v] : job.fields) {
        if (k == "runs-on") job.runs_on = scalar_or_canonical(v);
        if (k == "container") {
            if (v.is_scalar()) {
                job.container_image = v.scalar;
            } else if (const Node* image = v.find("image"); image && image->is_scalar()) {
                job.container_image = image->scalar;
            }
        }
    }
    return job;
}

std::vector<std::string> trigger_names(const Node& on) {
    std::vector<std::string> out;
    switch (on.kind) {
        case Node::Kind::Scalar: out.push_back(on.scalar); break;
        case Node::Kind::Sequence:
            for (const auto& item : on.items) out.push_back(scalar_or_canonical(item));
            break;
        case Node::Kind::Mapping:
            for (const auto& [k, v] : on.entries) out.push_back(k);
            break;
        case Node::Kind::Null: break;
    }
    return out;
}

YAML::Node load(std::string_view text) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ParseError(e.what());
    }
}

}  // namespace

Node parse_yaml(std::string_view text) {
    return from_yaml(load(text));
}

WorkflowDoc parse_workflow(std::string_view text, std::string repo_id, std::string path) {
    YAML::Node root = load(text);
    if (!has_workflow_extension(path)) throw NotAWorkflow(path + ": not a .yml/.yaml file");
    if (!root.IsMap()) throw NotAWorkflow(path + ": top level is not a mapping");

    auto lines = split_lines(text);
    WorkflowDoc doc;
    doc.repo_id = std::move(repo_id);
    doc.path = std::move(path);
    doc.raw_text = std::string(text);
    bool seen_jobs = false;
    for (const auto& kv : root) {
        std::string key = kv.first.IsScalar() ? kv.first.Scalar() : to_canonical(from_yaml(kv.first));
        if (key == "jobs" && !seen_jobs) {
            seen_jobs = true;
            doc.jobs_slot = doc.header.size();
            if (!kv.second.IsMap()) throw NotAWorkflow(doc.path + ": `jobs` is not a mapping");
            for (const auto& job : kv.second) doc.jobs.push_back(parse_job(job.first.Scalar(), job.second, lines));
            continue;
        }
        doc.header.emplace_back(std::move(key), from_yaml(kv.second));
    }
    if (!seen_jobs) throw NotAWorkflow(doc.path + ": no top-level `jobs` mapping");
    if (doc.jobs.empty()) throw NotAWorkflow(doc.path + ": `jobs` is empty");
    if (const Node* on = [&]() -> const Node* {
            for (const auto& [k, v] : doc.header)
                if (k == "on") return &v;
            return nullptr;
        }()) {
        doc.triggers = trigger_names(*on);
    }
    return doc;
}

namespace {

struct Writer {
    const WorkflowDoc& doc;
    std::string out;
    std::vector<StepSpan> spans;

    // Renders the job entries; `skeleton_job`, when set, stops after that job and
    // renders its steps as a completion skeleton around `skeleton_step`.
    void write(std::optional<std::size_t> skeleton_job, std::size_t skeleton_step) {
        out.push_back('{');
        bool first = true;
        auto sep = [&] {
            if (!first) out += ", ";
            first = false;
        };
        for (std::size_t i = 0; i <= doc.header.size(); ++i) {
            if (i == doc.jobs_slot) {
                sep();
                out += "\"jobs\": {";
                std::size_t last = skeleton_job ? *skeleton_job : doc.jobs.size() - 1;
                for (std::size_t j = 0; j <= last && j < doc.jobs.size(); ++j) {
                    if (j) out += ", ";
                    write_job(j, skeleton_job == j ? std::optional<std::size_t>(skeleton_step) : std::nullopt);
                }
                out.push_back('}');
            }
            if (i < doc.header.size()) {
                sep();
                append_quoted(out, doc.header[i].first);
                out += ": ";
                append_canonical(out, doc.header[i].second);
            }
        }
        out.push_back('}');
    }

    void write_job(std::size_t j, std::optional<std::size_t> skeleton_step) {
        const Job& job = doc.jobs[j];
        append_quoted(out, job.id);
        out += ": {";
        bool first = true;
        auto sep = [&] {
            if (!first) out += ", ";
            first = false;
        };
        for (std::size_t i = 0; i <= job.fields.size(); ++i) {
            if (job.steps_slot == i) {
                sep();
                out += "\"steps\": [";
                for (std::size_t s = 0; s < job.steps.size(); ++s) {
                    if (s) out += ", ";
                    if (skeleton_step && s >= *skeleton_step) {
                        write_placeholder(job.steps[s], s == *skeleton_step ? kToBePredicted : kForLaterUse);
                    } else {
                        std::size_t begin = out.size();
                        append_canonical_step(job.steps[s]);
                        spans.push_back({j, s, begin, out.size()});
                    }
                }
                out.push_back(']');
            }
            if (i < job.fields.size()) {
                sep();
                append_quoted(out, job.fields[i].first);
                out += ": ";
                append_canonical(out, job.fields[i].second);
            }
        }
        out.push_back('}');
    }

    void append_canonical_step(const Step& step) {
        Node n;
        n.kind = Node::Kind::Mapping;
        n.entries = step.fields;
        append_canonical(out, n);
    }

    void write_placeholder(const Step& step, std::string_view marker) {
        if (!step.name) {
            out += marker;
            return;
        }
        out += "{\"name\": ";
        append_quoted(out, *step.name);
        out += ", ";
        out += marker;
        out.push_back('}');
    }
};

}  // namespace

CanonicalText canonicalize_with_spans(const WorkflowDoc& doc) {
    Writer w{doc, {}, {}};
    w.write(std::nullopt, 0);
    return {std::move(w.out), std::move(w.spans)};
}

std::string canonicalize(const WorkflowDoc& doc) {
    return canonicalize_with_spans(doc).text;
}

std::string canonical_step(const Step& step) {
    Node n;
    n.kind = Node::Kind::Mapping;
    n.entries = step.fields;
    return to_canonical(n);
}

std::string canonical_job_skeleton(const WorkflowDoc& doc, std::size_t job, std::size_t step) {
    Writer w{doc, {}, {}};
    w.write(job, step);
    return std::move(w.out);
}

}  // namespace wfc
