#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wfc/error.hpp"
#include "wfc/node.hpp"

namespace wfc {

struct Uses {
    std::string action_ref;
    friend bool operator==(const Uses&, const Uses&) = default;
};

struct Run {
    std::string command;
    friend bool operator==(const Run&, const Run&) = default;
};

using StepAction = std::variant<Uses, Run>;

/// One item of a job's `steps` list. `fields` holds every key in source order and
/// is what gets canonicalized; `name`, `action` and `with_args` are typed views of it.
struct Step {
    std::optional<std::string> name;
    StepAction action;
    std::vector<std::pair<std::string, std::string>> with_args;
    Mapping fields;
    std::string raw_block;

    bool is_uses() const { return std::holds_alternative<Uses>(action); }
};

bool operator==(const Step& a, const Step& b);

struct Job {
    std::string id;
    std::string runs_on;
    std::optional<std::string> container_image;
    std::vector<Step> steps;
    /// Every key except `steps`, in source order.
    Mapping fields;
    /// Index in `fields` before which `steps` is rendered; empty when the job has no steps key.
    std::optional<std::size_t> steps_slot;
};

bool operator==(const Job& a, const Job& b);

struct WorkflowDoc {
    std::string repo_id;
    std::string path;
    std::vector<std::string> triggers;
    std::vector<Job> jobs;
    /// Top-level keys except `jobs`, in source order.
    Mapping header;
    std::size_t jobs_slot = 0;
    std::string raw_text;

    std::size_t step_count() const;
};

/// Structural equality: ignores raw source text.
bool operator==(const WorkflowDoc& a, const WorkflowDoc& b);

WorkflowDoc parse_workflow(std::string_view text, std::string repo_id, std::string path);

/// Parse any YAML document into the order-preserving tree. Throws ParseError.
Node parse_yaml(std::string_view text);

std::string canonicalize(const WorkflowDoc& doc);

/// Byte range of one step inside a canonical text.
struct StepSpan {
    std::size_t job = 0;
    std::size_t step = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct CanonicalText {
    std::string text;
    std::vector<StepSpan> spans;  // in source order (job-major)
};

CanonicalText canonicalize_with_spans(const WorkflowDoc& doc);

std::string canonical_step(const Step& step);

inline constexpr std::string_view kToBePredicted = "<TO_BE_PREDICTED>";
inline constexpr std::string_view kForLaterUse = "<FOR-LATER-USE>";

/// Canonical text of the workflow up to and including job `job`, where that job's
/// steps before `step` are complete, step `step` is replaced by `<TO_BE_PREDICTED>`
/// and later steps keep only their `name` with the body replaced by `<FOR-LATER-USE>`.
/// Jobs after `job` are omitted.
std::string canonical_job_skeleton(const WorkflowDoc& doc, std::size_t job, std::size_t step);

}  // namespace wfc
