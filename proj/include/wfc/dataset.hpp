#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfc/abstraction.hpp"
#include "wfc/workflow.hpp"

namespace wfc {

enum class Mode { NS, JC };
enum class Representation { Raw, Abstracted };

std::string_view to_string(Mode m);
std::string_view to_string(Representation r);
Mode parse_mode(std::string_view s);
Representation parse_representation(std::string_view s);

struct Provenance {
    std::string repo_id;
    std::string path;
    std::string job_id;
    std::size_t step = 0;  // 1-based position within the job

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Instance {
    std::string id;
    Mode mode = Mode::NS;
    Representation repr = Representation::Raw;
    std::string input;
    std::string target;
    Provenance provenance;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Stable identifier from mode, representation and provenance.
std::string instance_id(Mode mode, Representation repr, const Provenance& p);

struct MaskedInstance {
    std::string input;
    std::string target;
    std::string source_path;
    std::size_t masked = 0;
};

/// Sentinel for the i-th masked position: `<extra_id_i>`.
std::string sentinel(std::size_t index);

/// Draw in [0, bound) from a 64-bit Mersenne Twister without modulo bias.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Seed of the per-text generator; depends on the text, not its corpus position.
std::uint64_t mask_seed(std::uint64_t seed, std::string_view text);

/// `count` distinct positions in [0, token_count), ascending, chosen by a seeded
/// partial Fisher-Yates shuffle.
std::vector<std::size_t> mask_positions(std::size_t token_count, std::size_t count, std::uint64_t seed);

struct CorpusText {
    std::string source;
    std::string text;
};

/// Masks round(mask_rate * tokens) positions of every text. Texts where that rounds
/// to zero are skipped.
std::vector<MaskedInstance> build_pretrain_instances(const std::vector<CorpusText>& corpus, double mask_rate,
                                                     std::uint64_t seed);

/// `abstractor` is required for Representation::Abstracted.
std::vector<Instance> build_ns_instances(const WorkflowDoc& doc, Representation repr,
                                         const Abstractor* abstractor = nullptr);
std::vector<Instance> build_jc_instances(const WorkflowDoc& doc, Representation repr,
                                         const Abstractor* abstractor = nullptr);

enum class DropReason { NonAscii, TooLong, Duplicate };
std::string_view to_string(DropReason r);

struct DroppedInstance {
    Instance instance;
    DropReason reason;
};

struct FilterResult {
    std::vector<Instance> kept;
    std::vector<DroppedInstance> dropped;
};

inline constexpr std::size_t kDefaultTokenCap = 1024;

bool is_ascii(std::string_view text);

/// Drops instances with non-ASCII bytes, then those whose input has >= token_cap
/// tokens, then exact (input, target) duplicates of an already kept instance.
FilterResult filter_corpus(std::vector<Instance> instances, std::size_t token_cap = kDefaultTokenCap);

enum class Partition { Train, Eval, Test };
std::string_view to_string(Partition p);
Partition parse_partition(std::string_view s);

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultRatios = {0.8, 0.1, 0.1};
inline constexpr double kSplitTolerance = 0.02;

struct ProjectSize {
    std::string project;
    std::size_t workflows = 0;
};

struct SplitAssignment {
    std::map<std::string, Partition> partition_of;
    SplitRatios ratios = kDefaultRatios;
    std::array<std::size_t, 3> workflow_counts{};
    std::array<double, 3> realized{};
    double max_deviation = 0.0;
    /// Set when the realized ratios miss the targets by more than kSplitTolerance.
    std::optional<std::string> impossible;
};

/// Greedy assignment of whole projects, largest first (equal sizes in seeded order),
/// each to the partition furthest below its target workflow count.
SplitAssignment split_by_project(const std::vector<ProjectSize>& projects, const SplitRatios& ratios,
                                 std::uint64_t seed);

}  // namespace wfc
