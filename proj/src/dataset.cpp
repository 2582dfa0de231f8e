#include "wfc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "wfc/error.hpp"
#include "wfc/hash.hpp"

namespace wfc {

std::string_view to_string(Mode m) {
    return m == Mode::NS ? "NS" : "JC";
}

std::string_view to_string(Representation r) {
    return r == Representation::Raw ? "raw" : "abstracted";
}

Mode parse_mode(std::string_view s) {
    if (s == "NS" || s == "ns") return Mode::NS;
    if (s == "JC" || s == "jc") return Mode::JC;
    throw ConfigError("unknown mode: " + std::string(s));
}

Representation parse_representation(std::string_view s) {
    if (s == "raw") return Representation::Raw;
    if (s == "abstracted") return Representation::Abstracted;
    throw ConfigError("unknown representation: " + std::string(s));
}

std::string instance_id(Mode mode, Representation repr, const Provenance& p) {
    std::string key;
    key += to_string(mode);
    key += '\x1f';
    key += to_string(repr);
    for (const std::string* part : {&p.repo_id, &p.path, &p.job_id}) {
        key += '\x1f';
        key += *part;
    }
    key += '\x1f';
    key += std::to_string(p.step);
    return hex64(fnv1a(key));
}

std::string sentinel(std::size_t index) {
    return "<extra_id_" + std::to_string(index) + ">";
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    // Reject the 2^64 mod bound lowest outputs so every residue is equally likely.
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x < threshold);
    return x % bound;
}

std::uint64_t mask_seed(std::uint64_t seed, std::string_view text) {
    return splitmix64(seed ^ fnv1a(text));
}

std::vector<std::size_t> mask_positions(std::size_t token_count, std::size_t count, std::uint64_t seed) {
    count = std::min(count, token_count);
    std::mt19937_64 rng(seed);
    // Sparse partial Fisher-Yates: only displaced slots are stored.
    std::unordered_map<std::size_t, std::size_t> moved;
    auto at = [&](std::size_t i) {
        auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + uniform_below(rng, token_count - i);
        std::size_t vi = at(i);
        std::size_t vj = at(j);
        moved[i] = vj;
        moved[j] = vi;
        chosen.push_back(vj);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<MaskedInstance> build_pretrain_instances(const std::vector<CorpusText>& corpus, double mask_rate,
                                                     std::uint64_t seed) {
    if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw ConfigError("mask rate must be in (0, 1)");
    std::vector<MaskedInstance> out;
    for (const auto& doc : corpus) {
        auto tokens = tokenize_texts(doc.text);
        auto k = static_cast<std::size_t>(std::llround(mask_rate * static_cast<double>(tokens.size())));
        if (k == 0) continue;
        auto positions = mask_positions(tokens.size(), k, mask_seed(seed, doc.text));
        MaskedInstance inst;
        inst.source_path = doc.source;
        inst.masked = positions.size();
        std::vector<std::string> target;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            auto s = sentinel(i);
            target.push_back(s);
            target.push_back(std::move(tokens[positions[i]]));
            tokens[positions[i]] = std::move(s);
        }
        inst.input = join_tokens(tokens);
        inst.target = join_tokens(target);
        out.push_back(std::move(inst));
    }
    return out;
}

namespace {

std::string represent(const std::string& text, Representation repr, const Abstractor* abstractor) {
    if (repr == Representation::Raw) return text;
    if (!abstractor) throw ConfigError("abstracted representation requires an abstractor");
    return render_tokens(abstractor->abstract_stream(tokenize(text)));
}

Instance make_instance(const WorkflowDoc& doc, Mode mode, Representation repr, std::size_t job, std::size_t step,
                       std::string input, std::string target) {
    Instance inst;
    inst.mode = mode;
    inst.repr = repr;
    inst.provenance = {doc.repo_id, doc.path, doc.jobs[job].id, step + 1};
    inst.id = instance_id(mode, repr, inst.provenance);
    inst.input = std::move(input);
    inst.target = std::move(target);
    return inst;
}

}  // namespace

std::vector<Instance> build_ns_instances(const WorkflowDoc& doc, Representation repr, const Abstractor* abstractor) {
    auto canonical = canonicalize_with_spans(doc);
    std::vector<Instance> out;
    out.reserve(canonical.spans.size());
    for (const auto& span : canonical.spans) {
        out.push_back(make_instance(doc, Mode::NS, repr, span.job, span.step,
                                    represent(canonical.text.substr(0, span.begin), repr, abstractor),
                                    represent(canonical.text.substr(span.begin, span.end - span.begin), repr,
                                              abstractor)));
    }
    return out;
}

std::vector<Instance> build_jc_instances(const WorkflowDoc& doc, Representation repr, const Abstractor* abstractor) {
    std::vector<Instance> out;
    for (std::size_t j = 0; j < doc.jobs.size(); ++j) {
        for (std::size_t s = 0; s < doc.jobs[j].steps.size(); ++s) {
            out.push_back(make_instance(doc, Mode::JC, repr, j, s,
                                        represent(canonical_job_skeleton(doc, j, s), repr, abstractor),
                                        represent(canonical_step(doc.jobs[j].steps[s]), repr, abstractor)));
        }
    }
    return out;
}

std::string_view to_string(DropReason r) {
    switch (r) {
        case DropReason::NonAscii: return "non-ascii";
        case DropReason::TooLong: return "too-long";
        case DropReason::Duplicate: return "duplicate";
    }
    return {};
}

bool is_ascii(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

FilterResult filter_corpus(std::vector<Instance> instances, std::size_t token_cap) {
    FilterResult result;
    std::unordered_set<std::string> seen;
    for (auto& inst : instances) {
        std::optional<DropReason> reason;
        if (!is_ascii(inst.input) || !is_ascii(inst.target)) {
            reason = DropReason::NonAscii;
        } else if (tokenize_texts(inst.input).size() >= token_cap) {
            reason = DropReason::TooLong;
        } else {
            std::string key = inst.input;
            key += '\0';
            key += inst.target;
            if (!seen.insert(std::move(key)).second) reason = DropReason::Duplicate;
        }
        if (reason) {
            result.dropped.push_back({std::move(inst), *reason});
        } else {
            result.kept.push_back(std::move(inst));
        }
    }
    return result;
}

std::string_view to_string(Partition p) {
    switch (p) {
        case Partition::Train: return "train";
        case Partition::Eval: return "eval";
        case Partition::Test: return "test";
    }
    return {};
}

Partition parse_partition(std::string_view s) {
    if (s == "train") return Partition::Train;
    if (s == "eval") return Partition::Eval;
    if (s == "test") return Partition::Test;
    throw ConfigError("unknown partition: " + std::string(s));
}

SplitAssignment split_by_project(const std::vector<ProjectSize>& projects, const SplitRatios& ratios,
                                 std::uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9 || std::any_of(ratios.begin(), ratios.end(), [](double r) { return r < 0; })) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }

    std::vector<ProjectSize> order = projects;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
    std::stable_sort(order.begin(), order.end(),
                     [](const ProjectSize& a, const ProjectSize& b) { return a.workflows > b.workflows; });

    std::size_t total = 0;
    for (const auto& p : order) total += p.workflows;

    SplitAssignment out;
    out.ratios = ratios;
    for (const auto& p : order) {
        std::size_t best = 0;
        double best_deficit = -1e300;
        for (std::size_t k = 0; k < 3; ++k) {
            double deficit = ratios[k] * static_cast<double>(total) - static_cast<double>(out.workflow_counts[k]);
            if (deficit > best_deficit) {
                best_deficit = deficit;
                best = k;
            }
        }
        out.partition_of[p.project] = static_cast<Partition>(best);
        out.workflow_counts[best] += p.workflows;
    }
    for (std::size_t k = 0; k < 3; ++k) {
        out.realized[k] = total == 0 ? 0.0 : static_cast<double>(out.workflow_counts[k]) / static_cast<double>(total);
        if (total) out.max_deviation = std::max(out.max_deviation, std::abs(out.realized[k] - ratios[k]));
    }
    if (out.max_deviation > kSplitTolerance) {
        out.impossible = "realized ratios deviate from targets by " + std::to_string(out.max_deviation);
    }
    return out;
}

}  // namespace wfc
