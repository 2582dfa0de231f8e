#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfc/dataset.hpp"
#include "wfc/records.hpp"

namespace wfc {

inline constexpr std::string_view kBeginOfSequence = "<s>";
inline constexpr std::size_t kDefaultEmissionCap = 750;
inline constexpr int kModelFormatVersion = 1;

/// Next-token frequency table over fixed-length contexts. Unsmoothed: an unseen
/// context has no continuation.
class NgramModel {
public:
    using Context = std::vector<std::string>;
    using Counts = std::map<std::string, std::uint64_t>;

    /// Counts every n-gram of every text; the first n-1 positions see contexts
    /// left-padded with `<s>`. Throws EmptyCorpus when `texts` is empty.
    static NgramModel train(const std::vector<std::vector<std::string>>& texts, std::size_t n,
                            std::size_t workers = 1);

    std::size_t order() const { return n_; }
    std::size_t context_count() const { return table_.size(); }
    const std::map<Context, Counts>& table() const { return table_; }
    std::size_t vocab_size() const { return vocab_size_; }

    /// Continuation counts for the last n-1 tokens of `context` (left-padded).
    const Counts* counts(std::span<const std::string> context) const;

    /// Most frequent continuation with its relative frequency; ties go to the
    /// lexicographically smallest token.
    std::optional<std::pair<std::string, double>> next_token(std::span<const std::string> context) const;

    ojson to_json() const;
    static NgramModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static NgramModel load(const std::string& path);

    friend bool operator==(const NgramModel&, const NgramModel&) = default;

private:
    std::size_t n_ = 0;
    std::map<Context, Counts> table_;
    std::size_t vocab_size_ = 0;
};

enum class StopReason { NoContinuation, Balanced, Cap };
std::string_view to_string(StopReason r);

struct Completion {
    std::vector<std::string> tokens;
    std::string text;
    double confidence = 1.0;
    StopReason stop = StopReason::NoContinuation;
};

/// Greedy generation after `prefix`. Stops when the context has no continuation,
/// when an emitted `}` outside a string closes the object the completion opened
/// (or an enclosing one), or after `cap` tokens. Confidence is the product of the
/// emitted tokens' conditional probabilities.
Completion complete(const NgramModel& model, std::span<const std::string> prefix,
                    std::size_t cap = kDefaultEmissionCap);

/// Training sequence of an instance: its input followed by its target.
std::vector<std::string> training_tokens(const Instance& inst);

std::vector<std::vector<std::string>> training_texts(const std::vector<Instance>& instances);

PredictionRecord predict(const NgramModel& model, const Instance& inst, std::size_t cap = kDefaultEmissionCap);

std::vector<PredictionRecord> predict_all(const NgramModel& model, const std::vector<Instance>& instances,
                                          std::size_t workers = 1, std::size_t cap = kDefaultEmissionCap);

/// Exact-match rate of a model's completions on `instances`.
double exact_match_rate(const NgramModel& model, const std::vector<Instance>& instances, std::size_t workers = 1);

struct OrderSelection {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, double>> scores;  // (order, eval exact-match rate)
};

/// Trains one model per candidate order on `train` and keeps the one with the best
/// exact-match rate on `eval`; the smallest order wins ties.
OrderSelection select_best_n(const std::vector<std::size_t>& candidates, const std::vector<Instance>& train,
                             const std::vector<Instance>& eval, std::size_t workers = 1);

}  // namespace wfc
