#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfc/records.hpp"

namespace wfc {

/// Token-level equality: both sides go through the workflow tokenizer, so runs of
/// whitespace and spacing around structural characters do not matter. `strict`
/// compares raw bytes instead.
bool exact_match(std::string_view prediction, std::string_view target, bool strict = false);

struct BleuScores {
    double corpus = 0.0;
    std::vector<double> sentence;
};

inline constexpr double kBleuSmoothingEpsilon = 0.1;

/// Corpus BLEU-4 (uniform weights, brevity penalty, no smoothing) plus per-pair
/// sentence BLEU with add-epsilon smoothing of zero match counts.
BleuScores bleu4(const std::vector<std::pair<std::string, std::string>>& pairs);

double corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::string>>& references);

/// Sentence BLEU over orders 1..min(4, |candidate|, |reference|).
double sentence_bleu(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

struct RougeL {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);
RougeL rouge_l(const std::vector<std::string>& prediction, const std::vector<std::string>& target);
RougeL rouge_l(std::string_view prediction, std::string_view target);

struct MetricReport {
    std::size_t count = 0;
    double correct_fraction = 0.0;
    double bleu4_corpus = 0.0;
    std::vector<double> bleu4_sentence;
    double rouge_l_precision = 0.0;
    double rouge_l_recall = 0.0;
    double rouge_l_f = 0.0;
    std::vector<bool> correct;
    std::vector<RougeL> rouge_per_instance;
};

MetricReport score(const std::vector<std::string>& predictions, const std::vector<std::string>& targets,
                   bool strict = false);

struct Bucket {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t wrong = 0;
};

struct ConfidenceBucketReport {
    std::array<Bucket, 10> buckets{};
};

std::size_t bucket_index(double confidence);

/// `targets[i]` is the expected text for `records[i]`.
ConfidenceBucketReport bucket_by_confidence(const std::vector<PredictionRecord>& records,
                                            const std::vector<std::string>& targets, bool strict = false);

ojson to_json(const MetricReport& report);
ojson to_json(const ConfidenceBucketReport& report);

}  // namespace wfc
