#include "wfc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wfc/error.hpp"
#include "wfc/tokenize.hpp"

namespace wfc {

bool exact_match(std::string_view prediction, std::string_view target, bool strict) {
    if (strict) return prediction == target;
    return tokenize_texts(prediction) == tokenize_texts(target);
}

namespace {

using Tokens = std::vector<std::string>;

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

// Clipped matches and candidate n-gram total for one order.
std::pair<std::size_t, std::size_t> clipped(const Tokens& candidate, const Tokens& reference, std::size_t n) {
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    std::size_t matches = 0;
    std::size_t total = 0;
    for (const auto& [gram, c] : cand) {
        total += c;
        auto it = ref.find(gram);
        if (it != ref.end()) matches += std::min(c, it->second);
    }
    return {matches, total};
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
    if (cand_len == 0) return 0.0;
    if (cand_len >= ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

}  // namespace

double corpus_bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
    std::array<std::size_t, 4> matches{};
    std::array<std::size_t, 4> totals{};
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cand_len += candidates[i].size();
        ref_len += references[i].size();
        for (std::size_t n = 1; n <= 4; ++n) {
            auto [m, t] = clipped(candidates[i], references[i], n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }
    // Orders with no candidate n-grams anywhere carry no evidence and are left out.
    double log_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 0; n < 4; ++n) {
        if (totals[n] == 0) continue;
        if (matches[n] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
        ++orders;
    }
    if (orders == 0) return cand_len == 0 && ref_len == 0 ? 1.0 : 0.0;
    return brevity_penalty(cand_len, ref_len) * std::exp(log_sum / static_cast<double>(orders));
}

double sentence_bleu(const Tokens& candidate, const Tokens& reference) {
    std::size_t max_order = std::min<std::size_t>({4, candidate.size(), reference.size()});
    if (max_order == 0) return candidate.empty() && reference.empty() ? 1.0 : 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        auto [m, t] = clipped(candidate, reference, n);
        double numerator = m == 0 ? kBleuSmoothingEpsilon : static_cast<double>(m);
        log_sum += std::log(numerator / static_cast<double>(t));
    }
    return brevity_penalty(candidate.size(), reference.size()) * std::exp(log_sum / static_cast<double>(max_order));
}

BleuScores bleu4(const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) throw EmptyInput("bleu4: no prediction/target pairs");
    std::vector<Tokens> cands;
    std::vector<Tokens> refs;
    BleuScores out;
    for (const auto& [pred, target] : pairs) {
        cands.push_back(tokenize_texts(pred));
        refs.push_back(tokenize_texts(target));
        out.sentence.push_back(sentence_bleu(cands.back(), refs.back()));
    }
    out.corpus = corpus_bleu(cands, refs);
    return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (const auto& x : a) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = x == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

RougeL rouge_l(const Tokens& prediction, const Tokens& target) {
    RougeL r;
    if (prediction.empty() || target.empty()) return r;
    auto lcs = static_cast<double>(lcs_length(prediction, target));
    r.precision = lcs / static_cast<double>(prediction.size());
    r.recall = lcs / static_cast<double>(target.size());
    if (r.precision + r.recall > 0) r.f = 2 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

RougeL rouge_l(std::string_view prediction, std::string_view target) {
    return rouge_l(tokenize_texts(prediction), tokenize_texts(target));
}

MetricReport score(const std::vector<std::string>& predictions, const std::vector<std::string>& targets,
                   bool strict) {
    if (predictions.size() != targets.size()) throw Error("score: prediction/target count mismatch");
    if (predictions.empty()) throw EmptyInput("score: nothing to score");
    MetricReport report;
    report.count = predictions.size();
    std::vector<std::pair<std::string, std::string>> pairs;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        bool ok = exact_match(predictions[i], targets[i], strict);
        report.correct.push_back(ok);
        correct += ok;
        pairs.emplace_back(predictions[i], targets[i]);
        auto r = rouge_l(predictions[i], targets[i]);
        report.rouge_per_instance.push_back(r);
        report.rouge_l_precision += r.precision;
        report.rouge_l_recall += r.recall;
        report.rouge_l_f += r.f;
    }
    auto n = static_cast<double>(report.count);
    report.correct_fraction = static_cast<double>(correct) / n;
    report.rouge_l_precision /= n;
    report.rouge_l_recall /= n;
    report.rouge_l_f /= n;
    auto bleu = bleu4(pairs);
    report.bleu4_corpus = bleu.corpus;
    report.bleu4_sentence = std::move(bleu.sentence);
    return report;
}

std::size_t bucket_index(double confidence) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) throw Error("confidence outside [0, 1]");
    auto b = static_cast<std::size_t>(std::floor(confidence * 10.0));
    return std::min<std::size_t>(b, 9);
}

ConfidenceBucketReport bucket_by_confidence(const std::vector<PredictionRecord>& records,
                                            const std::vector<std::string>& targets, bool strict) {
    if (records.size() != targets.size()) throw Error("bucket_by_confidence: record/target count mismatch");
    ConfidenceBucketReport report;
    for (std::size_t b = 0; b < 10; ++b) {
        report.buckets[b].lower = static_cast<double>(b) / 10.0;
        report.buckets[b].upper = static_cast<double>(b + 1) / 10.0;
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& bucket = report.buckets[bucket_index(records[i].confidence)];
        ++bucket.total;
        if (exact_match(records[i].prediction, targets[i], strict)) {
            ++bucket.correct;
        } else {
            ++bucket.wrong;
        }
    }
    return report;
}

ojson to_json(const MetricReport& report) {
    ojson j;
    j["count"] = report.count;
    j["correct_fraction"] = report.correct_fraction;
    j["bleu4_corpus"] = report.bleu4_corpus;
    double mean_sentence = 0.0;
    for (double s : report.bleu4_sentence) mean_sentence += s;
    j["bleu4_sentence_mean"] = report.bleu4_sentence.empty() ? 0.0 : mean_sentence / report.bleu4_sentence.size();
    j["rouge_l_precision"] = report.rouge_l_precision;
    j["rouge_l_recall"] = report.rouge_l_recall;
    j["rouge_l_f"] = report.rouge_l_f;
    return j;
}

ojson to_json(const ConfidenceBucketReport& report) {
    ojson rows = ojson::array();
    for (const auto& b : report.buckets) {
        ojson row;
        row["lower"] = b.lower;
        row["upper"] = b.upper;
        row["total"] = b.total;
        row["correct"] = b.correct;
        row["wrong"] = b.wrong;
        row["correct_rate"] = b.total ? static_cast<double>(b.correct) / static_cast<double>(b.total) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace wfc
