#include "wfc/ngram.hpp"

#include <algorithm>
#include <set>

#include "wfc/error.hpp"
#include "wfc/metrics.hpp"
#include "wfc/parallel.hpp"
#include "wfc/tokenize.hpp"

namespace wfc {

namespace {

NgramModel::Context padded_context(std::span<const std::string> tokens, std::size_t width) {
    NgramModel::Context ctx;
    ctx.reserve(width);
    std::size_t have = std::min(width, tokens.size());
    for (std::size_t i = have; i < width; ++i) ctx.emplace_back(kBeginOfSequence);
    for (std::size_t i = tokens.size() - have; i < tokens.size(); ++i) ctx.push_back(tokens[i]);
    return ctx;
}

}  // namespace

NgramModel NgramModel::train(const std::vector<std::vector<std::string>>& texts, std::size_t n, std::size_t workers) {
    if (n < 2) throw ConfigError("n-gram order must be at least 2");
    if (texts.empty()) throw EmptyCorpus("n-gram training corpus is empty");

    const std::size_t width = n - 1;
    std::vector<std::map<Context, Counts>> partial(std::max<std::size_t>(1, std::min(workers, texts.size())));
    parallel_chunks(texts.size(), partial.size(), [&](std::size_t w, std::size_t begin, std::size_t end) {
        auto& local = partial[w];
        for (std::size_t t = begin; t < end; ++t) {
            const auto& seq = texts[t];
            Context ctx(width, std::string(kBeginOfSequence));
            for (const auto& tok : seq) {
                ++local[ctx][tok];
                ctx.erase(ctx.begin());
                ctx.push_back(tok);
            }
        }
    });

    NgramModel model;
    model.n_ = n;
    model.table_ = std::move(partial.front());
    for (std::size_t w = 1; w < partial.size(); ++w) {
        for (auto& [ctx, counts] : partial[w]) {
            auto& dst = model.table_[ctx];
            for (auto& [tok, c] : counts) dst[tok] += c;
        }
    }
    std::set<std::string_view> vocab;
    for (const auto& seq : texts)
        for (const auto& tok : seq) vocab.insert(tok);
    model.vocab_size_ = vocab.size();
    return model;
}

const NgramModel::Counts* NgramModel::counts(std::span<const std::string> context) const {
    auto it = table_.find(padded_context(context, n_ - 1));
    return it == table_.end() ? nullptr : &it->second;
}

std::optional<std::pair<std::string, double>> NgramModel::next_token(std::span<const std::string> context) const {
    const Counts* c = counts(context);
    if (!c || c->empty()) return std::nullopt;
    std::uint64_t total = 0;
    const std::pair<const std::string, std::uint64_t>* best = nullptr;
    // std::map iterates in lexicographic order, so strict `>` keeps the smallest token on ties.
    for (const auto& entry : *c) {
        total += entry.second;
        if (!best || entry.second > best->second) best = &entry;
    }
    return std::make_pair(best->first, static_cast<double>(best->second) / static_cast<double>(total));
}

ojson NgramModel::to_json() const {
    ojson j;
    j["format"] = "wfc-ngram";
    j["version"] = kModelFormatVersion;
    j["n"] = n_;
    j["vocab_size"] = vocab_size_;
    ojson contexts = ojson::array();
    for (const auto& [ctx, counts] : table_) {
        ojson row;
        row["context"] = ctx;
        ojson c = ojson::object();
        for (const auto& [tok, n] : counts) c[tok] = n;
        row["counts"] = std::move(c);
        contexts.push_back(std::move(row));
    }
    j["contexts"] = std::move(contexts);
    return j;
}

NgramModel NgramModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "wfc-ngram") throw ParseError("not an n-gram model file");
        if (j.at("version").get<int>() != kModelFormatVersion) throw ParseError("unsupported n-gram model version");
        NgramModel model;
        model.n_ = j.at("n").get<std::size_t>();
        if (model.n_ < 2) throw ParseError("n-gram order must be at least 2");
        model.vocab_size_ = j.value("vocab_size", std::size_t{0});
        for (const auto& row : j.at("contexts")) {
            auto ctx = row.at("context").get<Context>();
            if (ctx.size() != model.n_ - 1) throw ParseError("context length does not match model order");
            auto& dst = model.table_[std::move(ctx)];
            for (const auto& [tok, n] : row.at("counts").items()) {
                auto count = n.get<std::uint64_t>();
                if (count == 0) throw ParseError("n-gram counts must be positive");
                dst[tok] = count;
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad n-gram model: ") + e.what());
    }
}

void NgramModel::save(const std::string& path) const {
    write_file(path, to_json().dump() + "\n");
}

NgramModel NgramModel::load(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw ModelMissing("model file not found: " + path);
    }
    try {
        return from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::NoContinuation: return "no_continuation";
        case StopReason::Balanced: return "balanced";
        case StopReason::Cap: return "cap";
    }
    return {};
}

Completion complete(const NgramModel& model, std::span<const std::string> prefix, std::size_t cap) {
    const std::size_t width = model.order() - 1;
    std::vector<std::string> context(prefix.end() - static_cast<std::ptrdiff_t>(std::min(width, prefix.size())),
                                     prefix.end());
    Completion out;
    bool in_string = false;
    long depth = 0;
    while (true) {
        if (out.tokens.size() >= cap) {
            out.stop = StopReason::Cap;
            break;
        }
        // Until `width` tokens exist the lookup is left-padded with `<s>`, as in training.
        auto next = model.next_token(context);
        if (!next) {
            out.stop = StopReason::NoContinuation;
            break;
        }
        auto& [tok, p] = *next;
        out.confidence *= p;
        out.tokens.push_back(tok);
        context.push_back(tok);
        if (context.size() > width) context.erase(context.begin());

        if (tok == "\"") {
            in_string = !in_string;
        } else if (!in_string && tok == "{") {
            ++depth;
        } else if (!in_string && tok == "}") {
            if (--depth <= 0) {
                out.stop = StopReason::Balanced;
                break;
            }
        }
    }
    out.text = render_tokens(out.tokens);
    return out;
}

std::vector<std::string> training_tokens(const Instance& inst) {
    auto tokens = tokenize_texts(inst.input);
    auto target = tokenize_texts(inst.target);
    tokens.insert(tokens.end(), std::make_move_iterator(target.begin()), std::make_move_iterator(target.end()));
    return tokens;
}

std::vector<std::vector<std::string>> training_texts(const std::vector<Instance>& instances) {
    std::vector<std::vector<std::string>> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(training_tokens(inst));
    return out;
}

PredictionRecord predict(const NgramModel& model, const Instance& inst, std::size_t cap) {
    auto prefix = tokenize_texts(inst.input);
    auto c = complete(model, prefix, cap);
    return {inst.id, std::move(c.text), c.confidence, std::string(to_string(c.stop))};
}

std::vector<PredictionRecord> predict_all(const NgramModel& model, const std::vector<Instance>& instances,
                                          std::size_t workers, std::size_t cap) {
    return parallel_map(instances, workers, [&](const Instance& inst) { return predict(model, inst, cap); });
}

double exact_match_rate(const NgramModel& model, const std::vector<Instance>& instances, std::size_t workers) {
    if (instances.empty()) return 0.0;
    auto preds = predict_all(model, instances, workers);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) hits += exact_match(preds[i].prediction, instances[i].target);
    return static_cast<double>(hits) / static_cast<double>(instances.size());
}

OrderSelection select_best_n(const std::vector<std::size_t>& candidates, const std::vector<Instance>& train,
                             const std::vector<Instance>& eval, std::size_t workers) {
    if (candidates.empty()) throw ConfigError("select_best_n: no candidate orders");
    std::vector<std::size_t> orders = candidates;
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

    OrderSelection out;
    if (orders.size() == 1) {
        out.best = orders.front();
        return out;
    }
    auto texts = training_texts(train);
    double best_rate = -1.0;
    for (std::size_t n : orders) {
        auto model = NgramModel::train(texts, n, workers);
        double rate = exact_match_rate(model, eval, workers);
        out.scores.emplace_back(n, rate);
        if (rate > best_rate) {
            best_rate = rate;
            out.best = n;
        }
    }
    return out;
}

}  // namespace wfc
