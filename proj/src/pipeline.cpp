#include "wfc/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "wfc/error.hpp"
#include "wfc/parallel.hpp"
#include "wfc/records.hpp"

namespace wfc {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<Representation> PipelineConfig::representations() const {
    switch (representation) {
        case RepresentationChoice::Raw: return {Representation::Raw};
        case RepresentationChoice::Abstracted: return {Representation::Abstracted};
        case RepresentationChoice::Both: return {Representation::Raw, Representation::Abstracted};
    }
    return {};
}

std::size_t PipelineConfig::worker_count() const {
    return workers ? workers : default_workers();
}

Abstractor PipelineConfig::abstractor() const {
    return extensions.empty() ? Abstractor::with_default_extensions() : Abstractor::from_file(extensions);
}

void validate(const PipelineConfig& cfg) {
    double sum = cfg.ratios[0] + cfg.ratios[1] + cfg.ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
    for (double r : cfg.ratios)
        if (r < 0) throw ConfigError("split ratios must be non-negative");
    if (!(cfg.mask_rate > 0.0 && cfg.mask_rate < 1.0)) throw ConfigError("mask_rate must be in (0, 1)");
    if (cfg.orders.empty()) throw ConfigError("at least one n-gram order is required");
    for (auto n : cfg.orders)
        if (n < 2) throw ConfigError("n-gram orders must be at least 2");
    if (cfg.token_cap == 0) throw ConfigError("token_cap must be positive");
}

EnvLookup process_env() {
    return [](std::string_view name) -> std::optional<std::string> {
        if (const char* v = std::getenv(std::string(name).c_str())) return std::string(v);
        return std::nullopt;
    };
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

RepresentationChoice parse_choice(const std::string& s) {
    if (s == "raw") return RepresentationChoice::Raw;
    if (s == "abstracted") return RepresentationChoice::Abstracted;
    if (s == "both") return RepresentationChoice::Both;
    throw ConfigError("representation must be raw, abstracted or both");
}

double as_double(const json& v, const char* key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return std::stod(v.get<std::string>());
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(std::string("bad value for ") + key);
}

std::uint64_t as_uint(const json& v, const char* key) {
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) return v.get<std::uint64_t>();
    if (v.is_string()) {
        try {
            std::size_t used = 0;
            auto s = v.get<std::string>();
            auto out = std::stoull(s, &used);
            if (used == s.size() && s.find('-') == std::string::npos) return out;
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(std::string("bad value for ") + key);
}

std::vector<json> as_list(const json& v) {
    if (v.is_array()) return std::vector<json>(v.begin(), v.end());
    if (v.is_string()) {
        std::vector<json> out;
        for (auto& s : split_list(v.get<std::string>())) out.emplace_back(s);
        return out;
    }
    throw ConfigError("expected a list");
}

void apply_layer(PipelineConfig& cfg, const json& layer) {
    if (layer.is_null()) return;
    if (!layer.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, v] : layer.items()) {
        if (key == "corpus_root") {
            cfg.corpus_root = v.get<std::string>();
        } else if (key == "workdir") {
            cfg.workdir = v.get<std::string>();
        } else if (key == "mask_rate") {
            cfg.mask_rate = as_double(v, "mask_rate");
        } else if (key == "token_cap") {
            cfg.token_cap = as_uint(v, "token_cap");
        } else if (key == "ratios") {
            auto items = as_list(v);
            if (items.size() != 3) throw ConfigError("ratios needs three values (train, eval, test)");
            for (std::size_t i = 0; i < 3; ++i) cfg.ratios[i] = as_double(items[i], "ratios");
        } else if (key == "seed") {
            cfg.seed = as_uint(v, "seed");
        } else if (key == "orders") {
            cfg.orders.clear();
            for (const auto& item : as_list(v)) cfg.orders.push_back(as_uint(item, "orders"));
        } else if (key == "representation") {
            cfg.representation = parse_choice(v.get<std::string>());
        } else if (key == "workers") {
            cfg.workers = as_uint(v, "workers");
        } else if (key == "extensions") {
            cfg.extensions = v.get<std::string>();
        } else {
            throw ConfigError("unknown configuration key: " + key);
        }
    }
}

constexpr const char* kConfigKeys[] = {"corpus_root", "workdir", "mask_rate",      "token_cap", "ratios",
                                       "seed",        "orders",  "representation", "workers",   "extensions"};

}  // namespace

PipelineConfig resolve_config(const json& file, const EnvLookup& env, const json& flags) {
    PipelineConfig cfg;
    apply_layer(cfg, file);
    json env_layer = json::object();
    if (env) {
        for (const char* key : kConfigKeys) {
            std::string name = "WFC_";
            for (const char* c = key; *c; ++c) name.push_back(static_cast<char>(std::toupper(*c)));
            if (auto v = env(name)) env_layer[key] = *v;
        }
    }
    apply_layer(cfg, env_layer);
    apply_layer(cfg, flags);
    validate(cfg);
    return cfg;
}

json load_config_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const Error&) {
        throw ConfigError("cannot read config file " + path);
    }
}

std::string manifest_path(const PipelineConfig& cfg) {
    return (fs::path(cfg.workdir) / "manifest.json").string();
}

std::string workflows_path(const PipelineConfig& cfg) {
    return (fs::path(cfg.workdir) / "workflows.jsonl").string();
}

std::string general_path(const PipelineConfig& cfg) {
    return (fs::path(cfg.workdir) / "general.jsonl").string();
}

namespace {

std::string stem(Mode mode, Representation repr) {
    std::string s = mode == Mode::NS ? "ns" : "jc";
    return s + "_" + std::string(to_string(repr));
}

}  // namespace

std::string instances_path(const PipelineConfig& cfg, Mode mode, Representation repr) {
    return (fs::path(cfg.workdir) / "instances" / (stem(mode, repr) + ".jsonl")).string();
}

std::string split_instances_path(const PipelineConfig& cfg, Mode mode, Representation repr, Partition part) {
    return (fs::path(cfg.workdir) / "splits" / (stem(mode, repr) + "." + std::string(to_string(part)) + ".jsonl"))
        .string();
}

std::string model_path(const PipelineConfig& cfg, Representation repr) {
    return (fs::path(cfg.workdir) / "models" / ("ngram_" + std::string(to_string(repr)) + ".json")).string();
}

namespace {

std::string dump(const ojson& j) {
    return j.dump(2) + "\n";
}

bool yaml_extension(const fs::path& p) {
    auto ext = p.extension().string();
    return ext == ".yml" || ext == ".yaml";
}

struct CorpusFile {
    std::string repo;
    std::string path;  // repository-relative, generic separators
    fs::path full;
    bool workflow = false;
};

struct IngestedFile {
    std::string canonical;
    std::string error;
};

}  // namespace

IngestSummary cmd_ingest(const PipelineConfig& cfg) {
    fs::path root(cfg.corpus_root);
    if (cfg.corpus_root.empty() || !fs::is_directory(root)) throw MissingRoot("corpus root not found: " + cfg.corpus_root);

    std::vector<CorpusFile> files;
    std::vector<fs::path> repos;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) repos.push_back(entry.path());
    std::sort(repos.begin(), repos.end());
    for (const auto& repo : repos) {
        std::vector<fs::path> found;
        for (auto it = fs::recursive_directory_iterator(repo); it != fs::recursive_directory_iterator(); ++it) {
            if (it->is_directory() && it->path().filename() == ".git") {
                it.disable_recursion_pending();
                continue;
            }
            if (it->is_regular_file() && yaml_extension(it->path())) found.push_back(it->path());
        }
        std::sort(found.begin(), found.end());
        for (const auto& f : found) {
            auto rel = fs::relative(f, repo).generic_string();
            bool workflow = rel.rfind(".github/workflows/", 0) == 0;
            files.push_back({repo.filename().string(), rel, f, workflow});
        }
    }

    auto results = parallel_map(files, cfg.worker_count(), [](const CorpusFile& f) {
        IngestedFile out;
        try {
            auto text = read_file(f.full.string());
            out.canonical = f.workflow ? canonicalize(parse_workflow(text, f.repo, f.path)) : to_canonical(parse_yaml(text));
        } catch (const Error& e) {
            out.error = e.what();
        }
        return out;
    });

    IngestSummary summary;
    ojson listing = ojson::array();
    std::vector<ojson> workflows;
    std::vector<ojson> general;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& f = files[i];
        const auto& r = results[i];
        (f.workflow ? summary.workflows : summary.general) += 1;
        ojson row;
        row["repo"] = f.repo;
        row["path"] = f.path;
        row["kind"] = f.workflow ? "workflow" : "general";
        row["status"] = r.error.empty() ? "ok" : "unparseable";
        if (!r.error.empty()) {
            row["error"] = r.error;
            ++summary.unparseable;
        } else {
            ojson rec;
            rec["repo"] = f.repo;
            rec["path"] = f.path;
            rec["canonical"] = r.canonical;
            (f.workflow ? workflows : general).push_back(std::move(rec));
        }
        listing.push_back(std::move(row));
    }
    ojson manifest;
    manifest["workflows"] = summary.workflows;
    manifest["general"] = summary.general;
    manifest["unparseable"] = summary.unparseable;
    manifest["repositories"] = repos.size();
    manifest["files"] = std::move(listing);
    fs::create_directories(cfg.workdir);
    write_file(manifest_path(cfg), dump(manifest));
    write_jsonl(workflows_path(cfg), workflows);
    write_jsonl(general_path(cfg), general);
    return summary;
}

namespace {

struct Ingested {
    std::string repo;
    std::string path;
    std::string canonical;
};

std::vector<Ingested> read_ingested(const std::string& path) {
    if (!fs::exists(path)) throw Error(path + " not found; run `ingest` first");
    std::vector<Ingested> out;
    for (const auto& j : read_jsonl(path)) {
        out.push_back({j.at("repo").get<std::string>(), j.at("path").get<std::string>(),
                       j.at("canonical").get<std::string>()});
    }
    return out;
}

}  // namespace

CoverageReport cmd_abstract(const PipelineConfig& cfg) {
    auto docs = read_ingested(workflows_path(cfg));
    auto abstractor = cfg.abstractor();
    auto streams = parallel_map(docs, cfg.worker_count(), [&](const Ingested& d) {
        return tokenize(d.canonical, d.repo + ":" + d.path);
    });
    std::vector<ojson> rows;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ojson row;
        row["repo"] = docs[i].repo;
        row["path"] = docs[i].path;
        row["canonical"] = docs[i].canonical;
        row["abstracted"] = render_tokens(abstractor.abstract_stream(streams[i]));
        rows.push_back(std::move(row));
    }
    write_jsonl((fs::path(cfg.workdir) / "abstracted.jsonl").string(), rows);
    CoverageReport report;
    if (!streams.empty()) report = abstraction_stats(streams, abstractor);
    ojson out;
    out["coverage"] = to_json(report);
    out["rules"] = abstractor.dump();
    write_file((fs::path(cfg.workdir) / "abstraction_report.json").string(), dump(out));
    return report;
}

namespace {

std::string provenance_key(const Instance& inst) {
    const auto& p = inst.provenance;
    return p.repo_id + '\x1f' + p.path + '\x1f' + p.job_id + '\x1f' + std::to_string(p.step);
}

}  // namespace

BuildSummary cmd_build_dataset(const PipelineConfig& cfg) {
    auto ingested = read_ingested(workflows_path(cfg));
    BuildSummary summary;

    std::vector<WorkflowDoc> docs;
    std::unordered_set<std::string> seen;
    for (const auto& d : ingested) {
        if (!seen.insert(d.canonical).second) {
            ++summary.duplicate_workflows;
            continue;
        }
        docs.push_back(parse_workflow(d.canonical, d.repo, d.path));
    }
    summary.workflows = docs.size();

    auto abstractor = cfg.abstractor();
    auto reprs = cfg.representations();
    const auto workers = cfg.worker_count();
    ojson drop_report;
    for (Mode mode : {Mode::NS, Mode::JC}) {
        std::map<Representation, std::vector<Instance>> built;
        for (auto repr : reprs) {
            auto per_doc = parallel_map(docs, workers, [&](const WorkflowDoc& doc) {
                return mode == Mode::NS ? build_ns_instances(doc, repr, &abstractor)
                                        : build_jc_instances(doc, repr, &abstractor);
            });
            auto& all = built[repr];
            for (auto& v : per_doc) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
        }
        // The first representation decides which (workflow, job, step) survive, so the
        // raw and abstracted files stay index-aligned.
        auto primary = reprs.front();
        auto filtered = filter_corpus(built[primary], cfg.token_cap);
        std::unordered_set<std::string> kept_keys;
        for (const auto& inst : filtered.kept) kept_keys.insert(provenance_key(inst));
        ojson drops = ojson::array();
        std::map<std::string, std::size_t> reasons;
        for (const auto& d : filtered.dropped) {
            ojson row;
            row["id"] = d.instance.id;
            row["reason"] = to_string(d.reason);
            drops.push_back(std::move(row));
            ++reasons[std::string(to_string(d.reason))];
        }
        summary.dropped += filtered.dropped.size();
        summary.instances_per_mode = filtered.kept.size();
        for (auto repr : reprs) {
            std::vector<Instance> kept;
            if (repr == primary) {
                kept = std::move(filtered.kept);
            } else {
                for (auto& inst : built[repr])
                    if (kept_keys.count(provenance_key(inst))) kept.push_back(std::move(inst));
            }
            write_instances(instances_path(cfg, mode, repr), kept);
        }
        ojson entry;
        entry["kept"] = kept_keys.size();
        entry["dropped_by_reason"] = reasons;
        entry["dropped"] = std::move(drops);
        drop_report[stem(mode, primary)] = std::move(entry);
    }

    // Pre-training corpus: general YAML that passes the same filters and does not
    // overlap the fine-tuning workflows.
    std::vector<CorpusText> pretrain_texts;
    std::unordered_set<std::string> pretrain_seen;
    std::size_t pretrain_dropped = 0;
    if (fs::exists(general_path(cfg))) {
        for (const auto& g : read_ingested(general_path(cfg))) {
            bool ok = is_ascii(g.canonical) && tokenize_texts(g.canonical).size() < cfg.token_cap &&
                      !seen.count(g.canonical) && pretrain_seen.insert(g.canonical).second;
            if (ok) {
                pretrain_texts.push_back({g.repo + ":" + g.path, g.canonical});
            } else {
                ++pretrain_dropped;
            }
        }
    }
    auto masked = build_pretrain_instances(pretrain_texts, cfg.mask_rate, cfg.seed);
    std::vector<ojson> rows;
    for (const auto& m : masked) rows.push_back(to_json(m));
    write_jsonl((fs::path(cfg.workdir) / "instances" / "pretrain.jsonl").string(), rows);
    summary.pretrain = masked.size();

    ojson report;
    report["workflows"] = summary.workflows;
    report["duplicate_workflows"] = summary.duplicate_workflows;
    report["pretrain_instances"] = summary.pretrain;
    report["pretrain_dropped"] = pretrain_dropped;
    report["filters"] = std::move(drop_report);
    write_file((fs::path(cfg.workdir) / "instances" / "filter_report.json").string(), dump(report));
    return summary;
}

SplitAssignment cmd_split(const PipelineConfig& cfg) {
    auto ingested = read_ingested(workflows_path(cfg));
    std::map<std::string, std::size_t> sizes;
    for (const auto& d : ingested) ++sizes[d.repo];
    std::vector<ProjectSize> projects;
    for (const auto& [repo, n] : sizes) projects.push_back({repo, n});
    auto assignment = split_by_project(projects, cfg.ratios, cfg.seed);

    ojson manifest;
    manifest["ratios"] = assignment.ratios;
    manifest["workflow_counts"] = assignment.workflow_counts;
    manifest["realized"] = assignment.realized;
    manifest["max_deviation"] = assignment.max_deviation;
    if (assignment.impossible) manifest["warning"] = *assignment.impossible;
    ojson projects_json = ojson::object();
    for (const auto& [repo, part] : assignment.partition_of) projects_json[repo] = to_string(part);
    manifest["projects"] = std::move(projects_json);
    write_file((fs::path(cfg.workdir) / "split.json").string(), dump(manifest));

    for (Mode mode : {Mode::NS, Mode::JC}) {
        for (auto repr : cfg.representations()) {
            auto src = instances_path(cfg, mode, repr);
            if (!fs::exists(src)) continue;
            std::array<std::vector<Instance>, 3> parts;
            for (auto& inst : read_instances(src)) {
                auto it = assignment.partition_of.find(inst.provenance.repo_id);
                if (it == assignment.partition_of.end()) throw Error("instance from unknown project " + inst.provenance.repo_id);
                parts[static_cast<std::size_t>(it->second)].push_back(std::move(inst));
            }
            for (auto part : {Partition::Train, Partition::Eval, Partition::Test}) {
                write_instances(split_instances_path(cfg, mode, repr, part), parts[static_cast<std::size_t>(part)]);
            }
        }
    }
    return assignment;
}

std::vector<TrainSummary> cmd_train_ngram(const PipelineConfig& cfg) {
    std::vector<TrainSummary> out;
    const auto workers = cfg.worker_count();
    for (auto repr : cfg.representations()) {
        auto train_file = split_instances_path(cfg, Mode::NS, repr, Partition::Train);
        if (!fs::exists(train_file)) throw Error(train_file + " not found; run `build-dataset` and `split` first");
        auto train = read_instances(train_file);
        if (train.empty()) throw EmptyCorpus("no training instances in " + train_file);
        auto eval_file = split_instances_path(cfg, Mode::NS, repr, Partition::Eval);
        std::vector<Instance> eval = fs::exists(eval_file) ? read_instances(eval_file) : std::vector<Instance>{};

        TrainSummary s{repr, select_best_n(cfg.orders, train, eval, workers), model_path(cfg, repr)};
        auto model = NgramModel::train(training_texts(train), s.selection.best, workers);
        model.save(s.model_path);

        ojson sel;
        sel["best"] = s.selection.best;
        ojson scores = ojson::array();
        for (auto [n, rate] : s.selection.scores) {
            ojson row;
            row["n"] = n;
            row["eval_exact_match"] = rate;
            scores.push_back(row);
        }
        sel["scores"] = scores;
        sel["train_instances"] = train.size();
        sel["eval_instances"] = eval.size();
        write_file((fs::path(cfg.workdir) / "models" / ("ngram_" + std::string(to_string(repr)) + ".selection.json")).string(),
                   dump(sel));
        out.push_back(std::move(s));
    }
    return out;
}

std::string ns_input_at(const WorkflowDoc& doc, std::size_t job, std::size_t step) {
    WorkflowDoc copy = doc;
    Job& j = copy.jobs.at(job);
    step = std::min(step, j.steps.size());
    if (!j.steps_slot) j.steps_slot = j.fields.size();
    Step marker;
    marker.action = Run{"__cursor__"};
    marker.fields = {{"run", Node::of("__cursor__")}};
    j.steps.insert(j.steps.begin() + static_cast<std::ptrdiff_t>(step), marker);
    auto canonical = canonicalize_with_spans(copy);
    for (const auto& span : canonical.spans) {
        if (span.job == job && span.step == step) return canonical.text.substr(0, span.begin);
    }
    return canonical.text;
}

Completion cmd_suggest(const SuggestRequest& req) {
    auto model = NgramModel::load(req.model_path);
    std::string text;
    try {
        text = read_file(req.workflow_file);
    } catch (const Error&) {
        throw ParseError("cannot read workflow file " + req.workflow_file);
    }
    auto name = fs::path(req.workflow_file).filename().string();
    auto doc = parse_workflow(text, "local", name);

    std::size_t job = doc.jobs.size() - 1;
    if (req.job) {
        auto it = std::find_if(doc.jobs.begin(), doc.jobs.end(), [&](const Job& j) { return j.id == *req.job; });
        if (it != doc.jobs.end()) {
            job = static_cast<std::size_t>(it - doc.jobs.begin());
        } else {
            std::size_t index = 0;
            try {
                index = std::stoul(*req.job);
            } catch (const std::exception&) {
                throw ConfigError("no job named " + *req.job);
            }
            if (index == 0 || index > doc.jobs.size()) throw ConfigError("job index out of range: " + *req.job);
            job = index - 1;
        }
    }
    std::size_t steps = doc.jobs[job].steps.size();
    std::size_t step = req.step ? (*req.step == 0 ? 0 : *req.step - 1) : steps;
    std::string input = ns_input_at(doc, job, std::min(step, steps));
    if (req.repr == Representation::Abstracted) {
        auto abstractor = req.extensions.empty() ? Abstractor::with_default_extensions() : Abstractor::from_file(req.extensions);
        input = render_tokens(abstractor.abstract_stream(tokenize(input)));
    }
    return complete(model, tokenize_texts(input));
}

std::size_t cmd_predict(const std::string& model_file, const std::string& instances_file, const std::string& out_file,
                        std::size_t workers) {
    auto model = NgramModel::load(model_file);
    auto instances = read_instances(instances_file);
    auto preds = predict_all(model, instances, workers ? workers : default_workers());
    write_predictions(out_file, preds);
    return preds.size();
}

namespace {

struct Aligned {
    std::vector<Instance> instances;
    std::vector<PredictionRecord> predictions;  // same order as instances
};

Aligned align(const std::string& predictions_file, const std::string& instances_file) {
    Aligned out;
    out.instances = read_instances(instances_file);
    auto preds = read_predictions(predictions_file);
    std::map<std::string, PredictionRecord> by_id;
    std::vector<std::string> extra;
    std::vector<std::string> duplicate;
    for (auto& p : preds) {
        auto id = p.id;
        if (!by_id.emplace(id, std::move(p)).second) duplicate.push_back(id);
    }
    std::set<std::string> instance_ids;
    std::vector<std::string> missing;
    for (const auto& inst : out.instances) {
        instance_ids.insert(inst.id);
        auto it = by_id.find(inst.id);
        if (it == by_id.end()) {
            missing.push_back(inst.id);
        } else {
            out.predictions.push_back(it->second);
        }
    }
    for (const auto& [id, _] : by_id)
        if (!instance_ids.count(id)) extra.push_back(id);
    if (preds.empty() || !missing.empty() || !extra.empty() || !duplicate.empty()) {
        std::string msg = "prediction ids do not match instance ids";
        if (preds.empty()) msg += "; predictions file is empty";
        auto list = [&](const char* what, const std::vector<std::string>& ids) {
            if (ids.empty()) return;
            msg += std::string("; ") + what + " (" + std::to_string(ids.size()) + "):";
            for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
            if (ids.size() > 20) msg += " ...";
        };
        list("missing", missing);
        list("extra", extra);
        list("duplicate", duplicate);
        throw IdMismatch(msg);
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

EvaluationResult cmd_evaluate(const std::string& predictions_file, const std::string& instances_file,
                              const std::string& out_dir, bool strict) {
    auto aligned = align(predictions_file, instances_file);
    std::vector<std::string> preds;
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < aligned.instances.size(); ++i) {
        preds.push_back(aligned.predictions[i].prediction);
        targets.push_back(aligned.instances[i].target);
    }
    EvaluationResult result{score(preds, targets, strict), bucket_by_confidence(aligned.predictions, targets, strict)};

    ojson report;
    report["metrics"] = to_json(result.metrics);
    report["buckets"] = to_json(result.buckets);
    write_file((fs::path(out_dir) / "report.json").string(), dump(report));

    std::string csv = "id,correct,bleu4,rouge_l_precision,rouge_l_recall,rouge_l_f,confidence\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& r = result.metrics.rouge_per_instance[i];
        csv += aligned.instances[i].id + "," + (result.metrics.correct[i] ? "1" : "0") + "," +
               format_double(result.metrics.bleu4_sentence[i]) + "," + format_double(r.precision) + "," +
               format_double(r.recall) + "," + format_double(r.f) + "," +
               format_double(aligned.predictions[i].confidence) + "\n";
    }
    write_file((fs::path(out_dir) / "per_instance.csv").string(), csv);
    return result;
}

ConfidenceBucketReport cmd_buckets(const std::string& predictions_file, const std::string& instances_file,
                                   const std::string& out_file, bool strict) {
    auto aligned = align(predictions_file, instances_file);
    std::vector<std::string> targets;
    for (const auto& inst : aligned.instances) targets.push_back(inst.target);
    auto report = bucket_by_confidence(aligned.predictions, targets, strict);
    if (!out_file.empty()) write_file(out_file, dump(to_json(report)));
    return report;
}

std::vector<PerInstanceRow> read_per_instance_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty CSV");
    auto header = split_list(line);
    auto column = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(path + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto id_col = column("id");
    const auto correct_col = column("correct");
    const auto bleu_col = column("bleu4");
    const auto rouge_col = column("rouge_l_f");
    auto conf_it = std::find(header.begin(), header.end(), "confidence");

    std::vector<PerInstanceRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < header.size()) throw ParseError(path + ":" + std::to_string(lineno) + ": short row");
        try {
            PerInstanceRow row;
            row.id = cells[id_col];
            row.correct = cells[correct_col] == "1" || cells[correct_col] == "true";
            row.bleu4 = std::stod(cells[bleu_col]);
            row.rouge_l_f = std::stod(cells[rouge_col]);
            if (conf_it != header.end()) row.confidence = std::stod(cells[static_cast<std::size_t>(conf_it - header.begin())]);
            rows.push_back(std::move(row));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

ojson cmd_compare_stats(const std::vector<Comparison>& comparisons, const std::string& out_file, DeltaVariant variant) {
    if (comparisons.empty()) throw EmptyInput("compare-stats: no comparisons given");
    struct Row {
        std::string label;
        std::string metric;
        StatResult result;
        std::size_t pairs;
    };
    std::vector<Row> rows;
    for (const auto& cmp : comparisons) {
        auto a = read_per_instance_csv(cmp.a_csv);
        auto b = read_per_instance_csv(cmp.b_csv);
        std::map<std::string, const PerInstanceRow*> b_by_id;
        for (const auto& r : b) b_by_id[r.id] = &r;
        if (a.size() != b.size()) throw IdMismatch(cmp.label + ": per-instance files have different sizes");
        std::vector<std::pair<bool, bool>> correct;
        std::vector<std::pair<double, double>> bleu;
        std::vector<std::pair<double, double>> rouge;
        for (const auto& ra : a) {
            auto it = b_by_id.find(ra.id);
            if (it == b_by_id.end()) throw IdMismatch(cmp.label + ": id " + ra.id + " missing from " + cmp.b_csv);
            correct.emplace_back(ra.correct, it->second->correct);
            bleu.emplace_back(ra.bleu4, it->second->bleu4);
            rouge.emplace_back(ra.rouge_l_f, it->second->rouge_l_f);
        }
        rows.push_back({cmp.label, "correct", mcnemar(correct), a.size()});
        rows.push_back({cmp.label, "bleu4", wilcoxon_signed_rank(bleu, variant), a.size()});
        rows.push_back({cmp.label, "rouge_l_f", wilcoxon_signed_rank(rouge, variant), a.size()});
    }
    for (const char* family : {"mcnemar", "wilcoxon"}) {
        std::vector<std::size_t> idx;
        std::vector<double> ps;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].result.test_name == family) {
                idx.push_back(i);
                ps.push_back(rows[i].result.p_value_raw);
            }
        }
        auto adjusted = holm_adjust(ps);
        for (std::size_t k = 0; k < idx.size(); ++k) rows[idx[k]].result.p_value_adjusted = adjusted[k];
    }
    ojson table = ojson::array();
    for (const auto& r : rows) {
        ojson j;
        j["label"] = r.label;
        j["metric"] = r.metric;
        j["pairs"] = r.pairs;
        auto stat = to_json(r.result);
        for (auto& [k, v] : stat.items()) j[k] = v;
        table.push_back(std::move(j));
    }
    ojson out;
    out["comparisons"] = std::move(table);
    if (!out_file.empty()) write_file(out_file, dump(out));
    return out;
}

}  // namespace wfc
