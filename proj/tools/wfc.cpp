// wfc: workflow completion toolkit driver.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfc/error.hpp"
#include "wfc/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct PipelineFlags {
    std::string config_file;
    std::string corpus_root;
    std::string workdir;
    double mask_rate = 0;
    std::size_t token_cap = 0;
    std::vector<double> ratios;
    std::uint64_t seed = 0;
    std::vector<std::size_t> orders;
    std::string representation;
    std::size_t workers = 0;
    std::string extensions;

    std::vector<std::pair<std::string, CLI::Option*>> given;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file");
        given = {
            {"corpus_root", cmd->add_option("--corpus-root", corpus_root, "Directory with one repository per subdirectory")},
            {"workdir", cmd->add_option("--workdir", workdir, "Output directory for all artifacts")},
            {"mask_rate", cmd->add_option("--mask-rate", mask_rate, "Pre-training mask rate (default 0.15)")},
            {"token_cap", cmd->add_option("--token-cap", token_cap, "Drop instances with at least this many input tokens (default 1024)")},
            {"ratios", cmd->add_option("--ratios", ratios, "train eval test ratios (default 0.8 0.1 0.1)")->expected(3)},
            {"seed", cmd->add_option("--seed", seed, "Seed for every random choice (default 42)")},
            {"orders", cmd->add_option("--orders", orders, "Candidate n-gram orders (default 3 5 7)")},
            {"representation", cmd->add_option("--representation", representation, "raw, abstracted or both")},
            {"workers", cmd->add_option("--workers", workers, "Worker threads (default: logical cores)")},
            {"extensions", cmd->add_option("--extensions", extensions, "File-extension list for abstraction")},
        };
    }

    wfc::PipelineConfig resolve() const {
        nlohmann::json flags = nlohmann::json::object();
        for (const auto& [key, opt] : given) {
            if (opt->count() == 0) continue;
            if (key == "corpus_root") flags[key] = corpus_root;
            if (key == "workdir") flags[key] = workdir;
            if (key == "mask_rate") flags[key] = mask_rate;
            if (key == "token_cap") flags[key] = token_cap;
            if (key == "ratios") flags[key] = ratios;
            if (key == "seed") flags[key] = seed;
            if (key == "orders") flags[key] = orders;
            if (key == "representation") flags[key] = representation;
            if (key == "workers") flags[key] = workers;
            if (key == "extensions") flags[key] = extensions;
        }
        nlohmann::json file = config_file.empty() ? nlohmann::json() : wfc::load_config_file(config_file);
        return wfc::resolve_config(file, wfc::process_env(), flags);
    }
};

void print_report(const wfc::EvaluationResult& r) {
    std::printf("instances        %zu\n", r.metrics.count);
    std::printf("correct          %.4f\n", r.metrics.correct_fraction);
    std::printf("bleu4 (corpus)   %.4f\n", r.metrics.bleu4_corpus);
    std::printf("rouge-l f        %.4f\n", r.metrics.rouge_l_f);
}

void print_buckets(const wfc::ConfidenceBucketReport& report) {
    std::printf("confidence   total  correct  wrong\n");
    for (const auto& b : report.buckets) {
        std::printf("[%.1f, %.1f%c %6zu %8zu %6zu\n", b.lower, b.upper, b.upper >= 1.0 ? ']' : ')', b.total, b.correct,
                    b.wrong);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workflow completion toolkit: corpus ingestion, abstraction, dataset building, "
                 "n-gram completion and evaluation"};
    app.require_subcommand(1);

    PipelineFlags ingest_flags, abstract_flags, build_flags, split_flags, train_flags;

    auto* ingest = app.add_subcommand("ingest", "Walk the corpus and write the workflow manifest");
    ingest_flags.attach(ingest);

    auto* abstract = app.add_subcommand("abstract", "Abstract ingested workflows and report single-token coverage");
    abstract_flags.attach(abstract);
    std::string rules_out;
    abstract->add_option("--dump-rules", rules_out, "Write the rule set as JSON to this file");

    auto* build = app.add_subcommand("build-dataset", "Build NS/JC fine-tuning and masked pre-training instances");
    build_flags.attach(build);

    auto* split = app.add_subcommand("split", "Assign projects to train/eval/test and partition instance files");
    split_flags.attach(split);

    auto* train = app.add_subcommand("train-ngram", "Select the n-gram order on eval data and train the model");
    train_flags.attach(train);

    auto* suggest = app.add_subcommand("suggest", "Suggest the next step of a workflow (or complete an instance file)");
    wfc::SuggestRequest req;
    std::string job;
    std::size_t step = 0;
    std::string repr = "raw";
    std::string batch_instances, batch_out;
    std::size_t suggest_workers = 0;
    suggest->add_option("--model", req.model_path, "Trained n-gram model")->required();
    auto* wf_opt = suggest->add_option("--workflow", req.workflow_file, "Workflow YAML to complete");
    auto* job_opt = suggest->add_option("--job", job, "Job id or 1-based index (default: last job)");
    auto* step_opt = suggest->add_option("--step", step, "1-based step position to predict (default: after the last)");
    suggest->add_option("--repr", repr, "raw or abstracted input")->check(CLI::IsMember({"raw", "abstracted"}));
    suggest->add_option("--extensions", req.extensions, "File-extension list for abstraction");
    auto* inst_opt = suggest->add_option("--instances", batch_instances, "Instance JSONL to complete in batch");
    suggest->add_option("--out", batch_out, "Prediction JSONL output for --instances");
    suggest->add_option("--workers", suggest_workers, "Worker threads for batch mode");
    wf_opt->excludes(inst_opt);

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against instance targets");
    std::string eval_preds, eval_insts, eval_out = ".";
    bool eval_strict = false;
    evaluate->add_option("--predictions", eval_preds, "PredictionRecord JSONL")->required();
    evaluate->add_option("--instances", eval_insts, "Instance JSONL")->required();
    evaluate->add_option("--out-dir", eval_out, "Directory for report.json and per_instance.csv");
    evaluate->add_flag("--strict", eval_strict, "Byte-exact matching instead of token-normalized");

    auto* buckets = app.add_subcommand("buckets", "Correct/wrong counts per 0.1 confidence bucket");
    std::string bucket_preds, bucket_insts, bucket_out;
    bool bucket_strict = false;
    buckets->add_option("--predictions", bucket_preds, "PredictionRecord JSONL")->required();
    buckets->add_option("--instances", bucket_insts, "Instance JSONL")->required();
    buckets->add_option("--out", bucket_out, "Write the bucket table as JSON");
    buckets->add_flag("--strict", bucket_strict, "Byte-exact matching");

    auto* compare = app.add_subcommand("compare-stats", "McNemar/Wilcoxon comparison of two per-instance score files");
    std::vector<std::string> labels, a_files, b_files;
    std::string compare_out;
    bool within_pair = false;
    compare->add_option("--label", labels, "Comparison label (repeatable)");
    compare->add_option("--a", a_files, "per_instance.csv of the first approach (repeatable)")->required();
    compare->add_option("--b", b_files, "per_instance.csv of the second approach (repeatable)")->required();
    compare->add_option("--out", compare_out, "Write the comparison table as JSON");
    compare->add_flag("--within-pair-delta", within_pair, "Use the within-pair Cliff's delta variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*ingest) {
            auto cfg = ingest_flags.resolve();
            auto s = wfc::cmd_ingest(cfg);
            std::printf("workflows %zu  general %zu  unparseable %zu\n", s.workflows, s.general, s.unparseable);
        } else if (*abstract) {
            auto cfg = abstract_flags.resolve();
            auto report = wfc::cmd_abstract(cfg);
            std::printf("single-occurrence tokens %zu  abstracted fraction %.4f\n", report.total_single_occurrence,
                        report.abstracted_fraction);
            if (!rules_out.empty()) wfc::write_file(rules_out, cfg.abstractor().dump().dump(2) + "\n");
        } else if (*build) {
            auto cfg = build_flags.resolve();
            auto s = wfc::cmd_build_dataset(cfg);
            std::printf("workflows %zu (duplicates removed %zu)  instances per mode %zu  dropped %zu  pretrain %zu\n",
                        s.workflows, s.duplicate_workflows, s.instances_per_mode, s.dropped, s.pretrain);
        } else if (*split) {
            auto cfg = split_flags.resolve();
            auto a = wfc::cmd_split(cfg);
            std::printf("train %zu  eval %zu  test %zu workflows  (max deviation %.4f)\n", a.workflow_counts[0],
                        a.workflow_counts[1], a.workflow_counts[2], a.max_deviation);
            if (a.impossible) std::fprintf(stderr, "warning: %s\n", a.impossible->c_str());
        } else if (*train) {
            auto cfg = train_flags.resolve();
            for (const auto& s : wfc::cmd_train_ngram(cfg)) {
                std::printf("%s: n=%zu -> %s\n", std::string(wfc::to_string(s.repr)).c_str(), s.selection.best,
                            s.model_path.c_str());
            }
        } else if (*suggest) {
            if (inst_opt->count()) {
                if (batch_out.empty()) throw CLI::RequiredError("--out");
                auto n = wfc::cmd_predict(req.model_path, batch_instances, batch_out, suggest_workers);
                std::printf("%zu predictions -> %s\n", n, batch_out.c_str());
            } else {
                if (!wf_opt->count()) throw CLI::RequiredError("--workflow");
                if (job_opt->count()) req.job = job;
                if (step_opt->count()) req.step = step;
                req.repr = wfc::parse_representation(repr);
                auto c = wfc::cmd_suggest(req);
                if (!c.tokens.empty()) std::printf("%s\nconfidence %.6f\n", c.text.c_str(), c.confidence);
            }
        } else if (*evaluate) {
            auto r = wfc::cmd_evaluate(eval_preds, eval_insts, eval_out, eval_strict);
            print_report(r);
            print_buckets(r.buckets);
        } else if (*buckets) {
            print_buckets(wfc::cmd_buckets(bucket_preds, bucket_insts, bucket_out, bucket_strict));
        } else if (*compare) {
            if (a_files.size() != b_files.size()) throw CLI::ValidationError("--a and --b must be given the same number of times");
            std::vector<wfc::Comparison> cmps;
            for (std::size_t i = 0; i < a_files.size(); ++i) {
                cmps.push_back({i < labels.size() ? labels[i] : "comparison-" + std::to_string(i + 1), a_files[i], b_files[i]});
            }
            auto table = wfc::cmd_compare_stats(cmps, compare_out,
                                                within_pair ? wfc::DeltaVariant::WithinPair : wfc::DeltaVariant::Unpaired);
            std::cout << table.dump(2) << "\n";
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const wfc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
