#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wfc/abstraction.hpp"
#include "wfc/dataset.hpp"
#include "wfc/metrics.hpp"
#include "wfc/ngram.hpp"
#include "wfc/stats.hpp"

namespace wfc {

enum class RepresentationChoice { Raw, Abstracted, Both };

struct PipelineConfig {
    std::string corpus_root;
    std::string workdir = "wfc-work";
    double mask_rate = 0.15;
    std::size_t token_cap = kDefaultTokenCap;
    SplitRatios ratios = kDefaultRatios;
    std::uint64_t seed = 42;
    std::vector<std::size_t> orders = {3, 5, 7};
    RepresentationChoice representation = RepresentationChoice::Both;
    std::size_t workers = 0;  // 0 = logical cores
    std::string extensions;   // empty = bundled list

    std::vector<Representation> representations() const;
    std::size_t worker_count() const;
    Abstractor abstractor() const;
};

/// Throws ConfigError when ratios do not sum to 1, the mask rate is outside (0, 1)
/// or an order is below 2.
void validate(const PipelineConfig& cfg);

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

EnvLookup process_env();

/// Layers, lowest precedence first: defaults, config file (JSON object), `WFC_*`
/// environment variables, explicit flags (JSON object of the flags actually given).
/// Keys: corpus_root, workdir, mask_rate, token_cap, ratios, seed, orders,
/// representation, workers, extensions.
PipelineConfig resolve_config(const nlohmann::json& file, const EnvLookup& env, const nlohmann::json& flags);

nlohmann::json load_config_file(const std::string& path);

// Workdir layout.
std::string manifest_path(const PipelineConfig& cfg);
std::string workflows_path(const PipelineConfig& cfg);
std::string general_path(const PipelineConfig& cfg);
std::string instances_path(const PipelineConfig& cfg, Mode mode, Representation repr);
std::string split_instances_path(const PipelineConfig& cfg, Mode mode, Representation repr, Partition part);
std::string model_path(const PipelineConfig& cfg, Representation repr);

struct IngestSummary {
    std::size_t workflows = 0;
    std::size_t general = 0;
    std::size_t unparseable = 0;
};

/// Walks `corpus_root` (one repository per immediate subdirectory). Files under
/// `.github/workflows/` are workflows, other .yml/.yaml files are general YAML.
/// Writes manifest.json, workflows.jsonl and general.jsonl into the workdir.
IngestSummary cmd_ingest(const PipelineConfig& cfg);

/// Abstracts every ingested workflow; writes abstracted.jsonl and abstraction_report.json.
CoverageReport cmd_abstract(const PipelineConfig& cfg);

struct BuildSummary {
    std::size_t workflows = 0;
    std::size_t duplicate_workflows = 0;
    std::size_t instances_per_mode = 0;  // kept, per mode and representation
    std::size_t dropped = 0;
    std::size_t pretrain = 0;
};

BuildSummary cmd_build_dataset(const PipelineConfig& cfg);

SplitAssignment cmd_split(const PipelineConfig& cfg);

struct TrainSummary {
    Representation repr;
    OrderSelection selection;
    std::string model_path;
};

std::vector<TrainSummary> cmd_train_ngram(const PipelineConfig& cfg);

struct SuggestRequest {
    std::string model_path;
    std::string workflow_file;
    std::optional<std::string> job;   // id or 1-based index; default last job
    std::optional<std::size_t> step;  // 1-based position to predict; default after the last step
    Representation repr = Representation::Raw;
    std::string extensions;
};

/// Canonical NS input for a step about to be written at (job, step), 0-based; `step`
/// may equal the job's step count.
std::string ns_input_at(const WorkflowDoc& doc, std::size_t job, std::size_t step);

Completion cmd_suggest(const SuggestRequest& req);

/// Batch completion of an instance file into PredictionRecord JSONL.
std::size_t cmd_predict(const std::string& model_file, const std::string& instances_file,
                        const std::string& out_file, std::size_t workers);

struct EvaluationResult {
    MetricReport metrics;
    ConfidenceBucketReport buckets;
};

/// Requires the prediction ids to equal the instance ids; otherwise IdMismatch.
/// Writes report.json and per_instance.csv into `out_dir`.
EvaluationResult cmd_evaluate(const std::string& predictions_file, const std::string& instances_file,
                              const std::string& out_dir, bool strict = false);

ConfidenceBucketReport cmd_buckets(const std::string& predictions_file, const std::string& instances_file,
                                   const std::string& out_file, bool strict = false);

struct PerInstanceRow {
    std::string id;
    bool correct = false;
    double bleu4 = 0.0;
    double rouge_l_f = 0.0;
    double confidence = 0.0;
};

std::vector<PerInstanceRow> read_per_instance_csv(const std::string& path);

struct Comparison {
    std::string label;
    std::string a_csv;
    std::string b_csv;
};

/// McNemar on correctness and Wilcoxon + Cliff's delta on BLEU-4 and ROUGE-L F for
/// every comparison; Holm adjustment within each test family.
nlohmann::ordered_json cmd_compare_stats(const std::vector<Comparison>& comparisons, const std::string& out_file,
                                         DeltaVariant variant = DeltaVariant::Unpaired);

}  // namespace wfc
