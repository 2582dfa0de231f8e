#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wfc/dataset.hpp"

namespace wfc {

using ojson = nlohmann::ordered_json;

/// One model output, shared by the n-gram engine and any external model.
struct PredictionRecord {
    std::string id;
    std::string prediction;
    double confidence = 0.0;
    std::string stop_reason;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

ojson to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

ojson to_json(const PredictionRecord& rec);
PredictionRecord prediction_from_json(const nlohmann::json& j);

ojson to_json(const MaskedInstance& inst);

std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<ojson>& rows);

std::vector<Instance> read_instances(const std::string& path);
void write_instances(const std::string& path, const std::vector<Instance>& instances);

std::vector<PredictionRecord> read_predictions(const std::string& path);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

std::string read_file(const std::string& path);
/// Writes through a temporary sibling and renames it into place.
void write_file(const std::string& path, const std::string& contents);

}  // namespace wfc
