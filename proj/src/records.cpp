#include "wfc/records.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wfc/error.hpp"

namespace wfc {

namespace fs = std::filesystem;

ojson to_json(const Instance& inst) {
    ojson j;
    j["id"] = inst.id;
    j["mode"] = to_string(inst.mode);
    j["repr"] = to_string(inst.repr);
    j["input"] = inst.input;
    j["target"] = inst.target;
    j["repo"] = inst.provenance.repo_id;
    j["path"] = inst.provenance.path;
    j["job"] = inst.provenance.job_id;
    j["step"] = inst.provenance.step;
    return j;
}

Instance instance_from_json(const nlohmann::json& j) {
    try {
        Instance inst;
        inst.id = j.at("id").get<std::string>();
        inst.mode = parse_mode(j.at("mode").get<std::string>());
        inst.repr = parse_representation(j.at("repr").get<std::string>());
        inst.input = j.at("input").get<std::string>();
        inst.target = j.at("target").get<std::string>();
        inst.provenance.repo_id = j.value("repo", "");
        inst.provenance.path = j.value("path", "");
        inst.provenance.job_id = j.value("job", "");
        inst.provenance.step = j.value("step", std::size_t{0});
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad instance record: ") + e.what());
    }
}

ojson to_json(const PredictionRecord& rec) {
    ojson j;
    j["id"] = rec.id;
    j["prediction"] = rec.prediction;
    j["confidence"] = rec.confidence;
    j["stop_reason"] = rec.stop_reason;
    return j;
}

PredictionRecord prediction_from_json(const nlohmann::json& j) {
    try {
        PredictionRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.prediction = j.at("prediction").get<std::string>();
        rec.confidence = j.at("confidence").get<double>();
        if (auto it = j.find("stop_reason"); it != j.end() && it->is_string()) rec.stop_reason = it->get<std::string>();
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad prediction record: ") + e.what());
    }
}

ojson to_json(const MaskedInstance& inst) {
    ojson j;
    j["input"] = inst.input;
    j["target"] = inst.target;
    j["source"] = inst.source_path;
    j["masked"] = inst.masked;
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path);
        out << contents;
        if (!out) throw Error("write failed: " + path);
    }
    fs::rename(tmp, target);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::vector<nlohmann::json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::string& path, const std::vector<ojson>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<Instance> read_instances(const std::string& path) {
    std::vector<Instance> out;
    for (const auto& j : read_jsonl(path)) out.push_back(instance_from_json(j));
    return out;
}

void write_instances(const std::string& path, const std::vector<Instance>& instances) {
    std::vector<ojson> rows;
    rows.reserve(instances.size());
    for (const auto& i : instances) rows.push_back(to_json(i));
    write_jsonl(path, rows);
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::vector<PredictionRecord> out;
    for (const auto& j : read_jsonl(path)) out.push_back(prediction_from_json(j));
    return out;
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
    std::vector<ojson> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(to_json(r));
    write_jsonl(path, rows);
}

}  // namespace wfc
