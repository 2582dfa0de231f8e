#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "test_util.hpp"
#include "wfc/pipeline.hpp"

using namespace wfc;
namespace fs = std::filesystem;
using json = nlohmann::json;
using wfc::test::TempDir;

namespace {

void put(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream(path) << text;
}

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars](std::string_view name) -> std::optional<std::string> {
        auto it = vars.find(std::string(name));
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

PipelineConfig config_for(const fs::path& corpus, const fs::path& work) {
    json flags = {{"corpus_root", corpus.string()}, {"workdir", work.string()}, {"workers", 2}};
    return resolve_config(json::object(), env_of({}), flags);
}

std::string checkout_workflow(int i) {
    return "name: ci" + std::to_string(i) +
           "\non: [push]\njobs:\n  build:\n    runs-on: ubuntu-latest\n    steps:\n"
           "      - uses: actions/checkout@v2\n      - run: make test" +
           std::to_string(i) + "\n";
}

}  // namespace

TEST_CASE("config precedence: defaults < file < env < flags") {
    auto defaults = resolve_config(json::object(), env_of({}), json::object());
    CHECK(defaults.mask_rate == 0.15);
    CHECK(defaults.token_cap == 1024);
    CHECK(defaults.orders == std::vector<std::size_t>{3, 5, 7});
    CHECK(defaults.ratios == kDefaultRatios);

    json file = {{"seed", 1}, {"token_cap", 100}, {"mask_rate", 0.2}, {"workdir", "from-file"}};
    auto env = env_of({{"WFC_SEED", "2"}, {"WFC_TOKEN_CAP", "200"}, {"WFC_ORDERS", "2,4"}});
    json flags = {{"seed", 3}};
    auto cfg = resolve_config(file, env, flags);
    CHECK(cfg.seed == 3);
    CHECK(cfg.token_cap == 200);
    CHECK(cfg.mask_rate == 0.2);
    CHECK(cfg.workdir == "from-file");
    CHECK(cfg.orders == std::vector<std::size_t>{2, 4});
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(resolve_config({{"ratios", {0.5, 0.1, 0.1}}}, env_of({}), json::object()), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"mask_rate", 1.5}}, env_of({}), json::object()), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"orders", {1}}}, env_of({}), json::object()), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"bogus", 1}}, env_of({}), json::object()), ConfigError);
    CHECK_THROWS_AS(resolve_config(json::object(), env_of({{"WFC_SEED", "abc"}}), json::object()), ConfigError);
    TempDir dir("cfg");
    put(dir.path() / "c.json", R"({"seed": 9, "representation": "raw"})");
    auto cfg = resolve_config(load_config_file((dir.path() / "c.json").string()), env_of({}), json::object());
    CHECK(cfg.seed == 9);
    CHECK(cfg.representations() == std::vector<Representation>{Representation::Raw});
    put(dir.path() / "bad.json", "{");
    CHECK_THROWS_AS(load_config_file((dir.path() / "bad.json").string()), ConfigError);
}

TEST_CASE("ingest counts workflows and general YAML") {
    TempDir dir("ingest");
    auto corpus = dir.path() / "corpus";
    put(corpus / "r1/.github/workflows/a.yml", checkout_workflow(1));
    put(corpus / "r1/.github/workflows/b.yaml", checkout_workflow(2));
    put(corpus / "r1/.travis.yml", "language: c\n");
    put(corpus / "r1/docker-compose.yml", "version: '3'\n");
    put(corpus / "r1/conf/app.yaml", "a: 1\n");
    put(corpus / "r1/README.md", "# readme\n");
    put(corpus / "r1/.git/config.yml", "ignored: true\n");
    auto summary = cmd_ingest(config_for(corpus, dir.path() / "work"));
    CHECK(summary.workflows == 2);
    CHECK(summary.general == 3);
    CHECK(summary.unparseable == 0);
    auto manifest = json::parse(read_file((dir.path() / "work/manifest.json").string()));
    CHECK(manifest["workflows"] == 2);
    CHECK(manifest["general"] == 3);
    CHECK(read_jsonl((dir.path() / "work/workflows.jsonl").string()).size() == 2);
}

TEST_CASE("ingest of an empty root and a missing root") {
    TempDir dir("empty");
    fs::create_directories(dir.path() / "corpus");
    auto summary = cmd_ingest(config_for(dir.path() / "corpus", dir.path() / "work"));
    CHECK(summary.workflows == 0);
    CHECK(summary.general == 0);
    CHECK(fs::exists(dir.path() / "work/manifest.json"));
    CHECK_THROWS_AS(cmd_ingest(config_for(dir.path() / "nope", dir.path() / "work")), MissingRoot);
}

TEST_CASE("ingest agrees with an independent walk of the bundled corpus") {
    TempDir dir("walk");
    fs::path corpus = std::string(WFC_DATA_DIR) + "/mini-corpus";
    auto summary = cmd_ingest(config_for(corpus, dir.path()));
    std::size_t workflows = 0, general = 0;
    for (const auto& e : fs::recursive_directory_iterator(corpus)) {
        if (!e.is_regular_file()) continue;
        auto s = e.path().generic_string();
        if (!(s.ends_with(".yml") || s.ends_with(".yaml"))) continue;
        (s.find("/.github/workflows/") != std::string::npos ? workflows : general) += 1;
    }
    CHECK(summary.workflows == workflows);
    CHECK(summary.general == general);
    CHECK(summary.unparseable == 1);
}

TEST_CASE("suggest proposes checkout at the start of a job") {
    TempDir dir("suggest");
    auto corpus = dir.path() / "corpus";
    for (int i = 0; i < 6; ++i)
        put(corpus / ("r" + std::to_string(i)) / ".github/workflows/ci.yml", checkout_workflow(i));
    auto cfg = config_for(corpus, dir.path() / "work");
    cmd_ingest(cfg);
    cmd_build_dataset(cfg);
    auto split = cmd_split(cfg);
    CHECK(split.partition_of.size() == 6);
    auto trained = cmd_train_ngram(cfg);
    REQUIRE(trained.size() == 2);

    put(dir.path() / "new.yml", "name: new\non: [push]\njobs:\n  build:\n    runs-on: ubuntu-latest\n    steps:\n"
                                "      - run: echo placeholder\n");
    SuggestRequest req;
    req.model_path = trained[0].model_path;
    req.workflow_file = (dir.path() / "new.yml").string();
    req.step = 1;
    auto c = cmd_suggest(req);
    CHECK(c.text == R"({"uses": "actions/checkout@v2"})");
    CHECK(c.stop == StopReason::Balanced);

    // Cursor after the last step still yields exactly one completion.
    req.step.reset();
    auto tail = cmd_suggest(req);
    CHECK(tail.confidence > 0.0);

    req.repr = Representation::Abstracted;
    req.model_path = trained[1].model_path;
    req.step = 1;
    CHECK(cmd_suggest(req).text == R"({"uses": "actions/checkout@<PLH>"})");

    put(dir.path() / "bad.yml", "jobs: [");
    req.workflow_file = (dir.path() / "bad.yml").string();
    CHECK_THROWS_AS(cmd_suggest(req), ParseError);
    req.workflow_file = (dir.path() / "new.yml").string();
    req.model_path = (dir.path() / "missing.json").string();
    CHECK_THROWS_AS(cmd_suggest(req), ModelMissing);
}

TEST_CASE("ns_input_at matches the instance builder") {
    auto doc = wfc::test::fixture_doc("two_jobs.yml");
    auto ns = build_ns_instances(doc, Representation::Raw);
    CHECK(ns_input_at(doc, 0, 0) == ns[0].input);
    CHECK(ns_input_at(doc, 0, 2) == ns[2].input);
    CHECK(ns_input_at(doc, 1, 1) == ns[4].input);
}

namespace {

struct EvalFixture {
    TempDir dir{"eval"};
    std::vector<Instance> instances;
    std::string instances_file;

    EvalFixture() {
        for (std::size_t i = 0; i < 10; ++i) {
            Instance inst;
            inst.input = "{\"steps\": [";
            inst.target = "{\"run\": \"make target" + std::to_string(i) + " all\"}";
            inst.provenance = {"r", "p", "j", i + 1};
            inst.id = instance_id(inst.mode, inst.repr, inst.provenance);
            instances.push_back(inst);
        }
        instances_file = (dir.path() / "inst.jsonl").string();
        write_instances(instances_file, instances);
    }

    std::string predictions(const std::vector<PredictionRecord>& recs) {
        auto path = (dir.path() / "pred.jsonl").string();
        write_predictions(path, recs);
        return path;
    }
};

}  // namespace

TEST_CASE("evaluate perfect predictions") {
    EvalFixture f;
    std::vector<PredictionRecord> recs;
    for (const auto& i : f.instances) recs.push_back({i.id, i.target, 0.95, "balanced"});
    auto r = cmd_evaluate(f.predictions(recs), f.instances_file, (f.dir.path() / "out").string());
    CHECK(r.metrics.correct_fraction == 1.0);
    CHECK(r.metrics.bleu4_corpus == doctest::Approx(1.0));
    CHECK(r.metrics.rouge_l_f == doctest::Approx(1.0));
    CHECK(r.buckets.buckets[9].correct == 10);
    CHECK(fs::exists(f.dir.path() / "out/report.json"));
    CHECK(fs::exists(f.dir.path() / "out/per_instance.csv"));
}

TEST_CASE("evaluate 10 instances with 4 matches") {
    EvalFixture f;
    std::vector<PredictionRecord> recs;
    for (std::size_t i = 0; i < 10; ++i) {
        std::string pred = i < 4 ? f.instances[i].target : "{\"run\": \"make other\"}";
        recs.push_back({f.instances[i].id, pred, 0.05 + 0.09 * static_cast<double>(i), "balanced"});
    }
    // Records in a different order from the instance file.
    std::reverse(recs.begin(), recs.end());
    auto out_dir = (f.dir.path() / "out").string();
    auto r = cmd_evaluate(f.predictions(recs), f.instances_file, out_dir);
    CHECK(r.metrics.correct_fraction == doctest::Approx(0.4));

    auto rows = read_per_instance_csv(out_dir + "/per_instance.csv");
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& inst = f.instances[i];
        std::string pred = i < 4 ? inst.target : "{\"run\": \"make other\"}";
        CHECK(rows[i].id == inst.id);
        CHECK(rows[i].correct == (i < 4));
        CHECK(rows[i].bleu4 == doctest::Approx(bleu4({{pred, inst.target}}).sentence[0]));
        CHECK(rows[i].rouge_l_f == doctest::Approx(rouge_l(pred, inst.target).f));
    }

    auto buckets = cmd_buckets(f.predictions(recs), f.instances_file, (f.dir.path() / "b.json").string());
    std::size_t total = 0;
    for (const auto& b : buckets.buckets) total += b.total;
    CHECK(total == 10);
}

TEST_CASE("evaluate rejects id mismatches") {
    EvalFixture f;
    CHECK_THROWS_AS(cmd_evaluate(f.predictions({}), f.instances_file, (f.dir.path() / "o").string()), IdMismatch);
    std::vector<PredictionRecord> recs;
    for (const auto& i : f.instances) recs.push_back({i.id, i.target, 0.5, "balanced"});
    auto missing = recs;
    missing.pop_back();
    CHECK_THROWS_AS(cmd_evaluate(f.predictions(missing), f.instances_file, (f.dir.path() / "o").string()),
                    IdMismatch);
    auto extra = recs;
    extra.push_back({"ffff", "x", 0.5, "balanced"});
    CHECK_THROWS_AS(cmd_evaluate(f.predictions(extra), f.instances_file, (f.dir.path() / "o").string()), IdMismatch);
    auto dup = recs;
    dup.back().id = dup.front().id;
    CHECK_THROWS_AS(cmd_evaluate(f.predictions(dup), f.instances_file, (f.dir.path() / "o").string()), IdMismatch);
}

TEST_CASE("compare-stats produces a Holm-adjusted table") {
    EvalFixture f;
    std::vector<PredictionRecord> good, bad;
    for (std::size_t i = 0; i < 10; ++i) {
        good.push_back({f.instances[i].id, i < 9 ? f.instances[i].target : "{}", 0.9, "balanced"});
        bad.push_back({f.instances[i].id, i < 2 ? f.instances[i].target : "{\"run\": \"x\"}", 0.2, "balanced"});
    }
    auto a_dir = (f.dir.path() / "a").string();
    auto b_dir = (f.dir.path() / "b").string();
    cmd_evaluate(f.predictions(good), f.instances_file, a_dir);
    cmd_evaluate(f.predictions(bad), f.instances_file, b_dir);
    auto out = cmd_compare_stats({{"ns-raw", a_dir + "/per_instance.csv", b_dir + "/per_instance.csv"},
                                  {"ns-raw-again", a_dir + "/per_instance.csv", b_dir + "/per_instance.csv"}},
                                 (f.dir.path() / "stats.json").string());
    const auto& rows = out["comparisons"];
    REQUIRE(rows.size() == 6);
    CHECK(rows[0]["metric"] == "correct");
    CHECK(rows[0]["test"] == "mcnemar");
    CHECK(rows[0]["p_value_raw"].get<double>() == doctest::Approx(mcnemar(7, 0).p_value_raw));
    CHECK(rows[0]["p_value_adjusted"].get<double>() >= rows[0]["p_value_raw"].get<double>());
    CHECK(rows[1]["test"] == "wilcoxon");
    CHECK(rows[1].at("magnitude") == "large");
    CHECK(fs::exists(f.dir.path() / "stats.json"));
}

TEST_CASE("pipeline outputs are byte-identical across runs") {
    TempDir dir("determinism");
    fs::path corpus = std::string(WFC_DATA_DIR) + "/mini-corpus";
    auto run = [&](const std::string& name) {
        auto cfg = config_for(corpus, dir.path() / name);
        cfg.workers = name == "one" ? 1 : 4;
        cmd_ingest(cfg);
        cmd_abstract(cfg);
        cmd_build_dataset(cfg);
        cmd_split(cfg);
        cmd_train_ngram(cfg);
    };
    run("one");
    run("two");
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path() / "one")) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), dir.path() / "one");
        auto other = dir.path() / "two" / rel;
        REQUIRE(fs::exists(other));
        auto a = read_file(e.path().string());
        auto b = read_file(other.string());
        // Paths of the workdir itself are allowed to differ.
        auto strip = [&](std::string s, const std::string& name) {
            auto needle = (dir.path() / name).string();
            for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle))
                s.replace(pos, needle.size(), "<work>");
            return s;
        };
        CHECK_MESSAGE(strip(a, "one") == strip(b, "two"), rel.string());
        ++compared;
    }
    CHECK(compared > 10);
}
