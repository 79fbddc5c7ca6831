#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiment.hpp"

using namespace rwdre;
using namespace rwdre::cli;
namespace fs = std::filesystem;

namespace {

Json minimal() {
    return Json::parse(R"({
        "schema_version": 1,
        "seed": 7,
        "replicas": 20,
        "horizon": 20,
        "env": {"c0": 1, "c1": 1},
        "model": {"kind": "infty_zero"}
    })");
}

std::string error_of(const Json& doc, const Overrides& overrides = {}) {
    try {
        parse_config(doc, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rwdre_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("unknown keys are rejected with their path") {
    auto doc = minimal();
    doc["env"]["lamda0"] = 0.5;
    CHECK(error_of(doc).find("env.lamda0") != std::string::npos);

    doc = minimal();
    doc["colour"] = "blue";
    CHECK(error_of(doc).find("colour") != std::string::npos);
}

TEST_CASE("invalid values are rejected") {
    auto doc = minimal();
    doc["replicas"] = 0;
    CHECK(error_of(doc).find("replicas") != std::string::npos);
    doc["replicas"] = -3;
    CHECK(error_of(doc).find("replicas") != std::string::npos);

    Overrides zero;
    zero.replicas = 0;
    CHECK_FALSE(error_of(minimal(), zero).empty());

    doc = minimal();
    doc.erase("seed");
    CHECK(error_of(doc).find("seed") != std::string::npos);

    doc = minimal();
    doc["schema_version"] = 2;
    CHECK(error_of(doc).find("schema_version") != std::string::npos);

    doc = minimal();
    doc["env"]["c0"] = -1;
    CHECK(error_of(doc).find("env.c0") != std::string::npos);

    doc = minimal();
    doc["horizon"] = "long";
    CHECK(error_of(doc).find("horizon") != std::string::npos);
}

TEST_CASE("rate tables as arrays or complete objects") {
    auto doc = minimal();
    doc["env"] = Json::parse(R"({"c0": 1, "c1": 2, "lambda0": 0.5, "range": 1,
        "p0_table": [1, 0.5, 1, 0.5, 0.5, 0, 0.5, 0]})");
    const auto from_array = parse_config(doc);
    CHECK(from_array.setup.env.p0[5] == 0.0);
    CHECK(from_array.setup.env.p1 == std::vector<double>(8, 0.0));

    doc["env"]["p0_table"] = Json::parse(R"({"0": 1, "1": 0.5, "2": 1, "3": 0.5, "4": 0.5, "5": 0, "6": 0.5, "7": 0})");
    CHECK(parse_config(doc).setup.env.p0 == from_array.setup.env.p0);

    doc["env"]["p0_table"].erase("6");
    CHECK(error_of(doc).find("env.p0_table") != std::string::npos);

    doc["env"].erase("p0_table");
    CHECK(error_of(doc).find("p0_table") != std::string::npos);
}

TEST_CASE("config hash ignores threads and outputs") {
    auto a = minimal();
    auto b = minimal();
    b["threads"] = 8;
    b["outputs"] = Json::parse(R"({"dir": "elsewhere"})");
    CHECK(config_hash(a) == config_hash(b));
    b["seed"] = 8;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
}

TEST_CASE("same config and seed give byte-identical summaries") {
    auto doc = minimal();
    doc["method"] = "both";
    Overrides first;
    first.out = scratch_dir("a").string();
    first.threads = 1;
    Overrides second;
    second.out = scratch_dir("b").string();
    second.threads = 3;
    const auto ra = run_experiment("estimate", parse_config(doc, first));
    const auto rb = run_experiment("estimate", parse_config(doc, second));
    CHECK(ra.summary_text == rb.summary_text);
    CHECK(ra.summary_hash == rb.summary_hash);
    CHECK(read_file(fs::path(*first.out) / "summary.json") == read_file(fs::path(*second.out) / "summary.json"));
    CHECK(read_file(fs::path(*first.out) / "replicas.csv") == read_file(fs::path(*second.out) / "replicas.csv"));
}

TEST_CASE("shipped symmetric config reports a zero-speed verdict") {
    Overrides o;
    o.replicas = 300;
    o.out = scratch_dir("sym").string();
    const auto config = load_config(std::string(RWDRE_SOURCE_DIR) + "/configs/symmetric-zero-speed.json", o);
    const auto result = run_experiment("estimate", config);
    const auto& direct = result.summary["estimates"]["direct"];
    CHECK(direct.contains("w_hat"));
    CHECK(direct.contains("stderr"));
    CHECK(direct["speed_bound"]["kind"] == "zero");
    CHECK(direct["speed_bound"]["pass"] == true);
    CHECK(result.exit_code == kPass);
}

TEST_CASE("replay reproduces the recorded summary") {
    const auto out = scratch_dir("replay");
    Overrides o;
    o.out = out.string();
    auto doc = minimal();
    doc["mixing"] = Json::parse(R"({"L_grid": [1, 2], "duration": 4})");
    doc["replicas"] = 50;
    run_experiment("mixing", parse_config(doc, o));
    CHECK(fs::exists(out / "mixing.csv"));
    CHECK(replay((out / "manifest.json").string(), (out / "again").string()) == kPass);

    auto manifest = Json::parse(read_file(out / "manifest.json"));
    manifest["summary_hash"] = "0000000000000000";
    std::ofstream(out / "manifest.json") << manifest.dump(2);
    CHECK(replay((out / "manifest.json").string(), (out / "again").string()) == kAcceptanceFailure);
}

TEST_CASE("simulate writes the path of the chosen replica") {
    const auto out = scratch_dir("simulate");
    Overrides o;
    o.out = out.string();
    RunOptions options;
    options.replica = 3;
    const auto result = run_experiment("simulate", parse_config(minimal(), o), options);
    CHECK(result.exit_code == kPass);
    CHECK(fs::exists(out / "path.csv"));
    CHECK(read_file(out / "path.csv").rfind("jump_time,position", 0) == 0);
}
