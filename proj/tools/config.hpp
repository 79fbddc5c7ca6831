#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwdre/analysis.hpp"

namespace rwdre::cli {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct VerifyOptions {
    std::vector<std::string> suites;  // empty: all that apply to the config
    std::size_t replicas = 1000;
    double horizon = 20.0;
    Site half_width = 50;
    double depth = 2.0;
    double lipschitz_delta = 0.5;
    std::vector<double> moment_times{10, 20, 40, 80};
    std::vector<double> moment_powers{1, 2, 4};
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t replicas = 0;
    double horizon = 0.0;
    unsigned threads = 1;
    ReplicaSetup setup;
    std::vector<SpeedMethod> methods{SpeedMethod::direct};
    RegenerationParams regeneration{1.0, 0.0, 0.0, ConeSpec{0.0, 0.0}};
    MixingParams mixing;
    VerifyOptions verify;
    double overrun_threshold = 0.05;
    std::string out_dir = "out";
    bool write_paths = true;

    // The configuration as given, with command-line overrides folded in.
    Json document;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::optional<double> horizon;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

// Parses and validates a configuration document. Unknown keys, wrong types and
// out-of-range values raise ConfigError carrying the JSON path of the field.
ExperimentConfig parse_config(Json document, const Overrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const Overrides& overrides = {});

RateSpec parse_rate_spec(const Json& j, const std::string& path);
ModelSpec parse_model(const Json& j, const std::string& path);

// Names accepted in verify.suites.
const std::vector<std::string>& verify_suites();

// Hash of the document without the fields that cannot change results
// (thread count, output settings).
std::string config_hash(const Json& document);

// FNV-1a over the compact serialisation.
std::uint64_t fnv1a(const std::string& bytes) noexcept;
std::string hex64(std::uint64_t value);

}  // namespace rwdre::cli
