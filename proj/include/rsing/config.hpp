#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rsing/errors.hpp"
#include "rsing/vector_classes.hpp"

namespace rsing {

using json = nlohmann::json;

enum class ExperimentKind {
    Singularity,
    SminTail,
    Events,
    ClassifyCoverage,
    RudProfile,
    KernelProfile,
    LatticeUd,
    Concentration,
    DistanceKernel
};

const char* to_string(ExperimentKind k) noexcept;
ExperimentKind parse_experiment(const std::string& name);
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Singularity;
    std::filesystem::path law_path;  // resolved; empty for experiments without a law
    std::string law_ref;             // as written in the config
    std::uint64_t seed = 0;
    std::uint64_t samples = 1000;
    std::uint64_t task_size = 1000;
    unsigned workers = 1;
    std::filesystem::path out_dir;
    bool resume = false;
    bool timing = false;

    Calibration calibration;
    double K1 = 10.0;
    double K2 = 8.0;

    // Experiment-specific parameters ("params" table).
    json params = json::object();

    // Reads params[key], falling back to def; the value used is recorded for the echo.
    template <class T>
    T get(const std::string& key, const T& def) const {
        T value = def;
        if (params.contains(key)) {
            try {
                value = params.at(key).get<T>();
            } catch (const nlohmann::json::exception&) {
                fail(ErrorCode::ConfigError, "parameter '" + key + "' has the wrong type");
            }
        }
        used_[key] = value;
        return value;
    }

    // Everything that determines the result: excludes workers, output paths and timing.
    json echo() const;
    // FNV-1a 64 of echo().dump(), as 16 hex digits.
    std::string hash() const;

private:
    mutable json used_ = json::object();
};

// Parses a YAML config. Relative law paths resolve against the config file's directory.
// Throws ConfigError on malformed input or unknown keys.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir = {});

// Applies "key=value" to params; the value is parsed as YAML (so numbers, lists and strings work).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace rsing
