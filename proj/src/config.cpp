#include "rsing/config.hpp"

#include <cstdio>
#include <set>

#include <yaml-cpp/yaml.h>

#include "rsing/errors.hpp"

namespace rsing {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kinds() {
    static const std::vector<std::pair<ExperimentKind, std::string>> k = {
        {ExperimentKind::Singularity, "singularity"},
        {ExperimentKind::SminTail, "smin_tail"},
        {ExperimentKind::Events, "events"},
        {ExperimentKind::ClassifyCoverage, "classify_coverage"},
        {ExperimentKind::RudProfile, "rud_profile"},
        {ExperimentKind::KernelProfile, "kernel_profile"},
        {ExperimentKind::LatticeUd, "lattice_ud"},
        {ExperimentKind::Concentration, "concentration"},
        {ExperimentKind::DistanceKernel, "distance_kernel"},
    };
    return k;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
        json out = json::array();
        for (const auto& item : node) out.push_back(yaml_to_json(item));
        return out;
    }
    case YAML::NodeType::Map: {
        json out = json::object();
        for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return out;
    }
    case YAML::NodeType::Scalar: break;
    }
    const std::string text = node.Scalar();
    if (node.Tag() == "!") return text;  // quoted
    if (text == "true" || text == "false") return text == "true";
    std::int64_t i = 0;
    if (YAML::convert<std::int64_t>::decode(node, i)) return i;
    double d = 0.0;
    if (YAML::convert<double>::decode(node, d)) return d;
    return text;
}

template <class T>
T field(const json& doc, const char* key, const T& def) {
    if (!doc.contains(key) || doc.at(key).is_null()) return def;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, std::string("config key '") + key + "' has the wrong type");
    }
}

}  // namespace

const char* to_string(ExperimentKind k) noexcept {
    for (const auto& [kind, name] : kinds())
        if (kind == k) return name.c_str();
    return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
    for (const auto& [kind, n] : kinds())
        if (n == name) return kind;
    fail(ErrorCode::ConfigError, "unknown experiment '" + name + "'");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& kv : kinds()) out.push_back(kv.second);
        return out;
    }();
    return names;
}

json ExperimentConfig::echo() const {
    json params_echo = params;
    for (const auto& [key, value] : used_.items()) params_echo[key] = value;
    return json{
        {"experiment", to_string(experiment)},
        {"law", law_ref},
        {"seed", seed},
        {"samples", samples},
        {"task_size", task_size},
        {"calibration",
         {{"r", calibration.r},
          {"delta", calibration.delta},
          {"rho", calibration.rho},
          {"C_tau", calibration.C_tau},
          {"C0", calibration.C0},
          {"C1_prime", calibration.C1_prime},
          {"C2_prime", calibration.C2_prime},
          {"K1", K1},
          {"K2", K2}}},
        {"params", params_echo},
    };
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(echo().dump()); }

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) fail(ErrorCode::ConfigError, "config must be a key-value table");
    static const std::set<std::string> known = {"experiment", "law",     "seed",        "samples", "task_size",
                                                "workers",    "output",  "calibration", "params"};
    for (const auto& [key, value] : doc.items())
        if (!known.count(key)) fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");

    ExperimentConfig cfg;
    if (!doc.contains("experiment")) fail(ErrorCode::ConfigError, "config needs an 'experiment' key");
    cfg.experiment = parse_experiment(field<std::string>(doc, "experiment", ""));
    cfg.law_ref = field<std::string>(doc, "law", "");
    if (!cfg.law_ref.empty()) {
        std::filesystem::path p(cfg.law_ref);
        cfg.law_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    cfg.seed = field<std::uint64_t>(doc, "seed", 0);
    cfg.samples = field<std::uint64_t>(doc, "samples", 1000);
    cfg.task_size = field<std::uint64_t>(doc, "task_size", 1000);
    cfg.workers = field<unsigned>(doc, "workers", 1);
    if (cfg.task_size == 0) fail(ErrorCode::ConfigError, "task_size must be positive");

    if (doc.contains("output")) {
        const auto& out = doc.at("output");
        if (out.is_string()) cfg.out_dir = out.get<std::string>();
        else cfg.out_dir = field<std::string>(out, "dir", "");
    }
    if (doc.contains("calibration")) {
        const auto& c = doc.at("calibration");
        static const std::set<std::string> cal_keys = {"r",        "delta",    "rho", "C_tau", "C0",
                                                       "C1_prime", "C2_prime", "K1",  "K2"};
        for (const auto& [key, value] : c.items())
            if (!cal_keys.count(key)) fail(ErrorCode::ConfigError, "unknown calibration key '" + key + "'");
        auto& cal = cfg.calibration;
        cal.r = field(c, "r", cal.r);
        cal.delta = field(c, "delta", cal.delta);
        cal.rho = field(c, "rho", cal.rho);
        cal.C_tau = field(c, "C_tau", cal.C_tau);
        cal.C0 = field(c, "C0", cal.C0);
        cal.C1_prime = field(c, "C1_prime", cal.C1_prime);
        cal.C2_prime = field(c, "C2_prime", cal.C2_prime);
        cfg.K1 = field(c, "K1", cfg.K1);
        cfg.K2 = field(c, "K2", cfg.K2);
    }
    if (doc.contains("params")) {
        if (!doc.at("params").is_object()) fail(ErrorCode::ConfigError, "'params' must be a table");
        cfg.params = doc.at("params");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::ConfigError, "config file not found: " + path.string());
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    return config_from_json(yaml_to_json(root), path.parent_path());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::ConfigError, "override must look like key=value");
    const std::string key = assignment.substr(0, eq);
    try {
        cfg.params[key] = yaml_to_json(YAML::Load(assignment.substr(eq + 1)));
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::ConfigError, "cannot parse override '" + assignment + "': " + e.what());
    }
}

}  // namespace rsing
