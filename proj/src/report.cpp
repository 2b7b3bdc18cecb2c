#include "rsing/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "rsing/errors.hpp"

namespace rsing {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// JSON has no infinities; encode them as strings so reports stay valid.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

json to_json(const CensusRow& row) {
    json j = {{"i", row.sample_index}, {"p", row.seed_path}, {"s", row.singular}, {"c", row.cause},
              {"l", row.label},        {"f", row.findings}};
    if (row.smin) j["m"] = number(*row.smin);
    return j;
}

CensusRow census_row_from_json(const json& j) {
    CensusRow row;
    row.sample_index = j.at("i").get<std::uint64_t>();
    row.seed_path = j.at("p").get<std::string>();
    row.singular = j.at("s").get<int>();
    row.cause = j.at("c").get<std::string>();
    row.label = j.at("l").get<std::string>();
    row.findings = j.at("f").get<std::string>();
    if (j.contains("m")) {
        const auto& m = j.at("m");
        row.smin = m.is_number() ? m.get<double>() : std::stod(m.get<std::string>());
    }
    return row;
}

double proportion_std_error(std::uint64_t hits, std::uint64_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

void ExperimentReport::proportion(const std::string& name, std::uint64_t hits, std::uint64_t total) {
    const double value = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    estimate(name, value, proportion_std_error(hits, total));
}

const Estimate* ExperimentReport::find_estimate(const std::string& name) const {
    for (const auto& e : estimates)
        if (e.name == name) return &e;
    return nullptr;
}

const TheoryValue* ExperimentReport::find_theory(const std::string& name) const {
    for (const auto& t : theory)
        if (t.name == name) return &t;
    return nullptr;
}

json ExperimentReport::to_json(bool with_runtime) const {
    json est = json::array();
    for (const auto& e : estimates) est.push_back({{"name", e.name}, {"value", number(e.value)}, {"std_error", number(e.std_error)}});
    json th = json::array();
    for (const auto& t : theory) th.push_back({{"name", t.name}, {"value", number(t.value)}});
    json out = {{"experiment", experiment}, {"config", config}, {"config_hash", config_hash},
                {"estimates", est},         {"theory", th},     {"counts", counts},
                {"details", details}};
    if (with_runtime) out["runtime_s"] = runtime_s;
    return out;
}

void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows) {
    out << "sample_index,seed_path,singular,cause,smin,label,findings\n";
    for (const auto& r : rows) {
        out << r.sample_index << ',' << csv_field(r.seed_path) << ',';
        if (r.singular >= 0) out << r.singular;
        out << ',' << csv_field(r.cause) << ',';
        if (r.smin) out << format_double(*r.smin);
        out << ',' << csv_field(r.label) << ',' << csv_field(r.findings) << '\n';
    }
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir, bool with_runtime) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::ConfigError, "cannot create output directory " + dir.string() + ": " + ec.message());
    {
        std::ofstream out(dir / "report.json");
        if (!out) fail(ErrorCode::ConfigError, "cannot write " + (dir / "report.json").string());
        out << report.to_json(with_runtime).dump(2) << '\n';
    }
    std::ofstream csv(dir / "census.csv");
    if (!csv) fail(ErrorCode::ConfigError, "cannot write " + (dir / "census.csv").string());
    write_census_csv(csv, report.census);
}

}  // namespace rsing
