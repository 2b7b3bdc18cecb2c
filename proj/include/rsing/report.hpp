#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsing/config.hpp"

namespace rsing {

struct Estimate {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
};

struct TheoryValue {
    std::string name;
    double value = 0.0;
};

struct CensusRow {
    std::uint64_t sample_index = 0;
    std::string seed_path;
    int singular = -1;  // -1: not applicable
    std::string cause;
    std::optional<double> smin;
    std::string label;
    std::string findings;  // compact JSON, empty when nothing was found
};

json to_json(const CensusRow& row);
CensusRow census_row_from_json(const json& j);

struct ExperimentReport {
    std::string experiment;
    json config;
    std::string config_hash;
    std::vector<Estimate> estimates;
    std::vector<TheoryValue> theory;
    json counts = json::object();
    json details = json::object();
    std::vector<CensusRow> census;
    double runtime_s = 0.0;

    void estimate(const std::string& name, double value, double std_error) {
        estimates.push_back({name, value, std_error});
    }
    // Binomial proportion hits / total with its standard error.
    void proportion(const std::string& name, std::uint64_t hits, std::uint64_t total);
    void theory_value(const std::string& name, double value) { theory.push_back({name, value}); }

    const Estimate* find_estimate(const std::string& name) const;
    const TheoryValue* find_theory(const std::string& name) const;

    // report.json body; runtime_s only when with_runtime.
    json to_json(bool with_runtime = false) const;
};

double proportion_std_error(std::uint64_t hits, std::uint64_t total);

// Writes report.json and census.csv into dir (created if missing).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir, bool with_runtime = false);

void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace rsing
