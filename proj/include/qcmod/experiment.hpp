#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "qcmod/common.hpp"

namespace qcmod {

using Json = nlohmann::json;

/// One entry of a batch: the experiment selector plus its parameters, kept as
/// validated JSON so configs round-trip unchanged.
struct ExperimentSpec {
    std::string name;
    std::string kind;  // solve | pnorm | twb | module | reduced-module | derivative
                       // | claim2 | claim3 | continuity | symmetry
    Json params;
};

class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_json(const Json& j);

    const std::vector<ExperimentSpec>& experiments() const { return experiments_; }
    int schema_version() const { return schema_version_; }
    Json to_json() const;

private:
    int schema_version_ = 1;
    std::vector<ExperimentSpec> experiments_;
};

struct ExperimentResult {
    std::string name;
    std::string kind;
    bool pass = false;
    double wall_ms = 0.0;
    Json data;                           // per-operation results with tolerances
    std::vector<std::string> failures;   // diagnostics for contract violations
    std::vector<std::string> artifacts;  // files written under the output directory
};

struct ExperimentReport {
    Json config_echo;
    std::string tool_version = kVersion;
    std::vector<ExperimentResult> results;
    double wall_ms = 0.0;
    std::vector<std::string> notes;  // e.g. sweeps that produced no plot file

    bool all_pass() const;
    Json to_json() const;
};

struct RunOptions {
    std::string out_dir = ".";
    int jobs = 1;
    unsigned long long seed = 0;  // recorded; reserved for sampled experiments
    bool verbose = false;
};

/// Run every experiment of the batch (concurrently up to `jobs`), assembling
/// the report in config order; per-experiment failures do not abort the batch.
/// All artifact files are written atomically (temp + rename).
ExperimentReport run(const ExperimentConfig& config, const RunOptions& opts);

/// Write the plot-ready CSV files of every sweep the report contains; returns
/// the paths written. Sections without data are noted in the report, not files.
std::vector<std::string> emit_plot_data(ExperimentReport& report, const std::string& out_dir);

/// Atomic text-file write (temp + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace qcmod
