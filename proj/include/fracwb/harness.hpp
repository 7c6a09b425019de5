#pragma once

// Config-driven experiment runner behind the workbench CLI.

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracwb {

/// Exit codes of run(): audit failures are distinct from bad invocations.
enum ExitCode : int { kExitPass = 0, kExitUsage = 1, kExitAudit = 2 };

struct ExperimentConfig {
    std::string kind;       ///< apply | power | transform | assemble | solve | audit | study
    std::string experiment; ///< catalog entry; empty picks the kind's default
    nlohmann::json params = nlohmann::json::object();
    std::string out_dir;
    std::uint64_t seed = 1;
    double tol = 0.0;       ///< 0 keeps the experiment default
    std::string base_dir;   ///< relative paths in params resolve against this

    /// Reads {"kind", "experiment", "params", "seed", "tol", "out"}.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;
    /// Kind known, tolerance non-negative, every "*_path" parameter exists.
    void validate() const;
};

struct CatalogEntry {
    std::string name;
    std::string kind;
    std::string op;     ///< library operation exercised
    std::string anchor; ///< mathematical statement checked
    std::string description;
};

const std::vector<CatalogEntry>& experiment_catalog();
nlohmann::json catalog_to_json(const std::vector<CatalogEntry>& c);
std::vector<CatalogEntry> catalog_from_json(const nlohmann::json& j);
const CatalogEntry& find_experiment(const std::string& kind, const std::string& name);

struct RunResult {
    int exit_code = kExitPass;
    nlohmann::json report;
    nlohmann::json manifest;
    std::string csv; ///< contents of result.csv
};

/// Runs one experiment. Artifacts go to cfg.out_dir when it is non-empty.
/// Usage problems throw std::invalid_argument.
RunResult run(const ExperimentConfig& cfg);

std::uint64_t fnv1a(const std::string& bytes);

} // namespace fracwb
