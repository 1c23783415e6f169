#pragma once

#include "gsac/baselines.hpp"
#include "gsac/config.hpp"

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace gsac {

inline constexpr const char* kCodeVersion = "gsac 0.1.0";

struct Domains {
    std::vector<std::unique_ptr<Environment>> sources;
    std::unique_ptr<Environment> target;
};

Domains build_domains(const ExperimentConfig& cfg);
FewShotProblem few_shot_problem(const ExperimentConfig& cfg, const Domains& d);

// Phase 1 and 2 products of a GSAC run.
struct GsacArtifacts {
    RecoveryResult recovery;
    std::vector<DomainEstimate> source_estimates;
    AdaptationResult adaptation;
};

struct MethodOutcome {
    MethodRun run;
    /// Present for GSAC only.
    std::unique_ptr<GsacArtifacts> gsac;
    /// Phase name and elapsed milliseconds, in execution order.
    std::vector<std::pair<std::string, double>> phases;
};

/// Runs the configured method in memory for one seed.
MethodOutcome run_method(const ExperimentConfig& cfg, uint64_t seed);

struct MetricsRow {
    std::string method;
    std::string phase;
    int grid_size = 0;
    double omega_target = 0.0;
    uint64_t seed = 0;
    int k_or_episode = 0;
    int domain_index = 0;
    double return_discounted = 0.0;
    double critic_delta = 0.0;
    double grad_norm = 0.0;
    double wall_ms = 0.0;
};

const std::vector<std::string>& metrics_header();
std::vector<MetricsRow> metrics_rows(const ExperimentConfig& cfg, uint64_t seed, const MethodOutcome& out);
/// Numbers use 17 significant digits; non-finite values throw.
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

struct PhaseRecord {
    std::string name;
    double ms = 0.0;
};

struct RunManifest {
    std::string config_hash;
    uint64_t seed = 0;
    std::string method;
    std::string run_dir;
    std::vector<PhaseRecord> phases;
    std::map<std::string, std::string> artifacts;
    std::string code_version = kCodeVersion;
    bool ok = true;
    std::string error;
};

/// Name of the per-run subdirectory under cfg.out_dir.
std::string run_directory_name(const ExperimentConfig& cfg, uint64_t seed);

/// Executes one run and writes its artifacts; failures are recorded in the manifest, not thrown.
RunManifest run_experiment(const ExperimentConfig& cfg, uint64_t seed);
/// Runs every seed listed in the config.
std::vector<RunManifest> run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    std::string method;
    int grid_size = 0;
    double omega_target = 0.0;
    uint64_t seed = 0;
    double early_mean = 0.0;
    double final_mean = 0.0;
    bool ok = true;
};

inline constexpr int kEarlyWindow = 30;

/// Mean of adaptation episodes 1..30 and of the last 30 episodes.
SummaryRow summarize(const ExperimentConfig& cfg, uint64_t seed, const std::vector<MetricsRow>& rows);

/// Cartesian expansion over grid sizes, targets and methods (empty lists keep the base value).
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, const std::vector<int>& grids,
                                           const std::vector<double>& targets, const std::vector<Method>& methods);
/// Runs every (config, seed) pair in isolated directories and writes summary.csv under summary_dir.
std::vector<RunManifest> run_sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                   const std::string& summary_dir);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Human-readable ACR maps and table sizes for the config (ground-truth masks, no training).
void inspect(const ExperimentConfig& cfg, std::ostream& os);

} // namespace gsac
