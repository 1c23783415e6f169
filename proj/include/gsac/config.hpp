#pragma once

#include "gsac/baselines.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gsac {

struct ExperimentConfig {
    // [env]
    std::string env_kind = "wireless";
    int grid_size = 3;
    std::vector<double> omega_grid{0.2, 0.5, 0.8};
    std::vector<double> source_omegas{0.2, 0.5, 0.8};
    double target_omega = 0.65;
    int deadline = 2;
    int queue_cap = 5;
    /// Seed for environment constants shared by every domain (wireless success probabilities).
    uint64_t env_seed = 1;

    // [algo]
    Method method = Method::GSAC;
    int kappa = 1;
    int K = 50000;
    int T = 10;
    int T_e = 20;
    int T_a = 20;
    bool critic_decaying = false;
    double alpha = 0.1;
    double h = 1.0;
    double t0 = 1.0;
    bool actor_decaying = false;
    double eta = 0.01;
    double tau = 0.5;
    double gamma = 0.95;
    double theta_max = 10.0;
    double lambda = 0.02;
    bool acr_free = false;
    bool warm_start = false;
    int eval_episodes = 100;
    int fine_tune_budget = -1;

    // [run]
    std::vector<uint64_t> seeds{0};
    std::string out_dir = "runs";
    bool log_wall_time = false;
};

/// Default outer iteration count for a wireless grid size.
int default_iterations(int grid_size);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical INI text; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& cfg);
/// Throws ConfigError naming the first invalid field.
void validate_config(const ExperimentConfig& cfg);
/// CRC-32 of the canonical text, as 8 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

TrainingSettings training_settings(const ExperimentConfig& cfg);

} // namespace gsac
