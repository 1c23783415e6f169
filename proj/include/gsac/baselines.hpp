#pragma once

#include "gsac/learner.hpp"

#include <string>
#include <vector>

namespace gsac {

enum class Method { GSAC, MTL, FT, LFS };

std::string method_name(Method m);
/// Accepts GSAC, SAC-MTL, SAC-FT, SAC-LFS (case-insensitive, prefix optional).
Method parse_method(const std::string& name);

// Source and target domains shared by GSAC and the baselines.
struct FewShotProblem {
    std::vector<const Environment*> sources;
    /// Scalar label of each source domain, used for nearest-source assignment.
    std::vector<double> source_omegas;
    const Environment* target = nullptr;
    double target_omega = 0.0;
    int kappa = 1;
    /// Grid passed to the table layouts.
    OmegaGrid grid;
    int eval_episodes = 30;
};

struct BaselineSpec {
    Method variant = Method::LFS;
    TrainingSettings settings;
    /// SAC-FT update budget in the target; negative means the evaluation window.
    int fine_tune_budget = -1;
};

struct MethodRun {
    LearnerLayout layout;
    LocalizedPolicy policy;
    std::vector<IterationSummary> training;
    /// One entry per adaptation episode, k is 1-based.
    std::vector<IterationSummary> adaptation;
    /// Source index deployed by SAC-MTL, -1 otherwise.
    int deployed_source = -1;
};

/// Index of the source whose label is nearest to omega; ties go to the smaller label.
int nearest_source(const std::vector<double>& labels, double omega);

MethodRun run_sac_mtl(const FewShotProblem& problem, const TrainingSettings& settings, uint64_t seed);
MethodRun run_sac_ft(const FewShotProblem& problem, const TrainingSettings& settings, int fine_tune_budget,
                     uint64_t seed);
/// Trains in the target only; updates stop after settings.K episodes, so K=0 evaluates the uniform policy.
MethodRun run_sac_lfs(const FewShotProblem& problem, const TrainingSettings& settings, uint64_t seed);
MethodRun run_baseline(const BaselineSpec& spec, const FewShotProblem& problem, uint64_t seed);

/// Episode summaries for a list of evaluation returns.
std::vector<IterationSummary> episode_summaries(const std::vector<double>& returns);

} // namespace gsac
