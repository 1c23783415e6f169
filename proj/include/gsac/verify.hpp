#pragma once

#include "gsac/learner.hpp"

#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace gsac {

// ---------------------------------------------------------------- fixtures

/// 6-agent directed ring, one binary component and two actions per agent.
/// Dense: s_i' <- (s_{i-1}, a_i), r_i <- (s_i, a_i).
/// Sparse: the chain is cut at agent 3 and only even agents have reward parents.
std::unique_ptr<SyntheticEnv> ring_fixture(bool reward_sparse, int n = 6);
/// Two agents with a reward-relevant component 0 and an irrelevant self-driven component 1.
std::unique_ptr<SyntheticEnv> compact_fixture();
/// Two coupled binary agents on a line.
std::unique_ptr<SyntheticEnv> chain_fixture();
/// Single agent, two states, two actions.
std::unique_ptr<SyntheticEnv> tiny_mdp_fixture();

/// Localized random policy: agent i's logits depend on the 1-hop states only, drawn from the seed.
JointPolicyFn random_local_policy(const Environment& env, uint64_t seed, double scale = 1.0);
/// pi evaluated at s with every component outside keep[i] replaced by the placeholder.
JointPolicyFn projected_policy(JointPolicyFn pi, std::vector<std::vector<Component>> keep);

// ---------------------------------------------------------------- checks

struct CheckResult {
    std::string name;
    bool passed = false;
    std::vector<double> measured;
    std::vector<double> bound;
    std::string detail;
};

struct DecayOptions {
    double gamma = 0.95;
    /// Discount used inside the oracle; differs from gamma only in mutation tests.
    double oracle_gamma = 0.95;
    int max_kappa = 3;
    uint64_t policy_seed = 11;
};

CheckResult check_exponential_decay(const DecayOptions& opts = {});
CheckResult check_acr_bounds(double gamma = 0.95, uint64_t policy_seed = 11);
CheckResult check_policy_acr_exactness(uint64_t policy_seed = 5);
CheckResult check_softmax_gradient();
CheckResult check_acr_dimensions();
CheckResult check_critic_convergence(int steps = 50000);
CheckResult check_gradient_fidelity(int episodes = 50000);
CheckResult check_causal_recovery(int seeds = 20);
CheckResult check_domain_estimation(int seeds = 50);

enum class VerifyLevel { Fast, Full };

std::vector<CheckResult> verify_suite(VerifyLevel level);
void print_report(std::ostream& os, const std::vector<CheckResult>& report);
bool report_passed(const std::vector<CheckResult>& report);

} // namespace gsac
