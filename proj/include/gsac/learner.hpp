#pragma once

#include "gsac/acr.hpp"
#include "gsac/causal.hpp"
#include "gsac/env.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace gsac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Conditioning { DomainFactor, SourceOneHot, None };

// Table layout of one agent's critic and policy.
struct AgentLayout {
    std::vector<Component> critic_state;
    std::vector<int> critic_agents;
    std::vector<Component> critic_domain;
    std::vector<Component> policy_state;
    std::vector<Component> policy_domain;
    IndexMap critic_map;
    IndexMap policy_map;
    std::vector<int> action_counts;
    uint64_t critic_action_space = 1;
    uint64_t critic_cond_space = 1;
    uint64_t policy_cond_space = 1;

    uint64_t critic_key_space() const;
    uint64_t policy_key_space() const;
};

struct LearnerLayout {
    int kappa = 1;
    Conditioning conditioning = Conditioning::DomainFactor;
    bool use_acr = true;
    int num_sources = 1;
    OmegaGrid grid;
    std::vector<AgentLayout> agents;
};

struct LayoutOptions {
    int kappa = 1;
    Conditioning conditioning = Conditioning::DomainFactor;
    bool use_acr = true;
    int num_sources = 1;
    OmegaGrid grid;
};

/// Builds table layouts; `masks` is required when use_acr is set.
LearnerLayout make_layout(const NetworkGraph& graph, const AgentSpaces& spaces, const std::vector<int>& omega_dims,
                          const CausalMasks* masks, const LayoutOptions& opts);

// Per-agent conditioning indices for one domain.
struct DomainContext {
    std::vector<uint64_t> critic_cond;
    std::vector<uint64_t> policy_cond;
};

DomainContext make_context(const LearnerLayout& layout, const DomainFactor* omega_hat, int source_index);

class TruncatedCritic {
public:
    explicit TruncatedCritic(int n = 0) : tables_(n) {}

    double value(int i, uint64_t key) const;
    /// Q[prev] <- (1 - alpha) Q[prev] + alpha (r + gamma Q[next]); returns |change|.
    double td_update(int i, uint64_t key_prev, uint64_t key_next, double reward, double alpha, double gamma);
    void set(int i, uint64_t key, double v) { tables_.at(i)[key] = v; }
    void reset();
    size_t entries(int i) const { return tables_.at(i).size(); }
    const std::unordered_map<uint64_t, double>& table(int i) const { return tables_.at(i); }
    int num_agents() const { return static_cast<int>(tables_.size()); }

private:
    std::vector<std::unordered_map<uint64_t, double>> tables_;
};

class LocalizedPolicy {
public:
    LocalizedPolicy() = default;
    LocalizedPolicy(std::vector<int> action_counts, double tau, double theta_max);

    int num_agents() const { return static_cast<int>(action_counts_.size()); }
    int action_count(int i) const { return action_counts_.at(i); }
    double tau() const { return tau_; }
    double theta_max() const { return theta_max_; }

    std::vector<double> logits(int i, uint64_t key) const;
    std::vector<double> probabilities(int i, uint64_t key) const;
    /// Inverse-CDF draw for a uniform u in [0,1).
    int sample(int i, uint64_t key, double u) const;
    /// d log pi(a | key) / d theta = (e_a - pi) / tau.
    std::vector<double> grad_log(int i, uint64_t key, int a) const;
    /// theta += eta * g, clamped to [-theta_max, theta_max].
    void apply(int i, uint64_t key, const std::vector<double>& g, double eta);
    void set_logits(int i, uint64_t key, std::vector<double> logits);
    const std::unordered_map<uint64_t, std::vector<double>>& table(int i) const { return tables_.at(i); }
    size_t entries(int i) const { return tables_.at(i).size(); }

private:
    std::vector<int> action_counts_;
    double tau_ = 1.0;
    double theta_max_ = 10.0;
    std::vector<std::unordered_map<uint64_t, std::vector<double>>> tables_;
};

std::vector<double> softmax(const std::vector<double>& logits, double tau);
int sample_action(const LocalizedPolicy& policy, int i, uint64_t policy_key, Stream& rng);

struct StepRecord {
    std::vector<uint64_t> critic_key;
    std::vector<uint64_t> policy_key;
    JointAction action;
    std::vector<double> rewards;
};

struct EpisodeLog {
    int domain = 0;
    std::vector<StepRecord> steps;
    double discounted_return = 0.0;
    double critic_delta = 0.0;
    double grad_norm = 0.0;
};

uint64_t critic_key(const AgentLayout& al, const GlobalState& s, const JointAction& a, const AgentSpaces& spaces,
                    uint64_t cond);
uint64_t policy_key(const AgentLayout& al, const GlobalState& s, uint64_t cond);

/// Rolls T+1 decisions (t = 0..T) under the frozen policy.
EpisodeLog rollout_episode(const Environment& env, const LearnerLayout& layout, const LocalizedPolicy& policy,
                           const DomainContext& ctx, int T, double gamma, uint64_t stream_seed);

struct CriticSchedule {
    bool decaying = false;
    double alpha = 0.1;
    double h = 1.0;
    double t0 = 1.0;
    double at(int t) const { return decaying ? h / (t + t0) : alpha; }
};

struct ActorSchedule {
    bool decaying = false;
    double eta = 0.01;
    double at(int k) const;
};

/// TD inner loop over the logged episode; returns the mean over agents of the largest |change|.
double critic_pass(TruncatedCritic& critic, const EpisodeLog& ep, const CriticSchedule& schedule, double gamma);
void critic_td_update(TruncatedCritic& critic, int i, uint64_t key_prev, uint64_t key_next, double reward,
                      double alpha, double gamma);

using GradientTable = std::vector<std::map<uint64_t, std::vector<double>>>;

GradientTable estimate_policy_gradient(const EpisodeLog& ep, const TruncatedCritic& critic,
                                       const LocalizedPolicy& policy, const NetworkGraph& graph, int kappa,
                                       double gamma);
double gradient_norm(const GradientTable& g);
void actor_update(LocalizedPolicy& policy, const GradientTable& g, double eta);

struct TrainingSettings {
    int K = 600;
    int T = 10;
    double gamma = 0.95;
    double tau = 0.5;
    double theta_max = 10.0;
    CriticSchedule critic;
    ActorSchedule actor;
    bool warm_start = false;
    /// Number of updates applied; iterations past the budget only evaluate.
    int update_budget = -1;
    bool record_wall_time = false;
};

struct SourceDomain {
    const Environment* env = nullptr;
    DomainContext ctx;
};

struct IterationSummary {
    int k = 0;
    int domain = 0;
    double discounted_return = 0.0;
    double critic_delta = 0.0;
    double grad_norm = 0.0;
    /// Milliseconds since the loop started; 0 unless wall-time recording is on.
    double wall_ms = 0.0;
};

struct TrainingResult {
    LocalizedPolicy policy;
    std::vector<IterationSummary> logs;
};

LocalizedPolicy initial_policy(const LearnerLayout& layout, const TrainingSettings& settings);

/// Outer actor-critic loop; iteration k draws all randomness from derive_seed(stream_seed, {k}).
TrainingResult run_meta_training(const LearnerLayout& layout, const std::vector<SourceDomain>& sources,
                                 const TrainingSettings& settings, uint64_t stream_seed,
                                 const LocalizedPolicy* init = nullptr);

struct AdaptationResult {
    DomainEstimate estimate;
    DomainFactor snapped;
    DomainContext ctx;
    std::vector<double> returns;
    int snapped_agents = 0;
};

/// Stream used by evaluation episode e (1-based) of a run with the given seed.
uint64_t adaptation_stream(uint64_t seed);

AdaptationResult adapt_and_deploy(const LearnerLayout& layout, const LocalizedPolicy& policy,
                                  const Environment& target, const CausalMasks& masks, int T_a,
                                  const std::vector<std::vector<double>>& source_values, int eval_episodes,
                                  const TrainingSettings& settings, uint64_t seed);

std::vector<double> evaluate_policy(const Environment& env, const LearnerLayout& layout, const LocalizedPolicy& policy,
                                    const DomainContext& ctx, int episodes, const TrainingSettings& settings,
                                    uint64_t stream_seed);

// ---------------------------------------------------------------- exact oracle

/// Action distribution of agent i at a full global state.
using JointPolicyFn = std::function<std::vector<double>(int, const GlobalState&)>;

JointPolicyFn policy_function(const LearnerLayout& layout, const LocalizedPolicy& policy, const DomainContext& ctx);
JointPolicyFn uniform_policy(const AgentSpaces& spaces);

class StateEnumerator {
public:
    explicit StateEnumerator(const AgentSpaces& spaces);
    uint64_t num_states() const { return num_states_; }
    uint64_t num_actions() const { return num_actions_; }
    GlobalState state(uint64_t idx) const;
    JointAction action(uint64_t idx) const;
    uint64_t state_index(const GlobalState& s) const;
    uint64_t action_index(const JointAction& a) const;
    uint64_t local_index(int i, const LocalState& si) const;
    uint64_t agent_stride(int i) const { return stride_[i]; }

private:
    const AgentSpaces* spaces_;
    uint64_t num_states_ = 1;
    uint64_t num_actions_ = 1;
    std::vector<uint64_t> stride_;
    std::vector<uint64_t> action_stride_;
};

struct OracleResult {
    uint64_t num_states = 0;
    uint64_t num_actions = 0;
    /// Q[i][s * num_actions + a].
    std::vector<std::vector<double>> Q;
    std::vector<std::vector<double>> V;
    int iterations = 0;
    double residual = 0.0;
};

OracleResult exact_q_oracle(const Environment& env, const JointPolicyFn& policy, const OmegaValues& omega,
                            double gamma, double tolerance, uint64_t capacity = 1000000);

/// sup over (s,a),(s',a') agreeing on N_i^kappa of |Q_i(s,a) - Q_i(s',a')|, for kappa = 0..max_kappa.
std::vector<double> decay_measurements(const OracleResult& q, const Environment& env, int i, int max_kappa);

} // namespace gsac
