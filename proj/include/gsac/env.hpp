#pragma once

#include "gsac/network.hpp"
#include "gsac/rng.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace gsac {

using OmegaValues = std::vector<std::vector<double>>;

// One joint (next local state, realized reward) outcome of an agent's kernel.
struct LocalOutcome {
    LocalState next;
    double reward = 0.0;
    double prob = 1.0;
};

struct StepResult {
    GlobalState next;
    std::vector<double> rewards;
};

struct Transition {
    GlobalState state;
    JointAction action;
    std::vector<double> rewards;
    GlobalState next;
    int t = 0;
};

struct Trajectory {
    int domain = 0;
    std::vector<Transition> steps;
};

class Environment {
public:
    Environment(NetworkGraph graph, AgentSpaces spaces, OmegaValues omega);
    virtual ~Environment() = default;

    virtual std::string kind() const = 0;
    virtual std::unique_ptr<Environment> with_omega(const OmegaValues& omega) const = 0;

    const NetworkGraph& graph() const { return graph_; }
    const AgentSpaces& spaces() const { return spaces_; }
    /// Ground-truth masks.
    const CausalMasks& masks() const { return masks_; }
    const OmegaValues& omega() const { return omega_; }
    std::vector<int> omega_dims() const;
    int num_agents() const { return graph_.size(); }
    double reward_bound() const { return 1.0; }

    GlobalState reset(uint64_t seed) const;
    StepResult step(const GlobalState& state, const JointAction& action, uint64_t seed) const;

    virtual LocalState sample_initial(int i, Stream& rng) const = 0;
    /// Full outcome list of agent i's kernel at (s, a) under the given omega_i.
    virtual std::vector<LocalOutcome> local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                                     const std::vector<double>& omega_i) const = 0;
    virtual LocalOutcome sample_local(int i, const GlobalState& s, const JointAction& a,
                                      const std::vector<double>& omega_i, Stream& rng) const;

    double local_probability(int i, const GlobalState& s, const JointAction& a, const std::vector<double>& omega_i,
                             const LocalState& next) const;
    double expected_reward(int i, const GlobalState& s, const JointAction& a) const;

protected:
    NetworkGraph graph_;
    AgentSpaces spaces_;
    OmegaValues omega_;
    CausalMasks masks_;
};

struct WirelessOptions {
    int deadline = 2;
    /// Per-user success probability; empty draws Unif[0,1] from the build seed.
    std::vector<double> success_prob;
};

class WirelessEnv : public Environment {
public:
    WirelessEnv(int grid_size, OmegaValues omega, const WirelessOptions& opts, uint64_t seed);

    std::string kind() const override { return "wireless"; }
    std::unique_ptr<Environment> with_omega(const OmegaValues& omega) const override;

    int grid_size() const { return grid_size_; }
    int deadline() const { return deadline_; }
    int num_access_points() const { return num_aps_; }
    /// Access point reached by local action a (a >= 1), or -1 for null.
    int access_point(int i, int a) const;
    const std::vector<double>& success_prob() const { return q_; }

    LocalState sample_initial(int i, Stream& rng) const override;
    std::vector<LocalOutcome> local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                             const std::vector<double>& omega_i) const override;
    LocalOutcome sample_local(int i, const GlobalState& s, const JointAction& a, const std::vector<double>& omega_i,
                              Stream& rng) const override;

private:
    bool transmits(int i, const GlobalState& s, const JointAction& a) const;
    bool collides(int i, const GlobalState& s, const JointAction& a) const;
    LocalState age(const LocalState& si, bool success) const;

    int grid_size_;
    int deadline_;
    int num_aps_ = 0;
    WirelessOptions opts_;
    uint64_t seed_;
    std::vector<std::vector<int>> aps_;
    std::vector<double> q_;
};

std::unique_ptr<WirelessEnv> build_wireless(int grid_size, const std::vector<double>& arrival_prob, int deadline,
                                            uint64_t seed, const std::vector<double>& success_prob = {});
std::unique_ptr<WirelessEnv> build_wireless(int grid_size, double arrival_prob, int deadline, uint64_t seed,
                                            const std::vector<double>& success_prob = {});

/// Single-link queue update with clipping to [0, cap].
int traffic_queue_update(int x, int capacity, int signal, int inflow, int cap);

struct TrafficOptions {
    int queue_cap = 5;
    /// Capacity C ~ Binomial(capacity_max, omega).
    int capacity_max = 2;
    /// Fraction of inflow routed to the east turn; the rest goes south.
    double turn_east = 0.5;
    /// Exogenous arrival probability on each boundary in-link.
    double arrival_prob = 0.5;
};

class TrafficEnv : public Environment {
public:
    static constexpr int kEast = 0;
    static constexpr int kSouth = 1;

    TrafficEnv(int grid_size, OmegaValues omega, const TrafficOptions& opts);

    std::string kind() const override { return "traffic"; }
    std::unique_ptr<Environment> with_omega(const OmegaValues& omega) const override;

    int grid_size() const { return grid_size_; }
    const TrafficOptions& options() const { return opts_; }

    LocalState sample_initial(int i, Stream& rng) const override;
    std::vector<LocalOutcome> local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                             const std::vector<double>& omega_i) const override;
    LocalOutcome sample_local(int i, const GlobalState& s, const JointAction& a, const std::vector<double>& omega_i,
                              Stream& rng) const override;

private:
    struct InLink {
        int from = -1; // upstream agent, -1 for an exogenous source
        int turn = 0;  // upstream turn feeding this node
    };
    double reward_of(const LocalState& si) const;

    int grid_size_;
    TrafficOptions opts_;
    std::vector<std::vector<InLink>> in_links_;
};

std::unique_ptr<TrafficEnv> build_traffic(int grid_size, double omega, const TrafficOptions& opts = {});
std::unique_ptr<TrafficEnv> build_traffic(int grid_size, const std::vector<double>& omega,
                                          const TrafficOptions& opts = {});

struct SyntheticOptions {
    int d_max = 2;
    /// Shift of P(child = 1) produced by a single parent flip.
    double amplitude = 0.3;
    /// Minimum total-variation shift between kernels at adjacent grid points.
    double margin = 0.15;
};

// Binary factored environment with parity kernels:
// P(child = 1) = 0.5 + amplitude * (-1)^(sum of parent values) + B * (omega - omega_mid).
class SyntheticEnv : public Environment {
public:
    SyntheticEnv(NetworkGraph graph, AgentSpaces spaces, CausalMasks masks, OmegaGrid grid, OmegaValues omega,
                 const SyntheticOptions& opts);

    std::string kind() const override { return "synthetic"; }
    std::unique_ptr<Environment> with_omega(const OmegaValues& omega) const override;

    const OmegaGrid& grid() const { return grid_; }
    double omega_slope() const { return slope_; }
    double child_prob(int i, int j, const GlobalState& s, const JointAction& a, double omega) const;

    LocalState sample_initial(int i, Stream& rng) const override;
    std::vector<LocalOutcome> local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                             const std::vector<double>& omega_i) const override;
    LocalOutcome sample_local(int i, const GlobalState& s, const JointAction& a, const std::vector<double>& omega_i,
                              Stream& rng) const override;

private:
    double reward_of(int i, const GlobalState& s, const JointAction& a) const;

    OmegaGrid grid_;
    SyntheticOptions opts_;
    double mid_ = 0.0;
    double slope_ = 0.0;
};

std::unique_ptr<SyntheticEnv> build_synthetic(const NetworkGraph& graph, const AgentSpaces& spaces, double density,
                                              const OmegaGrid& grid, uint64_t seed,
                                              const SyntheticOptions& opts = {});
/// Synthetic kernel family over caller-provided masks.
std::unique_ptr<SyntheticEnv> build_factored(const NetworkGraph& graph, const AgentSpaces& spaces,
                                             const CausalMasks& masks, const OmegaGrid& grid,
                                             const OmegaValues& omega, const SyntheticOptions& opts = {});

OmegaValues uniform_omega(int n, double value);

JointAction uniform_random_action(const AgentSpaces& spaces, uint64_t seed);
Trajectory collect_trajectory(const Environment& env, int length, uint64_t seed, int domain = 0);
std::vector<Trajectory> collect_trajectories(const Environment& env, int count, int length, uint64_t seed,
                                             int domain = 0);
/// One row per (t, agent, component) with the agent's action and reward.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

} // namespace gsac
