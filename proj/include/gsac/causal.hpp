#pragma once

#include "gsac/env.hpp"
#include "gsac/network.hpp"

#include <string>
#include <vector>

namespace gsac {

struct CMISample {
    uint64_t x = 0;
    uint64_t y = 0;
    uint64_t z = 0;
};

/// Plug-in conditional mutual information I(X;Y|Z) in nats.
double estimate_conditional_mi(const std::vector<CMISample>& samples);

struct CMIStats {
    double cmi = 0.0;
    /// Sum over observed z of (|x support| - 1)(|y support| - 1).
    double df = 0.0;
    size_t n = 0;
    /// CMI minus its first-order plug-in bias df / (2n), floored at 0.
    double corrected() const;
};

CMIStats conditional_mi_stats(const std::vector<CMISample>& samples);

struct Candidate {
    enum Kind { State, Action, Domain };
    Kind kind = State;
    int agent = 0;
    int index = 0;
    std::string label() const;
    auto operator<=>(const Candidate&) const = default;
};

struct CITestResult {
    int agent = 0;
    /// Child state component, or -1 for the reward.
    int child = 0;
    Candidate candidate;
    double cmi = 0.0;
    double score = 0.0;
    std::vector<Candidate> conditioning;
    bool accepted = false;
};

struct RecoveryResult {
    CausalMasks masks;
    std::vector<CITestResult> tests;
    bool insufficient_data = false;
    size_t samples = 0;
};

struct RecoveryOptions {
    /// Also recover reward parents from observed rewards.
    bool recover_reward = true;
    /// Within-stratum permutations whose largest CMI is subtracted before thresholding; 0 uses df/(2n).
    int permutations = 10;
    int max_rounds = 64;
};

RecoveryResult recover_causal_masks(const std::vector<Trajectory>& trajectories, const NetworkGraph& graph,
                                    const AgentSpaces& spaces, const std::vector<int>& omega_dims,
                                    double lambda_threshold, const RecoveryOptions& opts = {});

struct DomainEstimate {
    OmegaGrid grid;
    /// Per agent, per coordinate grid index.
    std::vector<std::vector<int>> index;
    std::vector<double> nll;
    /// Per agent NLL over the (product) grid, lexicographic order.
    std::vector<std::vector<double>> nll_curve;
    int trajectories = 0;
    size_t transitions = 0;

    DomainFactor factor() const { return {grid, index}; }
    OmegaValues values() const;
};

DomainEstimate estimate_domain_factor(const std::vector<Trajectory>& trajectories, const CausalMasks& masks,
                                      const Environment& kernel_family, const OmegaGrid& grid);

} // namespace gsac
