#pragma once

#include "gsac/network.hpp"

#include <cstdint>
#include <vector>

namespace gsac {

struct ValueACR {
    int agent = 0;
    int kappa = 0;
    std::vector<Component> comps;
};

struct PolicyACR {
    int agent = 0;
    /// s°_{N_i}: union of the neighbors' local sets.
    std::vector<Component> comps;
};

struct PolicyACRSet {
    /// s°_i per agent.
    std::vector<std::vector<Component>> local;
    std::vector<PolicyACR> acr;
    /// Propagation rounds executed (the final no-change round included for the fixed point).
    int rounds = 0;
};

struct DomainACR {
    int agent = 0;
    /// (agent, omega coordinate) pairs.
    std::vector<Component> comps;
};

ValueACR value_acr(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces, int i, int kappa);
PolicyACRSet policy_acr_fixed_point(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces);
PolicyACRSet policy_acr_finite(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces,
                               int kappa);
DomainACR domain_acr(const CausalMasks& masks, const std::vector<Component>& state_acr, int i);

/// All state components of the given agents, canonical order.
std::vector<Component> all_components(const AgentSpaces& spaces, const std::vector<int>& agents);
/// All omega coordinates of the given agents.
std::vector<Component> all_omega(const std::vector<int>& omega_dims, const std::vector<int>& agents);

/// Embed ACR values into the full tuple, filling other slots with the placeholder 0.
std::vector<int> placeholder_fill(const std::vector<Component>& full, const std::vector<Component>& acr,
                                  const std::vector<int>& values);
/// Copy of s with every component outside `keep` set to the placeholder 0.
GlobalState fill_state(const GlobalState& s, const std::vector<Component>& keep);
/// Copy of a with every agent outside `keep` set to the null action.
JointAction fill_action(const JointAction& a, const std::vector<int>& keep);

// Mixed-radix index map between a component tuple and a dense table index.
class IndexMap {
public:
    IndexMap() = default;
    IndexMap(std::vector<Component> comps, std::vector<int> cards);
    static IndexMap for_states(const AgentSpaces& spaces, std::vector<Component> comps);

    const std::vector<Component>& comps() const { return comps_; }
    const std::vector<int>& cards() const { return cards_; }
    uint64_t size() const { return size_; }
    uint64_t encode(const GlobalState& s) const;
    uint64_t encode_values(const std::vector<int>& values) const;
    std::vector<int> decode(uint64_t key) const;

private:
    std::vector<Component> comps_;
    std::vector<int> cards_;
    uint64_t size_ = 1;
};

/// Product of factors with overflow detection.
uint64_t checked_product(const std::vector<uint64_t>& factors);

} // namespace gsac
