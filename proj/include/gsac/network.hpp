#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gsac {

using LocalState = std::vector<int>;
using GlobalState = std::vector<LocalState>;
using JointAction = std::vector<int>;

class NetworkGraph {
public:
    NetworkGraph() = default;
    NetworkGraph(int n, const std::vector<std::pair<int, int>>& edges);

    static NetworkGraph ring(int n);
    static NetworkGraph line(int n);
    static NetworkGraph lattice(int rows, int cols);

    int size() const { return n_; }
    /// N_i including i, ascending.
    const std::vector<int>& neighbors(int i) const;
    bool adjacent(int i, int j) const;
    std::vector<int> k_hop(int i, int kappa) const;
    std::vector<int> distances_from(int i) const;
    int diameter() const;
    std::vector<std::pair<int, int>> edges() const;

private:
    int n_ = 0;
    std::vector<std::vector<int>> adj_;
};

std::vector<int> k_hop_neighborhood(const NetworkGraph& graph, int i, int kappa);

// A state component addressed by (agent, component index).
struct Component {
    int agent = 0;
    int comp = 0;
    auto operator<=>(const Component&) const = default;
};

class AgentSpaces {
public:
    AgentSpaces() = default;
    AgentSpaces(std::vector<std::vector<int>> state_card, std::vector<std::vector<int>> action_card);

    static AgentSpaces uniform(int n, int state_dims, int state_card, int action_card);

    int num_agents() const { return static_cast<int>(state_card_.size()); }
    int state_dim(int i) const { return static_cast<int>(state_card_.at(i).size()); }
    int state_card(int i, int j) const { return state_card_.at(i).at(j); }
    const std::vector<int>& state_cards(int i) const { return state_card_.at(i); }
    int action_dim(int i) const { return static_cast<int>(action_card_.at(i).size()); }
    const std::vector<int>& action_cards(int i) const { return action_card_.at(i); }
    int action_count(int i) const { return action_count_.at(i); }

    std::vector<int> decode_action(int i, int a) const;
    int encode_action(int i, const std::vector<int>& parts) const;

    int offset(int i) const { return offset_.at(i); }
    int total_components() const { return offset_.empty() ? 0 : offset_.back(); }
    int global_index(Component c) const { return offset_.at(c.agent) + c.comp; }
    Component component_at(int global) const;

    void check_state(const GlobalState& s) const;
    void check_action(const JointAction& a) const;
    uint64_t local_state_count(int i) const;

private:
    std::vector<std::vector<int>> state_card_;
    std::vector<std::vector<int>> action_card_;
    std::vector<int> action_count_;
    std::vector<int> offset_;
};

using Mask = std::vector<uint8_t>;

// Binary dependency structure of the factored model.
// s_to_s[i][j] is indexed by global component id (AgentSpaces::global_index)
// so that a mask may be checked for locality against the graph.
struct CausalMasks {
    std::vector<std::vector<Mask>> s_to_s;
    std::vector<std::vector<Mask>> a_to_s;
    std::vector<std::vector<Mask>> w_to_s;
    std::vector<Mask> s_to_r;
    std::vector<Mask> a_to_r;
    std::vector<Mask> w_to_r;

    static CausalMasks empty(const AgentSpaces& spaces, const std::vector<int>& omega_dims);

    int num_agents() const { return static_cast<int>(s_to_r.size()); }
    std::vector<Component> state_parents(const AgentSpaces& spaces, int i, int j) const;
    bool has_edge(const AgentSpaces& spaces, Component parent, Component child) const;
    bool operator==(const CausalMasks&) const = default;
};

struct MaskViolation {
    std::string kind;
    int agent = -1;
    int component = -1;
    int detail = -1;
    std::string message;
};

std::vector<MaskViolation> validate_masks(const CausalMasks& masks, const NetworkGraph& graph,
                                          const AgentSpaces& spaces);

// Finite grid of admissible values for one domain-factor coordinate.
class OmegaGrid {
public:
    OmegaGrid() = default;
    explicit OmegaGrid(std::vector<double> points);

    int size() const { return static_cast<int>(points_.size()); }
    double value(int idx) const { return points_.at(idx); }
    const std::vector<double>& points() const { return points_; }
    double lo() const { return points_.front(); }
    double hi() const { return points_.back(); }
    /// Exact lookup; -1 if absent.
    int index_of(double v) const;
    /// Nearest point, ties toward the smaller value.
    int nearest(double v) const;

private:
    std::vector<double> points_;
};

// Per-agent domain factor stored as grid indices.
struct DomainFactor {
    OmegaGrid grid;
    std::vector<std::vector<int>> index;

    double value(int i, int c) const { return grid.value(index.at(i).at(c)); }
    std::vector<double> values(int i) const;
};

} // namespace gsac
