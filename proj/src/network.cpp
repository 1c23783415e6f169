#include "gsac/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace gsac {

NetworkGraph::NetworkGraph(int n, const std::vector<std::pair<int, int>>& edges) : n_(n), adj_(n)
{
    if (n < 1)
        throw std::invalid_argument("graph needs at least one agent");
    for (int i = 0; i < n; ++i)
        adj_[i].push_back(i);
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("edge references unknown agent");
        adj_[a].push_back(b);
        adj_[b].push_back(a);
    }
    for (auto& v : adj_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

NetworkGraph NetworkGraph::ring(int n)
{
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        e.emplace_back(i, (i + 1) % n);
    return NetworkGraph(n, e);
}

NetworkGraph NetworkGraph::line(int n)
{
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return NetworkGraph(n, e);
}

NetworkGraph NetworkGraph::lattice(int rows, int cols)
{
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int id = r * cols + c;
            if (c + 1 < cols)
                e.emplace_back(id, id + 1);
            if (r + 1 < rows)
                e.emplace_back(id, id + cols);
        }
    return NetworkGraph(rows * cols, e);
}

const std::vector<int>& NetworkGraph::neighbors(int i) const
{
    if (i < 0 || i >= n_)
        throw std::invalid_argument("invalid agent id " + std::to_string(i));
    return adj_[i];
}

bool NetworkGraph::adjacent(int i, int j) const
{
    const auto& v = neighbors(i);
    return std::binary_search(v.begin(), v.end(), j);
}

std::vector<int> NetworkGraph::distances_from(int i) const
{
    neighbors(i);
    std::vector<int> dist(n_, -1);
    std::deque<int> q{i};
    dist[i] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : adj_[u])
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return dist;
}

std::vector<int> NetworkGraph::k_hop(int i, int kappa) const
{
    if (kappa < 0)
        throw std::invalid_argument("kappa must be non-negative");
    auto dist = distances_from(i);
    std::vector<int> out;
    for (int j = 0; j < n_; ++j)
        if (dist[j] >= 0 && dist[j] <= kappa)
            out.push_back(j);
    return out;
}

int NetworkGraph::diameter() const
{
    int d = 0;
    for (int i = 0; i < n_; ++i)
        for (int x : distances_from(i))
            d = std::max(d, x);
    return d;
}

std::vector<std::pair<int, int>> NetworkGraph::edges() const
{
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n_; ++i)
        for (int j : adj_[i])
            if (j > i)
                e.emplace_back(i, j);
    return e;
}

std::vector<int> k_hop_neighborhood(const NetworkGraph& graph, int i, int kappa)
{
    return graph.k_hop(i, kappa);
}

AgentSpaces::AgentSpaces(std::vector<std::vector<int>> state_card, std::vector<std::vector<int>> action_card)
    : state_card_(std::move(state_card)), action_card_(std::move(action_card))
{
    if (state_card_.size() != action_card_.size())
        throw std::invalid_argument("state and action specs disagree on agent count");
    offset_.push_back(0);
    for (size_t i = 0; i < state_card_.size(); ++i) {
        for (int c : state_card_[i])
            if (c < 1)
                throw std::invalid_argument("state cardinality must be >= 1");
        int count = 1;
        if (action_card_[i].empty())
            throw std::invalid_argument("agent needs at least one action component");
        for (int c : action_card_[i]) {
            if (c < 1)
                throw std::invalid_argument("action cardinality must be >= 1");
            count *= c;
        }
        action_count_.push_back(count);
        offset_.push_back(offset_.back() + static_cast<int>(state_card_[i].size()));
    }
}

AgentSpaces AgentSpaces::uniform(int n, int state_dims, int state_card, int action_card)
{
    return AgentSpaces(std::vector<std::vector<int>>(n, std::vector<int>(state_dims, state_card)),
                       std::vector<std::vector<int>>(n, std::vector<int>{action_card}));
}

std::vector<int> AgentSpaces::decode_action(int i, int a) const
{
    const auto& card = action_card_.at(i);
    if (a < 0 || a >= action_count_[i])
        throw std::invalid_argument("action out of range");
    std::vector<int> parts(card.size());
    for (size_t k = 0; k < card.size(); ++k) {
        parts[k] = a % card[k];
        a /= card[k];
    }
    return parts;
}

int AgentSpaces::encode_action(int i, const std::vector<int>& parts) const
{
    const auto& card = action_card_.at(i);
    if (parts.size() != card.size())
        throw std::invalid_argument("action component count mismatch");
    int a = 0;
    for (size_t k = card.size(); k-- > 0;) {
        if (parts[k] < 0 || parts[k] >= card[k])
            throw std::invalid_argument("action component out of range");
        a = a * card[k] + parts[k];
    }
    return a;
}

Component AgentSpaces::component_at(int global) const
{
    if (global < 0 || global >= total_components())
        throw std::invalid_argument("component index out of range");
    auto it = std::upper_bound(offset_.begin(), offset_.end(), global);
    int agent = static_cast<int>(it - offset_.begin()) - 1;
    return {agent, global - offset_[agent]};
}

void AgentSpaces::check_state(const GlobalState& s) const
{
    if (static_cast<int>(s.size()) != num_agents())
        throw std::invalid_argument("state has wrong agent count");
    for (int i = 0; i < num_agents(); ++i) {
        if (s[i].size() != state_card_[i].size())
            throw std::invalid_argument("state of agent " + std::to_string(i) + " has wrong dimension");
        for (size_t j = 0; j < s[i].size(); ++j)
            if (s[i][j] < 0 || s[i][j] >= state_card_[i][j])
                throw std::invalid_argument("state component (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") out of range");
    }
}

void AgentSpaces::check_action(const JointAction& a) const
{
    if (static_cast<int>(a.size()) != num_agents())
        throw std::invalid_argument("action has wrong agent count");
    for (int i = 0; i < num_agents(); ++i)
        if (a[i] < 0 || a[i] >= action_count_[i])
            throw std::invalid_argument("action of agent " + std::to_string(i) + " out of range");
}

uint64_t AgentSpaces::local_state_count(int i) const
{
    uint64_t c = 1;
    for (int x : state_card_.at(i))
        c *= static_cast<uint64_t>(x);
    return c;
}

CausalMasks CausalMasks::empty(const AgentSpaces& spaces, const std::vector<int>& omega_dims)
{
    int n = spaces.num_agents();
    if (static_cast<int>(omega_dims.size()) != n)
        throw std::invalid_argument("omega dimensions must be given per agent");
    CausalMasks m;
    m.s_to_s.resize(n);
    m.a_to_s.resize(n);
    m.w_to_s.resize(n);
    for (int i = 0; i < n; ++i) {
        int d = spaces.state_dim(i);
        m.s_to_s[i].assign(d, Mask(spaces.total_components(), 0));
        m.a_to_s[i].assign(d, Mask(spaces.action_dim(i), 0));
        m.w_to_s[i].assign(d, Mask(omega_dims[i], 0));
        m.s_to_r.emplace_back(d, 0);
        m.a_to_r.emplace_back(spaces.action_dim(i), 0);
        m.w_to_r.emplace_back(omega_dims[i], 0);
    }
    return m;
}

std::vector<Component> CausalMasks::state_parents(const AgentSpaces& spaces, int i, int j) const
{
    std::vector<Component> out;
    const Mask& m = s_to_s.at(i).at(j);
    for (size_t g = 0; g < m.size(); ++g)
        if (m[g])
            out.push_back(spaces.component_at(static_cast<int>(g)));
    return out;
}

bool CausalMasks::has_edge(const AgentSpaces& spaces, Component parent, Component child) const
{
    return s_to_s.at(child.agent).at(child.comp).at(spaces.global_index(parent)) != 0;
}

std::vector<MaskViolation> validate_masks(const CausalMasks& masks, const NetworkGraph& graph,
                                          const AgentSpaces& spaces)
{
    std::vector<MaskViolation> out;
    int n = spaces.num_agents();
    auto add = [&](std::string kind, int i, int j, int d, std::string msg) {
        out.push_back({std::move(kind), i, j, d, std::move(msg)});
    };
    if (graph.size() != n)
        add("dimension", -1, -1, graph.size(), "graph and spaces disagree on agent count");
    auto agent_count_ok = [&](size_t sz, const char* what) {
        if (static_cast<int>(sz) != n) {
            add("dimension", -1, -1, static_cast<int>(sz), std::string(what) + " has wrong agent count");
            return false;
        }
        return true;
    };
    if (!agent_count_ok(masks.s_to_s.size(), "s_to_s") || !agent_count_ok(masks.a_to_s.size(), "a_to_s") ||
        !agent_count_ok(masks.w_to_s.size(), "w_to_s") || !agent_count_ok(masks.s_to_r.size(), "s_to_r") ||
        !agent_count_ok(masks.a_to_r.size(), "a_to_r") || !agent_count_ok(masks.w_to_r.size(), "w_to_r"))
        return out;
    int total = spaces.total_components();
    for (int i = 0; i < n; ++i) {
        int d = spaces.state_dim(i);
        if (static_cast<int>(masks.s_to_s[i].size()) != d || static_cast<int>(masks.a_to_s[i].size()) != d ||
            static_cast<int>(masks.w_to_s[i].size()) != d) {
            add("dimension", i, -1, d, "child component count mismatch");
            continue;
        }
        size_t wdim = masks.w_to_r[i].size();
        for (int j = 0; j < d; ++j) {
            const Mask& m = masks.s_to_s[i][j];
            if (static_cast<int>(m.size()) != total) {
                add("dimension", i, j, static_cast<int>(m.size()), "s_to_s width mismatch");
                continue;
            }
            for (int g = 0; g < total; ++g) {
                if (!m[g])
                    continue;
                Component c = spaces.component_at(g);
                if (graph.size() == n && !graph.adjacent(i, c.agent))
                    add("locality", i, j, g,
                        "parent (" + std::to_string(c.agent) + "," + std::to_string(c.comp) + ") is outside N_i");
            }
            if (static_cast<int>(masks.a_to_s[i][j].size()) != spaces.action_dim(i))
                add("dimension", i, j, static_cast<int>(masks.a_to_s[i][j].size()), "a_to_s width mismatch");
            if (masks.w_to_s[i][j].size() != wdim)
                add("dimension", i, j, static_cast<int>(masks.w_to_s[i][j].size()), "w_to_s width mismatch");
        }
        if (static_cast<int>(masks.s_to_r[i].size()) != d)
            add("dimension", i, -1, static_cast<int>(masks.s_to_r[i].size()), "s_to_r width mismatch");
        if (static_cast<int>(masks.a_to_r[i].size()) != spaces.action_dim(i))
            add("dimension", i, -1, static_cast<int>(masks.a_to_r[i].size()), "a_to_r width mismatch");
    }
    return out;
}

OmegaGrid::OmegaGrid(std::vector<double> points) : points_(std::move(points))
{
    if (points_.empty())
        throw std::invalid_argument("omega grid must be non-empty");
    if (!std::is_sorted(points_.begin(), points_.end()) ||
        std::adjacent_find(points_.begin(), points_.end()) != points_.end())
        throw std::invalid_argument("omega grid must be strictly increasing");
}

int OmegaGrid::index_of(double v) const
{
    for (int k = 0; k < size(); ++k)
        if (points_[k] == v)
            return k;
    return -1;
}

int OmegaGrid::nearest(double v) const
{
    int best = 0;
    for (int k = 1; k < size(); ++k)
        if (std::abs(points_[k] - v) < std::abs(points_[best] - v))
            best = k;
    return best;
}

std::vector<double> DomainFactor::values(int i) const
{
    std::vector<double> v;
    for (int idx : index.at(i))
        v.push_back(grid.value(idx));
    return v;
}

} // namespace gsac
