#include "gsac/acr.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace gsac {

namespace {

std::vector<Component> reward_parents(const CausalMasks& masks, int i)
{
    std::vector<Component> out;
    for (int k = 0; k < static_cast<int>(masks.s_to_r.at(i).size()); ++k)
        if (masks.s_to_r[i][k])
            out.push_back({i, k});
    return out;
}

// Components of `agent` with an edge into any member of `targets`.
std::vector<Component> parents_into(const CausalMasks& masks, const AgentSpaces& spaces, int agent,
                                    const std::set<Component>& targets)
{
    std::vector<Component> out;
    for (int k = 0; k < spaces.state_dim(agent); ++k) {
        int g = spaces.global_index({agent, k});
        for (const auto& t : targets)
            if (masks.s_to_s[t.agent][t.comp][g]) {
                out.push_back({agent, k});
                break;
            }
    }
    return out;
}

PolicyACRSet finish(const NetworkGraph& graph, std::vector<std::set<Component>> local, int rounds)
{
    PolicyACRSet out;
    out.rounds = rounds;
    for (int i = 0; i < graph.size(); ++i) {
        out.local.emplace_back(local[i].begin(), local[i].end());
        std::set<Component> u;
        for (int nb : graph.neighbors(i))
            u.insert(local[nb].begin(), local[nb].end());
        out.acr.push_back({i, std::vector<Component>(u.begin(), u.end())});
    }
    return out;
}

// One bulk-synchronous round; returns true if any set grew.
bool propagate(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces,
               std::vector<std::set<Component>>& local)
{
    auto next = local;
    bool changed = false;
    for (int i = 0; i < graph.size(); ++i) {
        std::set<Component> u;
        for (int nb : graph.neighbors(i))
            u.insert(local[nb].begin(), local[nb].end());
        for (const auto& c : parents_into(masks, spaces, i, u))
            if (next[i].insert(c).second)
                changed = true;
    }
    local = std::move(next);
    return changed;
}

std::vector<std::set<Component>> initial_sets(const CausalMasks& masks, int n)
{
    std::vector<std::set<Component>> local(n);
    for (int i = 0; i < n; ++i) {
        auto rp = reward_parents(masks, i);
        local[i].insert(rp.begin(), rp.end());
    }
    return local;
}

} // namespace

ValueACR value_acr(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces, int i, int kappa)
{
    if (kappa < 0)
        throw std::invalid_argument("kappa must be non-negative");
    graph.neighbors(i);
    auto rp = reward_parents(masks, i);
    std::set<Component> acr(rp.begin(), rp.end());
    for (int k = 1; k <= kappa; ++k) {
        std::set<Component> grown = acr;
        for (int agent : graph.k_hop(i, k))
            for (const auto& c : parents_into(masks, spaces, agent, acr))
                grown.insert(c);
        acr = std::move(grown);
    }
    return {i, kappa, std::vector<Component>(acr.begin(), acr.end())};
}

PolicyACRSet policy_acr_fixed_point(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces)
{
    auto local = initial_sets(masks, graph.size());
    int rounds = 0;
    for (;;) {
        ++rounds;
        if (!propagate(masks, graph, spaces, local))
            break;
    }
    return finish(graph, std::move(local), rounds);
}

PolicyACRSet policy_acr_finite(const CausalMasks& masks, const NetworkGraph& graph, const AgentSpaces& spaces,
                               int kappa)
{
    if (kappa < 1)
        throw std::invalid_argument("finite policy ACR needs kappa >= 1");
    auto local = initial_sets(masks, graph.size());
    for (int l = 1; l <= kappa - 1; ++l)
        propagate(masks, graph, spaces, local);
    return finish(graph, std::move(local), kappa - 1);
}

DomainACR domain_acr(const CausalMasks& masks, const std::vector<Component>& state_acr, int i)
{
    std::set<Component> out;
    for (int c = 0; c < static_cast<int>(masks.w_to_r.at(i).size()); ++c)
        if (masks.w_to_r[i][c])
            out.insert({i, c});
    for (const auto& s : state_acr) {
        const Mask& w = masks.w_to_s.at(s.agent).at(s.comp);
        for (int c = 0; c < static_cast<int>(w.size()); ++c)
            if (w[c])
                out.insert({s.agent, c});
    }
    return {i, std::vector<Component>(out.begin(), out.end())};
}

std::vector<Component> all_components(const AgentSpaces& spaces, const std::vector<int>& agents)
{
    std::vector<Component> out;
    for (int a : agents)
        for (int k = 0; k < spaces.state_dim(a); ++k)
            out.push_back({a, k});
    return out;
}

std::vector<Component> all_omega(const std::vector<int>& omega_dims, const std::vector<int>& agents)
{
    std::vector<Component> out;
    for (int a : agents)
        for (int k = 0; k < omega_dims.at(a); ++k)
            out.push_back({a, k});
    return out;
}

std::vector<int> placeholder_fill(const std::vector<Component>& full, const std::vector<Component>& acr,
                                  const std::vector<int>& values)
{
    if (values.size() != acr.size())
        throw std::invalid_argument("placeholder_fill: values must cover exactly the ACR components");
    std::vector<int> out(full.size(), 0);
    for (size_t k = 0; k < acr.size(); ++k) {
        auto it = std::find(full.begin(), full.end(), acr[k]);
        if (it == full.end())
            throw std::invalid_argument("placeholder_fill: ACR component outside the full tuple");
        out[it - full.begin()] = values[k];
    }
    return out;
}

GlobalState fill_state(const GlobalState& s, const std::vector<Component>& keep)
{
    GlobalState out(s.size());
    for (size_t i = 0; i < s.size(); ++i)
        out[i].assign(s[i].size(), 0);
    for (const auto& c : keep)
        out.at(c.agent).at(c.comp) = s[c.agent][c.comp];
    return out;
}

JointAction fill_action(const JointAction& a, const std::vector<int>& keep)
{
    JointAction out(a.size(), 0);
    for (int i : keep)
        out.at(i) = a[i];
    return out;
}

uint64_t checked_product(const std::vector<uint64_t>& factors)
{
    uint64_t p = 1;
    for (uint64_t f : factors) {
        if (f != 0 && p > std::numeric_limits<uint64_t>::max() / f)
            throw std::overflow_error("table key space exceeds 64 bits");
        p *= f;
    }
    return p;
}

IndexMap::IndexMap(std::vector<Component> comps, std::vector<int> cards)
    : comps_(std::move(comps)), cards_(std::move(cards))
{
    if (comps_.size() != cards_.size())
        throw std::invalid_argument("index map needs one cardinality per component");
    std::vector<uint64_t> f;
    for (int c : cards_) {
        if (c < 1)
            throw std::invalid_argument("index map cardinality must be >= 1");
        f.push_back(static_cast<uint64_t>(c));
    }
    size_ = checked_product(f);
}

IndexMap IndexMap::for_states(const AgentSpaces& spaces, std::vector<Component> comps)
{
    std::vector<int> cards;
    for (const auto& c : comps)
        cards.push_back(spaces.state_card(c.agent, c.comp));
    return IndexMap(std::move(comps), std::move(cards));
}

uint64_t IndexMap::encode(const GlobalState& s) const
{
    uint64_t key = 0;
    for (size_t k = 0; k < comps_.size(); ++k)
        key = key * static_cast<uint64_t>(cards_[k]) + static_cast<uint64_t>(s[comps_[k].agent][comps_[k].comp]);
    return key;
}

uint64_t IndexMap::encode_values(const std::vector<int>& values) const
{
    if (values.size() != comps_.size())
        throw std::invalid_argument("index map value count mismatch");
    uint64_t key = 0;
    for (size_t k = 0; k < comps_.size(); ++k) {
        if (values[k] < 0 || values[k] >= cards_[k])
            throw std::invalid_argument("index map value out of range");
        key = key * static_cast<uint64_t>(cards_[k]) + static_cast<uint64_t>(values[k]);
    }
    return key;
}

std::vector<int> IndexMap::decode(uint64_t key) const
{
    if (key >= size_)
        throw std::invalid_argument("index map key out of range");
    std::vector<int> v(comps_.size());
    for (size_t k = comps_.size(); k-- > 0;) {
        v[k] = static_cast<int>(key % static_cast<uint64_t>(cards_[k]));
        key /= static_cast<uint64_t>(cards_[k]);
    }
    return v;
}

} // namespace gsac
