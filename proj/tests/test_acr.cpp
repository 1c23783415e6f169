#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsac/acr.hpp"
#include "gsac/env.hpp"

#include <functional>
#include <set>

using namespace gsac;

namespace {

CausalMasks full_masks(const NetworkGraph& g, const AgentSpaces& sp)
{
    auto m = CausalMasks::empty(sp, std::vector<int>(g.size(), 1));
    for (int i = 0; i < g.size(); ++i) {
        for (int j = 0; j < sp.state_dim(i); ++j) {
            for (int nb : g.neighbors(i))
                for (int k = 0; k < sp.state_dim(nb); ++k)
                    m.s_to_s[i][j][sp.global_index({nb, k})] = 1;
            m.w_to_s[i][j][0] = 1;
        }
        for (int j = 0; j < sp.state_dim(i); ++j)
            m.s_to_r[i][j] = 1;
    }
    return m;
}

// Components with a directed path of at most max_len state edges into a target set.
std::set<Component> reaching(const CausalMasks& m, const AgentSpaces& sp, const std::vector<Component>& targets,
                             int max_len)
{
    std::set<Component> out(targets.begin(), targets.end());
    std::function<void(Component, int)> back = [&](Component c, int left) {
        if (left == 0)
            return;
        for (int g = 0; g < sp.total_components(); ++g)
            if (m.s_to_s[c.agent][c.comp][g]) {
                Component p = sp.component_at(g);
                out.insert(p);
                back(p, left - 1);
            }
    };
    for (const auto& t : targets)
        back(t, max_len);
    return out;
}

std::vector<Component> reward_parents(const CausalMasks& m, int i)
{
    std::vector<Component> rp;
    for (int k = 0; k < static_cast<int>(m.s_to_r[i].size()); ++k)
        if (m.s_to_r[i][k])
            rp.push_back({i, k});
    return rp;
}

} // namespace

TEST_CASE("value ACR")
{
    SUBCASE("full masks keep every component of the kappa-hop neighborhood")
    {
        auto g = NetworkGraph::ring(5);
        auto sp = AgentSpaces::uniform(5, 2, 2, 2);
        auto m = full_masks(g, sp);
        for (int kappa = 0; kappa <= 2; ++kappa)
            for (int i = 0; i < 5; ++i)
                CHECK(value_acr(m, g, sp, i, kappa).comps == all_components(sp, g.k_hop(i, kappa)));
    }
    SUBCASE("matches brute-force path enumeration on random masks")
    {
        auto g = NetworkGraph::line(3);
        auto sp = AgentSpaces::uniform(3, 2, 2, 2);
        for (uint64_t seed = 0; seed < 30; ++seed) {
            auto env = build_synthetic(g, sp, 0.4, OmegaGrid({0.5}), seed);
            const auto& m = env->masks();
            for (int i = 0; i < 3; ++i)
                for (int kappa = 0; kappa <= 2; ++kappa) {
                    auto want = reaching(m, sp, reward_parents(m, i), kappa);
                    auto got = value_acr(m, g, sp, i, kappa).comps;
                    CHECK(std::set<Component>(got.begin(), got.end()) == want);
                }
        }
    }
    CHECK_THROWS_AS(value_acr(CausalMasks::empty(AgentSpaces::uniform(2, 1, 2, 2), {1, 1}), NetworkGraph::line(2),
                              AgentSpaces::uniform(2, 1, 2, 2), 0, -1),
                    std::invalid_argument);
}

TEST_CASE("wireless ACR keeps the two queue bits of each neighbor")
{
    auto env = build_wireless(3, 0.5, 2, 1);
    auto pacr = policy_acr_fixed_point(env->masks(), env->graph(), env->spaces());
    for (int i = 0; i < env->num_agents(); ++i) {
        const auto& nb = env->graph().neighbors(i);
        CHECK(pacr.acr[i].comps.size() == 2 * nb.size());
        for (const auto& c : pacr.acr[i].comps)
            CHECK(c.comp < 2);
        if (nb.size() == 5) {
            CHECK(all_components(env->spaces(), nb).size() == 20);
            CHECK(pacr.acr[i].comps.size() == 10);
        }
        auto dom = domain_acr(env->masks(), pacr.acr[i].comps, i);
        CHECK(dom.comps == all_omega(env->omega_dims(), nb));
    }
}

TEST_CASE("policy ACR")
{
    auto g = NetworkGraph::line(4);
    auto sp = AgentSpaces::uniform(4, 2, 2, 2);
    SUBCASE("empty masks give empty sets")
    {
        auto p = policy_acr_fixed_point(CausalMasks::empty(sp, std::vector<int>(4, 1)), g, sp);
        for (const auto& a : p.acr)
            CHECK(a.comps.empty());
    }
    SUBCASE("full masks keep every local component within diameter + 1 rounds")
    {
        auto p = policy_acr_fixed_point(full_masks(g, sp), g, sp);
        for (int i = 0; i < 4; ++i) {
            CHECK(p.local[i] == all_components(sp, {i}));
            CHECK(p.acr[i].comps == all_components(sp, g.neighbors(i)));
        }
        CHECK(p.rounds <= g.diameter() + 1);
    }
    SUBCASE("fixed point equals the transitive closure into any reward")
    {
        for (uint64_t seed = 0; seed < 30; ++seed) {
            auto env = build_synthetic(g, sp, 0.3, OmegaGrid({0.5}), seed);
            const auto& m = env->masks();
            std::vector<Component> all_rp;
            for (int i = 0; i < 4; ++i)
                for (const auto& c : reward_parents(m, i))
                    all_rp.push_back(c);
            auto closure = reaching(m, sp, all_rp, sp.total_components());
            auto p = policy_acr_fixed_point(m, g, sp);
            std::set<Component> got;
            for (const auto& l : p.local)
                got.insert(l.begin(), l.end());
            CHECK(got == closure);
        }
    }
    SUBCASE("kappa = 1 is the union of direct reward parents over the neighborhood")
    {
        auto env = build_synthetic(g, sp, 0.5, OmegaGrid({0.5}), 9);
        auto p = policy_acr_finite(env->masks(), g, sp, 1);
        for (int i = 0; i < 4; ++i) {
            std::set<Component> want;
            for (int nb : g.neighbors(i))
                for (const auto& c : reward_parents(env->masks(), nb))
                    want.insert(c);
            CHECK(std::set<Component>(p.acr[i].comps.begin(), p.acr[i].comps.end()) == want);
        }
        CHECK_THROWS_AS(policy_acr_finite(env->masks(), g, sp, 0), std::invalid_argument);
    }
    SUBCASE("large kappa reaches the fixed point")
    {
        for (uint64_t seed = 0; seed < 10; ++seed) {
            auto env = build_synthetic(g, sp, 0.4, OmegaGrid({0.5}), seed);
            auto fp = policy_acr_fixed_point(env->masks(), g, sp);
            auto fin = policy_acr_finite(env->masks(), g, sp, g.diameter() + 1 + sp.total_components());
            for (int i = 0; i < 4; ++i)
                CHECK(fp.acr[i].comps == fin.acr[i].comps);
        }
    }
}

TEST_CASE("domain ACR")
{
    auto g = NetworkGraph::line(2);
    auto sp = AgentSpaces::uniform(2, 2, 2, 2);
    auto m = CausalMasks::empty(sp, {1, 1});
    CHECK(domain_acr(m, all_components(sp, {0, 1}), 0).comps.empty());
    m.w_to_s[1][1][0] = 1;
    CHECK(domain_acr(m, {{0, 0}, {1, 0}}, 0).comps.empty());
    CHECK(domain_acr(m, {{1, 1}}, 0).comps == std::vector<Component>{{1, 0}});
    m.w_to_r[0][0] = 1;
    CHECK(domain_acr(m, {}, 0).comps == std::vector<Component>{{0, 0}});
}

TEST_CASE("placeholder filling")
{
    std::vector<Component> full{{0, 0}, {0, 1}, {1, 0}};
    CHECK(placeholder_fill(full, full, {1, 1, 1}) == std::vector<int>{1, 1, 1});
    CHECK(placeholder_fill(full, {}, {}) == std::vector<int>{0, 0, 0});
    CHECK(placeholder_fill(full, {{1, 0}}, {1}) == std::vector<int>{0, 0, 1});
    CHECK_THROWS_AS(placeholder_fill(full, {{1, 0}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(placeholder_fill(full, {{2, 0}}, {1}), std::invalid_argument);

    GlobalState s{{1, 1}, {1, 0}};
    CHECK(fill_state(s, {{0, 1}}) == GlobalState{{0, 1}, {0, 0}});
    CHECK(fill_action({2, 1, 1}, {1}) == JointAction{0, 1, 0});
}

TEST_CASE("index maps")
{
    IndexMap map({{0, 0}, {1, 0}, {1, 1}}, {2, 3, 4});
    CHECK(map.size() == 24);
    for (uint64_t k = 0; k < 24; ++k)
        CHECK(map.encode_values(map.decode(k)) == k);
    CHECK(map.encode(GlobalState{{1}, {2, 3}}) == map.encode_values({1, 2, 3}));
    CHECK_THROWS_AS(map.encode_values({2, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(map.decode(24), std::invalid_argument);
    CHECK(checked_product({1ULL << 20, 1ULL << 20}) == 1ULL << 40);
    CHECK_THROWS_AS(checked_product({1ULL << 40, 1ULL << 40}), std::overflow_error);
}
