#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsac/env.hpp"
#include "gsac/network.hpp"

#include <stdexcept>

using namespace gsac;

TEST_CASE("k-hop neighborhoods on a ring")
{
    auto g = NetworkGraph::ring(4);
    CHECK(g.k_hop(0, 0) == std::vector<int>{0});
    CHECK(g.k_hop(0, 1) == std::vector<int>{0, 1, 3});
    CHECK(g.k_hop(0, 2) == std::vector<int>{0, 1, 2, 3});
    CHECK(k_hop_neighborhood(g, 2, 1) == std::vector<int>{1, 2, 3});
    CHECK_THROWS_AS(g.k_hop(4, 1), std::invalid_argument);
    CHECK_THROWS_AS(g.k_hop(-1, 0), std::invalid_argument);
    CHECK_THROWS_AS(g.k_hop(0, -1), std::invalid_argument);
}

TEST_CASE("wireless lattice: interior users see five agents")
{
    auto g = NetworkGraph::lattice(4, 4);
    CHECK(g.size() == 16);
    int interior = 0;
    for (int i = 0; i < 16; ++i) {
        auto nb = g.k_hop(i, 1);
        int r = i / 4, c = i % 4;
        bool inner = r > 0 && r < 3 && c > 0 && c < 3;
        if (inner) {
            ++interior;
            CHECK(nb.size() == 5);
        }
        CHECK(nb == g.neighbors(i));
    }
    CHECK(interior == 4);
    CHECK(g.diameter() == 6);
}

TEST_CASE("line graph distances")
{
    auto g = NetworkGraph::line(5);
    CHECK(g.distances_from(0) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(g.adjacent(1, 2));
    CHECK_FALSE(g.adjacent(0, 2));
    CHECK(g.edges().size() == 4);
    CHECK_THROWS_AS(NetworkGraph(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("agent spaces encode and decode actions")
{
    AgentSpaces sp({{2, 3}}, {{2, 3}});
    CHECK(sp.action_count(0) == 6);
    for (int a = 0; a < 6; ++a)
        CHECK(sp.encode_action(0, sp.decode_action(0, a)) == a);
    CHECK(sp.total_components() == 2);
    CHECK(sp.component_at(1) == Component{0, 1});
    CHECK(sp.local_state_count(0) == 6);
    CHECK_THROWS_AS(sp.check_state({{2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(sp.check_action({6}), std::invalid_argument);
}

TEST_CASE("mask validation")
{
    auto g = NetworkGraph::line(2);
    auto sp = AgentSpaces::uniform(2, 1, 2, 2);
    SUBCASE("identity-shaped masks on a 2-agent chain are valid")
    {
        auto m = CausalMasks::empty(sp, {1, 1});
        for (int i = 0; i < 2; ++i)
            m.s_to_s[i][0][sp.global_index({i, 0})] = 1;
        CHECK(validate_masks(m, g, sp).empty());
    }
    SUBCASE("a non-neighbor parent yields one locality violation")
    {
        auto g3 = NetworkGraph::line(3);
        auto sp3 = AgentSpaces::uniform(3, 1, 2, 2);
        auto m = CausalMasks::empty(sp3, {1, 1, 1});
        m.s_to_s[0][0][sp3.global_index({2, 0})] = 1;
        auto v = validate_masks(m, g3, sp3);
        REQUIRE(v.size() == 1);
        CHECK(v[0].agent == 0);
    }
    SUBCASE("synthetic masks are valid by construction")
    {
        auto env = build_synthetic(NetworkGraph::ring(5), AgentSpaces::uniform(5, 2, 2, 2), 0.5,
                                   OmegaGrid({0.2, 0.5, 0.8}), 3);
        CHECK(validate_masks(env->masks(), env->graph(), env->spaces()).empty());
    }
}

TEST_CASE("omega grid lookups")
{
    OmegaGrid grid({0.2, 0.5, 0.8});
    CHECK(grid.index_of(0.5) == 1);
    CHECK(grid.index_of(0.4) == -1);
    CHECK(grid.nearest(0.64) == 1);
    CHECK(grid.nearest(0.66) == 2);
    CHECK(grid.nearest(0.65) == 1);
    CHECK(grid.nearest(-3.0) == 0);
    CHECK_THROWS_AS(OmegaGrid(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(OmegaGrid({0.5, 0.2}), std::invalid_argument);
}
