#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"

#include "gsac/learner.hpp"
#include "gsac/verify.hpp"

#include <cmath>

using namespace gsac;

namespace {

// One agent whose single-component state takes `states` values, constant reward, self loop.
class ConstEnv : public Environment {
public:
    ConstEnv(int states, double reward)
        : Environment(NetworkGraph::line(1), AgentSpaces({{states}}, {{2}}), uniform_omega(1, 0.5)),
          reward_(reward)
    {
    }
    std::string kind() const override { return "const"; }
    std::unique_ptr<Environment> with_omega(const OmegaValues&) const override
    {
        return std::make_unique<ConstEnv>(spaces_.state_card(0, 0), reward_);
    }
    LocalState sample_initial(int, Stream&) const override { return {0}; }
    std::vector<LocalOutcome> local_outcomes(int, const GlobalState& s, const JointAction&,
                                             const std::vector<double>&) const override
    {
        return {{s[0], reward_, 1.0}};
    }

private:
    double reward_;
};

LearnerLayout raw_layout(const Environment& env, int kappa)
{
    LayoutOptions lo;
    lo.kappa = kappa;
    lo.conditioning = Conditioning::None;
    lo.use_acr = false;
    return make_layout(env.graph(), env.spaces(), env.omega_dims(), nullptr, lo);
}

} // namespace

TEST_CASE("softmax")
{
    auto p = softmax({1.0, 0.0}, 0.5);
    CHECK(p[0] == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)).epsilon(1e-14));
    auto hot = softmax({1e6, 0.0, 0.0}, 1.0);
    CHECK(hot[0] == doctest::Approx(1.0));
    CHECK(hot[1] < 1e-12);
    CHECK_THROWS_AS(LocalizedPolicy({2}, 0.0, 10.0), std::invalid_argument);

    LocalizedPolicy pol({3}, 0.5, 10.0);
    for (double q : pol.probabilities(0, 12))
        CHECK(q == doctest::Approx(1.0 / 3.0));
    Stream rng(3);
    std::vector<int> hits(3, 0);
    const int draws = 10000;
    for (int k = 0; k < draws; ++k)
        ++hits[sample_action(pol, 0, 12, rng)];
    double sigma = std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0));
    for (int h : hits)
        CHECK(std::abs(h - draws / 3.0) <= 3.0 * sigma);
}

TEST_CASE("softmax policy gradient matches finite differences")
{
    auto r = check_softmax_gradient();
    CHECK(r.passed);
}

TEST_CASE("critic TD update")
{
    TruncatedCritic critic(1);
    double change = critic.td_update(0, 4, 5, 1.0, 1.0, 0.95);
    CHECK(critic.value(0, 4) == 1.0);
    CHECK(critic.value(0, 5) == 0.0);
    CHECK(change == 1.0);
    CHECK(critic.entries(0) >= 1);

    TruncatedCritic fixed(1);
    fixed.set(0, 1, 2.0);
    fixed.set(0, 2, 20.0);
    // 2 = 1 + 0.05 * 20 is already the sampled Bellman target
    fixed.td_update(0, 1, 2, 1.0, 0.3, 0.05);
    CHECK(fixed.value(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
    fixed.reset();
    CHECK(fixed.entries(0) == 0);

    CriticSchedule decaying{true, 0.1, 2.0, 3.0};
    CHECK(decaying.at(0) == doctest::Approx(2.0 / 3.0));
    CHECK(decaying.at(7) == doctest::Approx(0.2));
    CriticSchedule constant{false, 0.1, 2.0, 3.0};
    CHECK(constant.at(7) == 0.1);
}

TEST_CASE("policy gradient estimate")
{
    auto env = tiny_mdp_fixture();
    auto layout = raw_layout(*env, 0);
    SUBCASE("single step with a constant critic")
    {
        LocalizedPolicy pol({2}, 0.5, 10.0);
        pol.set_logits(0, 1, {0.3, -0.1});
        TruncatedCritic critic(1);
        critic.set(0, 9, 2.5);
        EpisodeLog ep;
        ep.steps.push_back({{9}, {1}, {1}, {0.0}});
        auto g = estimate_policy_gradient(ep, critic, pol, env->graph(), 0, 0.95);
        auto p = pol.probabilities(0, 1);
        REQUIRE(g[0].count(1) == 1);
        CHECK(g[0].at(1)[0] == doctest::Approx(2.5 * (0.0 - p[0]) / 0.5));
        CHECK(g[0].at(1)[1] == doctest::Approx(2.5 * (1.0 - p[1]) / 0.5));
    }
    SUBCASE("a near-deterministic policy has a vanishing gradient")
    {
        LocalizedPolicy pol({2}, 0.5, 100.0);
        pol.set_logits(0, 0, {40.0, -40.0});
        TruncatedCritic critic(1);
        critic.set(0, 3, 7.0);
        EpisodeLog ep;
        ep.steps.push_back({{3}, {0}, {0}, {1.0}});
        auto g = estimate_policy_gradient(ep, critic, pol, env->graph(), 0, 0.95);
        CHECK(gradient_norm(g) < 1e-12);
    }
}

TEST_CASE("actor update")
{
    LocalizedPolicy pol({2}, 0.5, 1.0);
    pol.set_logits(0, 0, {0.2, -0.2});
    GradientTable zero(1);
    zero[0][0] = {0.0, 0.0};
    actor_update(pol, zero, 0.01);
    CHECK(pol.logits(0, 0) == std::vector<double>{0.2, -0.2});
    GradientTable one(1);
    one[0][0] = {1.0, 0.0};
    actor_update(pol, one, 0.0);
    CHECK(pol.logits(0, 0) == std::vector<double>{0.2, -0.2});
    actor_update(pol, one, 0.01);
    CHECK(pol.logits(0, 0)[0] == doctest::Approx(0.21));
    CHECK(pol.logits(0, 0)[1] == -0.2);
    actor_update(pol, one, 5.0);
    CHECK(pol.logits(0, 0)[0] == 1.0);

    ActorSchedule decaying{true, 0.01};
    CHECK(decaying.at(3) == doctest::Approx(0.005));
}

TEST_CASE("meta-training loop")
{
    auto env = chain_fixture();
    auto layout = raw_layout(*env, 1);
    TrainingSettings ts;
    ts.T = 5;
    SourceDomain src{env.get(), make_context(layout, nullptr, 0)};
    SUBCASE("K = 0 returns the initial policy")
    {
        ts.K = 0;
        auto res = run_meta_training(layout, {src}, ts, 1);
        CHECK(res.logs.empty());
        for (int i = 0; i < 2; ++i)
            CHECK(res.policy.entries(i) == 0);
    }
    SUBCASE("same stream, same result")
    {
        ts.K = 50;
        auto a = run_meta_training(layout, {src}, ts, 4);
        auto b = run_meta_training(layout, {src}, ts, 4);
        REQUIRE(a.logs.size() == 50);
        for (size_t k = 0; k < a.logs.size(); ++k) {
            CHECK(a.logs[k].discounted_return == b.logs[k].discounted_return);
            CHECK(a.logs[k].grad_norm == b.logs[k].grad_norm);
            CHECK(a.logs[k].wall_ms == 0.0);
        }
        CHECK(a.policy.table(0) == b.policy.table(0));
    }
    SUBCASE("an exhausted update budget freezes the policy")
    {
        ts.K = 20;
        ts.update_budget = 0;
        auto res = run_meta_training(layout, {src}, ts, 4);
        CHECK(res.logs.size() == 20);
        for (int i = 0; i < 2; ++i)
            CHECK(res.policy.entries(i) == 0);
    }
    CHECK_THROWS_AS(run_meta_training(layout, {}, ts, 1), ConfigError);
}

TEST_CASE("layouts")
{
    auto env = build_wireless(3, 0.5, 2, 1);
    LayoutOptions lo;
    lo.kappa = 1;
    lo.grid = OmegaGrid({0.2, 0.5, 0.8});
    lo.num_sources = 3;
    auto acr = make_layout(env->graph(), env->spaces(), env->omega_dims(), &env->masks(), lo);
    lo.use_acr = false;
    auto raw = make_layout(env->graph(), env->spaces(), env->omega_dims(), nullptr, lo);
    for (int i = 0; i < env->num_agents(); ++i) {
        CHECK(acr.agents[i].critic_key_space() * 2 <= raw.agents[i].critic_key_space());
        CHECK(acr.agents[i].policy_state.size() * 2 == raw.agents[i].policy_state.size());
    }
    lo.use_acr = true;
    CHECK_THROWS_AS(make_layout(env->graph(), env->spaces(), env->omega_dims(), nullptr, lo), ConfigError);
}

TEST_CASE("exact oracle")
{
    SUBCASE("zero reward gives Q = 0")
    {
        ConstEnv env(3, 0.0);
        auto q = exact_q_oracle(env, uniform_policy(env.spaces()), env.omega(), 0.95, 1e-12);
        for (double x : q.Q[0])
            CHECK(x == 0.0);
    }
    SUBCASE("unit reward forever gives 1 / (1 - gamma)")
    {
        ConstEnv env(1, 1.0);
        auto q = exact_q_oracle(env, uniform_policy(env.spaces()), env.omega(), 0.95, 1e-12);
        for (double x : q.Q[0])
            CHECK(x == doctest::Approx(20.0).epsilon(1e-9));
    }
    SUBCASE("agrees with a direct linear solve")
    {
        auto env = ring_fixture(false);
        auto pi = random_local_policy(*env, 11);
        auto q = exact_q_oracle(*env, pi, env->omega(), 0.9, 1e-12);
        auto ref = oracle::solve(*env, pi, env->omega(), 0.9);
        StateEnumerator en(env->spaces());
        double gap = 0.0;
        for (int i = 0; i < env->num_agents(); ++i)
            for (int s = 0; s < ref.en.S(); ++s)
                for (int a = 0; a < ref.en.A(); ++a) {
                    uint64_t k = en.state_index(ref.en.states[s]) * q.num_actions + en.action_index(ref.en.actions[a]);
                    gap = std::max(gap, std::abs(q.Q[i][k] - ref.Q[i](s * ref.en.A() + a)));
                }
        CHECK(gap < 1e-8);
        for (int i = 0; i < env->num_agents(); ++i) {
            auto d = decay_measurements(q, *env, i, 3);
            for (int kappa = 0; kappa <= 3; ++kappa)
                CHECK(d[kappa] == doctest::Approx(oracle::decay_sup(ref, *env, i, kappa)).epsilon(1e-6));
        }
    }
    SUBCASE("capacity")
    {
        auto env = build_wireless(3, 0.5, 2, 1);
        CHECK_THROWS_AS(exact_q_oracle(*env, uniform_policy(env->spaces()), env->omega(), 0.95, 1e-6),
                        CapacityError);
    }
}
