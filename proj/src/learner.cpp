#include "gsac/learner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

namespace gsac {

uint64_t AgentLayout::critic_key_space() const
{
    return checked_product({critic_map.size(), critic_action_space, critic_cond_space});
}

uint64_t AgentLayout::policy_key_space() const
{
    return checked_product({policy_map.size(), policy_cond_space});
}

namespace {

uint64_t grid_power(int grid_size, size_t count)
{
    std::vector<uint64_t> f(count, static_cast<uint64_t>(grid_size));
    return checked_product(f);
}

} // namespace

LearnerLayout make_layout(const NetworkGraph& graph, const AgentSpaces& spaces, const std::vector<int>& omega_dims,
                          const CausalMasks* masks, const LayoutOptions& opts)
{
    if (opts.kappa < 0)
        throw ConfigError("kappa must be non-negative");
    if (opts.use_acr && masks == nullptr)
        throw ConfigError("ACR tables requested but no causal masks are available (set the ACR-free flag)");
    if (opts.conditioning == Conditioning::DomainFactor && opts.grid.size() == 0)
        throw ConfigError("domain-factor conditioning needs an omega grid");
    if (opts.num_sources < 1)
        throw ConfigError("at least one source domain is required");
    LearnerLayout L;
    L.kappa = opts.kappa;
    L.conditioning = opts.conditioning;
    L.use_acr = opts.use_acr;
    L.num_sources = opts.num_sources;
    L.grid = opts.grid;
    PolicyACRSet pacr;
    if (opts.use_acr)
        pacr = policy_acr_fixed_point(*masks, graph, spaces);
    for (int i = 0; i < graph.size(); ++i) {
        AgentLayout al;
        auto nk = graph.k_hop(i, opts.kappa);
        const auto& n1 = graph.neighbors(i);
        if (opts.use_acr) {
            al.critic_state = value_acr(*masks, graph, spaces, i, opts.kappa).comps;
            al.policy_state = pacr.acr[i].comps;
        } else {
            al.critic_state = all_components(spaces, nk);
            al.policy_state = all_components(spaces, n1);
        }
        al.critic_agents = nk;
        switch (opts.conditioning) {
        case Conditioning::DomainFactor:
            al.critic_domain = opts.use_acr ? domain_acr(*masks, al.critic_state, i).comps : all_omega(omega_dims, nk);
            al.policy_domain = opts.use_acr ? domain_acr(*masks, al.policy_state, i).comps : all_omega(omega_dims, n1);
            al.critic_cond_space = grid_power(opts.grid.size(), al.critic_domain.size());
            al.policy_cond_space = grid_power(opts.grid.size(), al.policy_domain.size());
            break;
        case Conditioning::SourceOneHot:
            al.critic_cond_space = static_cast<uint64_t>(opts.num_sources);
            al.policy_cond_space = static_cast<uint64_t>(opts.num_sources);
            break;
        case Conditioning::None:
            break;
        }
        al.critic_map = IndexMap::for_states(spaces, al.critic_state);
        al.policy_map = IndexMap::for_states(spaces, al.policy_state);
        std::vector<uint64_t> acts;
        for (int j : nk)
            acts.push_back(static_cast<uint64_t>(spaces.action_count(j)));
        al.critic_action_space = checked_product(acts);
        for (int j = 0; j < spaces.num_agents(); ++j)
            al.action_counts.push_back(spaces.action_count(j));
        al.critic_key_space();
        al.policy_key_space();
        L.agents.push_back(std::move(al));
    }
    return L;
}

DomainContext make_context(const LearnerLayout& layout, const DomainFactor* omega_hat, int source_index)
{
    DomainContext ctx;
    for (const auto& al : layout.agents) {
        switch (layout.conditioning) {
        case Conditioning::DomainFactor: {
            if (omega_hat == nullptr)
                throw ConfigError("domain-factor conditioning needs an omega estimate");
            auto encode = [&](const std::vector<Component>& comps) {
                uint64_t key = 0;
                for (const auto& c : comps)
                    key = key * static_cast<uint64_t>(layout.grid.size()) +
                          static_cast<uint64_t>(omega_hat->index.at(c.agent).at(c.comp));
                return key;
            };
            ctx.critic_cond.push_back(encode(al.critic_domain));
            ctx.policy_cond.push_back(encode(al.policy_domain));
            break;
        }
        case Conditioning::SourceOneHot:
            if (source_index < 0 || source_index >= layout.num_sources)
                throw ConfigError("source index out of range");
            ctx.critic_cond.push_back(static_cast<uint64_t>(source_index));
            ctx.policy_cond.push_back(static_cast<uint64_t>(source_index));
            break;
        case Conditioning::None:
            ctx.critic_cond.push_back(0);
            ctx.policy_cond.push_back(0);
            break;
        }
    }
    return ctx;
}

double TruncatedCritic::value(int i, uint64_t key) const
{
    const auto& t = tables_.at(i);
    auto it = t.find(key);
    return it == t.end() ? 0.0 : it->second;
}

double TruncatedCritic::td_update(int i, uint64_t key_prev, uint64_t key_next, double reward, double alpha,
                                  double gamma)
{
    double next = value(i, key_next);
    double& q = tables_.at(i)[key_prev];
    double updated = (1.0 - alpha) * q + alpha * (reward + gamma * next);
    double delta = std::abs(updated - q);
    q = updated;
    return delta;
}

void TruncatedCritic::reset()
{
    for (auto& t : tables_)
        t.clear();
}

std::vector<double> softmax(const std::vector<double>& logits, double tau)
{
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp((logits[k] - mx) / tau);
        z += p[k];
    }
    for (auto& x : p)
        x /= z;
    return p;
}

LocalizedPolicy::LocalizedPolicy(std::vector<int> action_counts, double tau, double theta_max)
    : action_counts_(std::move(action_counts)), tau_(tau), theta_max_(theta_max), tables_(action_counts_.size())
{
    if (!(tau > 0.0))
        throw std::invalid_argument("softmax temperature must be positive");
    if (!(theta_max > 0.0))
        throw std::invalid_argument("logit bound must be positive");
}

std::vector<double> LocalizedPolicy::logits(int i, uint64_t key) const
{
    const auto& t = tables_.at(i);
    auto it = t.find(key);
    return it == t.end() ? std::vector<double>(action_counts_[i], 0.0) : it->second;
}

std::vector<double> LocalizedPolicy::probabilities(int i, uint64_t key) const
{
    return softmax(logits(i, key), tau_);
}

int LocalizedPolicy::sample(int i, uint64_t key, double u) const
{
    auto p = probabilities(i, key);
    double acc = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        if (u < acc)
            return static_cast<int>(k);
    }
    return static_cast<int>(p.size()) - 1;
}

std::vector<double> LocalizedPolicy::grad_log(int i, uint64_t key, int a) const
{
    auto p = probabilities(i, key);
    for (size_t k = 0; k < p.size(); ++k)
        p[k] = ((static_cast<int>(k) == a ? 1.0 : 0.0) - p[k]) / tau_;
    return p;
}

void LocalizedPolicy::apply(int i, uint64_t key, const std::vector<double>& g, double eta)
{
    if (static_cast<int>(g.size()) != action_counts_.at(i))
        throw std::invalid_argument("gradient has wrong action count");
    auto& row = tables_[i].try_emplace(key, std::vector<double>(action_counts_[i], 0.0)).first->second;
    for (size_t k = 0; k < row.size(); ++k)
        row[k] = std::clamp(row[k] + eta * g[k], -theta_max_, theta_max_);
}

void LocalizedPolicy::set_logits(int i, uint64_t key, std::vector<double> logits)
{
    if (static_cast<int>(logits.size()) != action_counts_.at(i))
        throw std::invalid_argument("logit row has wrong action count");
    tables_[i][key] = std::move(logits);
}

int sample_action(const LocalizedPolicy& policy, int i, uint64_t policy_key, Stream& rng)
{
    return policy.sample(i, policy_key, rng.uniform());
}

uint64_t critic_key(const AgentLayout& al, const GlobalState& s, const JointAction& a, const AgentSpaces& spaces,
                    uint64_t cond)
{
    uint64_t act = 0;
    for (int j : al.critic_agents)
        act = act * static_cast<uint64_t>(spaces.action_count(j)) + static_cast<uint64_t>(a[j]);
    return (al.critic_map.encode(s) * al.critic_action_space + act) * al.critic_cond_space + cond;
}

uint64_t policy_key(const AgentLayout& al, const GlobalState& s, uint64_t cond)
{
    return al.policy_map.encode(s) * al.policy_cond_space + cond;
}

EpisodeLog rollout_episode(const Environment& env, const LearnerLayout& layout, const LocalizedPolicy& policy,
                           const DomainContext& ctx, int T, double gamma, uint64_t stream_seed)
{
    int n = env.num_agents();
    EpisodeLog ep;
    GlobalState s = env.reset(derive_seed(stream_seed, {kTagReset}));
    double disc = 1.0;
    for (int t = 0; t <= T; ++t) {
        StepRecord rec;
        rec.action.resize(n);
        for (int i = 0; i < n; ++i) {
            uint64_t pk = policy_key(layout.agents[i], s, ctx.policy_cond[i]);
            Stream rng(derive_seed(stream_seed, {kTagAction, static_cast<uint64_t>(t), static_cast<uint64_t>(i)}));
            rec.action[i] = sample_action(policy, i, pk, rng);
            rec.policy_key.push_back(pk);
        }
        for (int i = 0; i < n; ++i)
            rec.critic_key.push_back(critic_key(layout.agents[i], s, rec.action, env.spaces(), ctx.critic_cond[i]));
        StepResult r = env.step(s, rec.action, derive_seed(stream_seed, {kTagStep, static_cast<uint64_t>(t)}));
        double mean = 0.0;
        for (double x : r.rewards)
            mean += x;
        ep.discounted_return += disc * mean / n;
        disc *= gamma;
        rec.rewards = std::move(r.rewards);
        ep.steps.push_back(std::move(rec));
        s = std::move(r.next);
    }
    return ep;
}

double ActorSchedule::at(int k) const
{
    return decaying ? eta / std::sqrt(static_cast<double>(k) + 1.0) : eta;
}

void critic_td_update(TruncatedCritic& critic, int i, uint64_t key_prev, uint64_t key_next, double reward,
                      double alpha, double gamma)
{
    critic.td_update(i, key_prev, key_next, reward, alpha, gamma);
}

double critic_pass(TruncatedCritic& critic, const EpisodeLog& ep, const CriticSchedule& schedule, double gamma)
{
    int n = critic.num_agents();
    std::vector<double> sup(n, 0.0);
    for (size_t t = 1; t < ep.steps.size(); ++t) {
        double alpha = schedule.at(static_cast<int>(t) - 1);
        const auto& prev = ep.steps[t - 1];
        const auto& cur = ep.steps[t];
        for (int i = 0; i < n; ++i)
            sup[i] = std::max(sup[i], critic.td_update(i, prev.critic_key[i], cur.critic_key[i], prev.rewards[i],
                                                       alpha, gamma));
    }
    double mean = 0.0;
    for (double x : sup)
        mean += x;
    return n > 0 ? mean / n : 0.0;
}

GradientTable estimate_policy_gradient(const EpisodeLog& ep, const TruncatedCritic& critic,
                                       const LocalizedPolicy& policy, const NetworkGraph& graph, int kappa,
                                       double gamma)
{
    int n = graph.size();
    GradientTable g(n);
    std::vector<std::vector<int>> hops;
    for (int i = 0; i < n; ++i)
        hops.push_back(graph.k_hop(i, kappa));
    for (int i = 0; i < n; ++i) {
        double disc = 1.0;
        for (const auto& st : ep.steps) {
            double q = 0.0;
            for (int j : hops[i])
                q += critic.value(j, st.critic_key[j]);
            double coef = disc * q / n;
            auto gl = policy.grad_log(i, st.policy_key[i], st.action[i]);
            auto& acc = g[i].try_emplace(st.policy_key[i], std::vector<double>(gl.size(), 0.0)).first->second;
            for (size_t k = 0; k < gl.size(); ++k)
                acc[k] += coef * gl[k];
            disc *= gamma;
        }
    }
    return g;
}

double gradient_norm(const GradientTable& g)
{
    double s = 0.0;
    for (const auto& agent : g)
        for (const auto& [key, row] : agent)
            for (double x : row)
                s += x * x;
    return std::sqrt(s);
}

void actor_update(LocalizedPolicy& policy, const GradientTable& g, double eta)
{
    for (int i = 0; i < static_cast<int>(g.size()); ++i)
        for (const auto& [key, row] : g[i])
            policy.apply(i, key, row, eta);
}

LocalizedPolicy initial_policy(const LearnerLayout& layout, const TrainingSettings& settings)
{
    std::vector<int> counts;
    for (size_t i = 0; i < layout.agents.size(); ++i)
        counts.push_back(layout.agents[i].action_counts.at(i));
    return LocalizedPolicy(counts, settings.tau, settings.theta_max);
}

TrainingResult run_meta_training(const LearnerLayout& layout, const std::vector<SourceDomain>& sources,
                                 const TrainingSettings& settings, uint64_t stream_seed, const LocalizedPolicy* init)
{
    TrainingResult res;
    res.policy = init ? *init : initial_policy(layout, settings);
    if (sources.empty())
        throw ConfigError("meta-training needs at least one source domain");
    for (const auto& src : sources)
        if (src.env == nullptr || src.ctx.policy_cond.size() != layout.agents.size())
            throw ConfigError("source domain is missing its environment or conditioning context");
    if (settings.K == 0)
        return res;
    const auto& graph = sources.front().env->graph();
    TruncatedCritic critic(graph.size());
    int M = static_cast<int>(sources.size());
    auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < settings.K; ++k) {
        uint64_t sk = derive_seed(stream_seed, {static_cast<uint64_t>(k)});
        int m = 0;
        if (M > 1) {
            Stream rng(derive_seed(sk, {kTagDomain}));
            m = rng.uniform_int(M);
        }
        EpisodeLog ep =
            rollout_episode(*sources[m].env, layout, res.policy, sources[m].ctx, settings.T, settings.gamma, sk);
        IterationSummary sum;
        sum.k = k;
        sum.domain = m;
        sum.discounted_return = ep.discounted_return;
        if (settings.update_budget < 0 || k < settings.update_budget) {
            if (!settings.warm_start)
                critic.reset();
            sum.critic_delta = critic_pass(critic, ep, settings.critic, settings.gamma);
            auto g = estimate_policy_gradient(ep, critic, res.policy, graph, layout.kappa, settings.gamma);
            sum.grad_norm = gradient_norm(g);
            actor_update(res.policy, g, settings.actor.at(k));
        }
        if (settings.record_wall_time)
            sum.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        res.logs.push_back(sum);
    }
    return res;
}

uint64_t adaptation_stream(uint64_t seed)
{
    return derive_seed(seed, {kTagAdapt});
}

std::vector<double> evaluate_policy(const Environment& env, const LearnerLayout& layout, const LocalizedPolicy& policy,
                                    const DomainContext& ctx, int episodes, const TrainingSettings& settings,
                                    uint64_t stream_seed)
{
    std::vector<double> out;
    for (int e = 0; e < episodes; ++e)
        out.push_back(rollout_episode(env, layout, policy, ctx, settings.T, settings.gamma,
                                      derive_seed(stream_seed, {static_cast<uint64_t>(e)}))
                          .discounted_return);
    return out;
}

AdaptationResult adapt_and_deploy(const LearnerLayout& layout, const LocalizedPolicy& policy,
                                  const Environment& target, const CausalMasks& masks, int T_a,
                                  const std::vector<std::vector<double>>& source_values, int eval_episodes,
                                  const TrainingSettings& settings, uint64_t seed)
{
    if (T_a < 1)
        throw std::invalid_argument("domain estimation requires at least one adaptation trajectory");
    AdaptationResult res;
    auto trajs = collect_trajectories(target, T_a, settings.T, derive_seed(seed, {kTagAdapt, kTagEstimate}));
    res.estimate = estimate_domain_factor(trajs, masks, target, layout.grid);
    res.snapped = res.estimate.factor();
    for (size_t i = 0; i < res.snapped.index.size(); ++i)
        for (auto& idx : res.snapped.index[i]) {
            if (i >= source_values.size() || source_values[i].empty())
                continue;
            double v = layout.grid.value(idx);
            const auto& allowed = source_values[i];
            if (std::find(allowed.begin(), allowed.end(), v) != allowed.end())
                continue;
            double best = allowed.front();
            for (double a : allowed)
                if (std::abs(a - v) < std::abs(best - v) || (std::abs(a - v) == std::abs(best - v) && a < best))
                    best = a;
            idx = layout.grid.nearest(best);
            ++res.snapped_agents;
        }
    if (res.snapped_agents > 0)
        spdlog::warn("adaptation: {} agent estimates were never source values; snapped to the nearest source value",
                     res.snapped_agents);
    res.ctx = make_context(layout, &res.snapped, 0);
    res.returns = evaluate_policy(target, layout, policy, res.ctx, eval_episodes, settings, adaptation_stream(seed));
    return res;
}

// ---------------------------------------------------------------- oracle

JointPolicyFn policy_function(const LearnerLayout& layout, const LocalizedPolicy& policy, const DomainContext& ctx)
{
    return [&layout, &policy, ctx](int i, const GlobalState& s) {
        return policy.probabilities(i, policy_key(layout.agents[i], s, ctx.policy_cond[i]));
    };
}

JointPolicyFn uniform_policy(const AgentSpaces& spaces)
{
    return [spaces](int i, const GlobalState&) {
        int c = spaces.action_count(i);
        return std::vector<double>(c, 1.0 / c);
    };
}

StateEnumerator::StateEnumerator(const AgentSpaces& spaces) : spaces_(&spaces)
{
    int n = spaces.num_agents();
    stride_.assign(n, 1);
    action_stride_.assign(n, 1);
    for (int i = n; i-- > 0;) {
        stride_[i] = num_states_;
        action_stride_[i] = num_actions_;
        num_states_ = checked_product({num_states_, spaces.local_state_count(i)});
        num_actions_ = checked_product({num_actions_, static_cast<uint64_t>(spaces.action_count(i))});
    }
}

uint64_t StateEnumerator::local_index(int i, const LocalState& si) const
{
    uint64_t idx = 0;
    for (int j = 0; j < spaces_->state_dim(i); ++j)
        idx = idx * static_cast<uint64_t>(spaces_->state_card(i, j)) + static_cast<uint64_t>(si[j]);
    return idx;
}

GlobalState StateEnumerator::state(uint64_t idx) const
{
    int n = spaces_->num_agents();
    GlobalState s(n);
    for (int i = 0; i < n; ++i) {
        uint64_t local = (idx / stride_[i]) % spaces_->local_state_count(i);
        s[i].resize(spaces_->state_dim(i));
        for (int j = spaces_->state_dim(i); j-- > 0;) {
            s[i][j] = static_cast<int>(local % static_cast<uint64_t>(spaces_->state_card(i, j)));
            local /= static_cast<uint64_t>(spaces_->state_card(i, j));
        }
    }
    return s;
}

JointAction StateEnumerator::action(uint64_t idx) const
{
    int n = spaces_->num_agents();
    JointAction a(n);
    for (int i = 0; i < n; ++i)
        a[i] = static_cast<int>((idx / action_stride_[i]) % static_cast<uint64_t>(spaces_->action_count(i)));
    return a;
}

uint64_t StateEnumerator::state_index(const GlobalState& s) const
{
    uint64_t idx = 0;
    for (int i = 0; i < spaces_->num_agents(); ++i)
        idx += local_index(i, s[i]) * stride_[i];
    return idx;
}

uint64_t StateEnumerator::action_index(const JointAction& a) const
{
    uint64_t idx = 0;
    for (int i = 0; i < spaces_->num_agents(); ++i)
        idx += static_cast<uint64_t>(a[i]) * action_stride_[i];
    return idx;
}

namespace {

struct JointKernel {
    std::vector<std::pair<uint64_t, double>> next;
    std::vector<double> reward;
};

JointKernel joint_kernel(const Environment& env, const StateEnumerator& en, const GlobalState& s, const JointAction& a,
                         const OmegaValues& omega)
{
    int n = env.num_agents();
    JointKernel k;
    k.reward.assign(n, 0.0);
    k.next = {{0, 1.0}};
    for (int i = 0; i < n; ++i) {
        std::map<uint64_t, double> marg;
        for (const auto& o : env.local_outcomes(i, s, a, omega[i])) {
            marg[en.local_index(i, o.next)] += o.prob;
            k.reward[i] += o.prob * o.reward;
        }
        std::vector<std::pair<uint64_t, double>> grown;
        grown.reserve(k.next.size() * marg.size());
        for (const auto& [idx, p] : k.next)
            for (const auto& [l, q] : marg)
                grown.emplace_back(idx + l * en.agent_stride(i), p * q);
        k.next = std::move(grown);
    }
    return k;
}

} // namespace

OracleResult exact_q_oracle(const Environment& env, const JointPolicyFn& policy, const OmegaValues& omega,
                            double gamma, double tolerance, uint64_t capacity)
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("oracle discount must lie in [0,1)");
    if (static_cast<int>(omega.size()) != env.num_agents())
        throw std::invalid_argument("oracle omega must be given per agent");
    std::optional<StateEnumerator> maybe;
    try {
        maybe.emplace(env.spaces());
    } catch (const std::overflow_error&) {
        throw CapacityError("state-action space too large for the exact oracle: index overflow");
    }
    const StateEnumerator& en = *maybe;
    uint64_t S = en.num_states();
    uint64_t A = en.num_actions();
    if (S > capacity / A || S * S > 16ULL * capacity)
        throw CapacityError("state-action space too large for the exact oracle: |S|=" + std::to_string(S) +
                            " |A|=" + std::to_string(A));
    int n = env.num_agents();

    std::vector<double> P(S * S, 0.0);
    std::vector<double> Rpi(S * n, 0.0);
    std::vector<double> R(S * A * n, 0.0);
    for (uint64_t si = 0; si < S; ++si) {
        GlobalState s = en.state(si);
        std::vector<std::vector<double>> pis(n);
        for (int i = 0; i < n; ++i) {
            pis[i] = policy(i, s);
            if (static_cast<int>(pis[i].size()) != env.spaces().action_count(i))
                throw std::invalid_argument("policy returned the wrong number of action probabilities");
        }
        for (uint64_t ai = 0; ai < A; ++ai) {
            JointAction a = en.action(ai);
            double pa = 1.0;
            for (int i = 0; i < n; ++i)
                pa *= pis[i][a[i]];
            JointKernel k = joint_kernel(env, en, s, a, omega);
            for (int i = 0; i < n; ++i) {
                R[(si * A + ai) * n + i] = k.reward[i];
                Rpi[si * n + i] += pa * k.reward[i];
            }
            if (pa > 0.0)
                for (const auto& [nx, p] : k.next)
                    P[si * S + nx] += pa * p;
        }
    }

    OracleResult res;
    res.num_states = S;
    res.num_actions = A;
    std::vector<double> V(S * n, 0.0), Vn(S * n);
    double stop = tolerance * (1.0 - gamma) / std::max(gamma, 1e-12);
    for (;;) {
        double diff = 0.0;
        for (uint64_t si = 0; si < S; ++si)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                const double* row = &P[si * S];
                for (uint64_t nx = 0; nx < S; ++nx)
                    acc += row[nx] * V[nx * n + i];
                double v = Rpi[si * n + i] + gamma * acc;
                diff = std::max(diff, std::abs(v - V[si * n + i]));
                Vn[si * n + i] = v;
            }
        V.swap(Vn);
        ++res.iterations;
        res.residual = diff;
        if (diff <= stop)
            break;
        if (res.iterations > 10000000)
            throw std::runtime_error("oracle policy evaluation did not converge");
    }

    res.V.assign(n, std::vector<double>(S));
    res.Q.assign(n, std::vector<double>(S * A));
    for (uint64_t si = 0; si < S; ++si) {
        for (int i = 0; i < n; ++i)
            res.V[i][si] = V[si * n + i];
        GlobalState s = en.state(si);
        for (uint64_t ai = 0; ai < A; ++ai) {
            JointKernel k = joint_kernel(env, en, s, en.action(ai), omega);
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (const auto& [nx, p] : k.next)
                    acc += p * V[nx * n + i];
                res.Q[i][si * A + ai] = R[(si * A + ai) * n + i] + gamma * acc;
            }
        }
    }
    return res;
}

std::vector<double> decay_measurements(const OracleResult& q, const Environment& env, int i, int max_kappa)
{
    StateEnumerator en(env.spaces());
    const auto& sp = env.spaces();
    std::vector<double> out;
    for (int kappa = 0; kappa <= max_kappa; ++kappa) {
        auto inside = env.graph().k_hop(i, kappa);
        std::unordered_map<uint64_t, std::pair<double, double>> range;
        for (uint64_t si = 0; si < q.num_states; ++si) {
            uint64_t ks = 0;
            for (int j : inside)
                ks += ((si / en.agent_stride(j)) % sp.local_state_count(j)) * en.agent_stride(j);
            GlobalState dummy;
            for (uint64_t ai = 0; ai < q.num_actions; ++ai) {
                JointAction a = en.action(ai);
                JointAction kept = fill_action(a, inside);
                uint64_t key = ks * q.num_actions + en.action_index(kept);
                double v = q.Q[i][si * q.num_actions + ai];
                auto [it, fresh] = range.try_emplace(key, v, v);
                if (!fresh) {
                    it->second.first = std::min(it->second.first, v);
                    it->second.second = std::max(it->second.second, v);
                }
            }
        }
        double sup = 0.0;
        for (const auto& [key, mm] : range)
            sup = std::max(sup, mm.second - mm.first);
        out.push_back(sup);
    }
    return out;
}

} // namespace gsac
