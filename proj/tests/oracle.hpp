#pragma once

// Test-side reference computations. Everything here is solved directly with
// dense linear algebra and never calls the library's own oracle.

#include "gsac/learner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using gsac::Environment;
using gsac::GlobalState;
using gsac::JointAction;
using gsac::JointPolicyFn;

// Flat enumeration of joint states and actions; agent 0 is the most significant digit.
struct Enumeration {
    std::vector<GlobalState> states;
    std::vector<JointAction> actions;

    explicit Enumeration(const gsac::AgentSpaces& sp)
    {
        states.push_back({});
        for (int i = 0; i < sp.num_agents(); ++i) {
            std::vector<gsac::LocalState> locals{{}};
            for (int j = 0; j < sp.state_dim(i); ++j) {
                std::vector<gsac::LocalState> grown;
                for (const auto& l : locals)
                    for (int v = 0; v < sp.state_card(i, j); ++v) {
                        auto e = l;
                        e.push_back(v);
                        grown.push_back(e);
                    }
                locals = grown;
            }
            std::vector<GlobalState> grown;
            for (const auto& s : states)
                for (const auto& l : locals) {
                    auto e = s;
                    e.push_back(l);
                    grown.push_back(e);
                }
            states = grown;
        }
        actions.push_back({});
        for (int i = 0; i < sp.num_agents(); ++i) {
            std::vector<JointAction> grown;
            for (const auto& a : actions)
                for (int v = 0; v < sp.action_count(i); ++v) {
                    auto e = a;
                    e.push_back(v);
                    grown.push_back(e);
                }
            actions = grown;
        }
    }

    int S() const { return static_cast<int>(states.size()); }
    int A() const { return static_cast<int>(actions.size()); }

    int state_index(const GlobalState& s) const
    {
        for (int k = 0; k < S(); ++k)
            if (states[k] == s)
                return k;
        return -1;
    }
    int action_index(const JointAction& a) const
    {
        for (int k = 0; k < A(); ++k)
            if (actions[k] == a)
                return k;
        return -1;
    }
};

struct Solution {
    Enumeration en;
    /// Q[i](s * A + a)
    std::vector<Eigen::VectorXd> Q;
    std::vector<Eigen::VectorXd> V;
    Eigen::MatrixXd P;  // (S*A) x S
    Eigen::MatrixXd Pi; // S x A, joint action probabilities
};

inline double joint_prob(const Environment& env, const GlobalState& s, const JointAction& a,
                         const GlobalState& next, const gsac::OmegaValues& omega)
{
    double p = 1.0;
    for (int i = 0; i < env.num_agents() && p > 0.0; ++i)
        p *= env.local_probability(i, s, a, omega[i], next[i]);
    return p;
}

inline double local_reward(const Environment& env, int i, const GlobalState& s, const JointAction& a,
                           const gsac::OmegaValues& omega)
{
    double r = 0.0;
    for (const auto& o : env.local_outcomes(i, s, a, omega[i]))
        r += o.prob * o.reward;
    return r;
}

/// Q_i = r_i + gamma P V_i with V_i = (I - gamma P_pi)^{-1} r_pi,i.
inline Solution solve(const Environment& env, const JointPolicyFn& pi, const gsac::OmegaValues& omega, double gamma)
{
    Solution sol{Enumeration(env.spaces()), {}, {}, {}, {}};
    const auto& en = sol.en;
    const int S = en.S(), A = en.A(), n = env.num_agents();
    sol.P = Eigen::MatrixXd::Zero(S * A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2)
                sol.P(s * A + a, s2) = joint_prob(env, en.states[s], en.actions[a], en.states[s2], omega);
    sol.Pi = Eigen::MatrixXd::Zero(S, A);
    for (int s = 0; s < S; ++s) {
        std::vector<std::vector<double>> local(n);
        for (int i = 0; i < n; ++i)
            local[i] = pi(i, en.states[s]);
        for (int a = 0; a < A; ++a) {
            double p = 1.0;
            for (int i = 0; i < n; ++i)
                p *= local[i][en.actions[a][i]];
            sol.Pi(s, a) = p;
        }
    }
    Eigen::MatrixXd Ppi = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            Ppi.row(s) += sol.Pi(s, a) * sol.P.row(s * A + a);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - gamma * Ppi;
    auto lu = M.partialPivLu();
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd r(S * A), rpi = Eigen::VectorXd::Zero(S);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                r(s * A + a) = local_reward(env, i, en.states[s], en.actions[a], omega);
                rpi(s) += sol.Pi(s, a) * r(s * A + a);
            }
        Eigen::VectorXd V = lu.solve(rpi);
        sol.Q.push_back(r + gamma * sol.P * V);
        sol.V.push_back(V);
    }
    return sol;
}

/// sup |Q_i(s,a) - Q_i(s',a')| over pairs agreeing on the kappa-hop states and actions of agent i.
inline double decay_sup(const Solution& sol, const Environment& env, int i, int kappa)
{
    auto inside = env.graph().k_hop(i, kappa);
    const auto& en = sol.en;
    std::map<std::pair<GlobalState, JointAction>, std::pair<double, double>> range;
    for (int s = 0; s < en.S(); ++s)
        for (int a = 0; a < en.A(); ++a) {
            GlobalState ks;
            JointAction ka;
            for (int j : inside) {
                ks.push_back(en.states[s][j]);
                ka.push_back(en.actions[a][j]);
            }
            double q = sol.Q[i](s * en.A() + a);
            auto [it, fresh] = range.try_emplace({ks, ka}, q, q);
            if (!fresh) {
                it->second.first = std::min(it->second.first, q);
                it->second.second = std::max(it->second.second, q);
            }
        }
    double sup = 0.0;
    for (const auto& [key, mm] : range)
        sup = std::max(sup, mm.second - mm.first);
    return sup;
}

/// Exact truncated gradient sum_{t=0}^{T} gamma^t E[Q_i(s_t,a_t) d log pi(a_t|s_t) / d theta] for a
/// single-agent MDP with a tabular softmax policy over raw states; the start distribution is uniform.
/// Entry layout: state * A + action.
inline std::vector<double> truncated_gradient(const Environment& env, const std::vector<std::vector<double>>& logits,
                                              double tau, double gamma, int T)
{
    const int S = env.spaces().state_card(0, 0);
    const int A = env.spaces().action_count(0);
    std::vector<std::vector<double>> pi(S, std::vector<double>(A));
    for (int s = 0; s < S; ++s) {
        double z = 0.0;
        for (int a = 0; a < A; ++a)
            z += std::exp(logits[s][a] / tau);
        for (int a = 0; a < A; ++a)
            pi[s][a] = std::exp(logits[s][a] / tau) / z;
    }
    auto sol = solve(env, [&](int, const GlobalState& st) { return pi[st[0][0]]; }, env.omega(), gamma);
    std::vector<double> grad(S * A, 0.0);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(S, 1.0 / S);
    double disc = 1.0;
    for (int t = 0; t <= T; ++t) {
        Eigen::VectorXd nd = Eigen::VectorXd::Zero(S);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double w = disc * d(s) * pi[s][a] * sol.Q[0](s * A + a);
                for (int k = 0; k < A; ++k)
                    grad[s * A + k] += w * ((k == a ? 1.0 : 0.0) - pi[s][k]) / tau;
                nd += d(s) * pi[s][a] * sol.P.row(s * A + a).transpose();
            }
        d = nd;
        disc *= gamma;
    }
    return grad;
}

} // namespace oracle
