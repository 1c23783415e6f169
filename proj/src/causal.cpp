#include "gsac/causal.hpp"

#include "gsac/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace gsac {

double CMIStats::corrected() const
{
    if (n == 0)
        return 0.0;
    return std::max(0.0, cmi - df / (2.0 * static_cast<double>(n)));
}

CMIStats conditional_mi_stats(const std::vector<CMISample>& samples)
{
    if (samples.empty())
        throw std::invalid_argument("conditional mutual information needs at least one sample");
    std::vector<std::array<uint64_t, 3>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples)
        rows.push_back({s.z, s.x, s.y});
    std::sort(rows.begin(), rows.end());

    CMIStats st;
    st.n = rows.size();
    double N = static_cast<double>(rows.size());
    double total = 0.0;
    std::map<uint64_t, double> ycount;
    size_t b = 0;
    while (b < rows.size()) {
        size_t e = b;
        while (e < rows.size() && rows[e][0] == rows[b][0])
            ++e;
        double nz = static_cast<double>(e - b);
        ycount.clear();
        for (size_t k = b; k < e; ++k)
            ycount[rows[k][2]] += 1.0;
        int kx = 0;
        size_t xb = b;
        while (xb < e) {
            size_t xe = xb;
            while (xe < e && rows[xe][1] == rows[xb][1])
                ++xe;
            ++kx;
            double nxz = static_cast<double>(xe - xb);
            size_t yb = xb;
            while (yb < xe) {
                size_t ye = yb;
                while (ye < xe && rows[ye][2] == rows[yb][2])
                    ++ye;
                double nxyz = static_cast<double>(ye - yb);
                total += nxyz * std::log(nxyz * nz / (nxz * ycount[rows[yb][2]]));
                yb = ye;
            }
            xb = xe;
        }
        st.df += static_cast<double>(kx - 1) * static_cast<double>(ycount.size() - 1);
        b = e;
    }
    st.cmi = std::max(0.0, total / N);
    return st;
}

double estimate_conditional_mi(const std::vector<CMISample>& samples)
{
    return conditional_mi_stats(samples).cmi;
}

std::string Candidate::label() const
{
    switch (kind) {
    case State:
        return "s[" + std::to_string(agent) + "," + std::to_string(index) + "]";
    case Action:
        return "a[" + std::to_string(agent) + "," + std::to_string(index) + "]";
    case Domain:
        return "m";
    }
    return "?";
}

namespace {

struct Column {
    Candidate cand;
    std::vector<uint64_t> values;
};

uint64_t mix(uint64_t h, uint64_t v)
{
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

double score_of(const std::vector<Column>& cols, const std::vector<uint64_t>& target, int x,
                const std::vector<int>& cond, int permutations, double* raw)
{
    size_t n = target.size();
    std::vector<CMISample> s(n);
    uint64_t seed = 0x2545f4914f6cdd1dULL ^ static_cast<uint64_t>(x);
    for (int c : cond)
        seed = mix(seed, static_cast<uint64_t>(c));
    for (size_t r = 0; r < n; ++r) {
        uint64_t z = 0x51ed270b27a1f3c5ULL;
        for (int c : cond)
            z = mix(z, cols[c].values[r] * 131 + static_cast<uint64_t>(c));
        s[r] = {cols[x].values[r], target[r], z};
    }
    CMIStats st = conditional_mi_stats(s);
    if (raw)
        *raw = st.cmi;
    if (permutations <= 0)
        return st.corrected();
    // Null level: largest CMI after shuffling x within each conditioning stratum.
    std::sort(s.begin(), s.end(), [](const CMISample& a, const CMISample& b) { return a.z < b.z; });
    Stream rng(seed);
    double null_max = 0.0;
    for (int p = 0; p < permutations; ++p) {
        size_t b = 0;
        while (b < n) {
            size_t e = b;
            while (e < n && s[e].z == s[b].z)
                ++e;
            for (size_t u = e - b; u > 1; --u)
                std::swap(s[b + u - 1].x, s[b + rng.uniform_int(static_cast<int>(u))].x);
            b = e;
        }
        null_max = std::max(null_max, conditional_mi_stats(s).cmi);
    }
    return std::max(0.0, st.cmi - null_max);
}

std::vector<int> others(const std::set<int>& acc, int skip)
{
    std::vector<int> v;
    for (int c : acc)
        if (c != skip)
            v.push_back(c);
    return v;
}

// Grow-shrink search: backward elimination from the full candidate set, then
// forward re-addition of any candidate that is dependent given the accepted set.
std::set<int> select_parents(const std::vector<Column>& cols, const std::vector<uint64_t>& target, double lambda,
                             int permutations, int max_rounds)
{
    std::set<int> acc;
    std::vector<double> marginal;
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        acc.insert(c);
        double raw = 0.0;
        score_of(cols, target, c, {}, permutations, &raw);
        marginal.push_back(raw);
    }
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        while (!acc.empty()) {
            int worst = -1;
            double worst_score = std::numeric_limits<double>::infinity();
            for (int c : acc) {
                double sc = score_of(cols, target, c, others(acc, c), permutations, nullptr);
                if (sc < worst_score || (sc == worst_score && marginal[c] < marginal[worst])) {
                    worst_score = sc;
                    worst = c;
                }
            }
            if (worst_score > lambda)
                break;
            acc.erase(worst);
            changed = true;
        }
        int best = -1;
        double best_score = lambda;
        std::vector<int> cond(acc.begin(), acc.end());
        for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
            if (acc.count(c))
                continue;
            double sc = score_of(cols, target, c, cond, permutations, nullptr);
            if (sc > best_score) {
                best_score = sc;
                best = c;
            }
        }
        if (best >= 0) {
            acc.insert(best);
            changed = true;
        }
        if (!changed)
            break;
    }
    return acc;
}

} // namespace

RecoveryResult recover_causal_masks(const std::vector<Trajectory>& trajectories, const NetworkGraph& graph,
                                    const AgentSpaces& spaces, const std::vector<int>& omega_dims,
                                    double lambda_threshold, const RecoveryOptions& opts)
{
    if (trajectories.empty())
        throw std::invalid_argument("causal recovery needs trajectories from at least one domain");
    int n = spaces.num_agents();
    if (graph.size() != n)
        throw std::invalid_argument("graph and spaces disagree on agent count");
    std::vector<const Transition*> rows;
    std::vector<uint64_t> domain;
    for (const auto& tr : trajectories) {
        if (tr.domain < 0)
            throw std::invalid_argument("domain index must be non-negative");
        for (const auto& st : tr.steps) {
            spaces.check_state(st.state);
            spaces.check_state(st.next);
            spaces.check_action(st.action);
            if (static_cast<int>(st.rewards.size()) != n)
                throw std::invalid_argument("transition reward vector has wrong size");
            rows.push_back(&st);
            domain.push_back(static_cast<uint64_t>(tr.domain));
        }
    }

    RecoveryResult res;
    res.masks = CausalMasks::empty(spaces, omega_dims);
    res.samples = rows.size();
    if (rows.empty()) {
        res.insufficient_data = true;
        spdlog::warn("causal recovery: no transitions, returning empty masks");
        return res;
    }
    bool multi_domain = std::set<uint64_t>(domain.begin(), domain.end()).size() > 1;

    for (int i = 0; i < n; ++i) {
        std::vector<Column> cols;
        for (int nb : graph.neighbors(i))
            for (int k = 0; k < spaces.state_dim(nb); ++k) {
                Column c{{Candidate::State, nb, k}, {}};
                for (const auto* r : rows)
                    c.values.push_back(static_cast<uint64_t>(r->state[nb][k]));
                cols.push_back(std::move(c));
            }
        for (int k = 0; k < spaces.action_dim(i); ++k) {
            Column c{{Candidate::Action, i, k}, {}};
            for (const auto* r : rows)
                c.values.push_back(static_cast<uint64_t>(spaces.decode_action(i, r->action[i])[k]));
            cols.push_back(std::move(c));
        }
        if (multi_domain)
            cols.push_back({{Candidate::Domain, i, 0}, domain});

        auto record = [&](int child, const std::vector<Column>& cs, const std::set<int>& acc) {
            for (int c = 0; c < static_cast<int>(cs.size()); ++c) {
                CITestResult t;
                t.agent = i;
                t.child = child;
                t.candidate = cs[c].cand;
                t.accepted = acc.count(c) > 0;
                for (int o : others(acc, c))
                    t.conditioning.push_back(cs[o].cand);
                res.tests.push_back(std::move(t));
            }
        };
        auto finish_tests = [&](size_t from, const std::vector<Column>& cs, const std::vector<uint64_t>& target,
                                const std::set<int>& acc) {
            for (size_t k = from; k < res.tests.size(); ++k) {
                auto& t = res.tests[k];
                int c = static_cast<int>(std::find_if(cs.begin(), cs.end(),
                                                      [&](const Column& col) { return col.cand == t.candidate; }) -
                                         cs.begin());
                t.score = score_of(cs, target, c, others(acc, c), opts.permutations, &t.cmi);
            }
        };

        for (int j = 0; j < spaces.state_dim(i); ++j) {
            std::vector<uint64_t> target;
            for (const auto* r : rows)
                target.push_back(static_cast<uint64_t>(r->next[i][j]));
            auto acc = select_parents(cols, target, lambda_threshold, opts.permutations, opts.max_rounds);
            for (int c : acc) {
                const auto& cand = cols[c].cand;
                if (cand.kind == Candidate::State)
                    res.masks.s_to_s[i][j][spaces.global_index({cand.agent, cand.index})] = 1;
                else if (cand.kind == Candidate::Action)
                    res.masks.a_to_s[i][j][cand.index] = 1;
                else
                    std::fill(res.masks.w_to_s[i][j].begin(), res.masks.w_to_s[i][j].end(), 1);
            }
            size_t from = res.tests.size();
            record(j, cols, acc);
            finish_tests(from, cols, target, acc);
        }

        if (opts.recover_reward) {
            // Reward parents are restricted to the agent's own state and action.
            std::vector<Column> rcols;
            for (const auto& c : cols)
                if ((c.cand.kind == Candidate::State && c.cand.agent == i) || c.cand.kind != Candidate::State)
                    rcols.push_back(c);
            std::map<double, uint64_t> codes;
            std::vector<uint64_t> target;
            for (const auto* r : rows) {
                auto it = codes.emplace(r->rewards[i], codes.size()).first;
                target.push_back(it->second);
            }
            auto acc = select_parents(rcols, target, lambda_threshold, opts.permutations, opts.max_rounds);
            for (int c : acc) {
                const auto& cand = rcols[c].cand;
                if (cand.kind == Candidate::State)
                    res.masks.s_to_r[i][cand.index] = 1;
                else if (cand.kind == Candidate::Action)
                    res.masks.a_to_r[i][cand.index] = 1;
                else
                    std::fill(res.masks.w_to_r[i].begin(), res.masks.w_to_r[i].end(), 1);
            }
            size_t from = res.tests.size();
            record(-1, rcols, acc);
            finish_tests(from, rcols, target, acc);
        }
    }

    bool any = false;
    for (int i = 0; i < n && !any; ++i) {
        for (const auto& m : res.masks.s_to_s[i])
            any = any || std::any_of(m.begin(), m.end(), [](uint8_t v) { return v != 0; });
        for (const auto& m : res.masks.a_to_s[i])
            any = any || std::any_of(m.begin(), m.end(), [](uint8_t v) { return v != 0; });
        any = any || std::any_of(res.masks.s_to_r[i].begin(), res.masks.s_to_r[i].end(), [](uint8_t v) { return v; });
        any = any || std::any_of(res.masks.a_to_r[i].begin(), res.masks.a_to_r[i].end(), [](uint8_t v) { return v; });
    }
    if (!any) {
        res.insufficient_data = true;
        spdlog::warn("causal recovery: no dependence passed the threshold ({} transitions)", rows.size());
    }
    return res;
}

OmegaValues DomainEstimate::values() const
{
    OmegaValues v;
    for (const auto& idx : index) {
        std::vector<double> w;
        for (int k : idx)
            w.push_back(grid.value(k));
        v.push_back(std::move(w));
    }
    return v;
}

DomainEstimate estimate_domain_factor(const std::vector<Trajectory>& trajectories, const CausalMasks& masks,
                                      const Environment& kernel_family, const OmegaGrid& grid)
{
    if (trajectories.empty())
        throw std::invalid_argument("domain estimation requires at least one trajectory");
    auto violations = validate_masks(masks, kernel_family.graph(), kernel_family.spaces());
    if (!violations.empty())
        throw std::invalid_argument("domain estimation given invalid masks: " + violations.front().message);
    int n = kernel_family.num_agents();
    auto dims = kernel_family.omega_dims();

    DomainEstimate est;
    est.grid = grid;
    est.trajectories = static_cast<int>(trajectories.size());
    for (const auto& tr : trajectories)
        est.transitions += tr.steps.size();
    if (est.transitions == 0)
        throw std::invalid_argument("domain estimation requires at least one transition");

    for (int i = 0; i < n; ++i) {
        int d = dims[i];
        size_t combos = 1;
        for (int k = 0; k < d; ++k)
            combos *= static_cast<size_t>(grid.size());
        std::vector<std::vector<double>> points(combos, std::vector<double>(d));
        std::vector<std::vector<int>> idx(combos, std::vector<int>(d));
        for (size_t c = 0; c < combos; ++c) {
            size_t rem = c;
            for (int k = d; k-- > 0;) {
                idx[c][k] = static_cast<int>(rem % grid.size());
                points[c][k] = grid.value(idx[c][k]);
                rem /= grid.size();
            }
        }
        std::vector<double> nll(combos, 0.0);
        for (size_t tj = 0; tj < trajectories.size(); ++tj)
            for (const auto& st : trajectories[tj].steps) {
                bool possible = false;
                for (size_t c = 0; c < combos; ++c) {
                    double p = kernel_family.local_probability(i, st.state, st.action, points[c], st.next[i]);
                    if (p > 0.0) {
                        possible = true;
                        nll[c] -= std::log(p);
                    } else {
                        nll[c] = std::numeric_limits<double>::infinity();
                    }
                }
                if (!possible)
                    throw std::runtime_error("transition (trajectory " + std::to_string(tj) + ", t=" +
                                             std::to_string(st.t) + ", agent " + std::to_string(i) +
                                             ") has zero probability under every grid value");
            }
        size_t best = 0;
        for (size_t c = 0; c < combos; ++c) {
            nll[c] /= static_cast<double>(est.transitions);
            if (nll[c] < nll[best])
                best = c;
        }
        est.index.push_back(idx[best]);
        est.nll.push_back(nll[best]);
        est.nll_curve.push_back(std::move(nll));
    }
    return est;
}

} // namespace gsac
