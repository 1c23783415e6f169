#include "gsac/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gsac {

namespace {

double binomial_pmf(int n, int k, double p)
{
    if (k < 0 || k > n)
        return 0.0;
    double c = 1.0;
    for (int j = 1; j <= k; ++j)
        c = c * (n - k + j) / j;
    return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

int sample_binomial(int n, double p, Stream& rng)
{
    int k = 0;
    for (int j = 0; j < n; ++j)
        k += rng.bernoulli(p) ? 1 : 0;
    return k;
}

void check_omega(const OmegaValues& omega, int n)
{
    if (static_cast<int>(omega.size()) != n)
        throw std::invalid_argument("omega must be given for every agent");
}

} // namespace

Environment::Environment(NetworkGraph graph, AgentSpaces spaces, OmegaValues omega)
    : graph_(std::move(graph)), spaces_(std::move(spaces)), omega_(std::move(omega))
{
    if (graph_.size() != spaces_.num_agents())
        throw std::invalid_argument("graph and spaces disagree on agent count");
    check_omega(omega_, graph_.size());
}

std::vector<int> Environment::omega_dims() const
{
    std::vector<int> d;
    for (const auto& w : omega_)
        d.push_back(static_cast<int>(w.size()));
    return d;
}

GlobalState Environment::reset(uint64_t seed) const
{
    GlobalState s(num_agents());
    for (int i = 0; i < num_agents(); ++i) {
        Stream rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
        s[i] = sample_initial(i, rng);
    }
    return s;
}

StepResult Environment::step(const GlobalState& state, const JointAction& action, uint64_t seed) const
{
    spaces_.check_state(state);
    spaces_.check_action(action);
    StepResult out;
    out.next.resize(num_agents());
    out.rewards.resize(num_agents());
    for (int i = 0; i < num_agents(); ++i) {
        Stream rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
        LocalOutcome o = sample_local(i, state, action, omega_[i], rng);
        out.next[i] = std::move(o.next);
        out.rewards[i] = o.reward;
    }
    return out;
}

LocalOutcome Environment::sample_local(int i, const GlobalState& s, const JointAction& a,
                                       const std::vector<double>& omega_i, Stream& rng) const
{
    auto outcomes = local_outcomes(i, s, a, omega_i);
    double u = rng.uniform();
    double acc = 0.0;
    for (auto& o : outcomes) {
        acc += o.prob;
        if (u < acc)
            return o;
    }
    return outcomes.back();
}

double Environment::local_probability(int i, const GlobalState& s, const JointAction& a,
                                      const std::vector<double>& omega_i, const LocalState& next) const
{
    double p = 0.0;
    for (const auto& o : local_outcomes(i, s, a, omega_i))
        if (o.next == next)
            p += o.prob;
    return p;
}

double Environment::expected_reward(int i, const GlobalState& s, const JointAction& a) const
{
    double r = 0.0;
    for (const auto& o : local_outcomes(i, s, a, omega_[i]))
        r += o.prob * o.reward;
    return r;
}

// ---------------------------------------------------------------- wireless

WirelessEnv::WirelessEnv(int grid_size, OmegaValues omega, const WirelessOptions& opts, uint64_t seed)
    : Environment(NetworkGraph::lattice(grid_size + 1, grid_size + 1),
                  AgentSpaces::uniform((grid_size + 1) * (grid_size + 1), opts.deadline + 2, 2, 1),
                  std::move(omega)),
      grid_size_(grid_size), deadline_(opts.deadline), opts_(opts), seed_(seed)
{
    if (grid_size < 1)
        throw std::invalid_argument("wireless grid size must be >= 1");
    if (deadline_ < 1)
        throw std::invalid_argument("wireless deadline must be >= 1");
    int L = grid_size + 1;
    int n = L * L;
    for (const auto& w : omega_)
        if (w.size() != 1 || w[0] < 0.0 || w[0] > 1.0)
            throw std::invalid_argument("wireless arrival probability must be a scalar in [0,1]");

    // Access points sit on the lattice edges between orthogonally adjacent users.
    aps_.assign(n, {});
    int horizontal = L * (L - 1);
    for (int r = 0; r < L; ++r)
        for (int c = 0; c + 1 < L; ++c) {
            int ap = r * (L - 1) + c;
            aps_[r * L + c].push_back(ap);
            aps_[r * L + c + 1].push_back(ap);
        }
    for (int r = 0; r + 1 < L; ++r)
        for (int c = 0; c < L; ++c) {
            int ap = horizontal + r * L + c;
            aps_[r * L + c].push_back(ap);
            aps_[(r + 1) * L + c].push_back(ap);
        }
    num_aps_ = 2 * horizontal;
    std::vector<std::vector<int>> action_card;
    for (auto& v : aps_) {
        std::sort(v.begin(), v.end());
        action_card.push_back({1 + static_cast<int>(v.size())});
    }
    spaces_ = AgentSpaces(std::vector<std::vector<int>>(n, std::vector<int>(deadline_ + 2, 2)), action_card);

    if (opts_.success_prob.empty()) {
        Stream rng(derive_seed(seed, {kTagBuild}));
        for (int i = 0; i < n; ++i)
            q_.push_back(rng.uniform());
    } else {
        if (static_cast<int>(opts_.success_prob.size()) != n)
            throw std::invalid_argument("success probabilities must be given per user");
        q_ = opts_.success_prob;
    }

    masks_ = CausalMasks::empty(spaces_, omega_dims());
    int d = deadline_;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j + 1 < d; ++j) {
            for (int k = 0; k <= j + 1; ++k)
                masks_.s_to_s[i][j][spaces_.global_index({i, k})] = 1;
            for (int nb : graph_.neighbors(i))
                if (nb != i)
                    for (int k = 0; k < d; ++k)
                        masks_.s_to_s[i][j][spaces_.global_index({nb, k})] = 1;
            masks_.a_to_s[i][j][0] = 1;
        }
        masks_.w_to_s[i][d - 1][0] = 1;
        for (int k = 0; k < d; ++k)
            masks_.s_to_r[i][k] = 1;
        masks_.a_to_r[i][0] = 1;
    }
}

std::unique_ptr<Environment> WirelessEnv::with_omega(const OmegaValues& omega) const
{
    WirelessOptions o = opts_;
    o.success_prob = q_;
    return std::make_unique<WirelessEnv>(grid_size_, omega, o, seed_);
}

int WirelessEnv::access_point(int i, int a) const
{
    if (a <= 0)
        return -1;
    return aps_.at(i).at(a - 1);
}

bool WirelessEnv::transmits(int i, const GlobalState& s, const JointAction& a) const
{
    if (a[i] == 0)
        return false;
    for (int k = 0; k < deadline_; ++k)
        if (s[i][k])
            return true;
    return false;
}

bool WirelessEnv::collides(int i, const GlobalState& s, const JointAction& a) const
{
    int ap = access_point(i, a[i]);
    for (int j : graph_.neighbors(i))
        if (j != i && transmits(j, s, a) && access_point(j, a[j]) == ap)
            return true;
    return false;
}

LocalState WirelessEnv::age(const LocalState& si, bool success) const
{
    LocalState b(si.begin(), si.begin() + deadline_);
    if (success)
        for (int k = 0; k < deadline_; ++k)
            if (b[k]) {
                b[k] = 0;
                break;
            }
    LocalState next(deadline_ + 2, 0);
    for (int k = 0; k + 1 < deadline_; ++k)
        next[k] = b[k + 1];
    return next;
}

LocalState WirelessEnv::sample_initial(int i, Stream& rng) const
{
    LocalState s(deadline_ + 2, 0);
    for (int k = 0; k < deadline_; ++k)
        s[k] = rng.bernoulli(omega_[i][0]) ? 1 : 0;
    s[deadline_] = rng.uniform_int(2);
    s[deadline_ + 1] = rng.uniform_int(2);
    return s;
}

std::vector<LocalOutcome> WirelessEnv::local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                                      const std::vector<double>& omega_i) const
{
    double ps = (transmits(i, s, a) && !collides(i, s, a)) ? q_[i] : 0.0;
    double w = omega_i.at(0);
    std::vector<LocalOutcome> out;
    for (int succ = 0; succ < 2; ++succ) {
        double p_succ = succ ? ps : 1.0 - ps;
        if (p_succ <= 0.0)
            continue;
        LocalState base = age(s[i], succ != 0);
        for (int arr = 0; arr < 2; ++arr) {
            double p_arr = arr ? w : 1.0 - w;
            if (p_arr <= 0.0)
                continue;
            for (int z = 0; z < 4; ++z) {
                LocalOutcome o;
                o.next = base;
                o.next[deadline_ - 1] = arr;
                o.next[deadline_] = z & 1;
                o.next[deadline_ + 1] = (z >> 1) & 1;
                o.reward = succ;
                o.prob = p_succ * p_arr * 0.25;
                out.push_back(std::move(o));
            }
        }
    }
    return out;
}

LocalOutcome WirelessEnv::sample_local(int i, const GlobalState& s, const JointAction& a,
                                       const std::vector<double>& omega_i, Stream& rng) const
{
    double ps = (transmits(i, s, a) && !collides(i, s, a)) ? q_[i] : 0.0;
    bool succ = ps > 0.0 && rng.bernoulli(ps);
    LocalOutcome o;
    o.next = age(s[i], succ);
    o.next[deadline_ - 1] = rng.bernoulli(omega_i.at(0)) ? 1 : 0;
    o.next[deadline_] = rng.uniform_int(2);
    o.next[deadline_ + 1] = rng.uniform_int(2);
    o.reward = succ ? 1.0 : 0.0;
    return o;
}

std::unique_ptr<WirelessEnv> build_wireless(int grid_size, const std::vector<double>& arrival_prob, int deadline,
                                            uint64_t seed, const std::vector<double>& success_prob)
{
    OmegaValues omega;
    for (double w : arrival_prob)
        omega.push_back({w});
    WirelessOptions opts;
    opts.deadline = deadline;
    opts.success_prob = success_prob;
    return std::make_unique<WirelessEnv>(grid_size, omega, opts, seed);
}

std::unique_ptr<WirelessEnv> build_wireless(int grid_size, double arrival_prob, int deadline, uint64_t seed,
                                            const std::vector<double>& success_prob)
{
    int n = (grid_size + 1) * (grid_size + 1);
    return build_wireless(grid_size, std::vector<double>(n, arrival_prob), deadline, seed, success_prob);
}

// ---------------------------------------------------------------- traffic

int traffic_queue_update(int x, int capacity, int signal, int inflow, int cap)
{
    int served = std::min(capacity * signal, x);
    return std::clamp(x - served + inflow, 0, cap);
}

TrafficEnv::TrafficEnv(int grid_size, OmegaValues omega, const TrafficOptions& opts)
    : Environment(NetworkGraph::lattice(grid_size, grid_size),
                  AgentSpaces::uniform(grid_size * grid_size, 2, opts.queue_cap + 1, 2), std::move(omega)),
      grid_size_(grid_size), opts_(opts)
{
    if (grid_size < 1)
        throw std::invalid_argument("traffic grid size must be >= 1");
    if (opts_.queue_cap < 1)
        throw std::invalid_argument("queue cap must be >= 1");
    if (opts_.capacity_max < 0 || opts_.turn_east < 0.0 || opts_.turn_east > 1.0 || opts_.arrival_prob < 0.0 ||
        opts_.arrival_prob > 1.0)
        throw std::invalid_argument("invalid traffic options");
    for (const auto& w : omega_)
        if (w.size() != 1 || w[0] < 0.0 || w[0] > 1.0)
            throw std::invalid_argument("traffic capacity factor must be a scalar in [0,1]");
    int g = grid_size;
    int n = g * g;
    spaces_ = AgentSpaces(std::vector<std::vector<int>>(n, std::vector<int>(2, opts_.queue_cap + 1)),
                          std::vector<std::vector<int>>(n, std::vector<int>{2, 2}));
    in_links_.assign(n, {});
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < g; ++c) {
            int id = r * g + c;
            in_links_[id].push_back(c > 0 ? InLink{id - 1, kEast} : InLink{-1, kEast});
            in_links_[id].push_back(r > 0 ? InLink{id - g, kSouth} : InLink{-1, kSouth});
        }
    masks_ = CausalMasks::empty(spaces_, omega_dims());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            masks_.s_to_s[i][j][spaces_.global_index({i, j})] = 1;
            for (const auto& l : in_links_[i])
                if (l.from >= 0)
                    masks_.s_to_s[i][j][spaces_.global_index({l.from, l.turn})] = 1;
            masks_.a_to_s[i][j][j] = 1;
            masks_.w_to_s[i][j][0] = 1;
            masks_.s_to_r[i][j] = 1;
        }
    }
}

std::unique_ptr<Environment> TrafficEnv::with_omega(const OmegaValues& omega) const
{
    return std::make_unique<TrafficEnv>(grid_size_, omega, opts_);
}

double TrafficEnv::reward_of(const LocalState& si) const
{
    double total = 2.0 * opts_.queue_cap;
    return (total - si[0] - si[1]) / total;
}

LocalState TrafficEnv::sample_initial(int, Stream& rng) const
{
    return {rng.uniform_int(opts_.queue_cap + 1), rng.uniform_int(opts_.queue_cap + 1)};
}

std::vector<LocalOutcome> TrafficEnv::local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                                     const std::vector<double>& omega_i) const
{
    double w = omega_i.at(0);
    int cmax = opts_.capacity_max;
    int S = opts_.queue_cap;
    std::vector<double> cap_pmf(cmax + 1);
    for (int c = 0; c <= cmax; ++c)
        cap_pmf[c] = binomial_pmf(cmax, c, w);

    // Distribution of total inflow into the node.
    std::vector<double> inflow{1.0};
    for (const auto& l : in_links_[i]) {
        std::vector<double> flow;
        if (l.from < 0) {
            flow = {1.0 - opts_.arrival_prob, opts_.arrival_prob};
        } else {
            int x = s[l.from][l.turn];
            int y = spaces_.decode_action(l.from, a[l.from])[l.turn];
            flow.assign(std::max(1, std::min(cmax * y, x) + 1), 0.0);
            for (int c = 0; c <= cmax; ++c)
                flow[std::min(c * y, x)] += cap_pmf[c];
        }
        std::vector<double> conv(inflow.size() + flow.size() - 1, 0.0);
        for (size_t u = 0; u < inflow.size(); ++u)
            for (size_t v = 0; v < flow.size(); ++v)
                conv[u + v] += inflow[u] * flow[v];
        inflow = std::move(conv);
    }

    auto y = spaces_.decode_action(i, a[i]);
    std::vector<double> joint((S + 1) * (S + 1), 0.0);
    for (int ce = 0; ce <= cmax; ++ce)
        for (int cs = 0; cs <= cmax; ++cs) {
            double pc = cap_pmf[ce] * cap_pmf[cs];
            if (pc <= 0.0)
                continue;
            for (int f = 0; f < static_cast<int>(inflow.size()); ++f) {
                if (inflow[f] <= 0.0)
                    continue;
                for (int e = 0; e <= f; ++e) {
                    double pe = binomial_pmf(f, e, opts_.turn_east);
                    if (pe <= 0.0)
                        continue;
                    int xe = traffic_queue_update(s[i][kEast], ce, y[kEast], e, S);
                    int xs = traffic_queue_update(s[i][kSouth], cs, y[kSouth], f - e, S);
                    joint[xe * (S + 1) + xs] += pc * inflow[f] * pe;
                }
            }
        }
    std::vector<LocalOutcome> out;
    double r = reward_of(s[i]);
    for (int xe = 0; xe <= S; ++xe)
        for (int xs = 0; xs <= S; ++xs)
            if (joint[xe * (S + 1) + xs] > 0.0)
                out.push_back({{xe, xs}, r, joint[xe * (S + 1) + xs]});
    return out;
}

LocalOutcome TrafficEnv::sample_local(int i, const GlobalState& s, const JointAction& a,
                                      const std::vector<double>& omega_i, Stream& rng) const
{
    double w = omega_i.at(0);
    int cmax = opts_.capacity_max;
    auto y = spaces_.decode_action(i, a[i]);
    int ce = sample_binomial(cmax, w, rng);
    int cs = sample_binomial(cmax, w, rng);
    int f = 0;
    for (const auto& l : in_links_[i]) {
        if (l.from < 0) {
            f += rng.bernoulli(opts_.arrival_prob) ? 1 : 0;
        } else {
            int c = sample_binomial(cmax, w, rng);
            int yk = spaces_.decode_action(l.from, a[l.from])[l.turn];
            f += std::min(c * yk, s[l.from][l.turn]);
        }
    }
    int e = sample_binomial(f, opts_.turn_east, rng);
    LocalOutcome o;
    o.next = {traffic_queue_update(s[i][kEast], ce, y[kEast], e, opts_.queue_cap),
              traffic_queue_update(s[i][kSouth], cs, y[kSouth], f - e, opts_.queue_cap)};
    o.reward = reward_of(s[i]);
    return o;
}

std::unique_ptr<TrafficEnv> build_traffic(int grid_size, const std::vector<double>& omega, const TrafficOptions& opts)
{
    OmegaValues w;
    for (double x : omega)
        w.push_back({x});
    return std::make_unique<TrafficEnv>(grid_size, w, opts);
}

std::unique_ptr<TrafficEnv> build_traffic(int grid_size, double omega, const TrafficOptions& opts)
{
    return build_traffic(grid_size, std::vector<double>(grid_size * grid_size, omega), opts);
}

// ---------------------------------------------------------------- synthetic

SyntheticEnv::SyntheticEnv(NetworkGraph graph, AgentSpaces spaces, CausalMasks masks, OmegaGrid grid,
                           OmegaValues omega, const SyntheticOptions& opts)
    : Environment(std::move(graph), std::move(spaces), std::move(omega)), grid_(std::move(grid)), opts_(opts)
{
    for (int i = 0; i < spaces_.num_agents(); ++i)
        for (int c : spaces_.state_cards(i))
            if (c != 2)
                throw std::invalid_argument("synthetic environments use binary state components");
    masks_ = std::move(masks);
    auto v = validate_masks(masks_, graph_, spaces_);
    if (!v.empty())
        throw std::invalid_argument("invalid synthetic masks: " + v.front().message);
    mid_ = 0.5 * (grid_.lo() + grid_.hi());
    if (grid_.size() > 1) {
        double gap = grid_.hi() - grid_.lo();
        for (int k = 1; k < grid_.size(); ++k)
            gap = std::min(gap, grid_.value(k) - grid_.value(k - 1));
        slope_ = opts_.margin / gap;
    }
    if (opts_.amplitude < 0.0 || opts_.amplitude + slope_ * 0.5 * (grid_.hi() - grid_.lo()) > 0.48)
        throw std::invalid_argument("synthetic amplitude and margin leave no room inside (0,1)");
}

std::unique_ptr<Environment> SyntheticEnv::with_omega(const OmegaValues& omega) const
{
    return std::make_unique<SyntheticEnv>(graph_, spaces_, masks_, grid_, omega, opts_);
}

double SyntheticEnv::child_prob(int i, int j, const GlobalState& s, const JointAction& a, double omega) const
{
    int parity = 0;
    const Mask& m = masks_.s_to_s[i][j];
    for (int g = 0; g < static_cast<int>(m.size()); ++g)
        if (m[g]) {
            Component c = spaces_.component_at(g);
            parity += s[c.agent][c.comp];
        }
    const Mask& am = masks_.a_to_s[i][j];
    if (std::any_of(am.begin(), am.end(), [](uint8_t x) { return x != 0; })) {
        auto parts = spaces_.decode_action(i, a[i]);
        for (size_t k = 0; k < am.size(); ++k)
            if (am[k])
                parity += parts[k];
    }
    double p = 0.5 + ((parity % 2 == 0) ? opts_.amplitude : -opts_.amplitude);
    const Mask& wm = masks_.w_to_s[i][j];
    for (size_t k = 0; k < wm.size(); ++k)
        if (wm[k])
            p += slope_ * (omega - mid_);
    return std::clamp(p, 0.02, 0.98);
}

double SyntheticEnv::reward_of(int i, const GlobalState& s, const JointAction& a) const
{
    int parity = 0;
    for (size_t k = 0; k < masks_.s_to_r[i].size(); ++k)
        if (masks_.s_to_r[i][k])
            parity += s[i][k];
    auto parts = spaces_.decode_action(i, a[i]);
    for (size_t k = 0; k < masks_.a_to_r[i].size(); ++k)
        if (masks_.a_to_r[i][k])
            parity += parts[k];
    return parity % 2 == 0 ? 0.9 : 0.1;
}

LocalState SyntheticEnv::sample_initial(int i, Stream& rng) const
{
    LocalState s(spaces_.state_dim(i));
    for (auto& x : s)
        x = rng.uniform_int(2);
    return s;
}

std::vector<LocalOutcome> SyntheticEnv::local_outcomes(int i, const GlobalState& s, const JointAction& a,
                                                       const std::vector<double>& omega_i) const
{
    int d = spaces_.state_dim(i);
    double w = omega_i.empty() ? mid_ : omega_i[0];
    std::vector<double> p1(d);
    for (int j = 0; j < d; ++j)
        p1[j] = child_prob(i, j, s, a, w);
    double r = reward_of(i, s, a);
    std::vector<LocalOutcome> out;
    for (int bits = 0; bits < (1 << d); ++bits) {
        LocalOutcome o;
        o.next.resize(d);
        o.prob = 1.0;
        for (int j = 0; j < d; ++j) {
            o.next[j] = (bits >> j) & 1;
            o.prob *= o.next[j] ? p1[j] : 1.0 - p1[j];
        }
        o.reward = r;
        out.push_back(std::move(o));
    }
    return out;
}

LocalOutcome SyntheticEnv::sample_local(int i, const GlobalState& s, const JointAction& a,
                                        const std::vector<double>& omega_i, Stream& rng) const
{
    int d = spaces_.state_dim(i);
    double w = omega_i.empty() ? mid_ : omega_i[0];
    LocalOutcome o;
    o.next.resize(d);
    for (int j = 0; j < d; ++j)
        o.next[j] = rng.bernoulli(child_prob(i, j, s, a, w)) ? 1 : 0;
    o.reward = reward_of(i, s, a);
    return o;
}

std::unique_ptr<SyntheticEnv> build_synthetic(const NetworkGraph& graph, const AgentSpaces& spaces, double density,
                                              const OmegaGrid& grid, uint64_t seed, const SyntheticOptions& opts)
{
    if (!(density >= 0.0 && density <= 1.0))
        throw std::invalid_argument("mask density must lie in [0,1]");
    int n = spaces.num_agents();
    CausalMasks m = CausalMasks::empty(spaces, std::vector<int>(n, 1));
    Stream rng(derive_seed(seed, {kTagBuild}));
    for (int i = 0; i < n; ++i) {
        int d = spaces.state_dim(i);
        for (int j = 0; j < d; ++j) {
            m.s_to_s[i][j][spaces.global_index({i, j})] = 1;
            std::vector<Component> cand;
            for (int nb : graph.neighbors(i))
                for (int k = 0; k < spaces.state_dim(nb); ++k)
                    if (!(nb == i && k == j))
                        cand.push_back({nb, k});
            for (size_t u = cand.size(); u > 1; --u)
                std::swap(cand[u - 1], cand[rng.uniform_int(static_cast<int>(u))]);
            int count = 1;
            for (const auto& c : cand) {
                bool take = rng.uniform() < density;
                if (take && count < opts.d_max) {
                    m.s_to_s[i][j][spaces.global_index(c)] = 1;
                    ++count;
                }
            }
            for (int k = 0; k < spaces.action_dim(i); ++k)
                m.a_to_s[i][j][k] = rng.uniform() < density ? 1 : 0;
            m.w_to_s[i][j][0] = rng.uniform() < density ? 1 : 0;
        }
        bool any_w = false;
        for (int j = 0; j < d; ++j)
            any_w = any_w || m.w_to_s[i][j][0];
        if (!any_w && d > 0)
            m.w_to_s[i][rng.uniform_int(d)][0] = 1;
        bool any_r = false;
        for (int k = 0; k < d; ++k) {
            m.s_to_r[i][k] = rng.uniform() < density ? 1 : 0;
            any_r = any_r || m.s_to_r[i][k];
        }
        if (!any_r && d > 0)
            m.s_to_r[i][rng.uniform_int(d)] = 1;
        for (int k = 0; k < spaces.action_dim(i); ++k)
            m.a_to_r[i][k] = rng.uniform() < density ? 1 : 0;
    }
    OmegaValues omega(n, std::vector<double>{grid.value(grid.size() / 2)});
    return std::make_unique<SyntheticEnv>(graph, spaces, std::move(m), grid, omega, opts);
}

std::unique_ptr<SyntheticEnv> build_factored(const NetworkGraph& graph, const AgentSpaces& spaces,
                                             const CausalMasks& masks, const OmegaGrid& grid,
                                             const OmegaValues& omega, const SyntheticOptions& opts)
{
    return std::make_unique<SyntheticEnv>(graph, spaces, masks, grid, omega, opts);
}

OmegaValues uniform_omega(int n, double value)
{
    return OmegaValues(n, std::vector<double>{value});
}

// ---------------------------------------------------------------- trajectories

JointAction uniform_random_action(const AgentSpaces& spaces, uint64_t seed)
{
    JointAction a(spaces.num_agents());
    for (int i = 0; i < spaces.num_agents(); ++i) {
        Stream rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
        a[i] = rng.uniform_int(spaces.action_count(i));
    }
    return a;
}

Trajectory collect_trajectory(const Environment& env, int length, uint64_t seed, int domain)
{
    if (length < 0)
        throw std::invalid_argument("trajectory length must be non-negative");
    Trajectory traj;
    traj.domain = domain;
    GlobalState s = env.reset(derive_seed(seed, {kTagReset}));
    for (int t = 0; t < length; ++t) {
        JointAction a = uniform_random_action(env.spaces(), derive_seed(seed, {kTagAction, static_cast<uint64_t>(t)}));
        StepResult r = env.step(s, a, derive_seed(seed, {kTagStep, static_cast<uint64_t>(t)}));
        traj.steps.push_back({s, a, r.rewards, r.next, t});
        s = std::move(r.next);
    }
    return traj;
}

std::vector<Trajectory> collect_trajectories(const Environment& env, int count, int length, uint64_t seed, int domain)
{
    std::vector<Trajectory> out;
    for (int e = 0; e < count; ++e)
        out.push_back(collect_trajectory(env, length, derive_seed(seed, {static_cast<uint64_t>(e)}), domain));
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj)
{
    os << "domain,t,agent,component,value,next_value,action,reward\n";
    for (const auto& tr : traj.steps)
        for (size_t i = 0; i < tr.state.size(); ++i)
            for (size_t j = 0; j < tr.state[i].size(); ++j)
                os << traj.domain << ',' << tr.t << ',' << i << ',' << j << ',' << tr.state[i][j] << ','
                   << tr.next[i][j] << ',' << tr.action[i] << ',' << tr.rewards[i] << '\n';
}

} // namespace gsac
