#include "gsac/harness.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace gsac {

namespace fs = std::filesystem;
using nlohmann::json;

Domains build_domains(const ExperimentConfig& cfg)
{
    Domains d;
    auto make = [&](double w) -> std::unique_ptr<Environment> {
        if (cfg.env_kind == "wireless")
            return build_wireless(cfg.grid_size, w, cfg.deadline, cfg.env_seed);
        TrafficOptions opts;
        opts.queue_cap = cfg.queue_cap;
        return build_traffic(cfg.grid_size, w, opts);
    };
    for (double w : cfg.source_omegas)
        d.sources.push_back(make(w));
    d.target = make(cfg.target_omega);
    return d;
}

FewShotProblem few_shot_problem(const ExperimentConfig& cfg, const Domains& d)
{
    FewShotProblem p;
    for (const auto& s : d.sources)
        p.sources.push_back(s.get());
    p.source_omegas = cfg.source_omegas;
    p.target = d.target.get();
    p.target_omega = cfg.target_omega;
    p.kappa = cfg.kappa;
    p.grid = OmegaGrid(cfg.omega_grid);
    p.eval_episodes = cfg.eval_episodes;
    return p;
}

namespace {

class PhaseTimer {
public:
    PhaseTimer(MethodOutcome& out, std::string name) : out_(out), name_(std::move(name)) {}
    ~PhaseTimer()
    {
        out_.phases.emplace_back(
            name_, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count());
    }

private:
    MethodOutcome& out_;
    std::string name_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void run_gsac(const ExperimentConfig& cfg, const Domains& d, const FewShotProblem& p, uint64_t seed,
              MethodOutcome& out)
{
    auto settings = training_settings(cfg);
    out.gsac = std::make_unique<GsacArtifacts>();
    auto& art = *out.gsac;
    const Environment& ref = *d.target;
    int M = static_cast<int>(d.sources.size());
    {
        PhaseTimer timer(out, "causal_recovery");
        std::vector<std::vector<Trajectory>> per_source;
        std::vector<Trajectory> pooled;
        for (int m = 0; m < M; ++m) {
            per_source.push_back(collect_trajectories(*d.sources[m], cfg.T_e, cfg.T,
                                                      derive_seed(seed, {kTagPhase1, static_cast<uint64_t>(m)}), m));
            pooled.insert(pooled.end(), per_source.back().begin(), per_source.back().end());
        }
        art.recovery = recover_causal_masks(pooled, ref.graph(), ref.spaces(), ref.omega_dims(), cfg.lambda);
        for (int m = 0; m < M; ++m)
            art.source_estimates.push_back(
                estimate_domain_factor(per_source[m], art.recovery.masks, *d.sources[m], p.grid));
    }
    {
        PhaseTimer timer(out, "acr");
        LayoutOptions lo;
        lo.kappa = cfg.kappa;
        lo.conditioning = Conditioning::DomainFactor;
        lo.use_acr = !cfg.acr_free;
        lo.num_sources = M;
        lo.grid = p.grid;
        out.run.layout = make_layout(ref.graph(), ref.spaces(), ref.omega_dims(), &art.recovery.masks, lo);
    }
    {
        PhaseTimer timer(out, "meta_training");
        std::vector<SourceDomain> src;
        for (int m = 0; m < M; ++m) {
            auto f = art.source_estimates[m].factor();
            src.push_back({d.sources[m].get(), make_context(out.run.layout, &f, m)});
        }
        auto res = run_meta_training(out.run.layout, src, settings, derive_seed(seed, {kTagMeta}));
        out.run.policy = std::move(res.policy);
        out.run.training = std::move(res.logs);
    }
    {
        PhaseTimer timer(out, "adaptation");
        std::vector<std::vector<double>> source_values(ref.num_agents());
        for (const auto& est : art.source_estimates)
            for (int i = 0; i < ref.num_agents(); ++i)
                for (int idx : est.index[i]) {
                    double v = p.grid.value(idx);
                    auto& sv = source_values[i];
                    if (std::find(sv.begin(), sv.end(), v) == sv.end())
                        sv.push_back(v);
                }
        art.adaptation = adapt_and_deploy(out.run.layout, out.run.policy, *d.target, art.recovery.masks, cfg.T_a,
                                          source_values, cfg.eval_episodes, settings, seed);
        out.run.adaptation = episode_summaries(art.adaptation.returns);
    }
}

void run_method_into(const ExperimentConfig& cfg, uint64_t seed, MethodOutcome& out)
{
    validate_config(cfg);
    Domains d = build_domains(cfg);
    FewShotProblem p = few_shot_problem(cfg, d);
    auto settings = training_settings(cfg);
    switch (cfg.method) {
    case Method::GSAC:
        run_gsac(cfg, d, p, seed, out);
        return;
    case Method::MTL: {
        PhaseTimer timer(out, "meta_training+adaptation");
        out.run = run_sac_mtl(p, settings, seed);
        return;
    }
    case Method::FT: {
        PhaseTimer timer(out, "meta_training+adaptation");
        out.run = run_sac_ft(p, settings, cfg.fine_tune_budget, seed);
        return;
    }
    case Method::LFS: {
        PhaseTimer timer(out, "adaptation");
        out.run = run_sac_lfs(p, settings, seed);
        return;
    }
    }
}

json components_json(const std::vector<Component>& comps)
{
    json a = json::array();
    for (const auto& c : comps)
        a.push_back({c.agent, c.comp});
    return a;
}

json masks_json(const CausalMasks& m)
{
    json agents = json::array();
    for (int i = 0; i < m.num_agents(); ++i)
        agents.push_back({{"agent", i},
                          {"s_to_s", m.s_to_s[i]},
                          {"a_to_s", m.a_to_s[i]},
                          {"w_to_s", m.w_to_s[i]},
                          {"s_to_r", m.s_to_r[i]},
                          {"a_to_r", m.a_to_r[i]},
                          {"w_to_r", m.w_to_r[i]}});
    return agents;
}

json estimate_json(const DomainEstimate& e)
{
    return {{"index", e.index},
            {"values", e.values()},
            {"nll", e.nll},
            {"trajectories", e.trajectories},
            {"transitions", e.transitions}};
}

json layout_json(const LearnerLayout& L)
{
    json agents = json::array();
    for (size_t i = 0; i < L.agents.size(); ++i) {
        const auto& al = L.agents[i];
        agents.push_back({{"agent", i},
                          {"critic_state", components_json(al.critic_state)},
                          {"critic_agents", al.critic_agents},
                          {"critic_domain", components_json(al.critic_domain)},
                          {"policy_state", components_json(al.policy_state)},
                          {"policy_domain", components_json(al.policy_domain)},
                          {"critic_key_space", al.critic_key_space()},
                          {"policy_key_space", al.policy_key_space()}});
    }
    return {{"kappa", L.kappa}, {"use_acr", L.use_acr}, {"agents", agents}};
}

json policy_json(const LocalizedPolicy& pol)
{
    json agents = json::array();
    for (int i = 0; i < pol.num_agents(); ++i) {
        std::map<uint64_t, std::vector<double>> sorted(pol.table(i).begin(), pol.table(i).end());
        json rows = json::array();
        for (const auto& [key, logits] : sorted)
            rows.push_back({{"key", key}, {"logits", logits}});
        agents.push_back({{"agent", i}, {"rows", rows}});
    }
    return {{"tau", pol.tau()}, {"theta_max", pol.theta_max()}, {"agents", agents}};
}

void write_atomic(const fs::path& path, const std::string& text)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt_double(double v)
{
    if (!std::isfinite(v))
        throw std::runtime_error("non-finite value in CSV output");
    return fmt::format("{:.17g}", v);
}

template <typename T>
T parse_cell(const std::string& cell, const std::string& line)
{
    T v{};
    auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || end != cell.data() + cell.size())
        throw std::runtime_error("metrics CSV has an unparseable cell '" + cell + "': " + line);
    return v;
}

} // namespace

MethodOutcome run_method(const ExperimentConfig& cfg, uint64_t seed)
{
    MethodOutcome out;
    run_method_into(cfg, seed, out);
    return out;
}

const std::vector<std::string>& metrics_header()
{
    static const std::vector<std::string> h{"method",       "phase",     "grid_size",         "omega_target",
                                            "seed",         "k_or_episode", "domain_index",  "return_discounted",
                                            "critic_delta", "grad_norm", "wall_ms"};
    return h;
}

std::vector<MetricsRow> metrics_rows(const ExperimentConfig& cfg, uint64_t seed, const MethodOutcome& out)
{
    std::vector<MetricsRow> rows;
    auto base = [&](const std::string& phase, const IterationSummary& s) {
        MetricsRow r;
        r.method = method_name(cfg.method);
        r.phase = phase;
        r.grid_size = cfg.grid_size;
        r.omega_target = cfg.target_omega;
        r.seed = seed;
        r.k_or_episode = s.k;
        r.domain_index = s.domain;
        r.return_discounted = s.discounted_return;
        r.critic_delta = s.critic_delta;
        r.grad_norm = s.grad_norm;
        r.wall_ms = cfg.log_wall_time ? s.wall_ms : 0.0;
        return r;
    };
    for (const auto& s : out.run.training)
        rows.push_back(base("meta", s));
    int target_index = static_cast<int>(cfg.source_omegas.size());
    for (const auto& s : out.run.adaptation) {
        auto r = base("adapt", s);
        r.domain_index = target_index;
        rows.push_back(r);
    }
    return rows;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows)
{
    const auto& h = metrics_header();
    for (size_t k = 0; k < h.size(); ++k)
        os << (k ? "," : "") << h[k];
    os << '\n';
    for (const auto& r : rows)
        os << r.method << ',' << r.phase << ',' << r.grid_size << ',' << fmt_double(r.omega_target) << ',' << r.seed
           << ',' << r.k_or_episode << ',' << r.domain_index << ',' << fmt_double(r.return_discounted) << ','
           << fmt_double(r.critic_delta) << ',' << fmt_double(r.grad_norm) << ',' << fmt_double(r.wall_ms) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("metrics CSV is empty");
    std::string expected;
    for (size_t k = 0; k < metrics_header().size(); ++k)
        expected += (k ? "," : "") + metrics_header()[k];
    if (line != expected)
        throw std::runtime_error("metrics CSV header mismatch: " + line);
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != metrics_header().size())
            throw std::runtime_error("metrics CSV row has wrong column count: " + line);
        MetricsRow r;
        r.method = f[0];
        r.phase = f[1];
        r.grid_size = parse_cell<int>(f[2], line);
        r.omega_target = parse_cell<double>(f[3], line);
        r.seed = parse_cell<uint64_t>(f[4], line);
        r.k_or_episode = parse_cell<int>(f[5], line);
        r.domain_index = parse_cell<int>(f[6], line);
        r.return_discounted = parse_cell<double>(f[7], line);
        r.critic_delta = parse_cell<double>(f[8], line);
        r.grad_norm = parse_cell<double>(f[9], line);
        r.wall_ms = parse_cell<double>(f[10], line);
        rows.push_back(r);
    }
    return rows;
}

std::string run_directory_name(const ExperimentConfig& cfg, uint64_t seed)
{
    return fmt::format("{}_{}_g{}_w{}_s{}", method_name(cfg.method), cfg.env_kind, cfg.grid_size, cfg.target_omega,
                       seed);
}

RunManifest run_experiment(const ExperimentConfig& cfg, uint64_t seed)
{
    RunManifest man;
    man.seed = seed;
    man.method = method_name(cfg.method);
    fs::path dir = fs::path(cfg.out_dir) / run_directory_name(cfg, seed);
    man.run_dir = dir.string();
    MethodOutcome out;
    try {
        man.config_hash = config_hash(cfg);
        fs::create_directories(dir);
        write_atomic(dir / "config.ini", to_ini(cfg));
        man.artifacts["config"] = (dir / "config.ini").string();
        try {
            run_method_into(cfg, seed, out);
        } catch (const std::exception& e) {
            man.ok = false;
            man.error = e.what();
        }
        for (const auto& [name, ms] : out.phases)
            man.phases.push_back({name, cfg.log_wall_time ? ms : 0.0});
        if (out.gsac) {
            const auto& art = *out.gsac;
            if (!art.source_estimates.empty()) {
                write_atomic(dir / "masks.json",
                             json{{"masks", masks_json(art.recovery.masks)},
                                  {"insufficient_data", art.recovery.insufficient_data},
                                  {"samples", art.recovery.samples}}
                                 .dump(1));
                man.artifacts["masks"] = (dir / "masks.json").string();
                json est = json::array();
                for (const auto& e : art.source_estimates)
                    est.push_back(estimate_json(e));
                json omega{{"grid", cfg.omega_grid}, {"sources", est}};
                if (!art.adaptation.returns.empty()) {
                    omega["target"] = estimate_json(art.adaptation.estimate);
                    omega["target_snapped_index"] = art.adaptation.snapped.index;
                    omega["target_snapped_agents"] = art.adaptation.snapped_agents;
                }
                write_atomic(dir / "omega_hat.json", omega.dump(1));
                man.artifacts["omega_hat"] = (dir / "omega_hat.json").string();
            }
        }
        if (!out.run.layout.agents.empty()) {
            write_atomic(dir / "acr_maps.json", layout_json(out.run.layout).dump(1));
            man.artifacts["acr_maps"] = (dir / "acr_maps.json").string();
        }
        if (man.ok) {
            write_atomic(dir / "policy.json", policy_json(out.run.policy).dump(1));
            man.artifacts["policy"] = (dir / "policy.json").string();
        }
        std::ostringstream csv;
        write_metrics_csv(csv, metrics_rows(cfg, seed, out));
        write_atomic(dir / "metrics.csv", csv.str());
        man.artifacts["metrics"] = (dir / "metrics.csv").string();
    } catch (const std::exception& e) {
        man.ok = false;
        if (man.error.empty())
            man.error = e.what();
    }
    json phases = json::array();
    for (const auto& p : man.phases)
        phases.push_back({{"name", p.name}, {"ms", p.ms}});
    json j{{"config_hash", man.config_hash}, {"seed", man.seed},        {"method", man.method},
           {"run_dir", man.run_dir},         {"phases", phases},        {"artifacts", man.artifacts},
           {"code_version", man.code_version}, {"ok", man.ok},          {"error", man.error}};
    try {
        fs::create_directories(dir);
        write_atomic(dir / "manifest.json", j.dump(1));
    } catch (const std::exception& e) {
        spdlog::error("cannot write manifest for {}: {}", man.run_dir, e.what());
        man.ok = false;
    }
    if (!man.ok)
        spdlog::error("run {} failed: {}", man.run_dir, man.error);
    return man;
}

std::vector<RunManifest> run_experiment(const ExperimentConfig& cfg)
{
    std::vector<RunManifest> out;
    for (uint64_t s : cfg.seeds)
        out.push_back(run_experiment(cfg, s));
    return out;
}

SummaryRow summarize(const ExperimentConfig& cfg, uint64_t seed, const std::vector<MetricsRow>& rows)
{
    SummaryRow s;
    s.method = method_name(cfg.method);
    s.grid_size = cfg.grid_size;
    s.omega_target = cfg.target_omega;
    s.seed = seed;
    std::vector<double> adapt;
    for (const auto& r : rows)
        if (r.phase == "adapt")
            adapt.push_back(r.return_discounted);
    size_t early = std::min<size_t>(kEarlyWindow, adapt.size());
    s.early_mean = mean_of({adapt.begin(), adapt.begin() + static_cast<std::ptrdiff_t>(early)});
    s.final_mean = mean_of({adapt.end() - static_cast<std::ptrdiff_t>(early), adapt.end()});
    s.ok = !adapt.empty();
    return s;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base, const std::vector<int>& grids,
                                           const std::vector<double>& targets, const std::vector<Method>& methods)
{
    std::vector<int> gs = grids.empty() ? std::vector<int>{base.grid_size} : grids;
    std::vector<double> ts = targets.empty() ? std::vector<double>{base.target_omega} : targets;
    std::vector<Method> ms = methods.empty() ? std::vector<Method>{base.method} : methods;
    std::vector<ExperimentConfig> out;
    for (int g : gs)
        for (double t : ts)
            for (Method m : ms) {
                ExperimentConfig c = base;
                if (c.grid_size != g) {
                    bool default_k = c.K == default_iterations(c.grid_size);
                    c.grid_size = g;
                    if (default_k)
                        c.K = default_iterations(g);
                }
                c.target_omega = t;
                c.method = m;
                validate_config(c);
                out.push_back(c);
            }
    return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows)
{
    os << "method,grid_size,omega_target,seed,early_mean,final_mean,ok\n";
    for (const auto& r : rows)
        os << r.method << ',' << r.grid_size << ',' << fmt_double(r.omega_target) << ',' << r.seed << ','
           << (r.ok ? fmt_double(r.early_mean) : "") << ',' << (r.ok ? fmt_double(r.final_mean) : "") << ','
           << (r.ok ? 1 : 0) << '\n';
}

std::vector<RunManifest> run_sweep(const std::vector<ExperimentConfig>& configs, int parallelism,
                                   const std::string& summary_dir)
{
    std::vector<std::pair<const ExperimentConfig*, uint64_t>> jobs;
    for (const auto& c : configs)
        for (uint64_t s : c.seeds)
            jobs.emplace_back(&c, s);
    std::vector<RunManifest> manifests(jobs.size());
    std::vector<SummaryRow> summary(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            const auto& [cfg, seed] = jobs[j];
            manifests[j] = run_experiment(*cfg, seed);
            summary[j] = {method_name(cfg->method), cfg->grid_size, cfg->target_omega, seed, 0.0, 0.0, false};
            if (manifests[j].ok) {
                try {
                    std::ifstream in(manifests[j].artifacts.at("metrics"));
                    summary[j] = summarize(*cfg, seed, read_metrics_csv(in));
                } catch (const std::exception& e) {
                    spdlog::error("cannot summarize {}: {}", manifests[j].run_dir, e.what());
                }
            }
        }
    };
    int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (!jobs.empty()) {
        fs::create_directories(summary_dir);
        std::ostringstream os;
        write_summary_csv(os, summary);
        write_atomic(fs::path(summary_dir) / "summary.csv", os.str());
    }
    return manifests;
}

void inspect(const ExperimentConfig& cfg, std::ostream& os)
{
    validate_config(cfg);
    Domains d = build_domains(cfg);
    const Environment& env = *d.target;
    LayoutOptions lo;
    lo.kappa = cfg.kappa;
    lo.conditioning = Conditioning::DomainFactor;
    lo.num_sources = static_cast<int>(cfg.source_omegas.size());
    lo.grid = OmegaGrid(cfg.omega_grid);
    lo.use_acr = true;
    auto acr = make_layout(env.graph(), env.spaces(), env.omega_dims(), &env.masks(), lo);
    lo.use_acr = false;
    auto raw = make_layout(env.graph(), env.spaces(), env.omega_dims(), nullptr, lo);
    os << fmt::format("{} grid {}: {} agents, kappa {}\n", cfg.env_kind, cfg.grid_size, env.num_agents(), cfg.kappa);
    os << "agent |N_i| policy_raw policy_acr critic_raw critic_acr policy_keys critic_keys\n";
    for (int i = 0; i < env.num_agents(); ++i) {
        const auto& a = acr.agents[i];
        const auto& r = raw.agents[i];
        os << fmt::format("{:5} {:5} {:10} {:10} {:10} {:10} {:11} {:11}\n", i, env.graph().neighbors(i).size(),
                          r.policy_state.size(), a.policy_state.size(), r.critic_state.size(),
                          a.critic_state.size(), a.policy_key_space(), a.critic_key_space());
    }
    for (int i = 0; i < env.num_agents(); ++i) {
        os << "agent " << i << " policy ACR:";
        for (const auto& c : acr.agents[i].policy_state)
            os << " s" << c.agent << "." << c.comp;
        os << " | domain ACR:";
        for (const auto& c : acr.agents[i].policy_domain)
            os << " w" << c.agent << "." << c.comp;
        os << '\n';
    }
}

} // namespace gsac
