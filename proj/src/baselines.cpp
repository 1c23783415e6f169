#include "gsac/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gsac {

std::string method_name(Method m)
{
    switch (m) {
    case Method::GSAC:
        return "GSAC";
    case Method::MTL:
        return "SAC-MTL";
    case Method::FT:
        return "SAC-FT";
    case Method::LFS:
        return "SAC-LFS";
    }
    return "?";
}

Method parse_method(const std::string& name)
{
    std::string u;
    for (char c : name)
        u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u.rfind("SAC-", 0) == 0 && u != "SAC-")
        u = u.substr(4);
    if (u == "GSAC")
        return Method::GSAC;
    if (u == "MTL")
        return Method::MTL;
    if (u == "FT")
        return Method::FT;
    if (u == "LFS")
        return Method::LFS;
    throw ConfigError("unknown method '" + name + "' (expected GSAC, SAC-MTL, SAC-FT or SAC-LFS)");
}

int nearest_source(const std::vector<double>& labels, double omega)
{
    if (labels.empty())
        throw ConfigError("no source domains to assign");
    int best = 0;
    for (int m = 1; m < static_cast<int>(labels.size()); ++m) {
        double d = std::abs(labels[m] - omega);
        double bd = std::abs(labels[best] - omega);
        if (d < bd || (d == bd && labels[m] < labels[best]))
            best = m;
    }
    return best;
}

std::vector<IterationSummary> episode_summaries(const std::vector<double>& returns)
{
    std::vector<IterationSummary> out;
    for (size_t e = 0; e < returns.size(); ++e) {
        IterationSummary s;
        s.k = static_cast<int>(e) + 1;
        s.discounted_return = returns[e];
        out.push_back(s);
    }
    return out;
}

namespace {

void check_problem(const FewShotProblem& p, bool need_sources)
{
    if (p.target == nullptr)
        throw ConfigError("few-shot problem has no target environment");
    if (need_sources && p.sources.empty())
        throw ConfigError("few-shot problem has no source domains");
    if (p.source_omegas.size() != p.sources.size())
        throw ConfigError("one label per source domain is required");
    if (p.eval_episodes < 0)
        throw ConfigError("evaluation window must be non-negative");
}

LearnerLayout raw_layout(const FewShotProblem& p, Conditioning cond, int num_sources)
{
    LayoutOptions lo;
    lo.kappa = p.kappa;
    lo.conditioning = cond;
    lo.use_acr = false;
    lo.num_sources = num_sources;
    lo.grid = p.grid;
    return make_layout(p.target->graph(), p.target->spaces(), p.target->omega_dims(), nullptr, lo);
}

std::vector<IterationSummary> relabel(std::vector<IterationSummary> logs)
{
    for (auto& s : logs)
        s.k += 1;
    return logs;
}

// On-policy actor-critic in the target starting from `init`; one logged entry per episode.
std::vector<IterationSummary> train_in_target(const FewShotProblem& p, const LearnerLayout& layout,
                                              const TrainingSettings& settings, int budget,
                                              const LocalizedPolicy& init, LocalizedPolicy& out, uint64_t seed)
{
    TrainingSettings s = settings;
    s.K = p.eval_episodes;
    s.update_budget = budget;
    std::vector<SourceDomain> target{{p.target, make_context(layout, nullptr, 0)}};
    auto res = run_meta_training(layout, target, s, adaptation_stream(seed), &init);
    out = std::move(res.policy);
    return relabel(std::move(res.logs));
}

} // namespace

MethodRun run_sac_mtl(const FewShotProblem& problem, const TrainingSettings& settings, uint64_t seed)
{
    check_problem(problem, true);
    MethodRun run;
    int M = static_cast<int>(problem.sources.size());
    run.layout = raw_layout(problem, Conditioning::SourceOneHot, M);
    std::vector<SourceDomain> src;
    for (int m = 0; m < M; ++m)
        src.push_back({problem.sources[m], make_context(run.layout, nullptr, m)});
    auto res = run_meta_training(run.layout, src, settings, derive_seed(seed, {kTagMeta}));
    run.policy = std::move(res.policy);
    run.training = std::move(res.logs);
    run.deployed_source = nearest_source(problem.source_omegas, problem.target_omega);
    auto ctx = make_context(run.layout, nullptr, run.deployed_source);
    run.adaptation = episode_summaries(evaluate_policy(*problem.target, run.layout, run.policy, ctx,
                                                       problem.eval_episodes, settings, adaptation_stream(seed)));
    return run;
}

MethodRun run_sac_ft(const FewShotProblem& problem, const TrainingSettings& settings, int fine_tune_budget,
                     uint64_t seed)
{
    check_problem(problem, true);
    MethodRun run;
    run.layout = raw_layout(problem, Conditioning::None, 1);
    std::vector<SourceDomain> src;
    for (const auto* env : problem.sources)
        src.push_back({env, make_context(run.layout, nullptr, 0)});
    auto res = run_meta_training(run.layout, src, settings, derive_seed(seed, {kTagMeta}));
    run.training = std::move(res.logs);
    int budget = fine_tune_budget < 0 ? problem.eval_episodes : fine_tune_budget;
    run.adaptation = train_in_target(problem, run.layout, settings, budget, res.policy, run.policy, seed);
    return run;
}

MethodRun run_sac_lfs(const FewShotProblem& problem, const TrainingSettings& settings, uint64_t seed)
{
    check_problem(problem, false);
    MethodRun run;
    run.layout = raw_layout(problem, Conditioning::None, 1);
    auto init = initial_policy(run.layout, settings);
    run.adaptation = train_in_target(problem, run.layout, settings, settings.K, init, run.policy, seed);
    return run;
}

MethodRun run_baseline(const BaselineSpec& spec, const FewShotProblem& problem, uint64_t seed)
{
    switch (spec.variant) {
    case Method::MTL:
        return run_sac_mtl(problem, spec.settings, seed);
    case Method::FT:
        return run_sac_ft(problem, spec.settings, spec.fine_tune_budget, seed);
    case Method::LFS:
        return run_sac_lfs(problem, spec.settings, seed);
    case Method::GSAC:
        break;
    }
    throw ConfigError("GSAC is not a baseline; use the harness pipeline");
}

} // namespace gsac
