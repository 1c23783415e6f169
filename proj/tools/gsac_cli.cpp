#include "gsac/harness.hpp"
#include "gsac/verify.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

using namespace gsac;

namespace {

ExperimentConfig base_config(const std::string& path)
{
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<uint64_t>& seeds, const std::string& out,
                     const std::string& method)
{
    if (!seeds.empty())
        cfg.seeds = seeds;
    if (!out.empty())
        cfg.out_dir = out;
    if (!method.empty())
        cfg.method = parse_method(method);
    validate_config(cfg);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"GSAC: causal mask recovery, compact representations and meta actor-critic for networked agents"};
    app.require_subcommand(1);

    std::string config_path, out, method, level = "fast";
    std::vector<uint64_t> seeds;
    std::vector<std::string> sweep_configs;
    std::vector<int> grids;
    std::vector<double> targets;
    std::vector<std::string> methods;
    int parallelism = 1;

    auto* run = app.add_subcommand("run", "run one experiment per configured seed");
    run->add_option("--config", config_path, "INI config file");
    run->add_option("--seed", seeds, "seed override (repeatable)");
    run->add_option("--out", out, "output directory");
    run->add_option("--method", method, "GSAC, SAC-MTL, SAC-FT or SAC-LFS");

    auto* sweep = app.add_subcommand("sweep", "run a grid of experiments and write summary.csv");
    sweep->add_option("--config", sweep_configs, "INI config file (repeatable)");
    sweep->add_option("--seed", seeds, "seed override (repeatable)");
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--method", methods, "methods to sweep (repeatable)");
    sweep->add_option("--grid", grids, "grid sizes to sweep (repeatable)");
    sweep->add_option("--target", targets, "target omegas to sweep (repeatable)");
    sweep->add_option("--parallelism", parallelism, "concurrent runs")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "run the oracle verification suite");
    verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

    auto* insp = app.add_subcommand("inspect", "print ACR maps and table sizes without training");
    insp->add_option("--config", config_path, "INI config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = base_config(config_path);
            apply_overrides(cfg, seeds, out, method);
            bool ok = true;
            for (const auto& m : run_experiment(cfg)) {
                std::cout << (m.ok ? "ok     " : "FAILED ") << m.run_dir << (m.ok ? "" : ": " + m.error) << '\n';
                ok = ok && m.ok;
            }
            return ok ? 0 : 1;
        }
        if (*sweep) {
            if (sweep_configs.empty())
                sweep_configs.push_back("");
            std::vector<Method> ms;
            for (const auto& m : methods)
                ms.push_back(parse_method(m));
            std::vector<ExperimentConfig> all;
            std::string root;
            for (const auto& path : sweep_configs) {
                auto cfg = base_config(path);
                apply_overrides(cfg, seeds, out, "");
                if (root.empty())
                    root = cfg.out_dir;
                auto expanded = expand_sweep(cfg, grids, targets, ms);
                all.insert(all.end(), expanded.begin(), expanded.end());
            }
            auto manifests = run_sweep(all, parallelism, root);
            int failed = 0;
            for (const auto& m : manifests)
                failed += m.ok ? 0 : 1;
            std::cout << manifests.size() << " runs, " << failed << " failed; summary in " << root
                      << "/summary.csv\n";
            return failed == 0 ? 0 : 1;
        }
        if (*verify) {
            auto report = verify_suite(level == "full" ? VerifyLevel::Full : VerifyLevel::Fast);
            print_report(std::cout, report);
            return report_passed(report) ? 0 : 1;
        }
        if (*insp) {
            inspect(base_config(config_path), std::cout);
            return 0;
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
