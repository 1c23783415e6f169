#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsac/harness.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace gsac;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("gsac_test_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

uint32_t crc32_reference(const std::string& s)
{
    uint32_t c = 0xFFFFFFFFu;
    for (unsigned char b : s) {
        c ^= b;
        for (int k = 0; k < 8; ++k)
            c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
    }
    return ~c;
}

ExperimentConfig tiny(Method m, const fs::path& out)
{
    ExperimentConfig c;
    c.grid_size = 1;
    c.method = m;
    c.K = 10;
    c.T = 5;
    c.T_e = 10;
    c.T_a = 10;
    c.eval_episodes = 40;
    c.seeds = {1};
    c.out_dir = out.string();
    return c;
}

MetricsRow sample_row()
{
    MetricsRow r;
    r.method = "GSAC";
    r.phase = "adapt";
    r.grid_size = 3;
    r.omega_target = 0.65;
    r.seed = 18446744073709551615ull;
    r.k_or_episode = 7;
    r.domain_index = 3;
    r.return_discounted = 0.1 + 0.2;
    r.critic_delta = 1.0 / 3.0;
    r.grad_norm = 5e-324;
    r.wall_ms = 0.0;
    return r;
}

} // namespace

TEST_CASE("config defaults and parsing")
{
    auto c = parse_config("");
    CHECK(c.env_kind == "wireless");
    CHECK(c.grid_size == 3);
    CHECK(c.K == 50000);
    CHECK(c.K == default_iterations(3));
    CHECK(c.gamma == 0.95);
    CHECK(c.method == Method::GSAC);

    auto d = parse_config("[env]\ngrid_size = 4\ntarget_omega = 0.3\n[algo]\nmethod = SAC-FT\nT_a = 5\n"
                          "critic_schedule = decaying\n[run]\nseeds = 3,4,5\n");
    CHECK(d.grid_size == 4);
    CHECK(d.K == default_iterations(4));
    CHECK(d.target_omega == 0.3);
    CHECK(d.method == Method::FT);
    CHECK(d.T_a == 5);
    CHECK(d.critic_decaying);
    CHECK(d.seeds == std::vector<uint64_t>{3, 4, 5});
    CHECK(parse_config("[env]\ngrid_size = 4\n[algo]\nK = 7\n").K == 7);

    CHECK_THROWS_AS(parse_config("[envv]\ngrid_size = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[env]\ngridsize = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[env]\ngrid_size = four\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[algo]\nacr_free = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[algo]\nmethod = PPO\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/gsac.ini"), ConfigError);
}

TEST_CASE("iteration defaults grow with the grid")
{
    CHECK(default_iterations(1) == 50000);
    CHECK(default_iterations(3) == 50000);
    CHECK(default_iterations(4) == 75000);
    CHECK(default_iterations(5) == 100000);
}

TEST_CASE("canonical INI round trip and hash")
{
    ExperimentConfig c;
    c.env_kind = "traffic";
    c.grid_size = 2;
    c.omega_grid = {0.1, 0.35, 0.9};
    c.source_omegas = {0.1, 0.9};
    c.target_omega = 0.123456789;
    c.method = Method::LFS;
    c.kappa = 2;
    c.K = 1234;
    c.actor_decaying = true;
    c.eta = 0.003;
    c.acr_free = true;
    c.warm_start = true;
    c.fine_tune_budget = 17;
    c.seeds = {9, 10};
    c.out_dir = "elsewhere";
    c.log_wall_time = true;
    auto text = to_ini(c);
    auto back = parse_config(text);
    CHECK(to_ini(back) == text);
    CHECK(back.target_omega == c.target_omega);
    CHECK(back.omega_grid == c.omega_grid);
    CHECK(back.seeds == c.seeds);
    CHECK(back.method == Method::LFS);
    CHECK(back.acr_free);
    CHECK(back.fine_tune_budget == 17);

    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", crc32_reference(text));
    CHECK(config_hash(c) == hex);
    CHECK(crc32_reference("123456789") == 0xCBF43926u);

    auto other = c;
    other.eta = 0.0031;
    CHECK(config_hash(other) != config_hash(c));
    other = c;
    other.seeds = {9};
    CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("validation names the offending field")
{
    auto expect_field = [](ExperimentConfig c, const std::string& field) {
        try {
            validate_config(c);
            FAIL("accepted an invalid config: " << field);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    ExperimentConfig base;
    CHECK_NOTHROW(validate_config(base));
    auto c = base;
    c.T_a = 0;
    expect_field(c, "T_a");
    c = base;
    c.gamma = 1.0;
    expect_field(c, "gamma");
    c = base;
    c.omega_grid = {0.5, 0.2};
    expect_field(c, "omega_grid");
    c = base;
    c.env_kind = "maze";
    expect_field(c, "kind");
    c = base;
    c.seeds.clear();
    expect_field(c, "seeds");
    c = base;
    c.eval_episodes = 0;
    expect_field(c, "eval_episodes");
}

TEST_CASE("metrics CSV schema")
{
    const std::vector<std::string> expected{"method",       "phase",        "grid_size",         "omega_target",
                                            "seed",         "k_or_episode", "domain_index",      "return_discounted",
                                            "critic_delta", "grad_norm",    "wall_ms"};
    CHECK(metrics_header() == expected);

    std::ostringstream os;
    write_metrics_csv(os, {sample_row()});
    auto text = os.str();
    CHECK(text.substr(0, text.find('\n')) ==
          "method,phase,grid_size,omega_target,seed,k_or_episode,domain_index,return_discounted,critic_delta,"
          "grad_norm,wall_ms");
    std::istringstream is(text);
    auto rows = read_metrics_csv(is);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];
    auto s = sample_row();
    CHECK(r.method == s.method);
    CHECK(r.phase == s.phase);
    CHECK(r.grid_size == s.grid_size);
    CHECK(r.omega_target == s.omega_target);
    CHECK(r.seed == s.seed);
    CHECK(r.k_or_episode == s.k_or_episode);
    CHECK(r.domain_index == s.domain_index);
    CHECK(r.return_discounted == s.return_discounted);
    CHECK(r.critic_delta == s.critic_delta);
    CHECK(r.grad_norm == s.grad_norm);

    auto bad = sample_row();
    bad.return_discounted = std::numeric_limits<double>::quiet_NaN();
    std::ostringstream sink;
    CHECK_THROWS(write_metrics_csv(sink, {bad}));
    bad = sample_row();
    bad.grad_norm = std::numeric_limits<double>::infinity();
    CHECK_THROWS(write_metrics_csv(sink, {bad}));

    std::istringstream empty("");
    CHECK_THROWS(read_metrics_csv(empty));
    std::istringstream wrong("method,phase\nGSAC,adapt\n");
    CHECK_THROWS(read_metrics_csv(wrong));
    std::istringstream short_row(text.substr(0, text.find('\n') + 1) + "GSAC,adapt,3\n");
    CHECK_THROWS(read_metrics_csv(short_row));
    std::string garbled = text;
    garbled.replace(garbled.rfind(",0\n"), 3, ",x\n");
    std::istringstream bad_cell(garbled);
    CHECK_THROWS(read_metrics_csv(bad_cell));
}

TEST_CASE("summary windows")
{
    ExperimentConfig c;
    c.method = Method::FT;
    std::vector<MetricsRow> rows;
    auto meta = sample_row();
    meta.phase = "meta";
    meta.return_discounted = 1000.0;
    rows.push_back(meta);
    for (int e = 1; e <= 100; ++e) {
        auto r = sample_row();
        r.k_or_episode = e;
        r.return_discounted = e;
        rows.push_back(r);
    }
    auto s = summarize(c, 4, rows);
    CHECK(s.method == "SAC-FT");
    CHECK(s.seed == 4);
    CHECK(s.ok);
    CHECK(s.early_mean == doctest::Approx(15.5).epsilon(1e-12));
    CHECK(s.final_mean == doctest::Approx(85.5).epsilon(1e-12));

    std::vector<MetricsRow> few(rows.begin(), rows.begin() + 11);
    auto f = summarize(c, 4, few);
    CHECK(f.early_mean == doctest::Approx(5.5));
    CHECK(f.final_mean == doctest::Approx(5.5));

    auto none = summarize(c, 4, {meta});
    CHECK_FALSE(none.ok);

    std::ostringstream os;
    write_summary_csv(os, {s, none});
    std::string text = os.str();
    std::istringstream is(text);
    std::string header, first, second;
    std::getline(is, header);
    std::getline(is, first);
    std::getline(is, second);
    CHECK(header == "method,grid_size,omega_target,seed,early_mean,final_mean,ok");
    CHECK(first == "SAC-FT,3,0.65000000000000002,4,15.5,85.5,1");
    CHECK(second == "SAC-FT,3,0.65000000000000002,4,,,0");
}

TEST_CASE("sweep expansion")
{
    ExperimentConfig base;
    base.seeds = {1, 2, 3, 4, 5};
    std::vector<Method> all{Method::GSAC, Method::MTL, Method::FT, Method::LFS};
    auto grids = expand_sweep(base, {3, 4, 5}, {}, all);
    CHECK(grids.size() == 12);
    size_t runs = 0;
    for (const auto& c : grids)
        runs += c.seeds.size();
    CHECK(runs == 60);
    CHECK(grids.back().grid_size == 5);
    CHECK(grids.back().K == default_iterations(5));
    CHECK(grids.back().method == Method::LFS);

    auto targets = expand_sweep(base, {}, {0.3, 0.65, 0.9}, all);
    CHECK(targets.size() == 12);
    CHECK(targets[4].target_omega == 0.65);
    CHECK(targets[4].grid_size == 3);

    auto fixed = base;
    fixed.K = 99;
    CHECK(expand_sweep(fixed, {4}, {}, {}).front().K == 99);
    CHECK(expand_sweep(base, {}, {}, {}).size() == 1);
    CHECK_THROWS_AS(expand_sweep(base, {0}, {}, {}), ConfigError);

    auto dir = fresh_dir("empty_sweep");
    CHECK(run_sweep({}, 2, dir.string()).empty());
    CHECK_FALSE(fs::exists(dir / "summary.csv"));
}

TEST_CASE("run_experiment writes a manifest and metrics")
{
    spdlog::set_level(spdlog::level::err);
    auto dir = fresh_dir("gsac");
    auto cfg = tiny(Method::GSAC, dir);
    auto man = run_experiment(cfg, 1);
    REQUIRE_MESSAGE(man.ok, man.error);
    CHECK(man.config_hash == config_hash(cfg));
    CHECK(man.method == "GSAC");
    CHECK(man.code_version == kCodeVersion);
    std::vector<std::string> names;
    for (const auto& p : man.phases) {
        names.push_back(p.name);
        CHECK(p.ms == 0.0);
    }
    CHECK(names == std::vector<std::string>{"causal_recovery", "acr", "meta_training", "adaptation"});
    for (const char* a : {"config", "masks", "omega_hat", "acr_maps", "policy", "metrics"}) {
        REQUIRE(man.artifacts.count(a) == 1);
        CHECK(fs::exists(man.artifacts.at(a)));
    }

    auto j = nlohmann::json::parse(slurp(fs::path(man.run_dir) / "manifest.json"));
    CHECK(j.at("ok").get<bool>());
    CHECK(j.at("config_hash").get<std::string>() == man.config_hash);
    CHECK(j.at("phases").size() == 4);
    CHECK(parse_config(slurp(man.artifacts.at("config"))).K == cfg.K);

    std::ifstream in(man.artifacts.at("metrics"));
    auto rows = read_metrics_csv(in);
    size_t meta = 0, adapt = 0;
    for (const auto& r : rows) {
        meta += r.phase == "meta";
        adapt += r.phase == "adapt";
        CHECK(r.wall_ms == 0.0);
        CHECK(r.return_discounted >= 0.0);
        CHECK(r.return_discounted <= 1.0 / (1.0 - cfg.gamma));
    }
    CHECK(meta == static_cast<size_t>(cfg.K));
    CHECK(adapt == static_cast<size_t>(cfg.eval_episodes));

    std::string first = slurp(man.artifacts.at("metrics"));
    auto again = run_experiment(cfg, 1);
    REQUIRE(again.ok);
    CHECK(slurp(again.artifacts.at("metrics")) == first);
    CHECK(slurp(fs::path(again.run_dir) / "manifest.json") == slurp(fs::path(man.run_dir) / "manifest.json"));

    auto other_seed = run_experiment(cfg, 2);
    REQUIRE(other_seed.ok);
    CHECK(other_seed.run_dir != man.run_dir);
    CHECK(slurp(other_seed.artifacts.at("metrics")) != first);
}

TEST_CASE("baseline runs record their phases")
{
    spdlog::set_level(spdlog::level::err);
    auto dir = fresh_dir("baselines");
    auto lfs = run_experiment(tiny(Method::LFS, dir), 1);
    REQUIRE(lfs.ok);
    REQUIRE(lfs.phases.size() == 1);
    CHECK(lfs.phases[0].name == "adaptation");
    CHECK(lfs.artifacts.count("masks") == 0);

    auto mtl = run_experiment(tiny(Method::MTL, dir), 1);
    REQUIRE(mtl.ok);
    REQUIRE(mtl.phases.size() == 1);
    CHECK(mtl.phases[0].name == "meta_training+adaptation");

    auto timed = tiny(Method::LFS, fresh_dir("timed"));
    timed.log_wall_time = true;
    auto t = run_experiment(timed, 1);
    REQUIRE(t.ok);
    CHECK(t.phases[0].ms > 0.0);
}

TEST_CASE("failures are recorded in the manifest")
{
    spdlog::set_level(spdlog::level::critical);
    auto dir = fresh_dir("failing");
    auto cfg = tiny(Method::GSAC, dir);
    cfg.T_a = 0;
    RunManifest man;
    CHECK_NOTHROW(man = run_experiment(cfg, 1));
    CHECK_FALSE(man.ok);
    CHECK(man.error.find("T_a") != std::string::npos);
    auto j = nlohmann::json::parse(slurp(fs::path(man.run_dir) / "manifest.json"));
    CHECK_FALSE(j.at("ok").get<bool>());
}

TEST_CASE("sweep writes a summary row per run")
{
    spdlog::set_level(spdlog::level::err);
    auto dir = fresh_dir("sweep");
    auto base = tiny(Method::LFS, dir / "runs");
    base.seeds = {1, 2};
    auto configs = expand_sweep(base, {}, {0.3, 0.65}, {Method::LFS, Method::FT});
    auto mans = run_sweep(configs, 2, dir.string());
    REQUIRE(mans.size() == 8);
    for (const auto& m : mans)
        CHECK(m.ok);
    std::istringstream is(slurp(dir / "summary.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(is, line))
        ++lines;
    CHECK(lines == 9);

    auto serial_dir = fresh_dir("sweep_serial");
    auto serial_base = base;
    serial_base.out_dir = (serial_dir / "runs").string();
    auto serial = expand_sweep(serial_base, {}, {0.3, 0.65}, {Method::LFS, Method::FT});
    run_sweep(serial, 1, serial_dir.string());
    CHECK(slurp(serial_dir / "summary.csv") == slurp(dir / "summary.csv"));
}
